//! The `igusa` command line: single computations (`count`, `zeta`, `expsum`)
//! and verification harnesses over a polynomial or a corpus (`verify`).

pub mod config;
mod verify;

use clap::{Parser, Subcommand, ValueEnum};
use igusa_core::counting::{count_with, Limits, Method, SolutionCount};
use igusa_core::expsum::{expsum_level, global_sum};
use igusa_core::localring::ModulusSpec;
use igusa_core::polyring::{infer_arity, parse_polynomial, Polynomial};
use igusa_core::zeta::{
    classify_poles, poincare_truncation, reconstruct_rational, zeta_truncation, BasicStepSupport,
    PoleReport, RationalFn,
};
use igusa_core::{Error, Result};
use serde::Serialize;

pub use verify::Check;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "igusa",
    version,
    about = "Exponential sums, Igusa zeta functions and their bounds"
)]
pub struct Cli {
    /// Maximum points per enumeration (overrides IGUSA_BUDGET; default 1e7).
    #[arg(long, global = true)]
    pub budget: Option<String>,
    /// Worker threads; the output does not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count solutions of f ≡ 0 mod p^m.
    Count {
        /// Polynomial in x1, x2, ... such as `x1^2*x2 - x1`.
        polynomial: String,
        /// The prime p.
        #[arg(short)]
        p: u64,
        /// The level m.
        #[arg(short)]
        m: u32,
        /// Counting algorithm; `auto` falls back from brute force to Hensel to the valuation tree.
        #[arg(long, value_enum, default_value_t = CountMethod::Hensel)]
        method: CountMethod,
        /// Number of variables (default: largest index used).
        #[arg(long)]
        vars: Option<usize>,
    },
    /// Poincaré series and zeta truncation with rational reconstruction.
    Zeta {
        /// Polynomial in x1, x2, ... such as `x1^2*x2 - x1`.
        polynomial: String,
        /// The prime p.
        #[arg(short)]
        p: u64,
        /// Truncation order M.
        #[arg(long, default_value_t = 8)]
        levels: u32,
        /// Largest recurrence order tried.
        #[arg(long, default_value_t = 3)]
        reconstruct: usize,
        /// Number of variables (default: largest index used).
        #[arg(long)]
        vars: Option<usize>,
    },
    /// The normalized exponential sum E_f(p^m) or E_f(N).
    Expsum {
        /// Polynomial in x1, x2, ... such as `x1^2*x2 - x1`.
        polynomial: String,
        /// The prime p.
        #[arg(short, required_unless_present = "big_n", requires = "m")]
        p: Option<u64>,
        /// The level m.
        #[arg(short, requires = "p")]
        m: Option<u32>,
        /// Global modulus, evaluated through its prime power factors.
        #[arg(short = 'N', conflicts_with_all = ["p", "m", "support"])]
        big_n: Option<u64>,
        /// Basic step support such as `1,*`, or `full`.
        #[arg(long)]
        support: Option<String>,
        /// The unit u in exp(2πi u f(x)/p^m), prime to p.
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        unit: i64,
        /// Number of variables (default: largest index used).
        #[arg(long)]
        vars: Option<usize>,
    },
    /// Run a verification harness and emit a report.
    Verify(verify::VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CountMethod {
    Brute,
    Hensel,
    Tree,
    Auto,
}

impl From<CountMethod> for Method {
    fn from(m: CountMethod) -> Method {
        match m {
            CountMethod::Brute => Method::Brute,
            CountMethod::Hensel => Method::Hensel,
            CountMethod::Tree => Method::Tree,
            CountMethod::Auto => Method::Auto,
        }
    }
}

/// Text for stdout and the process exit code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub code: i32,
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_budget() {
        EXIT_BUDGET
    } else {
        EXIT_INPUT
    }
}

/// Runs a parsed command on a pool of `cli.jobs` threads.
pub fn execute(cli: &Cli) -> Result<Output> {
    if cli.jobs == 0 {
        return Err(Error::invalid("--jobs must be at least 1"));
    }
    let budget = config::resolve_budget(cli.budget.as_deref())?;
    if budget < config::MIN_BUDGET {
        return Err(Error::invalid(format!(
            "budget {budget} is below the minimum {}",
            config::MIN_BUDGET
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(&cli.command, budget))
}

fn dispatch(cmd: &Command, budget: u64) -> Result<Output> {
    let limits = Limits::with_budget(budget);
    match cmd {
        Command::Count {
            polynomial,
            p,
            m,
            method,
            vars,
        } => {
            let f = read_polynomial(polynomial, *vars)?;
            let spec = ModulusSpec::new(*p, *m)?;
            f.check_prime(*p)?;
            let count = count_with(&f, &spec, (*method).into(), &limits)?;
            let method = Method::from(*method);
            json_output(
                &CountOutput {
                    polynomial: f.to_string(),
                    n: f.arity(),
                    method,
                    count,
                },
                EXIT_OK,
            )
        }
        Command::Zeta {
            polynomial,
            p,
            levels,
            reconstruct,
            vars,
        } => {
            let f = read_polynomial(polynomial, *vars)?;
            f.check_prime(*p)?;
            zeta_command(&f, *p, *levels, *reconstruct, &limits)
        }
        Command::Expsum {
            polynomial,
            p,
            m,
            big_n,
            support,
            unit,
            vars,
        } => {
            let f = read_polynomial(polynomial, *vars)?;
            let n = f.arity();
            if let Some(big_n) = big_n {
                let g = global_sum(&f, *big_n, &limits)?;
                return json_output(
                    &Labeled {
                        polynomial: f.to_string(),
                        n,
                        result: g,
                    },
                    EXIT_OK,
                );
            }
            let (p, m) = (p.expect("clap requires -p"), m.expect("clap requires -m"));
            let support = match support {
                Some(s) => BasicStepSupport::parse(s, n)?,
                None => BasicStepSupport::full(n),
            };
            let r = expsum_level(&f, p, m, &support, *unit, &limits)?;
            json_output(
                &Labeled {
                    polynomial: f.to_string(),
                    n,
                    result: r,
                },
                EXIT_OK,
            )
        }
        Command::Verify(args) => verify::run(args, budget),
    }
}

/// Parses f in `vars` variables, or as many as its largest index (at least 1).
pub fn read_polynomial(text: &str, vars: Option<usize>) -> Result<Polynomial> {
    let n = match vars {
        Some(0) => return Err(Error::invalid("--vars must be at least 1")),
        Some(n) => n,
        None => infer_arity(text)?.max(1),
    };
    parse_polynomial(text, n)
}

fn json_output<T: Serialize>(value: &T, code: i32) -> Result<Output> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::invalid(format!("serialization: {e}")))?;
    text.push('\n');
    Ok(Output { text, code })
}

#[derive(Serialize)]
struct CountOutput {
    polynomial: String,
    n: usize,
    method: Method,
    #[serde(flatten)]
    count: SolutionCount,
}

#[derive(Serialize)]
struct Labeled<T: Serialize> {
    polynomial: String,
    n: usize,
    result: T,
}

#[derive(Serialize)]
struct ZetaOutput {
    polynomial: String,
    n: usize,
    p: u64,
    order: u32,
    d_max: usize,
    /// N_0..N_M
    poincare: Vec<String>,
    /// z_0..z_{M−1}
    zeta: Vec<String>,
    rational: Option<RationalFn>,
    poles: Option<PoleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

fn zeta_command(
    f: &Polynomial,
    p: u64,
    order: u32,
    d_max: usize,
    limits: &Limits,
) -> Result<Output> {
    if order == 0 {
        return Err(Error::invalid("--levels must be positive"));
    }
    let series = poincare_truncation(f, p, order, Method::Auto, limits)?;
    let z = zeta_truncation(f, p, order as usize, &BasicStepSupport::full(f.arity()))?;
    let (rational, note, code) = match reconstruct_rational(&series.coefficients, d_max) {
        Ok(r) => (Some(r), None, EXIT_OK),
        Err(e @ (Error::NoRecurrenceFound { .. } | Error::InsufficientData(_))) => {
            (None, Some(e.to_string()), EXIT_INCONCLUSIVE)
        }
        Err(e) => return Err(e),
    };
    let poles = rational.as_ref().map(|r| classify_poles(r, p));
    let out = ZetaOutput {
        polynomial: f.to_string(),
        n: f.arity(),
        p,
        order,
        d_max,
        poincare: series
            .coefficients
            .iter()
            .map(ToString::to_string)
            .collect(),
        zeta: z.coefficients.iter().map(ToString::to_string).collect(),
        rational,
        poles,
        note,
    };
    json_output(&out, code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Result<Output> {
        let cli =
            Cli::try_parse_from(std::iter::once("igusa").chain(args.iter().copied())).unwrap();
        execute(&cli)
    }

    fn json(out: &Output) -> serde_json::Value {
        serde_json::from_str(&out.text).unwrap()
    }

    #[test]
    fn count_examples() {
        let v = json(&run(&["count", "x1^2", "-p", "3", "-m", "3"]).unwrap());
        assert_eq!(
            (v["raw"].as_str(), v["normalized"].as_str()),
            (Some("3"), Some("1/9"))
        );
        // one variable: only x = 0 mod 25, so the raw count is 1 (N = 1/25)
        let v = json(&run(&["count", "x1", "-p", "5", "-m", "2"]).unwrap());
        assert_eq!(
            (v["raw"].as_str(), v["normalized"].as_str()),
            (Some("1"), Some("1/25"))
        );
        let v = json(&run(&["count", "1", "-p", "3", "-m", "1", "--method", "brute"]).unwrap());
        assert_eq!(v["raw"].as_str(), Some("0"));
    }

    #[test]
    fn zeta_examples() {
        let v = json(&run(&["zeta", "x1", "-p", "3"]).unwrap());
        assert_eq!(v["rational"]["text"], "(1)/(1 - 1/3*T)");
        assert_eq!(v["poles"]["has_nontrivial_pole"], false);
        let v = json(&run(&["zeta", "x1^2", "-p", "3"]).unwrap());
        assert_eq!(v["poles"]["has_nontrivial_pole"], true);
        let factors: Vec<_> = v["poles"]["poles"]
            .as_array()
            .unwrap()
            .iter()
            .map(|f| f["factor"].clone())
            .collect();
        assert!(
            factors.contains(&serde_json::Value::from("1 - 1/3*T^2")),
            "{factors:?}"
        );
        let v = json(&run(&["zeta", "1", "-p", "7"]).unwrap());
        assert_eq!(v["rational"]["text"], "1");
    }

    #[test]
    fn expsum_examples() {
        let v = json(&run(&["expsum", "x1^2*x2 - x1", "-p", "3", "-m", "1"]).unwrap());
        assert_eq!(
            (
                v["result"]["exact_zero"].as_bool(),
                v["result"]["exact_value"].as_str()
            ),
            (Some(false), Some("1/3"))
        );
        let v = json(&run(&["expsum", "x1^2*x2 - x1", "-p", "3", "-m", "2"]).unwrap());
        assert_eq!(v["result"]["exact_zero"], true);
        let v = json(&run(&["expsum", "x1", "-p", "5", "-m", "1"]).unwrap());
        assert_eq!(v["result"]["exact_zero"], true);
        let v = json(&run(&["expsum", "x1^2", "-N", "15"]).unwrap());
        assert_eq!(v["result"]["modulus"], 15);
    }

    #[test]
    fn input_and_budget_errors() {
        let e = run(&["count", "x1 +", "-p", "3", "-m", "1"]).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_INPUT);
        let e = run(&["count", "x1", "-p", "4", "-m", "1"]).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_INPUT);
        let e = run(&[
            "--budget", "1000", "count", "x1*x2*x3", "-p", "11", "-m", "1", "--method", "brute",
        ])
        .unwrap_err();
        assert_eq!(exit_code(&e), EXIT_BUDGET);
        assert!(run(&["--budget", "10", "count", "x1", "-p", "3", "-m", "1"]).is_err());
    }
}
