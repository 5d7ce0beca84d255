use std::fmt::Write as _;

use clap::{Args, ValueEnum};
use igusa_core::corpus::{Corpus, CorpusEntry, Tameness};
use igusa_core::counting::Limits;
use igusa_core::oscillation::{
    tameness_check, verify_fiber_product, verify_lower_bound, verify_m1_m2,
    verify_m2_decomposition, verify_nontriviality, verify_pole_theorem, verify_proof_identities,
    verify_pz_relation, BoundReport, Settings, Verdict,
};
use igusa_core::polyring::{parse_polynomial, Polynomial};
use igusa_core::{Error, Result};
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{parse_levels, parse_primes, RunConfig};
use crate::{json_output, read_polynomial, Output, EXIT_FAILED, EXIT_INCONCLUSIVE, EXIT_OK};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    PoleTheorem,
    LowerBound,
    M1m2,
    Tameness,
    Nontriviality,
    PzRelation,
    FiberProduct,
    M2Decomposition,
    ProofIdentities,
}

impl Check {
    pub fn default_primes(self) -> Vec<u64> {
        match self {
            Check::PoleTheorem | Check::LowerBound => vec![5, 7, 11, 13],
            Check::M1m2 | Check::M2Decomposition => vec![5, 7, 11, 13, 17, 19, 23],
            Check::Tameness | Check::Nontriviality => vec![5, 7],
            Check::PzRelation | Check::ProofIdentities => vec![3, 5, 7],
            Check::FiberProduct => vec![3, 5],
        }
    }

    fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Markdown,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub check: Check,
    /// A single polynomial; use --corpus instead to run over a corpus.
    #[arg(required_unless_present = "corpus")]
    pub polynomial: Option<String>,
    /// `default` for the shipped corpus, or a corpus file.
    #[arg(long, conflicts_with = "polynomial")]
    pub corpus: Option<String>,
    /// Primes: a list such as `5,7,11` and ranges such as `3..19`.
    #[arg(short = 'p', long = "primes")]
    pub primes: Option<String>,
    /// Level range of exponential sums, e.g. `1..3`.
    #[arg(short = 'm', long = "levels")]
    pub levels: Option<String>,
    /// Truncation order M of Poincaré series.
    #[arg(long, default_value_t = 8)]
    pub order: u32,
    /// Largest numerator and denominator degree tried in reconstruction.
    #[arg(long, default_value_t = 3)]
    pub d_max: usize,
    /// Mantissa bits required of floating results.
    #[arg(long, default_value_t = 64)]
    pub precision: u32,
    /// Fixed constant D for the level-2 bound of the m1m2 check.
    #[arg(long)]
    pub m2_constant: Option<f64>,
    /// Fiber value c of the fiber-product check.
    #[arg(long, default_value = "1")]
    pub c: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Number of variables (default: largest index used).
    #[arg(long)]
    pub vars: Option<usize>,
}

/// Expected properties declared by a corpus entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expected {
    pub homogeneous: bool,
    pub delta_f: String,
    pub tameness: Tameness,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub polynomial: String,
    pub n: usize,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub report: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub check: Check,
    pub config: RunConfig,
    pub records: Vec<Record>,
    pub verdict: Verdict,
}

struct Target {
    f: Polynomial,
    entry: Option<CorpusEntry>,
}

pub fn run(args: &VerifyArgs, budget: u64) -> Result<Output> {
    let check = args.check;
    let primes = match &args.primes {
        Some(s) => parse_primes(s)?,
        None => check.default_primes(),
    };
    let levels = match &args.levels {
        Some(s) => parse_levels(s)?,
        None => [1, 3],
    };
    let config = RunConfig {
        budget,
        precision: args.precision,
        order: args.order,
        d_max: args.d_max,
        primes,
        levels,
        corpus: args.corpus.clone(),
        m2_constant: args.m2_constant,
        fiber_c: (check == Check::FiberProduct).then(|| args.c.clone()),
    };
    config.validate()?;
    let targets = targets(args)?;
    for t in &targets {
        for &p in &config.primes {
            t.f.check_prime(p)?;
        }
    }
    let c = parse_polynomial(&args.c, 1)?;
    if !c.is_constant() {
        return Err(Error::invalid(format!(
            "fiber value '{}' is not a constant",
            args.c
        )));
    }
    let c = c.constant_term();
    let settings = settings(&config, check);
    let records = targets
        .par_iter()
        .map(|t| record(check, t, &config.primes, &c, &settings))
        .collect::<Vec<Result<Record>>>()
        .into_iter()
        .collect::<Result<Vec<Record>>>()?;
    let verdict = records
        .iter()
        .fold(Verdict::Pass, |v, r| v.combine(r.verdict));
    let report = Report {
        tool: "igusa",
        version: env!("CARGO_PKG_VERSION"),
        check,
        config,
        records,
        verdict,
    };
    let code = match verdict {
        Verdict::Pass => EXIT_OK,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        Verdict::Fail => EXIT_FAILED,
    };
    match args.format {
        Format::Json => json_output(&report, code),
        Format::Markdown => Ok(Output {
            text: markdown(&report),
            code,
        }),
    }
}

fn targets(args: &VerifyArgs) -> Result<Vec<Target>> {
    if let Some(name) = &args.corpus {
        return Corpus::select(name)?
            .entries
            .into_iter()
            .map(|e| {
                Ok(Target {
                    f: e.poly()?,
                    entry: Some(e),
                })
            })
            .collect();
    }
    let text = args
        .polynomial
        .as_deref()
        .expect("clap requires a polynomial or a corpus");
    let f = read_polynomial(text, args.vars)?;
    // a polynomial from the shipped corpus carries its declared expectations
    let entry = Corpus::builtin()
        .entries
        .into_iter()
        .find(|e| e.poly().is_ok_and(|g| g == f));
    Ok(vec![Target { f, entry }])
}

fn settings(config: &RunConfig, check: Check) -> Settings {
    let defaults = Settings::default();
    Settings {
        limits: Limits::with_budget(config.budget),
        locus_budget: defaults.locus_budget.max(config.budget),
        order: config.order,
        d_max: config.d_max,
        max_order: defaults.max_order.max(config.order),
        dim_primes: if check == Check::Tameness {
            config.primes.clone()
        } else {
            defaults.dim_primes.clone()
        },
        levels: config.level_range(),
        m2_constant: config.m2_constant,
        ..defaults
    }
}

fn degree(f: &Polynomial) -> u32 {
    f.degree().unwrap_or(0)
}

fn record(
    check: Check,
    t: &Target,
    primes: &[u64],
    c: &BigRational,
    s: &Settings,
) -> Result<Record> {
    let f = &t.f;
    let mut rec = Record {
        name: t.entry.as_ref().map(|e| e.name.clone()),
        polynomial: f.to_string(),
        n: f.arity(),
        verdict: Verdict::Pass,
        expected: t.entry.as_ref().map(|e| Expected {
            homogeneous: e.homogeneous,
            delta_f: e.delta_f.clone(),
            tameness: e.tameness,
        }),
        notes: Vec::new(),
        report: Value::Null,
    };
    let bound = |r: BoundReport, rec: &mut Record| {
        rec.verdict = r.verdict;
        rec.report = serde_json::to_value(r).expect("reports serialize");
    };
    match check {
        Check::PoleTheorem => bound(verify_pole_theorem(f, primes, s)?, &mut rec),
        Check::LowerBound => bound(verify_lower_bound(f, primes, s)?, &mut rec),
        Check::M1m2 => bound(verify_m1_m2(f, primes, s)?, &mut rec),
        Check::Nontriviality => bound(verify_nontriviality(f, primes, s)?, &mut rec),
        Check::PzRelation => bound(verify_pz_relation(f, primes, s)?, &mut rec),
        Check::M2Decomposition => bound(verify_m2_decomposition(f, primes, s)?, &mut rec),
        Check::ProofIdentities => bound(verify_proof_identities(f, primes, s)?, &mut rec),
        Check::FiberProduct if f.arity() < 2 => rec
            .notes
            .push("skipped: the fiber check needs two variables".into()),
        Check::FiberProduct => bound(verify_fiber_product(f, c, primes, s)?, &mut rec),
        Check::Tameness => tameness_record(t, s, &mut rec)?,
    }
    Ok(rec)
}

/// The tameness verdict against the declared expectation: a declared failure
/// that is confirmed passes. Without a declaration the condition must hold.
fn tameness_record(t: &Target, s: &Settings, rec: &mut Record) -> Result<()> {
    if degree(&t.f) < 2 {
        rec.notes.push("skipped: deg f < 2".into());
        return Ok(());
    }
    let r = tameness_check(&t.f, s)?;
    let mut verdict = Verdict::Pass;
    if !r.conclusive {
        verdict = Verdict::Inconclusive;
        rec.notes.push("a dimension estimate is ambiguous".into());
    }
    if r.homogeneous_identity_holds == Some(false) {
        verdict = Verdict::Fail;
        rec.notes
            .push("homogeneous identity δ̂ + 1 = δ̂_f fails".into());
    }
    match &t.entry {
        Some(e) => {
            match (e.tameness, r.condition_holds) {
                (Tameness::Holds, false) => {
                    verdict = Verdict::Fail;
                    rec.notes
                        .push("condition declared to hold but fails".into());
                }
                (Tameness::Fails, true) => {
                    verdict = Verdict::Fail;
                    rec.notes
                        .push("condition declared to fail but holds".into());
                }
                (Tameness::Fails, false) => rec.notes.push("expected failure confirmed".into()),
                _ => {}
            }
            if r.conclusive && r.delta_f_hat != Some(e.expected_delta_f()?) {
                verdict = Verdict::Fail;
                rec.notes
                    .push(format!("δ̂_f differs from the declared {}", e.delta_f));
            }
        }
        None if !r.condition_holds => {
            verdict = verdict.combine(Verdict::Fail);
            rec.notes.push("condition fails".into());
        }
        None => {}
    }
    rec.verdict = verdict;
    rec.report = serde_json::to_value(&r).expect("reports serialize");
    Ok(())
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
    .replace('|', "\\|")
}

/// Markdown tables built from the same records as the JSON report.
pub fn markdown(r: &Report) -> String {
    let mut out = String::new();
    let c = &r.config;
    let _ = writeln!(
        out,
        "# {} {}: verify {}\n",
        r.tool,
        r.version,
        r.check.name()
    );
    let _ = writeln!(
        out,
        "Overall verdict: **{}**\n",
        cell(&serde_json::to_value(r.verdict).unwrap())
    );
    let _ = writeln!(
        out,
        "Config: budget {}, precision {}, order {}, d_max {}, primes {:?}, levels {}..{}{}\n",
        c.budget,
        c.precision,
        c.order,
        c.d_max,
        c.primes,
        c.levels[0],
        c.levels[1],
        c.corpus
            .as_ref()
            .map(|s| format!(", corpus {s}"))
            .unwrap_or_default()
    );
    let _ = writeln!(out, "| entry | polynomial | verdict |\n|---|---|---|");
    for rec in &r.records {
        let _ = writeln!(
            out,
            "| {} | `{}` | {} |",
            rec.name.as_deref().unwrap_or("-"),
            rec.polynomial,
            cell(&serde_json::to_value(rec.verdict).unwrap())
        );
    }
    for rec in &r.records {
        let _ = writeln!(
            out,
            "\n## {} `{}`\n",
            rec.name.as_deref().unwrap_or("polynomial"),
            rec.polynomial
        );
        for n in &rec.notes {
            let _ = writeln!(out, "- {n}");
        }
        if let Some(consts) = rec.report.get("constants").and_then(Value::as_object) {
            if !consts.is_empty() {
                let list: Vec<String> = consts
                    .iter()
                    .map(|(k, v)| format!("{k} = {}", cell(v)))
                    .collect();
                let _ = writeln!(out, "Constants: {}\n", list.join(", "));
            }
        }
        if let Some(notes) = rec.report.get("notes").and_then(Value::as_array) {
            for n in notes {
                let _ = writeln!(out, "- {}", cell(n));
            }
        }
        match rec.report.get("rows").and_then(Value::as_array) {
            Some(rows) => {
                let _ = writeln!(out, "| p | m | status | values |\n|---|---|---|---|");
                for row in rows {
                    let values = row
                        .get("values")
                        .and_then(Value::as_object)
                        .map(|m| {
                            m.iter()
                                .map(|(k, v)| format!("{k}={}", cell(v)))
                                .collect::<Vec<_>>()
                                .join("; ")
                        })
                        .unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "| {} | {} | {} | {} |",
                        cell(&row["p"]),
                        cell(row.get("m").unwrap_or(&Value::Null)),
                        cell(&row["status"]),
                        values
                    );
                }
            }
            None => {
                if let Some(obj) = rec.report.as_object() {
                    for (k, v) in obj.iter().filter(|(_, v)| !v.is_object() && !v.is_array()) {
                        let v = if v.is_null() {
                            "n/a".to_string()
                        } else {
                            cell(v)
                        };
                        let _ = writeln!(out, "- {k}: {v}");
                    }
                }
            }
        }
    }
    out
}
