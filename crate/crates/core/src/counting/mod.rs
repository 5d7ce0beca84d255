//! Solution counts of f ≡ 0 mod p^m, value histograms, singular-locus point
//! counts over F_{p^k} and dimension estimates.

mod engine;
mod fqengine;
mod locus;
pub mod tree;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::localring::ModulusSpec;
use crate::polyring::{ModPoly, Polynomial};
use crate::zeta::BasicStepSupport;

pub use engine::{box_size, CoordRange};
pub(crate) use engine::{fold_par, histogram as raw_histogram, Compiled};
pub(crate) use fqengine::trace_histogram;
pub use locus::{
    critical_system, estimate_dimension, locus_count, locus_summary, singular_locus_at_infinity,
    singular_system, Dim, DimensionEstimate, LocusSummary,
};

/// Number of solutions of f ≡ 0 in (Z/p^m)^n, with N_m = raw / p^{mn}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolutionCount {
    pub p: u64,
    pub m: u32,
    #[serde(serialize_with = "crate::json::display")]
    pub raw: BigUint,
    #[serde(serialize_with = "crate::json::display")]
    pub normalized: BigRational,
}

impl SolutionCount {
    fn new(p: u64, m: u32, n: usize, raw: BigUint) -> Self {
        let total = BigInt::from(p).pow(m * n as u32);
        let normalized = BigRational::new(BigInt::from(raw.clone()), total);
        SolutionCount {
            p,
            m,
            raw,
            normalized,
        }
    }
}

/// Counts c_j = #{x : f(x) ≡ j mod p^m}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValueHistogram {
    pub p: u64,
    pub m: u32,
    pub counts: Vec<u64>,
}

/// Counting method for N_m.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Brute,
    Hensel,
    Tree,
    Auto,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Method::Brute),
            "hensel" => Ok(Method::Hensel),
            "tree" => Ok(Method::Tree),
            "auto" => Ok(Method::Auto),
            _ => Err(Error::invalid(format!("unknown counting method '{s}'"))),
        }
    }
}

/// Limits shared by enumeration-based operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Limits {
    /// Maximum number of points in one enumeration (also caps Hensel lists).
    pub budget: u64,
    /// When a Hensel solution list outgrows the budget, retry by brute force
    /// (if that fits) instead of failing.
    pub hensel_fallback: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            budget: 10_000_000,
            hensel_fallback: true,
        }
    }
}

impl Limits {
    pub fn with_budget(budget: u64) -> Self {
        Limits {
            budget,
            ..Limits::default()
        }
    }
}

/// Exact count by full enumeration of (Z/p^m)^n.
pub fn count_bruteforce(
    f: &Polynomial,
    spec: &ModulusSpec,
    limits: &Limits,
) -> Result<SolutionCount> {
    count_bruteforce_on(f, spec, &BasicStepSupport::full(f.arity()), limits)
}

/// Brute-force count restricted to the residues of a support.
pub fn count_bruteforce_on(
    f: &Polynomial,
    spec: &ModulusSpec,
    support: &BasicStepSupport,
    limits: &Limits,
) -> Result<SolutionCount> {
    support.validate(f.arity(), spec.p())?;
    let g = spec.reduce(f)?;
    let raw = engine::count_zeros(&g, &support.ranges(spec), limits.budget)?;
    Ok(SolutionCount::new(
        spec.p(),
        spec.m(),
        f.arity(),
        BigUint::from(raw),
    ))
}

/// Histogram of f over (Z/p^m)^n.
pub fn value_histogram(
    f: &Polynomial,
    spec: &ModulusSpec,
    limits: &Limits,
) -> Result<ValueHistogram> {
    let g = spec.reduce(f)?;
    let ranges = vec![CoordRange::full(spec.modulus()); f.arity()];
    let counts = engine::histogram(&g, &ranges, limits.budget)?;
    Ok(ValueHistogram {
        p: spec.p(),
        m: spec.m(),
        counts,
    })
}

// Solutions of g ≡ 0 over F_p^n as a flat list of n-tuples.
fn solutions_mod_p(g: &ModPoly, n: usize, budget: u64) -> Result<Vec<u64>> {
    let p = g.modulus();
    let ranges = vec![CoordRange::full(p); n];
    box_size(&ranges, budget)?;
    let c = Compiled::new(g)?;
    Ok(fold_par(
        &c,
        &ranges,
        Vec::new,
        |acc: &mut Vec<u64>, prefix, x, v| {
            if v == 0 {
                acc.extend_from_slice(prefix);
                if n > 0 {
                    acc.push(x);
                }
            }
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    ))
}

struct Lifter {
    p: u64,
    grad_p: Vec<ModPoly>,
}

impl Lifter {
    fn gradient_at(&self, x: &[u64], buf: &mut Vec<u64>) -> Option<usize> {
        buf.clear();
        let xp: Vec<u64> = x.iter().map(|v| v % self.p).collect();
        let mut first = None;
        for (i, g) in self.grad_p.iter().enumerate() {
            let v = g.eval(&xp);
            if v != 0 && first.is_none() {
                first = Some(i);
            }
            buf.push(v);
        }
        first
    }
}

/// Exact count by Hensel lifting of explicit solution lists.
///
/// Level 1 is brute force over F_p^n. A solution x mod p^{j-1} with a unit
/// gradient has p^{n-1} lifts mod p^j; a singular one has p^n lifts when
/// f(x) ≡ 0 mod p^j and none otherwise.
pub fn count_hensel(f: &Polynomial, spec: &ModulusSpec, limits: &Limits) -> Result<SolutionCount> {
    match hensel_inner(f, spec, limits.budget) {
        Err(Error::BudgetExceeded { .. }) if limits.hensel_fallback => {
            count_bruteforce(f, spec, limits)
        }
        other => other,
    }
}

/// Lifted solution lists live in memory, so they are capped independently of
/// the enumeration budget.
pub const MAX_LIST_POINTS: u64 = 4_000_000;

fn hensel_inner(f: &Polynomial, spec: &ModulusSpec, budget: u64) -> Result<SolutionCount> {
    let (p, m, n) = (spec.p(), spec.m(), f.arity());
    f.check_prime(p)?;
    if n == 0 {
        return count_bruteforce(f, spec, &Limits::with_budget(budget));
    }
    let base = f.reduce_mod(p)?;
    let mut sols = solutions_mod_p(&base, n, budget)?;
    if m == 1 {
        return Ok(SolutionCount::new(
            p,
            1,
            n,
            BigUint::from((sols.len() / n) as u64),
        ));
    }
    let lifter = Lifter {
        p,
        grad_p: f
            .gradient()
            .iter()
            .map(|g| g.reduce_mod(p))
            .collect::<Result<_>>()?,
    };
    let list_cap = budget.min(MAX_LIST_POINTS);
    let pn1 = p.pow(n as u32 - 1);
    for j in 2..=m {
        let lower = p.pow(j - 1);
        let upper = lower * p;
        let fj = f.reduce_mod(upper)?;
        let last = j == m;
        let chunk_len = (sols.len() / n / rayon::current_num_threads().max(1)).max(1) * n;
        let parts: Vec<Result<(BigUint, Vec<u64>)>> = sols
            .par_chunks(chunk_len)
            .map(|chunk| {
                let mut count = BigUint::zero();
                let mut next = Vec::new();
                let mut grad = Vec::with_capacity(n);
                for x in chunk.chunks_exact(n) {
                    let fx = fj.eval(x);
                    match lifter.gradient_at(x, &mut grad) {
                        Some(i0) => {
                            count += pn1;
                            if !last {
                                lift_smooth(x, fx / lower, &grad, i0, p, lower, upper, &mut next);
                            }
                        }
                        None if fx == 0 => {
                            count += pn1 * p;
                            if !last {
                                lift_all(x, p, lower, upper, &mut next);
                            }
                        }
                        None => {}
                    }
                    if next.len() as u64 / n as u64 > list_cap {
                        return Err(Error::BudgetExceeded {
                            needed: next.len() as u128 / n as u128,
                            budget: list_cap,
                        });
                    }
                }
                Ok((count, next))
            })
            .collect();
        let mut total = BigUint::zero();
        let mut next = Vec::new();
        for part in parts {
            let (c, v) = part?;
            total += c;
            next.extend(v);
        }
        if next.len() as u64 / n as u64 > list_cap {
            return Err(Error::BudgetExceeded {
                needed: next.len() as u128 / n as u128,
                budget: list_cap,
            });
        }
        if last {
            return Ok(SolutionCount::new(p, m, n, total));
        }
        sols = next;
    }
    unreachable!()
}

// Lifts x (a solution mod `lower` with unit gradient) to all solutions mod
// `upper` = p·lower: x + lower·t with c + grad·t ≡ 0 mod p, c = f(x)/lower.
#[allow(clippy::too_many_arguments)]
fn lift_smooth(
    x: &[u64],
    c: u64,
    grad: &[u64],
    i0: usize,
    p: u64,
    lower: u64,
    upper: u64,
    out: &mut Vec<u64>,
) {
    let n = x.len();
    let inv = crate::arith::inverse_mod(grad[i0], p).unwrap();
    let mut t = vec![0u64; n];
    for free in crate::localring::Odometer::new(p, n - 1) {
        let mut s = c % p;
        let mut k = 0;
        for i in 0..n {
            if i != i0 {
                t[i] = free[k];
                k += 1;
                s = (s + grad[i] * t[i]) % p;
            }
        }
        t[i0] = (p - s) % p * inv % p;
        for i in 0..n {
            out.push((x[i] + lower * t[i]) % upper);
        }
    }
}

fn lift_all(x: &[u64], p: u64, lower: u64, upper: u64, out: &mut Vec<u64>) {
    let n = x.len();
    for t in crate::localring::Odometer::new(p, n) {
        for i in 0..n {
            out.push((x[i] + lower * t[i]) % upper);
        }
    }
}

/// True iff every solution mod p lifts to a solution mod p^2.
pub fn check_lift_surjectivity(f: &Polynomial, p: u64, limits: &Limits) -> Result<bool> {
    let n = f.arity();
    let spec = ModulusSpec::new(p, 2)?;
    let g2 = spec.reduce(f)?;
    let g1 = f.reduce_mod(p)?;
    let ranges = vec![CoordRange::full(p * p); n];
    box_size(&ranges, limits.budget)?;
    let size = p.pow(n as u32) as usize;
    let index = |pt: &[u64]| {
        pt.iter()
            .fold(0usize, |a, &v| a * p as usize + (v % p) as usize)
    };
    let c = Compiled::new(&g2)?;
    let lifted = fold_par(
        &c,
        &ranges,
        || vec![false; size],
        |acc: &mut Vec<bool>, prefix, x, v| {
            if v == 0 {
                let i = index(prefix) * p as usize + (x % p) as usize;
                acc[if n == 0 { 0 } else { i }] = true;
            }
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x |= y;
            }
            a
        },
    );
    let sols = solutions_mod_p(&g1, n, limits.budget)?;
    if n == 0 {
        return Ok(sols.is_empty() || lifted[0] || g2.is_zero());
    }
    Ok(sols.chunks_exact(n).all(|x| lifted[index(x)]))
}

/// The two point-count identities from the nontrivial-pole argument, checked
/// against independently computed N_1 and N_2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProofIdentityRecord {
    pub p: u64,
    /// #{x in F_p^n : f(x) = 0, grad f(x) != 0}
    pub y_count: u64,
    /// #S_f(F_p)
    pub s_count: u64,
    #[serde(serialize_with = "crate::json::display")]
    pub n1: BigRational,
    #[serde(serialize_with = "crate::json::display")]
    pub n2: BigRational,
    #[serde(serialize_with = "crate::json::display")]
    pub n1_formula: BigRational,
    #[serde(serialize_with = "crate::json::display")]
    pub n2_formula: BigRational,
    pub n1_identity: bool,
    pub n2_identity: bool,
}

pub fn proof_identity_check(
    f: &Polynomial,
    p: u64,
    limits: &Limits,
) -> Result<ProofIdentityRecord> {
    let n = f.arity();
    let spec1 = ModulusSpec::new(p, 1)?;
    let spec2 = ModulusSpec::new(p, 2)?;
    let g = spec1.reduce(f)?;
    let grad: Vec<ModPoly> = f
        .gradient()
        .iter()
        .map(|d| d.reduce_mod(p))
        .collect::<Result<_>>()?;
    crate::localring::check_budget(p, n, limits.budget)?;
    let (mut y, mut s) = (0u64, 0u64);
    for x in crate::localring::Odometer::new(p, n) {
        if g.eval(&x) != 0 {
            continue;
        }
        if grad.iter().all(|d| d.eval(&x) == 0) {
            s += 1;
        } else {
            y += 1;
        }
    }
    let n1 = count_bruteforce(f, &spec1, limits)?.normalized;
    let n2 = count_bruteforce(f, &spec2, limits)?.normalized;
    let q = BigInt::from(p);
    let qn = BigRational::from_integer(q.pow(n as u32));
    let n1_formula = BigRational::from_integer((y + s).into()) / &qn;
    let n2_formula = BigRational::from_integer(y.into()) / (&qn * BigRational::from_integer(q))
        + BigRational::from_integer(s.into()) / &qn;
    Ok(ProofIdentityRecord {
        p,
        y_count: y,
        s_count: s,
        n1_identity: n1 == n1_formula,
        n2_identity: n2 == n2_formula,
        n1,
        n2,
        n1_formula,
        n2_formula,
    })
}

/// One count by the chosen method. The tree yields N_m exactly and the raw
/// count is recovered as N_m·p^{mn}; `Auto` enumerates when that fits the
/// budget, then tries Hensel lifting, then the tree.
pub fn count_with(
    f: &Polynomial,
    spec: &ModulusSpec,
    method: Method,
    limits: &Limits,
) -> Result<SolutionCount> {
    let (p, m, n) = (spec.p(), spec.m(), f.arity());
    let by_tree = || -> Result<SolutionCount> {
        f.check_prime(p)?;
        let prof = tree::valuation_profile(f, p, m as usize, &BasicStepSupport::full(n))?;
        let nm = prof.tail_measures().swap_remove(m as usize);
        let total = BigRational::from_integer(BigInt::from(p).pow(m * n as u32));
        let raw = (nm * total)
            .to_integer()
            .to_biguint()
            .expect("counts are nonnegative");
        Ok(SolutionCount::new(p, m, n, raw))
    };
    match method {
        Method::Brute => count_bruteforce(f, spec, limits),
        Method::Hensel => count_hensel(
            f,
            spec,
            &Limits {
                hensel_fallback: false,
                ..*limits
            },
        ),
        Method::Tree => by_tree(),
        Method::Auto => {
            if spec
                .point_count(n)
                .is_some_and(|t| t <= limits.budget as u128)
            {
                return count_bruteforce(f, spec, limits);
            }
            match count_hensel(
                f,
                spec,
                &Limits {
                    hensel_fallback: false,
                    ..*limits
                },
            ) {
                Err(Error::BudgetExceeded { .. }) => by_tree(),
                r => r,
            }
        }
    }
}

/// Normalized counts N_0..N_M of f ≡ 0 mod p^m by the chosen method.
pub fn normalized_counts(
    f: &Polynomial,
    p: u64,
    levels: u32,
    method: Method,
    limits: &Limits,
) -> Result<Vec<BigRational>> {
    f.check_prime(p)?;
    let n = f.arity() as u32;
    let mut out = vec![BigRational::one()];
    if method == Method::Tree {
        let prof =
            tree::valuation_profile(f, p, levels as usize, &BasicStepSupport::full(f.arity()))?;
        return Ok(prof.tail_measures());
    }
    for m in 1..=levels {
        let spec = ModulusSpec::new(p, m)?;
        let c = match method {
            Method::Brute => count_bruteforce(f, &spec, limits)?,
            Method::Hensel => count_hensel(
                f,
                &spec,
                &Limits {
                    hensel_fallback: false,
                    ..*limits
                },
            )?,
            _ => {
                let fits = (p as u128)
                    .checked_pow(m * n)
                    .is_some_and(|t| t <= limits.budget as u128);
                if fits {
                    count_bruteforce(f, &spec, limits)?
                } else {
                    match count_hensel(
                        f,
                        &spec,
                        &Limits {
                            hensel_fallback: false,
                            ..*limits
                        },
                    ) {
                        Ok(c) => c,
                        Err(Error::BudgetExceeded { .. }) | Err(Error::InvalidInput(_)) => {
                            let prof = tree::valuation_profile(
                                f,
                                p,
                                levels as usize,
                                &BasicStepSupport::full(f.arity()),
                            )?;
                            let tail = prof.tail_measures();
                            out.extend(tail.into_iter().skip(m as usize));
                            return Ok(out);
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        };
        out.push(c.normalized);
    }
    Ok(out)
}
