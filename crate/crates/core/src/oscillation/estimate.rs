use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Serialize, Serializer};

use crate::counting::Limits;
use crate::error::{Error, Result};
use crate::expsum::expsum_level;
use crate::localring::{check_budget, Odometer};
use crate::polyring::Polynomial;
use crate::zeta::BasicStepSupport;

/// A decay exponent: a real number or −∞.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub enum AlphaValue {
    NegInfinity,
    Finite(f64),
}

impl fmt::Display for AlphaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaValue::NegInfinity => write!(f, "-inf"),
            AlphaValue::Finite(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for AlphaValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AlphaValue::NegInfinity => s.serialize_str("-inf"),
            AlphaValue::Finite(v) => s.serialize_f64(*v),
        }
    }
}

/// One level of an oscillation estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelRow {
    pub m: u32,
    pub exact_zero: bool,
    pub magnitude: f64,
    pub error_bound: f64,
    /// log_p |E| / m, absent for exact zeros.
    pub log_ratio: Option<f64>,
    /// m^{n−1}, reported and not fitted.
    pub m_factor: f64,
}

/// Empirical decay of E_f(p^m) on a support.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaEstimate {
    pub p: u64,
    pub support: String,
    pub unit: i64,
    pub levels: Vec<LevelRow>,
    pub window: usize,
    /// Least-squares slope of log_p |E| against m over the nonzero levels.
    pub slope: Option<f64>,
    pub vanishing_detected: bool,
    pub alpha_hat: Option<AlphaValue>,
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Computes E_f(p^m) on the support for every m in the range. When the last
/// `window` levels vanish exactly the estimate is −∞; otherwise it is the
/// slope of log_p |E| over the nonvanishing levels.
pub fn estimate_alpha(
    f: &Polynomial,
    p: u64,
    levels: RangeInclusive<u32>,
    support: &BasicStepSupport,
    u: i64,
    window: usize,
    limits: &Limits,
) -> Result<AlphaEstimate> {
    let ms: Vec<u32> = levels.collect();
    if ms.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} levels given, at least 3 are needed",
            ms.len()
        )));
    }
    if window == 0 {
        return Err(Error::invalid("the vanishing window must be positive"));
    }
    let n = f.arity();
    let lp = (p as f64).ln();
    let mut rows = Vec::with_capacity(ms.len());
    for &m in &ms {
        let r = expsum_level(f, p, m, support, u, limits)?;
        let log_ratio = (!r.exact_zero).then(|| r.magnitude.ln() / lp / m as f64);
        rows.push(LevelRow {
            m,
            exact_zero: r.exact_zero,
            magnitude: r.magnitude,
            error_bound: r.error_bound,
            log_ratio,
            m_factor: (m as f64).powi(n as i32 - 1),
        });
    }
    let trailing_zeros = rows.iter().rev().take_while(|r| r.exact_zero).count();
    let vanishing_detected = trailing_zeros >= window;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| !r.exact_zero)
        .map(|r| (r.m as f64, r.magnitude.ln() / lp))
        .collect();
    let slope = least_squares_slope(&pts);
    let alpha_hat = if vanishing_detected {
        Some(AlphaValue::NegInfinity)
    } else {
        slope.map(AlphaValue::Finite)
    };
    Ok(AlphaEstimate {
        p,
        support: support.to_string(),
        unit: u,
        levels: rows,
        window,
        slope,
        vanishing_detected,
        alpha_hat,
    })
}

/// β̂ = max over (p, m) of log_p(|E_f(p^m)| / (m^{n−1} p^{α m})), at least 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlawEstimate {
    pub alpha: f64,
    /// None when every sum vanishes (the flaw is −∞).
    pub beta_hat: Option<f64>,
    pub witness: Option<(u64, u32)>,
    /// (p, m, log_p(|E| / (m^{n−1} p^{α m}))) for the nonvanishing sums.
    pub samples: Vec<(u64, u32, f64)>,
}

pub fn estimate_flaw(
    f: &Polynomial,
    primes: &[u64],
    levels: RangeInclusive<u32>,
    alpha: f64,
    limits: &Limits,
) -> Result<FlawEstimate> {
    let n = f.arity();
    let mut samples = Vec::new();
    for &p in primes {
        for m in levels.clone() {
            let r = expsum_level(f, p, m, &BasicStepSupport::full(n), 1, limits)?;
            if r.exact_zero {
                continue;
            }
            let lp = (p as f64).ln();
            let v = (r.magnitude.ln() - (n as f64 - 1.0) * (m as f64).ln()) / lp - alpha * m as f64;
            samples.push((p, m, v));
        }
    }
    let best = samples
        .iter()
        .fold(None, |acc: Option<&(u64, u32, f64)>, s| match acc {
            Some(a) if a.2 >= s.2 => Some(a),
            _ => Some(s),
        });
    Ok(FlawEstimate {
        alpha,
        beta_hat: best.map(|b| b.2.max(0.0)),
        witness: best.map(|b| (b.0, b.1)),
        samples,
    })
}

/// The values f(x) mod p at points x of C_f(F_p), sorted.
pub fn critical_values_mod_p(f: &Polynomial, p: u64, limits: &Limits) -> Result<Vec<u64>> {
    let n = f.arity();
    check_budget(p, n, limits.budget)?;
    let g = f.reduce_mod(p)?;
    let grad: Vec<_> = (0..n).map(|i| g.derivative(i)).collect();
    let mut out = BTreeSet::new();
    for x in Odometer::new(p, n) {
        if grad.iter().all(|d| d.eval(&x) == 0) {
            out.insert(g.eval(&x));
        }
    }
    Ok(out.into_iter().collect())
}
