//! Poincaré series and local zeta truncations, the relation between them,
//! rational-function reconstruction and pole classification.

mod poles;
mod rational;
mod support;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::counting::{normalized_counts, tree, Limits, Method};
use crate::error::{Error, Result};
use crate::polyring::Polynomial;

pub use poles::{classify_poles, PoleFactor, PoleReport};
pub(crate) use rational::rpow;
pub use rational::{reconstruct_rational, QPoly, RationalFn};
pub use support::{BasicStepSupport, SupportFactor};

/// Truncated Poincaré series N_0 = 1, N_1, …, N_M.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PoincareSeries {
    pub p: u64,
    #[serde(serialize_with = "crate::json::display_vec")]
    pub coefficients: Vec<BigRational>,
}

impl PoincareSeries {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// N_0 = 1, 0 ≤ N_m ≤ 1 and N_{m+1} ≤ N_m.
    pub fn invariants_hold(&self) -> bool {
        let c = &self.coefficients;
        c.first().is_some_and(One::is_one)
            && c.iter()
                .all(|v| !v.is_negative() && v <= &BigRational::one())
            && c.windows(2).all(|w| w[1] <= w[0])
    }
}

/// N_0..N_M for f at p.
pub fn poincare_truncation(
    f: &Polynomial,
    p: u64,
    order: u32,
    method: Method,
    limits: &Limits,
) -> Result<PoincareSeries> {
    if !crate::localring::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let coefficients = normalized_counts(f, p, order, method, limits)?;
    Ok(PoincareSeries { p, coefficients })
}

/// z_0..z_{M−1} with z_m = measure{x in support : v(f(x)) = m}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZetaTruncation {
    pub p: u64,
    pub support: BasicStepSupport,
    #[serde(serialize_with = "crate::json::display_vec")]
    pub coefficients: Vec<BigRational>,
    /// Mass of the support at valuation ≥ M.
    #[serde(serialize_with = "crate::json::display")]
    pub deficit: BigRational,
}

/// Local zeta truncation of order M on a basic step support.
pub fn zeta_truncation(
    f: &Polynomial,
    p: u64,
    order: usize,
    support: &BasicStepSupport,
) -> Result<ZetaTruncation> {
    let prof = tree::valuation_profile(f, p, order, support)?;
    Ok(ZetaTruncation {
        p,
        support: support.clone(),
        coefficients: prof.dist,
        deficit: prof.tail,
    })
}

/// Outcome of the coefficient comparison P(T)(1 − T) = 1 − T·Z(T).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PzCheck {
    pub order: usize,
    pub holds: bool,
    pub first_mismatch: Option<usize>,
}

/// Compares P(T)(1 − T) with 1 − T·Z(T) coefficientwise up to T^M, where P
/// has N_0..N_M and Z has z_0..z_{M−1} on the full support.
pub fn check_pz_relation(series: &PoincareSeries, z: &ZetaTruncation) -> Result<PzCheck> {
    if series.p != z.p {
        return Err(Error::invalid(format!(
            "prime mismatch: {} vs {}",
            series.p, z.p
        )));
    }
    if !z.support.is_full() {
        return Err(Error::invalid(
            "the relation is stated for the full support",
        ));
    }
    let order = series.order();
    if z.coefficients.len() != order {
        return Err(Error::invalid(format!(
            "truncation orders differ: P to T^{order}, Z has {} coefficients",
            z.coefficients.len()
        )));
    }
    let n = &series.coefficients;
    let mut first_mismatch = (!n[0].is_one()).then_some(0);
    if first_mismatch.is_none() {
        first_mismatch = (1..=order).find(|&k| &n[k] - &n[k - 1] != -z.coefficients[k - 1].clone());
    }
    Ok(PzCheck {
        order,
        holds: first_mismatch.is_none(),
        first_mismatch,
    })
}

/// Outcome of comparing Z on (c + pZ_p) × Z_p^{n−1} with p^{-1}·Z of the fiber
/// polynomial f(c, ·).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberCheck {
    pub p: u64,
    #[serde(serialize_with = "crate::json::display")]
    pub c: BigRational,
    pub order: usize,
    #[serde(serialize_with = "crate::json::display_vec")]
    pub lhs: Vec<BigRational>,
    #[serde(serialize_with = "crate::json::display_vec")]
    pub rhs: Vec<BigRational>,
    pub equal: bool,
}

/// Reports whether the zeta truncation of f on (c + pZ_p) × Z_p^{n−1} equals
/// p^{-1} times that of f(c, x_2, …, x_n) on the full support.
pub fn check_fiber_product(
    f: &Polynomial,
    c: &BigRational,
    p: u64,
    order: usize,
) -> Result<FiberCheck> {
    let n = f.arity();
    if n < 2 {
        return Err(Error::invalid(
            "the fiber check needs at least two variables",
        ));
    }
    let pb = num_bigint::BigInt::from(p);
    if (c.denom() % &pb).is_zero() {
        return Err(Error::invalid(format!(
            "c = {c} is not integral at p = {p}"
        )));
    }
    let ring = crate::polyring::IntegersMod::new(p)?;
    let den_inv = ring
        .inverse(ring.reduce_int(c.denom()))
        .ok_or_else(|| Error::NotInvertible(c.to_string()))?;
    let a = crate::arith::mul_mod(ring.reduce_int(c.numer()), den_inv, p);
    let mut factors = vec![SupportFactor::Residue(a)];
    factors.extend(std::iter::repeat_n(SupportFactor::Full, n - 1));
    let lhs = zeta_truncation(f, p, order, &BasicStepSupport::new(factors))?.coefficients;
    let fc = f.specialize_first(c)?;
    let inv_p = rpow(p, -1);
    let rhs: Vec<BigRational> = zeta_truncation(&fc, p, order, &BasicStepSupport::full(n - 1))?
        .coefficients
        .into_iter()
        .map(|v| v * &inv_p)
        .collect();
    let equal = lhs == rhs;
    Ok(FiberCheck {
        p,
        c: c.clone(),
        order,
        lhs,
        rhs,
        equal,
    })
}
