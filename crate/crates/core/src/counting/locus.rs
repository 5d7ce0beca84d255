use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use super::fqengine::common_zeros;
use crate::error::{Error, Result};
use crate::localring::FqField;
use crate::polyring::Polynomial;

/// A dimension: a non-negative integer or −∞ for the empty scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dim {
    NegInfinity,
    Finite(i64),
}

impl Dim {
    pub fn finite(self) -> Option<i64> {
        match self {
            Dim::Finite(d) => Some(d),
            Dim::NegInfinity => None,
        }
    }

    /// The projective convention used for the singular locus at infinity:
    /// empty counts as −1.
    pub fn or_minus_one(self) -> i64 {
        self.finite().unwrap_or(-1)
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::NegInfinity => write!(f, "-inf"),
            Dim::Finite(d) => write!(f, "{d}"),
        }
    }
}

impl Serialize for Dim {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dim::NegInfinity => s.serialize_str("-inf"),
            Dim::Finite(d) => s.serialize_i64(*d),
        }
    }
}

/// Per-prime dimension estimates and their consensus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimensionEstimate {
    pub per_prime: BTreeMap<u64, Dim>,
    pub consensus: Option<Dim>,
    pub ambiguous: bool,
}

/// Point counts of a locus over F_{p^k}, k = 1..K, with a dimension estimate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocusSummary {
    pub locus: String,
    pub projective: bool,
    /// counts[p][k-1] = number of points over F_{p^k}
    pub counts: BTreeMap<u64, Vec<u64>>,
    pub estimate: DimensionEstimate,
}

/// {∂f/∂x_i = 0}: the critical locus C_f.
pub fn critical_system(f: &Polynomial) -> Vec<Polynomial> {
    f.gradient()
}

/// {f = 0, ∂f/∂x_i = 0}: the singular locus S_f.
pub fn singular_system(f: &Polynomial) -> Vec<Polynomial> {
    let mut s = vec![f.clone()];
    s.extend(f.gradient());
    s
}

/// The homogeneous system {∂f_d/∂x_1, …, ∂f_d/∂x_n, f_d} whose projective
/// zeros form the singular locus of the hypersurface at infinity.
pub fn singular_locus_at_infinity(f: &Polynomial) -> Result<Vec<Polynomial>> {
    match f.degree() {
        None | Some(0) => Err(Error::invalid(
            "singular locus at infinity of a constant polynomial",
        )),
        Some(_) => {
            let fd = f.leading_form()?;
            let mut s = fd.gradient();
            s.push(fd);
            Ok(s)
        }
    }
}

/// Affine or projective point count of the common zeros of `system`.
pub fn locus_count(
    system: &[Polynomial],
    field: &FqField,
    projective: bool,
    budget: u64,
) -> Result<u64> {
    let n = system
        .first()
        .map(Polynomial::arity)
        .ok_or_else(|| Error::invalid("empty system"))?;
    if system.iter().any(|f| f.arity() != n) {
        return Err(Error::invalid("system polynomials have different arities"));
    }
    if projective && system.iter().any(|f| !f.is_homogeneous().0) {
        return Err(Error::invalid(
            "projective count of a non-homogeneous system",
        ));
    }
    for f in system {
        f.check_prime(field.p())?;
    }
    let affine = common_zeros(system, n, field, budget)?;
    if !projective {
        return Ok(affine);
    }
    // the origin is a zero unless some member is a nonzero constant
    let origin = system
        .iter()
        .all(|f| f.constant_term() == num_rational::BigRational::from_integer(0.into()));
    let nonzero = affine - origin as u64;
    let q1 = field.q() - 1;
    assert_eq!(
        nonzero % q1,
        0,
        "projective count: {nonzero} nonzero zeros not divisible by q - 1"
    );
    Ok(nonzero / q1)
}

/// Dimension estimates from counts over F_{p^k}, k = 1..K, for several primes.
pub fn estimate_dimension(counts: &BTreeMap<u64, Vec<u64>>) -> Result<DimensionEstimate> {
    if counts.len() < 2 {
        return Err(Error::InsufficientData(
            "dimension estimate needs at least two primes".into(),
        ));
    }
    let mut per_prime = BTreeMap::new();
    for (&p, c) in counts {
        if c.len() < 3 {
            return Err(Error::InsufficientData(format!(
                "only {} extension degrees for p = {p}",
                c.len()
            )));
        }
        let d = match c.iter().rposition(|&v| v > 0) {
            None => Dim::NegInfinity,
            Some(i) => {
                let k = (i + 1) as f64;
                Dim::Finite(((c[i] as f64).ln() / (k * (p as f64).ln())).round() as i64)
            }
        };
        per_prime.insert(p, d);
    }
    let first = *per_prime.values().next().unwrap();
    let agree = per_prime.values().all(|&d| d == first);
    Ok(DimensionEstimate {
        consensus: agree.then_some(first),
        ambiguous: !agree,
        per_prime,
    })
}

/// Counts `system` over F_{p^k} for every prime and k = 1..=k_max, then
/// estimates the dimension.
pub fn locus_summary(
    tag: &str,
    system: &[Polynomial],
    projective: bool,
    primes: &[u64],
    k_max: usize,
    budget: u64,
) -> Result<LocusSummary> {
    let mut counts = BTreeMap::new();
    for &p in primes {
        let mut row = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            let field = FqField::new(p, k)?;
            row.push(locus_count(system, &field, projective, budget)?);
        }
        counts.insert(p, row);
    }
    let estimate = estimate_dimension(&counts)?;
    Ok(LocusSummary {
        locus: tag.to_string(),
        projective,
        counts,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse_polynomial;

    fn poly(s: &str, n: usize) -> Polynomial {
        parse_polynomial(s, n).unwrap()
    }

    #[test]
    fn locus_examples() {
        let f5 = FqField::new(5, 1).unwrap();
        let sq = poly("x1^2 + x2^2", 2);
        assert_eq!(
            locus_count(&critical_system(&sq), &f5, false, 1 << 20).unwrap(),
            1
        );
        let ex = poly("x1^2*x2 - x1", 2);
        for (p, k) in [(3, 1), (3, 2), (5, 1), (5, 2)] {
            let field = FqField::new(p, k).unwrap();
            assert_eq!(
                locus_count(&critical_system(&ex), &field, false, 1 << 20).unwrap(),
                0
            );
        }
        let f7 = FqField::new(7, 1).unwrap();
        assert_eq!(
            locus_count(&singular_system(&poly("x1*x2", 2)), &f7, false, 1 << 20).unwrap(),
            1
        );
        assert!(locus_count(std::slice::from_ref(&ex), &f5, true, 1 << 20).is_err());
    }

    #[test]
    fn singular_locus_at_infinity_examples() {
        let f5 = FqField::new(5, 1).unwrap();
        let sys = singular_locus_at_infinity(&poly("x1^2 + x2^2", 2)).unwrap();
        assert_eq!(sys.len(), 3);
        assert_eq!(locus_count(&sys, &f5, true, 1 << 20).unwrap(), 0);
        let sys = singular_locus_at_infinity(&poly("x1^2*x2 - x1", 2)).unwrap();
        assert_eq!(sys[2].to_string(), "x1^2*x2");
        assert_eq!(locus_count(&sys, &f5, true, 1 << 20).unwrap(), 1);
        assert!(singular_locus_at_infinity(&poly("3", 2)).is_err());
    }

    #[test]
    fn dimension_examples() {
        let mut c = BTreeMap::new();
        c.insert(5, vec![0, 0, 0]);
        c.insert(7, vec![0, 0, 0]);
        assert_eq!(
            estimate_dimension(&c).unwrap().consensus,
            Some(Dim::NegInfinity)
        );
        c.insert(5, vec![1, 1, 1]);
        c.insert(7, vec![1, 1, 1]);
        assert_eq!(
            estimate_dimension(&c).unwrap().consensus,
            Some(Dim::Finite(0))
        );
        c.insert(5, vec![5, 25, 125]);
        c.insert(7, vec![7, 49, 343]);
        assert_eq!(
            estimate_dimension(&c).unwrap().consensus,
            Some(Dim::Finite(1))
        );
        c.insert(7, vec![1, 1, 1]);
        let e = estimate_dimension(&c).unwrap();
        assert!(e.ambiguous);
        assert_eq!(e.consensus, None);
        c.remove(&7);
        assert!(estimate_dimension(&c).is_err());
    }
}
