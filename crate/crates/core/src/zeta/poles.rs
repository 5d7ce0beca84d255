//! Pole classification of a reconstructed Poincaré series: the factor
//! (1 − T/p) is split off, the rest of the denominator is decomposed into
//! square-free parts and rational roots over Q.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::rational::{QPoly, RationalFn};
use crate::localring::is_prime;

/// One factor of the denominator, normalized to constant term 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PoleFactor {
    #[serde(serialize_with = "crate::json::display")]
    pub factor: QPoly,
    pub coefficients: Vec<String>,
    pub degree: usize,
    pub multiplicity: usize,
    /// The factor vanishes at T = p.
    pub contains_t_eq_p: bool,
    /// The factor is proved irreducible over Q (linear, or of degree ≤ 3
    /// without rational roots).
    pub irreducible: bool,
}

/// Poles of a rational function in T, split into the trivial simple pole at
/// T = p and the rest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PoleReport {
    pub p: u64,
    pub poles: Vec<PoleFactor>,
    /// Multiplicity of (1 − T/p) in the denominator.
    pub multiplicity_at_p: usize,
    pub has_trivial_simple_pole_at_p: bool,
    pub has_nontrivial_pole: bool,
}

fn factor_entry(f: QPoly, multiplicity: usize, p: &BigRational, irreducible: bool) -> PoleFactor {
    let f = f.unit_constant();
    PoleFactor {
        coefficients: f.to_strings(),
        degree: f.degree().unwrap_or(0),
        contains_t_eq_p: f.eval(p).is_zero(),
        multiplicity,
        irreducible,
        factor: f,
    }
}

// Square-free decomposition (Yun): returns (a_i, i) with f = c·Π a_i^i.
fn square_free(f: &QPoly) -> Vec<(QPoly, usize)> {
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let f = f.monic();
    let df = f.derivative();
    let a0 = f.gcd(&df);
    let mut b = f.divrem(&a0).0;
    let c = df.divrem(&a0).0;
    let mut d = c.sub(&b.derivative());
    let mut i = 1;
    while b.degree().unwrap_or(0) > 0 {
        let a = b.gcd(&d);
        let nb = b.divrem(&a).0;
        let nc = d.divrem(&a).0;
        d = nc.sub(&nb.derivative());
        if a.degree().unwrap_or(0) > 0 {
            out.push((a, i));
        }
        b = nb;
        i += 1;
    }
    out
}

// Positive divisors of |v|, when |v| fits a word and factors by trial division
// up to 10^6 with a prime cofactor.
fn divisors(v: &BigInt) -> Option<Vec<u64>> {
    let mut x = v.abs().to_u64()?;
    if x == 0 {
        return None;
    }
    let mut primes: Vec<(u64, u32)> = Vec::new();
    let mut d = 2u64;
    while d * d <= x && d <= 1_000_000 {
        let mut e = 0;
        while x % d == 0 {
            x /= d;
            e += 1;
        }
        if e > 0 {
            primes.push((d, e));
        }
        d += 1;
    }
    if x > 1 {
        if d * d <= x && !is_prime(x) {
            return None;
        }
        primes.push((x, 1));
    }
    let mut divs = vec![1u64];
    for (q, e) in primes {
        let base = divs.clone();
        let mut pw = 1u64;
        for _ in 0..e {
            pw *= q;
            divs.extend(base.iter().map(|b| b * pw));
        }
    }
    divs.sort_unstable();
    Some(divs)
}

// Rational roots of a polynomial by the rational root test; None when the
// candidate set could not be enumerated.
fn rational_roots(f: &QPoly) -> Option<Vec<BigRational>> {
    let lcm = f
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = f
        .coeffs()
        .iter()
        .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let mut roots = Vec::new();
    // a zero constant term is excluded by the caller (den(0) = 1)
    let a0 = divisors(&ints[0])?;
    let an = divisors(ints.last().unwrap())?;
    for &r in &a0 {
        for &s in &an {
            if r.gcd(&s) != 1 {
                continue;
            }
            for sign in [1i64, -1] {
                let cand = BigRational::new(BigInt::from(r) * sign, BigInt::from(s));
                if f.eval(&cand).is_zero() {
                    roots.push(cand);
                }
            }
        }
    }
    roots.sort();
    Some(roots)
}

/// Splits off (1 − T/p) as often as possible and factors the remainder of the
/// denominator into square-free parts, linear factors over Q and
/// higher-degree factors.
pub fn classify_poles(r: &RationalFn, p: u64) -> PoleReport {
    // normalize defensively so that a scaled pair gives the same report
    let r =
        RationalFn::new(r.numerator.clone(), r.denominator.clone()).unwrap_or_else(|_| r.clone());
    let pq = BigRational::from_integer(p.into());
    let lin = QPoly::one_minus_t_over(&pq);
    let mut den = r.denominator.clone();
    let mut e = 0;
    while den.degree().unwrap_or(0) > 0 && den.eval(&pq).is_zero() {
        den = den.divrem(&lin).0;
        e += 1;
    }
    let mut poles = Vec::new();
    if e > 0 {
        poles.push(factor_entry(lin, e, &pq, true));
    }
    for (part, mult) in square_free(&den) {
        let mut rest = part.clone();
        match rational_roots(&part) {
            Some(roots) => {
                for root in roots {
                    let l = QPoly::one_minus_t_over(&root);
                    rest = rest.divrem(&l).0;
                    poles.push(factor_entry(l, mult, &pq, true));
                }
                if rest.degree().unwrap_or(0) > 0 {
                    let irreducible = rest.degree().unwrap() <= 3;
                    poles.push(factor_entry(rest, mult, &pq, irreducible));
                }
            }
            None => {
                let irreducible = part.degree() == Some(1);
                poles.push(factor_entry(part, mult, &pq, irreducible));
            }
        }
    }
    let remaining = den.degree().unwrap_or(0);
    PoleReport {
        p,
        poles,
        multiplicity_at_p: e,
        has_trivial_simple_pole_at_p: e == 1,
        has_nontrivial_pole: e >= 2 || remaining >= 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn poly(c: &[(i64, i64)]) -> QPoly {
        QPoly::new(c.iter().map(|&(a, b)| q(a, b)).collect())
    }

    #[test]
    fn simple_pole_at_p_is_trivial() {
        let r = RationalFn::new(QPoly::one(), poly(&[(1, 1), (-1, 3)])).unwrap();
        let rep = classify_poles(&r, 3);
        assert!(rep.has_trivial_simple_pole_at_p);
        assert!(!rep.has_nontrivial_pole);
        assert_eq!(rep.poles.len(), 1);
        assert!(rep.poles[0].contains_t_eq_p);
    }

    #[test]
    fn irrational_pair_is_nontrivial() {
        let r = RationalFn::new(QPoly::one(), poly(&[(1, 1), (0, 1), (-1, 3)])).unwrap();
        let rep = classify_poles(&r, 3);
        assert!(rep.has_nontrivial_pole);
        assert_eq!(rep.multiplicity_at_p, 0);
        assert_eq!(rep.poles.len(), 1);
        assert_eq!(rep.poles[0].degree, 2);
        assert!(rep.poles[0].irreducible);
        assert_eq!(rep.poles[0].factor.to_string(), "1 - 1/3*T^2");
    }

    #[test]
    fn double_pole_at_p_is_nontrivial() {
        let l = poly(&[(1, 1), (-1, 5)]);
        let r = RationalFn::new(QPoly::one(), l.mul(&l)).unwrap();
        let rep = classify_poles(&r, 5);
        assert_eq!(rep.multiplicity_at_p, 2);
        assert!(!rep.has_trivial_simple_pole_at_p);
        assert!(rep.has_nontrivial_pole);
    }

    #[test]
    fn no_poles_for_polynomials() {
        let r = RationalFn::new(QPoly::one(), QPoly::one()).unwrap();
        let rep = classify_poles(&r, 7);
        assert!(rep.poles.is_empty());
        assert!(!rep.has_nontrivial_pole);
    }

    #[test]
    fn mixed_denominator_factors() {
        // (1 - T/5)(1 - T/25)^2(1 + T^2/5)
        let a = poly(&[(1, 1), (-1, 5)]);
        let b = poly(&[(1, 1), (-1, 25)]);
        let c = poly(&[(1, 1), (0, 1), (1, 5)]);
        let den = a.mul(&b).mul(&b).mul(&c);
        let rep = classify_poles(&RationalFn::new(poly(&[(2, 1), (1, 1)]), den).unwrap(), 5);
        assert_eq!(rep.multiplicity_at_p, 1);
        assert!(rep.has_trivial_simple_pole_at_p);
        assert!(rep.has_nontrivial_pole);
        let mults: Vec<_> = rep
            .poles
            .iter()
            .map(|f| (f.degree, f.multiplicity))
            .collect();
        assert_eq!(mults, vec![(1, 1), (2, 1), (1, 2)]);
    }

    #[test]
    fn classification_is_stable_under_common_units() {
        let num = poly(&[(1, 1), (1, 2)]);
        let den = poly(&[(1, 1), (0, 1), (-1, 3)]);
        let base = classify_poles(&RationalFn::new(num.clone(), den.clone()).unwrap(), 3);
        let unit = QPoly::constant(q(-7, 4));
        let scaled = RationalFn {
            numerator: num.mul(&unit),
            denominator: den.mul(&unit),
        };
        assert_eq!(classify_poles(&scaled, 3), base);
    }
}
