//! Multivariate polynomials over Q with exact coefficients.
//!
//! Terms are kept in graded-lexicographic order, so printing and hashing are
//! deterministic. Evaluation is generic over a [`CoeffRing`].

mod modpoly;
mod parse;
mod ring;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub use modpoly::ModPoly;
pub use parse::{infer_arity, parse_polynomial};
pub use ring::{CoeffRing, Integers, IntegersMod, Rationals};

/// Exponent vector of a monomial, one entry per variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    /// The monomial `x_{i+1}` (0-based index `i`).
    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    // graded lex: total degree first, then x1 exponent, then x2, ...
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in `n` variables with nonzero rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: BigRational) -> Self {
        let mut f = Polynomial::zero(n);
        f.add_term(Monomial::one(n), c);
        f
    }

    pub fn from_int(n: usize, c: i64) -> Self {
        Polynomial::constant(n, BigRational::from_integer(c.into()))
    }

    /// The variable `x_{i+1}` (0-based index `i`).
    pub fn var(n: usize, i: usize) -> Self {
        let mut f = Polynomial::zero(n);
        f.add_term(Monomial::var(n, i), BigRational::one());
        f
    }

    /// Builds a polynomial from (exponents, coefficient) pairs, merging
    /// repeated monomials and dropping zeros.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, BigRational)>,
    {
        let mut f = Polynomial::zero(n);
        for (e, c) in terms {
            if e.len() != n {
                return Err(Error::invalid(format!(
                    "monomial of length {} in a polynomial of arity {n}",
                    e.len()
                )));
            }
            f.add_term(Monomial(e), c);
        }
        Ok(f)
    }

    pub(crate) fn add_term(&mut self, mono: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, c);
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms from the largest monomial down.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter().rev()
    }

    pub fn coefficient(&self, mono: &Monomial) -> BigRational {
        self.terms
            .get(mono)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn constant_term(&self) -> BigRational {
        self.coefficient(&Monomial::one(self.n))
    }

    /// Total degree; `None` stands for −∞ (the zero polynomial).
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Largest exponent of variable `i` (0 for the zero polynomial).
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_constant)
    }

    /// Whether all terms share one total degree; the zero polynomial counts
    /// as homogeneous of degree −∞ (`None`).
    pub fn is_homogeneous(&self) -> (bool, Option<u32>) {
        let mut degrees = self.terms.keys().map(Monomial::degree);
        match degrees.next() {
            None => (true, None),
            Some(d) => (degrees.all(|e| e == d), Some(d)),
        }
    }

    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[i] -= 1;
            out.add_term(Monomial(exps), c * BigRational::from_integer(e.into()));
        }
        out
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.n).map(|i| self.derivative(i)).collect()
    }

    /// Sum of the terms of maximal total degree.
    pub fn leading_form(&self) -> Result<Polynomial> {
        let d = self
            .degree()
            .ok_or_else(|| Error::invalid("leading form of the zero polynomial"))?;
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.degree() == d)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        Ok(Polynomial { n: self.n, terms })
    }

    /// Substitutes `x1 := a`, giving a polynomial in `x2..xn` (renumbered
    /// `x1..x_{n-1}`).
    pub fn specialize_first(&self, a: &BigRational) -> Result<Polynomial> {
        if self.n < 2 {
            return Err(Error::invalid(
                "specialize_first needs at least two variables",
            ));
        }
        let mut out = Polynomial::zero(self.n - 1);
        for (m, c) in &self.terms {
            let factor = pow_rational(a, m.0[0]);
            out.add_term(Monomial(m.0[1..].to_vec()), c * factor);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        if c.is_zero() {
            return out;
        }
        for (m, a) in &self.terms {
            out.terms.insert(m.clone(), a * c);
        }
        out
    }

    /// `f - c` for a rational shift `c`.
    pub fn shifted(&self, c: &BigRational) -> Polynomial {
        let mut out = self.clone();
        out.add_term(Monomial::one(self.n), -c.clone());
        out
    }

    /// Least common multiple of all coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Fails with [`Error::BadPrime`] if `p` divides some denominator.
    pub fn check_prime(&self, p: u64) -> Result<()> {
        let big = BigInt::from(p);
        if self.terms.values().any(|c| (c.denom() % &big).is_zero()) {
            return Err(Error::BadPrime { p });
        }
        Ok(())
    }

    /// Horner evaluation in an arbitrary coefficient ring.
    pub fn evaluate<R: CoeffRing>(&self, point: &[R::Elem], ring: &R) -> Result<R::Elem> {
        if point.len() != self.n {
            return Err(Error::invalid(format!(
                "point of length {} for a polynomial in {} variables",
                point.len(),
                self.n
            )));
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            terms.push((m.0.as_slice(), ring.from_rational(c)?));
        }
        Ok(horner(&terms, 0, point, ring))
    }

    /// Term-by-term evaluation; slower than [`Polynomial::evaluate`] and kept
    /// as an independent cross-check.
    pub fn evaluate_termwise<R: CoeffRing>(&self, point: &[R::Elem], ring: &R) -> Result<R::Elem> {
        let mut acc = ring.zero();
        for (m, c) in &self.terms {
            let mut t = ring.from_rational(c)?;
            for (x, &e) in point.iter().zip(&m.0) {
                for _ in 0..e {
                    t = ring.mul(&t, x);
                }
            }
            acc = ring.add(&acc, &t);
        }
        Ok(acc)
    }

    /// Reduction modulo `modulus`; fails if a denominator is not invertible.
    pub fn reduce_mod(&self, modulus: u64) -> Result<ModPoly> {
        let ring = IntegersMod::new(modulus)?;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in self.terms.iter().rev() {
            let v = ring.from_rational(c)?;
            if v != 0 {
                terms.push((m.0.clone(), v));
            }
        }
        Ok(ModPoly::new(modulus, self.n, terms))
    }

    /// The same polynomial viewed in `n_new >= n` variables.
    pub fn extend_arity(&self, n_new: usize) -> Polynomial {
        assert!(n_new >= self.n);
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut e = m.0.clone();
                e.resize(n_new, 0);
                (Monomial(e), c.clone())
            })
            .collect();
        Polynomial { n: n_new, terms }
    }
}

fn pow_rational(a: &BigRational, e: u32) -> BigRational {
    let mut r = BigRational::one();
    for _ in 0..e {
        r *= a;
    }
    r
}

// Evaluates the terms (all sharing exponents of variables < var) as a
// polynomial in x_var with coefficients in the remaining variables.
fn horner<R: CoeffRing>(
    terms: &[(&[u32], R::Elem)],
    var: usize,
    point: &[R::Elem],
    ring: &R,
) -> R::Elem {
    if terms.is_empty() {
        return ring.zero();
    }
    if var == point.len() {
        // all exponents consumed: terms collapse to one constant
        return terms
            .iter()
            .fold(ring.zero(), |acc, (_, c)| ring.add(&acc, c));
    }
    let mut groups: BTreeMap<u32, Vec<(&[u32], R::Elem)>> = BTreeMap::new();
    for (e, c) in terms {
        groups.entry(e[var]).or_default().push((e, c.clone()));
    }
    let top = *groups.keys().next_back().unwrap();
    let x = &point[var];
    let mut acc = ring.zero();
    for k in (0..=top).rev() {
        acc = ring.mul(&acc, x);
        if let Some(g) = groups.get(&k) {
            acc = ring.add(&acc, &horner(g, var + 1, point, ring));
        }
    }
    acc
}

// ============================================================================
// Arithmetic
// ============================================================================

fn check_arity(a: &Polynomial, b: &Polynomial) {
    assert_eq!(a.n, b.n, "polynomials in different numbers of variables");
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        check_arity(self, rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        check_arity(self, rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        check_arity(self, rhs);
        let mut out = Polynomial::zero(self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-BigRational::one())
    }
}

// ============================================================================
// Printing
// ============================================================================

fn fmt_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn fmt_monomial(m: &Monomial) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("x{}", i + 1)),
            _ => parts.push(format!("x{}^{}", i + 1, e)),
        }
    }
    parts.join("*")
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms().enumerate() {
            let negative = c.is_negative();
            let a = c.abs();
            let body = if m.is_constant() {
                fmt_rational(&a)
            } else if a.is_one() {
                fmt_monomial(m)
            } else {
                format!("{}*{}", fmt_rational(&a), fmt_monomial(m))
            };
            match (idx, negative) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn grlex_orders_by_degree_then_lex() {
        let a = Monomial::new(vec![2, 1]);
        let b = Monomial::new(vec![1, 0]);
        let c = Monomial::new(vec![0, 3]);
        assert!(a > b);
        assert!(a > c);
        assert!(Monomial::new(vec![1, 2]) > Monomial::new(vec![0, 3]));
    }

    #[test]
    fn example_72_parses_to_two_terms() {
        let f = parse_polynomial("x1^2*x2 - x1", 2).unwrap();
        assert_eq!(f.num_terms(), 2);
        assert_eq!(f.coefficient(&Monomial::new(vec![2, 1])), q(1, 1));
        assert_eq!(f.coefficient(&Monomial::new(vec![1, 0])), q(-1, 1));
        assert_eq!(f.to_string(), "x1^2*x2 - x1");
    }

    #[test]
    fn zero_polynomial_has_degree_minus_infinity() {
        let f = parse_polynomial("0", 3).unwrap();
        assert!(f.is_zero());
        assert_eq!(f.degree(), None);
        assert_eq!(f.is_homogeneous(), (true, None));
    }

    #[test]
    fn sum_of_squares_has_degree_two() {
        let f = parse_polynomial("x1^2 + x2^2", 2).unwrap();
        assert_eq!(f.num_terms(), 2);
        assert_eq!(f.degree(), Some(2));
        assert_eq!(f.is_homogeneous(), (true, Some(2)));
    }

    #[test]
    fn evaluation_examples() {
        let f = parse_polynomial("x1^2*x2 - x1", 2).unwrap();
        let z = Integers;
        assert_eq!(
            f.evaluate(&[1.into(), 1.into()], &z).unwrap(),
            BigInt::zero()
        );
        let r9 = IntegersMod::new(9).unwrap();
        assert_eq!(f.evaluate(&[2, 3], &r9).unwrap(), 1);
        let g = parse_polynomial("x1/2", 1).unwrap();
        let r3 = IntegersMod::new(3).unwrap();
        assert_eq!(g.evaluate(&[1], &r3).unwrap(), 2);
        let r4 = IntegersMod::new(4).unwrap();
        assert!(matches!(
            g.evaluate(&[1], &r4),
            Err(Error::NotInvertible(_))
        ));
    }

    #[test]
    fn gradient_examples() {
        let f = parse_polynomial("x1^2 + x2^2", 2).unwrap();
        let g = f.gradient();
        assert_eq!(g[0].to_string(), "2*x1");
        assert_eq!(g[1].to_string(), "2*x2");
        let f = parse_polynomial("x1^2*x2 - x1", 2).unwrap();
        let g = f.gradient();
        assert_eq!(g[0].to_string(), "2*x1*x2 - 1");
        assert_eq!(g[1].to_string(), "x1^2");
        let c = parse_polynomial("7/2", 3).unwrap();
        assert!(c.gradient().iter().all(Polynomial::is_zero));
    }

    #[test]
    fn leading_form_examples() {
        let f = parse_polynomial("x1^2*x2 - x1", 2).unwrap();
        assert_eq!(f.leading_form().unwrap().to_string(), "x1^2*x2");
        let h = parse_polynomial("x1^3 + x2^3", 2).unwrap();
        assert_eq!(h.leading_form().unwrap(), h);
        let l = parse_polynomial("x1 + x2 + 1", 2).unwrap();
        assert_eq!(l.leading_form().unwrap().to_string(), "x1 + x2");
        assert!(Polynomial::zero(2).leading_form().is_err());
    }

    #[test]
    fn specialize_first_examples() {
        let f = parse_polynomial("x1^2*x2 - x1", 2).unwrap();
        assert_eq!(f.specialize_first(&q(1, 1)).unwrap().to_string(), "x1 - 1");
        let g = parse_polynomial("x1^2 + x2^2", 2).unwrap();
        assert_eq!(g.specialize_first(&q(0, 1)).unwrap().to_string(), "x1^2");
        assert!(parse_polynomial("x1", 1)
            .unwrap()
            .specialize_first(&q(0, 1))
            .is_err());
    }

    #[test]
    fn homogeneity_examples() {
        assert_eq!(
            parse_polynomial("x1^2 + x2^2", 2).unwrap().is_homogeneous(),
            (true, Some(2))
        );
        assert!(
            !parse_polynomial("x1^2*x2 - x1", 2)
                .unwrap()
                .is_homogeneous()
                .0
        );
    }

    #[test]
    fn printing_handles_rationals_and_signs() {
        let f = parse_polynomial("-3/4*x1^2 + x2 - 1/2", 2).unwrap();
        assert_eq!(f.to_string(), "-3/4*x1^2 + x2 - 1/2");
        assert_eq!(parse_polynomial(&f.to_string(), 2).unwrap(), f);
    }

    #[test]
    fn reduce_mod_refuses_bad_primes() {
        let f = parse_polynomial("x1/3 + 1", 1).unwrap();
        assert!(f.reduce_mod(9).is_err());
        assert!(f.check_prime(3).is_err());
        assert!(f.check_prime(5).is_ok());
        let g = f.reduce_mod(25).unwrap();
        assert_eq!(g.eval(&[3]), 2);
    }
}
