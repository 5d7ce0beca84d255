//! Univariate polynomials over Q in the variable T, rational functions, and
//! reconstruction of a rational function from power-series coefficients.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A polynomial in T with rational coefficients, stored low to high without
/// trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct QPoly(Vec<BigRational>);

fn int(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

impl QPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        QPoly(coeffs)
    }

    pub fn zero() -> Self {
        QPoly(Vec::new())
    }

    pub fn one() -> Self {
        QPoly(vec![BigRational::one()])
    }

    pub fn constant(c: BigRational) -> Self {
        QPoly::new(vec![c])
    }

    /// 1 - T/a
    pub fn one_minus_t_over(a: &BigRational) -> Self {
        QPoly::new(vec![BigRational::one(), -a.recip()])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.0.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> BigRational {
        self.0.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        self.0
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * t + c)
    }

    pub fn scale(&self, c: &BigRational) -> QPoly {
        QPoly::new(self.0.iter().map(|a| a * c).collect())
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.0.len().max(other.0.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        let n = self.0.len().max(other.0.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn divrem(&self, d: &QPoly) -> (QPoly, QPoly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.lead();
        let mut r = self.0.clone();
        if r.len() <= dd {
            return (QPoly::zero(), self.clone());
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for k in (dd..r.len()).rev() {
            let c = &r[k] / &lead;
            if !c.is_zero() {
                for i in 0..=dd {
                    r[k - dd + i] -= &c * &d.0[i];
                }
            }
            q[k - dd] = c;
        }
        r.truncate(dd);
        (QPoly::new(q), QPoly::new(r))
    }

    pub fn derivative(&self) -> QPoly {
        QPoly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * int(i as i64))
                .collect(),
        )
    }

    pub fn monic(&self) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        self.scale(&self.lead().recip())
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Scaled so that the constant term is 1 (requires a nonzero constant).
    pub fn unit_constant(&self) -> QPoly {
        let c = self.coeff(0);
        assert!(!c.is_zero(), "constant term is zero");
        self.scale(&c.recip())
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(fmt_q).collect()
    }
}

fn fmt_q(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let a = c.abs();
            let body = match i {
                0 => fmt_q(&a),
                _ => {
                    let t = if i == 1 {
                        "T".to_string()
                    } else {
                        format!("T^{i}")
                    };
                    if a.is_one() {
                        t
                    } else {
                        format!("{}*{t}", fmt_q(&a))
                    }
                }
            };
            match (first, c.is_negative()) {
                (true, false) => write!(f, "{body}")?,
                (true, true) => write!(f, "-{body}")?,
                (false, false) => write!(f, " + {body}")?,
                (false, true) => write!(f, " - {body}")?,
            }
            first = false;
        }
        Ok(())
    }
}

/// numerator / denominator, normalized so that the denominator has constant
/// term 1 and the two are coprime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFn {
    pub numerator: QPoly,
    pub denominator: QPoly,
}

impl RationalFn {
    /// Normalizes num/den; the denominator must not vanish at T = 0.
    pub fn new(num: QPoly, den: QPoly) -> Result<Self> {
        if den.coeff(0).is_zero() {
            return Err(Error::invalid("denominator vanishes at T = 0"));
        }
        let g = num.gcd(&den);
        let (num, den) = if g.degree().unwrap_or(0) > 0 {
            (num.divrem(&g).0, den.divrem(&g).0)
        } else {
            (num, den)
        };
        let s = den.coeff(0).recip();
        Ok(RationalFn {
            numerator: num.scale(&s),
            denominator: den.scale(&s),
        })
    }

    /// Power-series coefficients of orders 0..len.
    pub fn expand(&self, len: usize) -> Vec<BigRational> {
        let mut out: Vec<BigRational> = Vec::with_capacity(len);
        for k in 0..len {
            // den(0) = 1: a_k = num_k - Σ_{i≥1} den_i a_{k-i}
            let mut v = self.numerator.coeff(k);
            for i in 1..=k.min(self.denominator.degree().unwrap_or(0)) {
                v -= self.denominator.coeff(i) * &out[k - i];
            }
            out.push(v);
        }
        out
    }

    /// deg num ≤ deg den (the zero numerator counts).
    pub fn degree_property(&self) -> bool {
        match self.numerator.degree() {
            None => true,
            Some(d) => d <= self.denominator.degree().unwrap_or(0),
        }
    }
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator == QPoly::one() {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "({})/({})", self.numerator, self.denominator)
        }
    }
}

impl Serialize for RationalFn {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RationalFn", 3)?;
        st.serialize_field("numerator", &self.numerator.to_strings())?;
        st.serialize_field("denominator", &self.denominator.to_strings())?;
        st.serialize_field("text", &self.to_string())?;
        st.end()
    }
}

// Solves A x = b over Q by Gaussian elimination; free variables are set to
// zero. Returns None if the system is inconsistent.
fn solve(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, piv);
        b.swap(r, piv);
        let inv = a[r][c].recip();
        for j in c..cols {
            a[r][j] *= &inv;
        }
        b[r] *= &inv;
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let factor = a[i][c].clone();
                for j in c..cols {
                    let t = &factor * &a[r][j];
                    a[i][j] -= t;
                }
                let t = &factor * &b[r];
                b[i] -= t;
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if b[r..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = b[i].clone();
    }
    Some(x)
}

/// Finds the smallest d ≤ d_max for which a denominator of degree ≤ d and a
/// numerator of degree ≤ d reproduce the series. The fit uses a_0..a_{2d}
/// and every later coefficient is checked.
pub fn reconstruct_rational(series: &[BigRational], d_max: usize) -> Result<RationalFn> {
    if series.len() < 2 * d_max + 2 {
        return Err(Error::InsufficientData(format!(
            "{} coefficients supplied, reconstruction with d_max = {d_max} needs {}",
            series.len(),
            2 * d_max + 2
        )));
    }
    for d in 0..=d_max {
        // Σ_{i=1..d} q_i a_{k-i} = -a_k for k = d+1..2d
        let a_mat: Vec<Vec<BigRational>> = (d + 1..=2 * d)
            .map(|k| (1..=d).map(|i| series[k - i].clone()).collect())
            .collect();
        let rhs: Vec<BigRational> = (d + 1..=2 * d).map(|k| -series[k].clone()).collect();
        let Some(q) = solve(a_mat, rhs) else { continue };
        let mut den = vec![BigRational::one()];
        den.extend(q);
        let recurrence_holds = (d + 1..series.len()).all(|k| {
            let s: BigRational = (0..=d).map(|i| &den[i] * &series[k - i]).sum();
            s.is_zero()
        });
        if !recurrence_holds {
            continue;
        }
        let num: Vec<BigRational> = (0..=d)
            .map(|k| (0..=k).map(|i| &den[i] * &series[k - i]).sum())
            .collect();
        let r = RationalFn::new(QPoly::new(num), QPoly::new(den))?;
        debug_assert_eq!(r.expand(series.len()), series);
        return Ok(r);
    }
    Err(Error::NoRecurrenceFound { d_max })
}

/// Rational number p^e as a BigRational (e may be negative).
pub(crate) fn rpow(p: u64, e: i64) -> BigRational {
    let b = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(b)
    } else {
        BigRational::new(BigInt::one(), b)
    }
}
