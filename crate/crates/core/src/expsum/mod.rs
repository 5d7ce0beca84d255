//! Exponential sums E_f(p^m), their finite-field analogues and the CRT
//! product for E_f(N). Vanishing is decided exactly in Z[ζ_{p^m}]; magnitudes
//! come from double-double evaluation with a tracked error bound.

pub mod dd;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{inverse_mod, mul_mod};
use crate::counting::{fold_par, raw_histogram, trace_histogram, Compiled, CoordRange, Limits};
use crate::error::{Error, Result};
use crate::localring::{check_budget, is_prime, FqElement, FqField, ModulusSpec};
use crate::polyring::Polynomial;
use crate::zeta::BasicStepSupport;
use dd::{root_table, DD, TABLE_ERROR};

/// Σ_j c_j ζ^j reduced modulo Φ_{p^m}, times an exact scale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclotomicSum {
    pub p: u64,
    pub m: u32,
    /// Coordinates in the basis 1, ζ, …, ζ^{φ(p^m)−1}.
    pub coefficients: Vec<i128>,
    pub scale: BigRational,
}

impl CyclotomicSum {
    /// Reduces a histogram of length p^m using
    /// ζ^{(p−1)p^{m−1} + r} = −Σ_{i<p−1} ζ^{i·p^{m−1} + r}.
    pub fn from_histogram(hist: &[u64], p: u64, m: u32, scale: BigRational) -> Self {
        let b = p.pow(m - 1) as usize;
        let top = (p as usize - 1) * b;
        assert_eq!(hist.len(), p as usize * b, "histogram length must be p^m");
        let coefficients = (0..top)
            .map(|j| hist[j] as i128 - hist[top + j % b] as i128)
            .collect();
        CyclotomicSum {
            p,
            m,
            coefficients,
            scale,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0)
    }

    /// The exact value when it is rational.
    pub fn rational_value(&self) -> Option<BigRational> {
        if self.coefficients.iter().skip(1).any(|&c| c != 0) {
            return None;
        }
        let c0 = self.coefficients.first().copied().unwrap_or(0);
        Some(BigRational::from_integer(BigInt::from(c0)) * &self.scale)
    }
}

/// A computed exponential sum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpSumResult {
    /// p^m, q for finite-field sums, or N for global sums.
    pub modulus: u64,
    pub p: Option<u64>,
    pub m: Option<u32>,
    pub n: usize,
    pub support: Option<String>,
    /// Multiplier of f: an integer mod p^m, or an element index in F_q.
    pub unit: u64,
    pub exact_zero: bool,
    #[serde(serialize_with = "crate::json::display_opt")]
    pub exact_value: Option<BigRational>,
    pub re: f64,
    pub im: f64,
    pub magnitude: f64,
    /// Bound on the error of re, im and magnitude as printed.
    pub error_bound: f64,
    /// Bound on the error of the double-double value before rounding.
    pub internal_error_bound: f64,
}

impl ExpSumResult {
    /// No contradiction between the exact zero test and the float value.
    pub fn consistent(&self, threshold: f64) -> bool {
        self.exact_zero == (self.magnitude < threshold)
    }
}

struct Floating {
    re: f64,
    im: f64,
    magnitude: f64,
    error_bound: f64,
    internal: f64,
}

// Σ hist[j]·ζ_N^j / den in double-double.
fn evaluate(hist: &[u64], den: u128) -> Floating {
    let n = hist.len() as u64;
    let table = root_table(n);
    let mut re = DD::ZERO;
    let mut im = DD::ZERO;
    let mut weight = 0f64;
    for (j, &c) in hist.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let cf = c as f64;
        let (cs, sn) = table[j];
        re = re.add(cs.mul_f64(cf));
        im = im.add(sn.mul_f64(cf));
        weight += cf;
    }
    let den_f = den as f64;
    assert!(
        den < 1u128 << 53,
        "normalization outside exact double range"
    );
    let eps = f64::EPSILON * f64::EPSILON;
    let raw_err = 2.0 * weight * (TABLE_ERROR + 4.0 * eps * (1.0 + hist.len() as f64));
    let internal = raw_err / den_f * (1.0 + 1e-9) + 4.0 * eps * weight / den_f;
    let (re, im) = (re.div_f64(den_f).to_f64(), im.div_f64(den_f).to_f64());
    let magnitude = re.hypot(im);
    let component = internal + f64::EPSILON * (re.abs() + im.abs());
    let error_bound = 2.0 * component + f64::EPSILON * magnitude + f64::MIN_POSITIVE;
    Floating {
        re,
        im,
        magnitude,
        error_bound,
        internal,
    }
}

fn result_from_histogram(
    hist: &[u64],
    p: u64,
    m: u32,
    n: usize,
    modulus: u64,
    den: u128,
    support: Option<String>,
    unit: u64,
) -> ExpSumResult {
    let scale = BigRational::new(1.into(), BigInt::from(den));
    let cyc = CyclotomicSum::from_histogram(hist, p, m, scale);
    let fl = evaluate(hist, den);
    ExpSumResult {
        modulus,
        p: Some(p),
        m: Some(m),
        n,
        support,
        unit,
        exact_zero: cyc.is_zero(),
        exact_value: cyc.rational_value(),
        re: fl.re,
        im: fl.im,
        magnitude: fl.magnitude,
        error_bound: fl.error_bound,
        internal_error_bound: fl.internal,
    }
}

// hist'[u·j mod N] = hist[j]
fn apply_unit(hist: &[u64], u: u64) -> Vec<u64> {
    let n = hist.len() as u64;
    let mut out = vec![0u64; hist.len()];
    for (j, &c) in hist.iter().enumerate() {
        out[mul_mod(j as u64, u, n) as usize] += c;
    }
    out
}

fn reduce_unit(u: i64, modulus: u64) -> u64 {
    u.rem_euclid(modulus as i64) as u64
}

/// p^{-mn} Σ_{x in support mod p^m} ζ_{p^m}^{u·f(x)}.
pub fn expsum_level(
    f: &Polynomial,
    p: u64,
    m: u32,
    support: &BasicStepSupport,
    u: i64,
    limits: &Limits,
) -> Result<ExpSumResult> {
    let spec = ModulusSpec::new(p, m)?;
    let n = f.arity();
    support.validate(n, p)?;
    let modulus = spec.modulus();
    let u = reduce_unit(u, modulus);
    if u.is_multiple_of(p) {
        return Err(Error::NotInvertible(format!(
            "unit multiplier {u} mod {modulus}"
        )));
    }
    let g = spec.reduce(f)?;
    let hist = apply_unit(
        &raw_histogram(&g, &support.ranges(&spec), limits.budget)?,
        u,
    );
    let den = spec
        .point_count(n)
        .ok_or_else(|| Error::invalid("normalization overflow"))?;
    let supp = (!support.is_full()).then(|| support.to_string());
    Ok(result_from_histogram(&hist, p, m, n, modulus, den, supp, u))
}

/// q^{-n} Σ_{x ∈ F_q^n} ζ_p^{Tr(u·f(x))}.
pub fn finite_field_sum(
    f: &Polynomial,
    field: &FqField,
    u: &FqElement,
    limits: &Limits,
) -> Result<ExpSumResult> {
    if field.is_zero(u) {
        return Err(Error::NotInvertible(
            "the multiplier must be nonzero".into(),
        ));
    }
    f.check_prime(field.p())?;
    let n = f.arity();
    let idx = field.index(u);
    let hist = trace_histogram(f, field, idx as u16, limits.budget)?;
    let den = (field.q() as u128).pow(n as u32);
    let mut r = result_from_histogram(&hist, field.p(), 1, n, field.q(), den, None, idx);
    r.m = None;
    Ok(r)
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        let mut e = 0;
        while n.is_multiple_of(d) {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// The value computed directly over (Z/N)^n.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectSum {
    pub re: f64,
    pub im: f64,
    pub error_bound: f64,
}

/// E_f(N) as a product of prime-power sums, with the direct sum when it fits
/// the budget.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlobalSum {
    pub modulus: u64,
    pub result: ExpSumResult,
    pub local: Vec<ExpSumResult>,
    pub direct: Option<DirectSum>,
    /// Product and direct forms agree within their error bounds.
    pub agrees: Option<bool>,
}

/// E_f(N) = Π_i E_f(p_i^{m_i}) with multipliers u_i = (N/p_i^{m_i})^{-1}.
pub fn global_sum(f: &Polynomial, big_n: u64, limits: &Limits) -> Result<GlobalSum> {
    if big_n == 0 {
        return Err(Error::invalid("N must be positive"));
    }
    let n = f.arity();
    let mut local = Vec::new();
    let (mut re, mut im, mut err) = (1f64, 0f64, 0f64);
    let mut exact_zero = false;
    let mut exact_value = Some(BigRational::from_integer(1.into()));
    for (p, m) in factorize(big_n) {
        let pm = p.pow(m);
        let cof = big_n / pm;
        let u = inverse_mod(cof % pm, pm).expect("coprime cofactor");
        let r = expsum_level(f, p, m, &BasicStepSupport::full(n), u as i64, limits)?;
        let (nre, nim) = (re * r.re - im * r.im, re * r.im + im * r.re);
        let a = re.hypot(im);
        err = a * r.error_bound
            + r.magnitude * err
            + err * r.error_bound
            + 4.0 * f64::EPSILON * (a * r.magnitude);
        re = nre;
        im = nim;
        exact_zero |= r.exact_zero;
        exact_value = match (exact_value, &r.exact_value) {
            (Some(a), Some(b)) => Some(a * b),
            _ => None,
        };
        local.push(r);
    }
    if exact_zero {
        exact_value = Some(BigRational::zero());
    }
    let magnitude = re.hypot(im);
    let result = ExpSumResult {
        modulus: big_n,
        p: None,
        m: None,
        n,
        support: None,
        unit: 1,
        exact_zero,
        exact_value,
        re,
        im,
        magnitude,
        error_bound: err + f64::EPSILON * magnitude,
        internal_error_bound: err,
    };
    let direct = match check_budget(big_n, n, limits.budget) {
        Ok(_) if big_n > 1 => {
            let g = f.reduce_mod(big_n)?;
            let hist = raw_histogram(&g, &vec![CoordRange::full(big_n); n], limits.budget)?;
            let fl = evaluate(&hist, (big_n as u128).pow(n as u32));
            Some(DirectSum {
                re: fl.re,
                im: fl.im,
                error_bound: fl.error_bound,
            })
        }
        Ok(_) => Some(DirectSum {
            re: 1.0,
            im: 0.0,
            error_bound: 0.0,
        }),
        Err(e) if e.is_budget() => None,
        Err(e) => return Err(e),
    };
    let agrees = direct.as_ref().map(|d| {
        let tol = d.error_bound + result.error_bound;
        (d.re - result.re).abs() <= tol && (d.im - result.im).abs() <= tol
    });
    Ok(GlobalSum {
        modulus: big_n,
        result,
        local,
        direct,
        agrees,
    })
}

/// Level-2 sum split into lifts of critical points mod p (A) and the rest (B).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct M2Decomposition {
    pub p: u64,
    pub n: usize,
    pub unit: u64,
    /// #C_f(F_p)
    pub critical_points: u64,
    #[serde(serialize_with = "crate::json::display")]
    pub a_measure: BigRational,
    pub b_part_zero: bool,
    pub a_part: ExpSumResult,
    pub b_part: ExpSumResult,
    pub total: ExpSumResult,
    /// |E_f(p^2)| ≤ measure(A) within the error bound.
    pub bound_holds: bool,
}

/// E_f(p²) restricted to A_f = {∇f ≡ 0 mod p} and to its complement B_f.
pub fn decomposition_m2(
    f: &Polynomial,
    p: u64,
    u: i64,
    limits: &Limits,
) -> Result<M2Decomposition> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let n = f.arity();
    let spec = ModulusSpec::new(p, 2)?;
    let modulus = spec.modulus();
    let u = reduce_unit(u, modulus);
    if u.is_multiple_of(p) {
        return Err(Error::NotInvertible(format!(
            "unit multiplier {u} mod {modulus}"
        )));
    }
    check_budget(modulus, n, limits.budget)?;
    let g = spec.reduce(f)?;
    // critical residues mod p
    let grad: Vec<_> = (0..n).map(|i| g.derivative(i).reduce(p)).collect();
    let cells = (p as usize).pow(n as u32);
    let mut critical = vec![false; cells];
    let mut pt = vec![0u64; n];
    for (idx, slot) in critical.iter_mut().enumerate() {
        let mut r = idx;
        for x in pt.iter_mut() {
            *x = (r % p as usize) as u64;
            r /= p as usize;
        }
        *slot = grad.iter().all(|d| d.eval(&pt) == 0);
    }
    let critical_points = critical.iter().filter(|&&c| c).count() as u64;
    let len = modulus as usize;
    let (hist_a, hist_b) = if n == 0 {
        let v = g.eval(&[]) as usize;
        let mut a = vec![0u64; len];
        a[v] = 1;
        (a, vec![0u64; len])
    } else {
        let comp = Compiled::new(&g)?;
        let ranges = vec![CoordRange::full(modulus); n];
        let crit = &critical;
        fold_par(
            &comp,
            &ranges,
            || (vec![0u64; len], vec![0u64; len]),
            |acc: &mut (Vec<u64>, Vec<u64>), prefix: &[u64], last: u64, value: u64| {
                let mut idx = 0usize;
                let mut w = 1usize;
                for &x in prefix {
                    idx += (x % p) as usize * w;
                    w *= p as usize;
                }
                idx += (last % p) as usize * w;
                if crit[idx] {
                    acc.0[value as usize] += 1;
                } else {
                    acc.1[value as usize] += 1;
                }
            },
            |mut a, b| {
                for (x, y) in a.0.iter_mut().zip(b.0) {
                    *x += y;
                }
                for (x, y) in a.1.iter_mut().zip(b.1) {
                    *x += y;
                }
                a
            },
        )
    };
    let den = spec
        .point_count(n)
        .ok_or_else(|| Error::invalid("normalization overflow"))?;
    let hist_a = apply_unit(&hist_a, u);
    let hist_b = apply_unit(&hist_b, u);
    let total: Vec<u64> = hist_a.iter().zip(&hist_b).map(|(a, b)| a + b).collect();
    let mk = |h: &[u64], tag: &str| {
        result_from_histogram(h, p, 2, n, modulus, den, Some(tag.to_string()), u)
    };
    let a_part = mk(&hist_a, "A");
    let b_part = mk(&hist_b, "B");
    let total = mk(&total, "full");
    let a_measure = BigRational::new(critical_points.into(), BigInt::from(p).pow(n as u32));
    let bound = a_measure.to_f64().unwrap_or(f64::INFINITY);
    let bound_holds = total.exact_zero || total.magnitude <= bound + total.error_bound;
    Ok(M2Decomposition {
        p,
        n,
        unit: u,
        critical_points,
        a_measure,
        b_part_zero: b_part.exact_zero,
        a_part,
        b_part,
        total,
        bound_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse_polynomial;

    fn poly(s: &str, n: usize) -> Polynomial {
        parse_polynomial(s, n).unwrap()
    }

    fn lim() -> Limits {
        Limits::default()
    }

    // direct complex summation in f64, the oracle for magnitudes
    fn oracle(f: &Polynomial, modulus: u64, u: u64) -> (f64, f64) {
        let n = f.arity();
        let g = f.reduce_mod(modulus).unwrap();
        let (mut re, mut im) = (0f64, 0f64);
        for x in crate::localring::Odometer::new(modulus, n) {
            let v = mul_mod(g.eval(&x), u, modulus);
            let th = 2.0 * std::f64::consts::PI * v as f64 / modulus as f64;
            re += th.cos();
            im += th.sin();
        }
        let total = (modulus as f64).powi(n as i32);
        (re / total, im / total)
    }

    #[test]
    fn level_examples() {
        for p in [2, 3, 5, 7] {
            let r =
                expsum_level(&poly("x1", 1), p, 1, &BasicStepSupport::full(1), 1, &lim()).unwrap();
            assert!(r.exact_zero && r.magnitude < 1e-12);
        }
        let r = expsum_level(
            &poly("x1^2", 1),
            3,
            1,
            &BasicStepSupport::full(1),
            1,
            &lim(),
        )
        .unwrap();
        assert!(!r.exact_zero);
        assert!((r.magnitude - 3f64.powf(-0.5)).abs() < 1e-12);
        let f = poly("x1^2*x2 - x1", 2);
        let r = expsum_level(&f, 3, 1, &BasicStepSupport::full(2), 1, &lim()).unwrap();
        assert!(!r.exact_zero);
        assert_eq!(r.exact_value, Some(BigRational::new(1.into(), 3.into())));
        assert!((r.re - 1.0 / 3.0).abs() < 1e-15 && r.im.abs() < 1e-15);
        let r = expsum_level(&f, 3, 2, &BasicStepSupport::full(2), 1, &lim()).unwrap();
        assert!(r.exact_zero);
        assert!(expsum_level(&f, 3, 2, &BasicStepSupport::full(2), 3, &lim()).is_err());
    }

    #[test]
    fn level_sums_match_direct_summation() {
        let cases = [
            ("x1^2 + x2^2", 2),
            ("x1^3 + 2*x1*x2", 2),
            ("x1^2*x2 - x1", 2),
            ("x1*x2*x3", 3),
        ];
        for (s, n) in cases {
            let f = poly(s, n);
            for (p, m) in [(3, 1), (3, 2), (5, 1), (2, 3)] {
                for u in [1i64, -1, 2] {
                    let Ok(r) = expsum_level(&f, p, m, &BasicStepSupport::full(n), u, &lim())
                    else {
                        continue;
                    };
                    let (re, im) = oracle(&f, p.pow(m), r.unit);
                    assert!(
                        (r.re - re).abs() < 1e-10 && (r.im - im).abs() < 1e-10,
                        "{s} p={p} m={m} u={u}"
                    );
                    assert!(r.consistent(1e-9));
                    assert!(r.magnitude <= 1.0 + r.error_bound);
                }
            }
        }
    }

    #[test]
    fn conjugation_preserves_magnitude() {
        let f = poly("x1^3 + x1*x2 + 2*x2^2", 2);
        for (p, m) in [(5, 1), (3, 2), (7, 1)] {
            let a = expsum_level(&f, p, m, &BasicStepSupport::full(2), 1, &lim()).unwrap();
            let b = expsum_level(&f, p, m, &BasicStepSupport::full(2), -1, &lim()).unwrap();
            assert!((a.re - b.re).abs() < 1e-14 && (a.im + b.im).abs() < 1e-14);
            assert_eq!(a.exact_zero, b.exact_zero);
        }
    }

    #[test]
    fn support_sums_are_bounded_by_support_measure() {
        let f = poly("x1^2*x2 - x1", 2);
        let supp = BasicStepSupport::parse("1,*", 2).unwrap();
        let r = expsum_level(&f, 5, 2, &supp, 1, &lim()).unwrap();
        assert!(r.magnitude <= 0.2 + r.error_bound);
        assert_eq!(r.support.as_deref(), Some("1,*"));
    }

    #[test]
    fn finite_field_examples() {
        let f9 = FqField::new(3, 2).unwrap();
        let r = finite_field_sum(&poly("x1", 1), &f9, &f9.one(), &lim()).unwrap();
        assert!(r.exact_zero);
        let f5 = FqField::new(5, 1).unwrap();
        let r = finite_field_sum(&poly("x1^2", 1), &f5, &f5.one(), &lim()).unwrap();
        assert!((r.magnitude - 5f64.powf(-0.5)).abs() < 1e-12);
        for (p, k) in [(3, 1), (5, 1), (7, 1), (3, 2)] {
            let field = FqField::new(p, k).unwrap();
            let r =
                finite_field_sum(&poly("x1^2 + x2^2", 2), &field, &field.one(), &lim()).unwrap();
            assert!(
                (r.magnitude - 1.0 / field.q() as f64).abs() < 1e-12,
                "q = {}",
                field.q()
            );
        }
        assert!(finite_field_sum(&poly("x1", 1), &f9, &f9.zero(), &lim()).is_err());
    }

    #[test]
    fn finite_field_sums_match_brute_force_traces() {
        let field = FqField::new(3, 2).unwrap();
        let f = poly("x1^2*x2 + x2", 2);
        let u = field.generator();
        let r = finite_field_sum(&f, &field, &u, &lim()).unwrap();
        let (mut re, mut im) = (0f64, 0f64);
        for idx in crate::localring::Odometer::new(9, 2) {
            let pt: Vec<_> = idx.iter().map(|&i| field.element(i)).collect();
            let v = field.mul(&u, &f.evaluate(&pt, &field).unwrap());
            let th = 2.0 * std::f64::consts::PI * field.trace(&v) as f64 / 3.0;
            re += th.cos();
            im += th.sin();
        }
        assert!((r.re - re / 81.0).abs() < 1e-12 && (r.im - im / 81.0).abs() < 1e-12);
    }

    #[test]
    fn global_examples() {
        let g = global_sum(&poly("x1^2", 1), 1, &lim()).unwrap();
        assert_eq!(
            g.result.exact_value,
            Some(BigRational::from_integer(1.into()))
        );
        let g = global_sum(&poly("x1^2", 1), 12, &lim()).unwrap();
        assert_eq!(g.agrees, Some(true));
        let (re, im) = oracle(&poly("x1^2", 1), 12, 1);
        assert!((g.result.re - re).abs() < 1e-10 && (g.result.im - im).abs() < 1e-10);
        for nn in [2, 6, 30, 49] {
            let g = global_sum(&poly("x1", 1), nn, &lim()).unwrap();
            assert!(g.result.exact_zero);
        }
        for nn in 1..=60 {
            let g = global_sum(&poly("x1^2 + 3*x2^3 - x1*x2", 2), nn, &lim()).unwrap();
            assert_eq!(g.agrees, Some(true), "N = {nn}");
        }
        assert!(global_sum(&poly("x1", 1), 0, &lim()).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let d = decomposition_m2(&poly("x1^2*x2 - x1", 2), 5, 1, &lim()).unwrap();
        assert_eq!(d.critical_points, 0);
        assert!(d.b_part_zero && d.total.exact_zero && d.bound_holds);
        let d = decomposition_m2(&poly("x1^2 + x2^2", 2), 7, 1, &lim()).unwrap();
        assert!(d.b_part_zero && d.bound_holds);
        assert!(d.total.magnitude <= 1.0 / 49.0 + d.total.error_bound);
        for p in [3, 5, 7] {
            let d = decomposition_m2(&poly("x1", 1), p, 1, &lim()).unwrap();
            assert!(d.total.exact_zero && d.critical_points == 0);
        }
    }
}
