use std::ops::RangeInclusive;

use serde::Serialize;
use serde_json::Value;

use super::report::{num, BoundReport, CheckRow, Status, Verdict};
use crate::counting::{
    critical_system, locus_count, locus_summary, proof_identity_check, singular_locus_at_infinity,
    singular_system, tree, Dim, Limits, LocusSummary, Method,
};
use crate::error::{Error, Result};
use crate::expsum::{decomposition_m2, expsum_level, ExpSumResult};
use crate::localring::{check_budget, FqField, Odometer};
use crate::polyring::Polynomial;
use crate::zeta::{
    check_fiber_product, check_pz_relation, classify_poles, poincare_truncation,
    reconstruct_rational, zeta_truncation, BasicStepSupport, RationalFn,
};

/// Parameters shared by the verification harnesses.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Settings {
    pub limits: Limits,
    /// Budget for point counts of loci over F_{p^k}.
    pub locus_budget: u64,
    /// Truncation order M of Poincaré series.
    pub order: u32,
    /// Initial reconstruction degree bound.
    pub d_max: usize,
    /// Largest order tried when no recurrence of degree ≤ d_max fits.
    pub max_order: u32,
    /// Primes for dimension estimates.
    pub dim_primes: Vec<u64>,
    /// Extension degrees k = 1..=k_max for dimension estimates.
    pub k_max: usize,
    /// Consecutive exact zeros that declare eventual vanishing.
    pub window: usize,
    /// Levels m of exponential sums.
    pub levels: RangeInclusive<u32>,
    /// Factor by which validation primes may exceed a constant fitted on the
    /// first prime.
    pub validation_slack: f64,
    /// Fixed constant for the level-2 bound instead of a fitted one.
    pub m2_constant: Option<f64>,
    /// Threshold below which a float magnitude counts as zero.
    pub zero_threshold: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            limits: Limits::default(),
            locus_budget: 100_000_000,
            order: 8,
            d_max: 3,
            max_order: 16,
            dim_primes: vec![5, 7],
            k_max: 3,
            window: 3,
            levels: 1..=3,
            validation_slack: 2.0,
            m2_constant: None,
            zero_threshold: 1e-9,
        }
    }
}

fn degree(f: &Polynomial) -> u64 {
    f.degree().unwrap_or(0) as u64
}

// Records the exact-zero test against the float magnitude.
fn note_sum(row: &mut CheckRow, tag: &str, r: &ExpSumResult, threshold: f64) -> bool {
    row.set(&format!("{tag}_exact_zero"), r.exact_zero);
    row.set(&format!("{tag}_magnitude"), num(r.magnitude));
    row.set(&format!("{tag}_error_bound"), num(r.error_bound));
    let ok = r.consistent(threshold);
    if !ok {
        row.set(&format!("{tag}_zero_test_contradiction"), true);
        row.status = Status::Fail;
    }
    ok
}

fn zero_summary(report: &mut BoundReport, sums: usize, contradictions: usize) {
    report
        .constants
        .insert("sums_computed".into(), Value::from(sums));
    report.constants.insert(
        "zero_test_contradictions".into(),
        Value::from(contradictions),
    );
}

fn dim_value(d: Option<Dim>) -> Value {
    match d {
        None => Value::Null,
        Some(d) => serde_json::to_value(d).unwrap(),
    }
}

/// δ̂_f: the consensus dimension of C_f.
fn critical_dimension(f: &Polynomial, s: &Settings) -> Result<LocusSummary> {
    locus_summary(
        "C_f",
        &critical_system(f),
        false,
        &s.dim_primes,
        s.k_max,
        s.locus_budget,
    )
}

/// Reconstructs P(T), raising the order (and the degree bound with it) when
/// no recurrence fits.
fn reconstruct_escalating(
    f: &Polynomial,
    p: u64,
    s: &Settings,
) -> Result<(Option<RationalFn>, u32, usize)> {
    let cap = s.max_order.min(tree::max_depth(p) as u32);
    let (mut order, mut d) = (s.order, s.d_max);
    loop {
        let series = poincare_truncation(f, p, order, Method::Auto, &s.limits)?;
        match reconstruct_rational(&series.coefficients, d) {
            Ok(r) => return Ok((Some(r), order, d)),
            Err(Error::NoRecurrenceFound { .. }) if order + 2 <= cap => {
                order += 2;
                d = (order as usize - 2) / 2;
            }
            Err(Error::NoRecurrenceFound { .. }) => return Ok((None, order, d)),
            Err(e) => return Err(e),
        }
    }
}

/// Nontrivial pole of P_{f,p}(T) ⟺ S_f(F_p) ≠ ∅, per prime p > deg f.
pub fn verify_pole_theorem(f: &Polynomial, primes: &[u64], s: &Settings) -> Result<BoundReport> {
    let mut rep = BoundReport::new("pole-theorem", f.to_string(), f.arity());
    let sys = singular_system(f);
    for &p in primes {
        let mut row = CheckRow::new(p, None);
        if p <= degree(f) {
            row.status = Status::Skipped;
            row.set("reason", "p <= deg f");
            rep.rows.push(row);
            continue;
        }
        let s_count = locus_count(&sys, &FqField::prime(p)?, false, s.locus_budget)?;
        row.set("singular_points", s_count);
        let (r, order, d) = reconstruct_escalating(f, p, s)?;
        row.set("order", order).set("d_max", d);
        match r {
            None => {
                row.status = Status::Inconclusive;
                row.set("reason", "no recurrence found");
            }
            Some(r) => {
                let poles = classify_poles(&r, p);
                row.set("poincare_series", r.to_string());
                row.set("degree_property", r.degree_property());
                row.set("has_nontrivial_pole", poles.has_nontrivial_pole);
                row.set("poles", serde_json::to_value(&poles).unwrap());
                row.status = if poles.has_nontrivial_pole == (s_count > 0) {
                    Status::Pass
                } else {
                    Status::Fail
                };
            }
        }
        rep.rows.push(row);
    }
    Ok(rep.finish(Verdict::Pass))
}

// E_f(p^m) on the full support for the levels that fit the budget.
fn level_sums(f: &Polynomial, p: u64, s: &Settings) -> Result<Vec<ExpSumResult>> {
    let mut out = Vec::new();
    for m in s.levels.clone() {
        match expsum_level(f, p, m, &BasicStepSupport::full(f.arity()), 1, &s.limits) {
            Ok(r) => out.push(r),
            Err(e) if e.is_budget() && !out.is_empty() => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn trailing_zeros(sums: &[ExpSumResult]) -> usize {
    sums.iter().rev().take_while(|r| r.exact_zero).count()
}

// Eventual vanishing over the computed levels; the window shrinks to leave
// at least one level before it.
fn eventually_vanishes(sums: &[ExpSumResult], window: usize) -> bool {
    let w = window.min(sums.len().saturating_sub(1)).max(1);
    trailing_zeros(sums) >= w
}

/// Decay of E_f(p^m) against the exponent (−n + δ̂_f)/2. At each prime the
/// statistic is the smallest shortfall of log_p |E| below the line
/// m·(−n + δ̂_f)/2 over the nonvanishing levels. It is fitted on the first
/// prime with a nonvanishing sum and the other primes must stay within it up
/// to the validation slack. Eventual vanishing must come with C_f(F_p) = ∅.
pub fn verify_lower_bound(f: &Polynomial, primes: &[u64], s: &Settings) -> Result<BoundReport> {
    let n = f.arity();
    let mut rep = BoundReport::new("lower-bound", f.to_string(), n);
    let c_locus = critical_dimension(f, s)?;
    let delta_f = c_locus.estimate.consensus;
    rep.constants
        .insert("delta_f_hat".into(), dim_value(delta_f));
    let Some(delta_f) = delta_f else {
        rep.notes
            .push("dimension estimate of C_f is ambiguous".into());
        return Ok(rep.finish(Verdict::Inconclusive));
    };
    let slope = match delta_f {
        Dim::NegInfinity => f64::NEG_INFINITY,
        Dim::Finite(d) => (d as f64 - n as f64) / 2.0,
    };
    rep.constants.insert("bound_exponent".into(), num(slope));
    let sys = critical_system(f);
    let (mut sums_total, mut contradictions) = (0, 0);
    let mut fitted: Option<f64> = None;
    for &p in primes {
        if p <= degree(f) {
            let mut row = CheckRow::new(p, None);
            row.status = Status::Skipped;
            rep.rows.push(row);
            continue;
        }
        let c_count = locus_count(&sys, &FqField::prime(p)?, false, s.locus_budget)?;
        let sums = level_sums(f, p, s)?;
        let lp = (p as f64).ln();
        let vanishes = eventually_vanishes(&sums, s.window);
        let mut shortfalls = Vec::new();
        let mut rows = Vec::new();
        for r in &sums {
            let m = r.m.unwrap();
            let mut row = CheckRow::new(p, Some(m));
            sums_total += 1;
            if !note_sum(&mut row, "level", r, s.zero_threshold) {
                contradictions += 1;
            }
            row.set("critical_points", c_count);
            row.set("m_factor", (m as f64).powi(n as i32 - 1));
            if !r.exact_zero && slope.is_finite() {
                let log_e = r.magnitude.ln() / lp;
                let shortfall = m as f64 * slope - log_e;
                row.set("log_p_magnitude", num(log_e))
                    .set("line", num(m as f64 * slope));
                row.set("shortfall", num(shortfall));
                shortfalls.push(shortfall);
            }
            rows.push(row);
        }
        // How close the sums at this prime come to the line.
        let closest = shortfalls.iter().cloned().fold(f64::INFINITY, f64::min);
        if let Some(last) = rows.last_mut() {
            if closest.is_finite() {
                last.set("closest_shortfall", num(closest));
            }
        }
        match fitted {
            _ if shortfalls.is_empty() => {}
            None => {
                fitted = Some(closest.max(0.0));
                rep.constants.insert("fitted_prime".into(), Value::from(p));
            }
            Some(c) => {
                let limit = c + s.validation_slack.ln() / lp + 1e-9;
                if closest > limit {
                    for row in rows.iter_mut() {
                        row.status = Status::Fail;
                    }
                }
            }
        }
        if vanishes && c_count > 0 {
            for row in rows.iter_mut() {
                row.status = Status::Fail;
                row.set("reason", "sums vanish although C_f(F_p) is nonempty");
            }
        }
        if let Some(last) = rows.last_mut() {
            last.set("eventual_vanishing", vanishes);
        }
        rep.rows.extend(rows);
    }
    rep.constants
        .insert("fitted_shortfall".into(), num(fitted.unwrap_or(0.0)));
    zero_summary(&mut rep, sums_total, contradictions);
    Ok(rep.finish(Verdict::Pass))
}

/// Tameness: δ̂_f ≥ δ̂ + 1, with δ̂ the dimension of the singular locus at
/// infinity (−1 when empty).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TamenessReport {
    pub polynomial: String,
    pub delta_f_hat: Option<Dim>,
    pub delta_hat: Option<i64>,
    pub condition_holds: bool,
    /// δ̂ + 1 = δ̂_f, for homogeneous f of degree ≥ 2.
    pub homogeneous_identity_holds: Option<bool>,
    /// Both dimension estimates reached a consensus.
    pub conclusive: bool,
    pub critical_locus: LocusSummary,
    pub singular_locus_at_infinity: LocusSummary,
}

pub fn tameness_check(f: &Polynomial, s: &Settings) -> Result<TamenessReport> {
    let d = degree(f);
    if d < 2 {
        return Err(Error::invalid(
            "tameness needs deg f >= 2 (constants and linear polynomials have no critical points to tame)",
        ));
    }
    if let Some(&p) = s.dim_primes.iter().find(|&&p| p <= d) {
        return Err(Error::invalid(format!(
            "prime {p} does not exceed deg f = {d}"
        )));
    }
    let c_locus = critical_dimension(f, s)?;
    let x_sys = singular_locus_at_infinity(f)?;
    let x_locus = locus_summary(
        "X_f^sing",
        &x_sys,
        true,
        &s.dim_primes,
        s.k_max,
        s.locus_budget,
    )?;
    let delta_f = c_locus.estimate.consensus;
    let delta = x_locus.estimate.consensus.map(Dim::or_minus_one);
    let conclusive = delta_f.is_some() && delta.is_some();
    let condition_holds = match (delta_f, delta) {
        (Some(Dim::Finite(df)), Some(dl)) => df > dl,
        _ => false,
    };
    let (homog, _) = f.is_homogeneous();
    let homogeneous_identity_holds = (homog && d >= 2).then(|| match (delta_f, delta) {
        (Some(Dim::Finite(df)), Some(dl)) => df == dl + 1,
        _ => false,
    });
    Ok(TamenessReport {
        polynomial: f.to_string(),
        delta_f_hat: delta_f,
        delta_hat: delta,
        condition_holds,
        homogeneous_identity_holds,
        conclusive,
        critical_locus: c_locus,
        singular_locus_at_infinity: x_locus,
    })
}

/// |E_f(p)| ≤ C·p^{(−n+δ̂_f)/2} (homogeneous or tame f) and
/// |E_f(p²)| ≤ D·p^{−n+δ̂_f}, with the B-part of the level-2 sum exactly zero
/// and |E_f(p²)| ≤ #C_f(F_p)·p^{−n}. C and D are fitted on the first eligible
/// prime with a nonvanishing sum and validated on the rest up to the slack; a
/// fixed D may be given.
pub fn verify_m1_m2(f: &Polynomial, primes: &[u64], s: &Settings) -> Result<BoundReport> {
    let n = f.arity();
    let mut rep = BoundReport::new("m1m2", f.to_string(), n);
    let c_locus = critical_dimension(f, s)?;
    let Some(delta_f) = c_locus.estimate.consensus else {
        rep.constants.insert("delta_f_hat".into(), Value::Null);
        rep.notes
            .push("dimension estimate of C_f is ambiguous".into());
        return Ok(rep.finish(Verdict::Inconclusive));
    };
    rep.constants
        .insert("delta_f_hat".into(), dim_value(Some(delta_f)));
    let (homog, _) = f.is_homogeneous();
    let m1_applies = if homog {
        true
    } else if degree(f) >= 2 {
        let t = tameness_check(f, s)?;
        rep.constants
            .insert("tameness_condition".into(), Value::from(t.condition_holds));
        t.condition_holds
    } else {
        false
    };
    rep.constants
        .insert("m1_clause_applies".into(), Value::from(m1_applies));
    if !m1_applies {
        rep.notes
            .push("level-1 clause skipped: f is neither homogeneous nor tame".into());
    }
    let base = |p: u64, e: f64| match delta_f {
        Dim::NegInfinity => 0.0,
        Dim::Finite(d) => (p as f64).powf(e * (d as f64 - n as f64)),
    };
    let ratio = |mag: f64, zero: bool, b: f64| {
        if zero {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            mag / b
        }
    };
    let mut c_fit: Option<f64> = None;
    let mut d_fit: Option<f64> = s.m2_constant;
    if let Some(d) = s.m2_constant {
        rep.constants.insert("D".into(), num(d));
    }
    let (mut sums, mut contradictions) = (0, 0);
    let (mut c_max, mut d_max) = (0f64, 0f64);
    let cf_sys = critical_system(f);
    for &p in primes {
        let mut row = CheckRow::new(p, None);
        if p <= degree(f) {
            row.status = Status::Skipped;
            row.set("reason", "p <= deg f");
            rep.rows.push(row);
            continue;
        }
        let c_count = locus_count(&cf_sys, &FqField::prime(p)?, false, s.locus_budget)?;
        row.set("critical_points", c_count);
        if m1_applies {
            let e1 = expsum_level(f, p, 1, &BasicStepSupport::full(n), 1, &s.limits)?;
            sums += 1;
            if !note_sum(&mut row, "m1", &e1, s.zero_threshold) {
                contradictions += 1;
            }
            let r1 = ratio(e1.magnitude, e1.exact_zero, base(p, 0.5));
            row.set("m1_ratio", num(r1));
            c_max = c_max.max(r1);
            match c_fit {
                None if e1.exact_zero => {
                    row.set("m1_within_slack", true);
                }
                None => {
                    c_fit = Some(r1);
                    rep.constants.insert("C".into(), num(r1));
                    rep.constants.insert("C_fitted_at".into(), Value::from(p));
                }
                Some(c) => {
                    let ok = r1
                        <= s.validation_slack * c * (1.0 + 1e-12)
                            + e1.error_bound / base(p, 0.5).max(f64::MIN_POSITIVE);
                    row.set("m1_within_slack", ok);
                    if !ok {
                        row.status = Status::Fail;
                    }
                }
            }
        }
        let dec = decomposition_m2(f, p, 1, &s.limits)?;
        for (tag, r) in [("m2", &dec.total), ("m2_b_part", &dec.b_part)] {
            sums += 1;
            if !note_sum(&mut row, tag, r, s.zero_threshold) {
                contradictions += 1;
            }
        }
        row.set("b_part_zero", dec.b_part_zero);
        row.set("a_measure", dec.a_measure.to_string());
        row.set("a_measure_bound_holds", dec.bound_holds);
        if !dec.b_part_zero || !dec.bound_holds {
            row.status = Status::Fail;
        }
        let r2 = ratio(dec.total.magnitude, dec.total.exact_zero, base(p, 1.0));
        row.set("m2_ratio", num(r2));
        d_max = d_max.max(r2);
        match d_fit {
            None if dec.total.exact_zero => {
                row.set("m2_within_constant", true);
            }
            None => {
                d_fit = Some(r2);
                rep.constants.insert("D".into(), num(r2));
                rep.constants.insert("D_fitted_at".into(), Value::from(p));
            }
            Some(d) => {
                let limit = if s.m2_constant.is_some() {
                    d
                } else {
                    s.validation_slack * d
                };
                let ok = r2
                    <= limit * (1.0 + 1e-12)
                        + dec.total.error_bound / base(p, 1.0).max(f64::MIN_POSITIVE);
                row.set("m2_within_constant", ok);
                if !ok {
                    row.status = Status::Fail;
                }
            }
        }
        rep.rows.push(row);
    }
    rep.constants.insert("C_max".into(), num(c_max));
    rep.constants.insert("D_max".into(), num(d_max));
    zero_summary(&mut rep, sums, contradictions);
    Ok(rep.finish(Verdict::Pass))
}

/// Eventual exact vanishing of E_f(p^m) over the levels ⟺ C_f(F_p) = ∅.
pub fn verify_nontriviality(f: &Polynomial, primes: &[u64], s: &Settings) -> Result<BoundReport> {
    let n = f.arity();
    let mut rep = BoundReport::new("nontriviality", f.to_string(), n);
    let sys = critical_system(f);
    let (mut sums_total, mut contradictions) = (0, 0);
    for &p in primes {
        let mut row = CheckRow::new(p, None);
        if p <= degree(f) {
            row.status = Status::Skipped;
            rep.rows.push(row);
            continue;
        }
        let c_count = locus_count(&sys, &FqField::prime(p)?, false, s.locus_budget)?;
        let sums = level_sums(f, p, s)?;
        for r in &sums {
            sums_total += 1;
            let tag = format!("m{}", r.m.unwrap());
            if !note_sum(&mut row, &tag, r, s.zero_threshold) {
                contradictions += 1;
            }
        }
        let vanishes = eventually_vanishes(&sums, s.window);
        let levels: Vec<u32> = sums.iter().filter_map(|r| r.m).collect();
        row.set("levels", serde_json::to_value(levels).unwrap());
        row.set("critical_points", c_count);
        row.set("eventual_vanishing", vanishes);
        let constant = f.is_constant();
        row.set("constant", constant);
        if constant {
            let ones = sums
                .iter()
                .all(|r| (r.magnitude - 1.0).abs() <= r.error_bound + 1e-12);
            row.set("magnitude_one", ones);
            if !ones {
                row.status = Status::Fail;
            }
        }
        if row.status != Status::Fail {
            row.status = if vanishes == (c_count == 0) {
                Status::Pass
            } else {
                Status::Fail
            };
        }
        rep.rows.push(row);
    }
    zero_summary(&mut rep, sums_total, contradictions);
    Ok(rep.finish(Verdict::Pass))
}

/// P(T)(1 − T) = 1 − T·Z(T) to the truncation order, with P from point
/// counts and Z from the valuation tree.
pub fn verify_pz_relation(f: &Polynomial, primes: &[u64], s: &Settings) -> Result<BoundReport> {
    let n = f.arity();
    let mut rep = BoundReport::new("pz-relation", f.to_string(), n);
    for &p in primes {
        let mut row = CheckRow::new(p, None);
        let series = poincare_truncation(f, p, s.order, Method::Auto, &s.limits)?;
        let z = zeta_truncation(f, p, s.order as usize, &BasicStepSupport::full(n))?;
        let check = check_pz_relation(&series, &z)?;
        row.set("order", s.order);
        row.set("holds", check.holds);
        row.set(
            "first_mismatch",
            serde_json::to_value(check.first_mismatch).unwrap(),
        );
        row.set("poincare", strings(&series.coefficients));
        row.set("zeta", strings(&z.coefficients));
        if !check.holds {
            row.status = Status::Fail;
        }
        rep.rows.push(row);
    }
    Ok(rep.finish(Verdict::Pass))
}

fn strings(v: &[num_rational::BigRational]) -> Value {
    Value::from(v.iter().map(|x| x.to_string()).collect::<Vec<_>>())
}

/// Z on (c + pZ_p) × Z_p^{n−1} against p^{-1}·Z of f(c, ·). The comparison is
/// reported; rows only fail on errors.
pub fn verify_fiber_product(
    f: &Polynomial,
    c: &num_rational::BigRational,
    primes: &[u64],
    s: &Settings,
) -> Result<BoundReport> {
    let n = f.arity();
    let mut rep = BoundReport::new("fiber-product", f.to_string(), n);
    rep.constants.insert("c".into(), Value::from(c.to_string()));
    for &p in primes {
        let mut row = CheckRow::new(p, None);
        let fc = check_fiber_product(f, c, p, s.order as usize)?;
        row.set("order", fc.order);
        row.set("equal", fc.equal);
        row.set("lhs", strings(&fc.lhs));
        row.set("rhs", strings(&fc.rhs));
        rep.rows.push(row);
    }
    Ok(rep.finish(Verdict::Pass))
}

/// The level-2 decomposition: the B-part vanishes exactly and
/// |E_f(p²)| ≤ #C_f(F_p)·p^{−n}, per prime p > deg f.
pub fn verify_m2_decomposition(
    f: &Polynomial,
    primes: &[u64],
    s: &Settings,
) -> Result<BoundReport> {
    let n = f.arity();
    let mut rep = BoundReport::new("m2-decomposition", f.to_string(), n);
    let (mut sums, mut contradictions) = (0, 0);
    for &p in primes {
        let mut row = CheckRow::new(p, Some(2));
        if p <= degree(f) {
            row.status = Status::Skipped;
            row.set("reason", "p <= deg f");
            rep.rows.push(row);
            continue;
        }
        let dec = decomposition_m2(f, p, 1, &s.limits)?;
        for (tag, r) in [
            ("total", &dec.total),
            ("a_part", &dec.a_part),
            ("b_part", &dec.b_part),
        ] {
            sums += 1;
            if !note_sum(&mut row, tag, r, s.zero_threshold) {
                contradictions += 1;
            }
        }
        row.set("critical_points", dec.critical_points);
        row.set("a_measure", dec.a_measure.to_string());
        row.set("b_part_zero", dec.b_part_zero);
        row.set("bound_holds", dec.bound_holds);
        if !dec.b_part_zero || !dec.bound_holds {
            row.status = Status::Fail;
        }
        rep.rows.push(row);
    }
    zero_summary(&mut rep, sums, contradictions);
    Ok(rep.finish(Verdict::Pass))
}

/// N_1 = (#Y + #S)/p^n and N_2 = #Y/p^{n+1} + #S/p^n. The second identity
/// presumes every singular point mod p has f ≡ 0 mod p² on its lifts; rows
/// where that fails only report the comparison.
pub fn verify_proof_identities(
    f: &Polynomial,
    primes: &[u64],
    s: &Settings,
) -> Result<BoundReport> {
    let n = f.arity();
    let mut rep = BoundReport::new("proof-identities", f.to_string(), n);
    for &p in primes {
        let mut row = CheckRow::new(p, None);
        let rec = proof_identity_check(f, p, &s.limits)?;
        let hypothesis = singular_points_lift(f, p, &s.limits)?;
        row.set("y_count", rec.y_count).set("s_count", rec.s_count);
        row.set("n1", rec.n1.to_string())
            .set("n1_formula", rec.n1_formula.to_string());
        row.set("n2", rec.n2.to_string())
            .set("n2_formula", rec.n2_formula.to_string());
        row.set("n1_identity", rec.n1_identity)
            .set("n2_identity", rec.n2_identity);
        row.set("n2_hypothesis", hypothesis);
        if !rec.n1_identity || (hypothesis && !rec.n2_identity) {
            row.status = Status::Fail;
        }
        rep.rows.push(row);
    }
    Ok(rep.finish(Verdict::Pass))
}

// Every x in S_f(F_p) has f(x) ≡ 0 mod p² (f(x + pt) ≡ f(x) mod p² there).
fn singular_points_lift(f: &Polynomial, p: u64, limits: &Limits) -> Result<bool> {
    let n = f.arity();
    check_budget(p, n, limits.budget)?;
    let g2 = f.reduce_mod(p * p)?;
    let g = f.reduce_mod(p)?;
    let grad: Vec<_> = (0..n).map(|i| g.derivative(i)).collect();
    for x in Odometer::new(p, n) {
        if g.eval(&x) == 0 && grad.iter().all(|d| d.eval(&x) == 0) && g2.eval(&x) != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse_polynomial;

    fn poly(s: &str, n: usize) -> Polynomial {
        parse_polynomial(s, n).unwrap()
    }

    #[test]
    fn pole_theorem_examples() {
        let s = Settings::default();
        for (f, n, nontrivial) in [
            ("x1", 1, false),
            ("x1^2", 1, true),
            ("x1^2*x2 - x1", 2, false),
        ] {
            let rep = verify_pole_theorem(&poly(f, n), &[5, 7], &s).unwrap();
            assert_eq!(rep.verdict, Verdict::Pass, "{f}");
            for row in &rep.rows {
                assert_eq!(
                    row.get_bool("has_nontrivial_pole"),
                    Some(nontrivial),
                    "{f} at {}",
                    row.p
                );
            }
        }
        let rep = verify_pole_theorem(&poly("x1", 1), &[3], &s).unwrap();
        assert_eq!(
            rep.rows[0].values["poincare_series"],
            Value::from("(1)/(1 - 1/3*T)")
        );
    }

    #[test]
    fn tameness_examples() {
        let s = Settings::default();
        let t = tameness_check(&poly("x1^2 + x2^2", 2), &s).unwrap();
        assert_eq!(
            (t.delta_f_hat, t.delta_hat),
            (Some(Dim::Finite(0)), Some(-1))
        );
        assert!(t.condition_holds && t.homogeneous_identity_holds == Some(true));
        let t = tameness_check(&poly("x1^2*x2 - x1", 2), &s).unwrap();
        assert_eq!(
            (t.delta_f_hat, t.delta_hat),
            (Some(Dim::NegInfinity), Some(0))
        );
        assert!(!t.condition_holds && t.homogeneous_identity_holds.is_none());
        assert!(tameness_check(&poly("x1 + 1", 1), &s).is_err());
    }

    #[test]
    fn nontriviality_examples() {
        let s = Settings::default();
        for f in ["x1^2*x2 - x1", "x1^2 + x2^2", "5"] {
            let rep = verify_nontriviality(&poly(f, 2), &[5, 7], &s).unwrap();
            assert_eq!(rep.verdict, Verdict::Pass, "{f}: {rep:?}");
        }
        let rep = verify_nontriviality(&poly("x1^2*x2 - x1", 2), &[3, 5, 7], &s).unwrap();
        assert_eq!(rep.rows[0].status, Status::Skipped);
        assert!(rep.rows[1..]
            .iter()
            .all(|r| r.get_bool("eventual_vanishing") == Some(true)));
    }

    #[test]
    fn m1m2_diagonal_quadratic() {
        let s = Settings::default();
        let rep = verify_m1_m2(&poly("x1^2 + x2^2", 2), &[3, 5, 7, 11], &s).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!((rep.constants["C"].as_f64().unwrap() - 1.0).abs() < 1e-9);
        assert!((rep.constants["D"].as_f64().unwrap() - 1.0).abs() < 1e-9);
        let rep = verify_m1_m2(&poly("x1^2*x2 - x1", 2), &[5, 7], &s).unwrap();
        assert_eq!(rep.constants["m1_clause_applies"], Value::from(false));
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    #[test]
    fn lower_bound_diagonal_quadratic_is_tight() {
        let s = Settings::default();
        let rep = verify_lower_bound(&poly("x1^2 + x2^2", 2), &[3, 5], &s).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!(rep.constants["fitted_shortfall"].as_f64().unwrap().abs() < 1e-9);
    }

    #[test]
    fn pz_and_decomposition_harnesses() {
        let s = Settings::default();
        let rep = verify_pz_relation(&poly("x1^2*x2 - x1", 2), &[3, 5], &s).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        let rep = verify_m2_decomposition(&poly("x1*x2", 2), &[2, 5, 7], &s).unwrap();
        assert_eq!(rep.rows[0].status, Status::Skipped);
        assert_eq!(rep.verdict, Verdict::Pass);
        assert_eq!(rep.rows[1].values["a_measure"], Value::from("1/25"));
    }

    #[test]
    fn proof_identities_on_the_square() {
        // x^2 at p = 3: #Y = 0, #S = 1, N_2 = 1/3 = #S/p
        let rep = verify_proof_identities(&poly("x1^2", 1), &[3], &Settings::default()).unwrap();
        let row = &rep.rows[0];
        assert_eq!(row.values["n2"], Value::from("1/3"));
        assert_eq!(row.get_bool("n2_hypothesis"), Some(true));
        assert_eq!(rep.verdict, Verdict::Pass);
        // x^2 + 3 at p = 3: the singular point does not lift
        let rep =
            verify_proof_identities(&poly("x1^2 + 3", 1), &[3], &Settings::default()).unwrap();
        assert_eq!(rep.rows[0].get_bool("n2_hypothesis"), Some(false));
        assert_eq!(rep.rows[0].get_bool("n2_identity"), Some(false));
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    #[test]
    fn fiber_harness_reports() {
        let c = num_rational::BigRational::from_integer(1.into());
        let rep = verify_fiber_product(&poly("x1*x2", 2), &c, &[3], &Settings::default()).unwrap();
        assert_eq!(rep.rows[0].get_bool("equal"), Some(true));
    }

    #[test]
    fn lower_bound_uses_the_closest_level() {
        // E(5) = 0 for x^3 + y^3, and E(13) is far below the line at m = 1 only
        let rep =
            verify_lower_bound(&poly("x1^3 + x2^3", 2), &[5, 7, 13], &Settings::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
    }
}
