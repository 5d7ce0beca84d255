//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Reference values come from brute-force oracles in this file.

use std::io::Write;
use std::process::Command;
use std::time::Instant;

use igusa_core::corpus::{Corpus, CorpusEntry};
use igusa_core::counting::{
    count_bruteforce, count_hensel, critical_system, locus_summary, singular_system, Dim, Limits,
    Method,
};
use igusa_core::expsum::{decomposition_m2, expsum_level, ExpSumResult};
use igusa_core::localring::ModulusSpec;
use igusa_core::oscillation::{
    alpha_pi, blowup_refine, tameness_check, verify_pole_theorem, NumericalData, Settings, Status,
};
use igusa_core::polyring::{parse_polynomial, Polynomial};
use igusa_core::zeta::{
    poincare_truncation, reconstruct_rational, zeta_truncation, BasicStepSupport, QPoly,
};
use num_rational::BigRational;

const ZERO_THRESHOLD: f64 = 1e-9;
const LARGE_BUDGET: u64 = 200_000_000;

fn report(n: u32, title: &str, ok: bool, detail: &str) {
    let line = format!(
        "\ncriterion {n:>2}: {} | {title} | {detail}\n",
        if ok { "PASS" } else { "FAIL" }
    );
    // written past the test harness capture so that every line shows up
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(ok, "{}", line.trim());
}

fn corpus() -> Vec<(CorpusEntry, Polynomial)> {
    Corpus::builtin()
        .entries
        .into_iter()
        .map(|e| {
            let f = e.poly().unwrap();
            (e, f)
        })
        .collect()
}

fn degree(f: &Polynomial) -> u64 {
    f.degree().unwrap_or(0) as u64
}

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

type Eval = fn(&[i128]) -> i128;

/// The shipped corpus as plain closures.
fn oracle(name: &str) -> Eval {
    match name {
        "linear" => |x| x[0],
        "square" => |x| x[0] * x[0],
        "node" => |x| x[0] * x[1],
        "diagonal-quadratic" => |x| x[0] * x[0] + x[1] * x[1],
        "binary-cubic" => |x| x[0].pow(3) + x[1].pow(3),
        "fermat-cubic" => |x| x[0].pow(3) + x[1].pow(3) + x[2].pow(3),
        "double-node" => |x| x[0] * x[0] * x[1] * x[1],
        "triple-product" => |x| x[0] * x[1] * x[2],
        "non-tame" => |x| x[0] * x[0] * x[1] - x[0],
        "constant" => |_| 1,
        other => panic!("no oracle for {other}"),
    }
}

fn points(q: u64, n: usize) -> impl Iterator<Item = Vec<i128>> {
    (0..q.pow(n as u32)).map(move |mut k| {
        (0..n)
            .map(|_| {
                let d = k % q;
                k /= q;
                d as i128
            })
            .collect()
    })
}

/// #S_f(F_p), with ∂_i f(a) ≡ (f(a + p e_i) − f(a))/p mod p.
fn oracle_singular_count(f: Eval, n: usize, p: u64) -> u64 {
    let p = p as i128;
    points(p as u64, n)
        .filter(|a| {
            let fa = f(a);
            fa.rem_euclid(p) == 0
                && (0..n).all(|i| {
                    let mut b = a.clone();
                    b[i] += p;
                    ((f(&b) - fa) / p).rem_euclid(p) == 0
                })
        })
        .count() as u64
}

/// (1/q^n) Σ exp(2πi f(x)/q) by direct summation.
fn oracle_sum(f: Eval, n: usize, q: u64) -> (f64, f64) {
    let (mut re, mut im) = (0.0, 0.0);
    for x in points(q, n) {
        let t = std::f64::consts::TAU * f(&x).rem_euclid(q as i128) as f64 / q as f64;
        re += t.cos();
        im += t.sin();
    }
    let s = (q as f64).powi(n as i32);
    (re / s, im / s)
}

/// Power series a/b to `len` terms, b(0) = 1.
fn expand(a: &QPoly, b: &QPoly, len: usize) -> Vec<BigRational> {
    let mut s: Vec<BigRational> = Vec::with_capacity(len);
    for k in 0..len {
        let mut v = a.coeff(k);
        for j in 1..=k.min(b.degree().unwrap_or(0)) {
            v -= b.coeff(j) * &s[k - j];
        }
        s.push(v);
    }
    s
}

fn delta_f_hat(f: &Polynomial) -> Option<Dim> {
    locus_summary("C_f", &critical_system(f), false, &[5, 7], 3, 100_000_000)
        .unwrap()
        .estimate
        .consensus
}

fn zero_consistent(r: &ExpSumResult) -> bool {
    r.exact_zero == (r.magnitude < ZERO_THRESHOLD)
}

#[test]
fn criterion_01_counting_oracle_equivalence() {
    let start = Instant::now();
    let lim = Limits {
        hensel_fallback: false,
        ..Limits::default()
    };
    let (mut cases, mut bad) = (0, Vec::new());
    for (e, f) in corpus() {
        for p in [2u64, 3, 5, 7] {
            for m in 1u32.. {
                if (p as u128).pow(m * e.n as u32) > 1_000_000 {
                    break;
                }
                let spec = ModulusSpec::new(p, m).unwrap();
                cases += 1;
                if count_hensel(&f, &spec, &lim).unwrap()
                    != count_bruteforce(&f, &spec, &lim).unwrap()
                {
                    bad.push(format!("{} p={p} m={m}", e.name));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        "count_hensel = count_bruteforce on the corpus, p in {2,3,5,7}, p^(mn) <= 1e6",
        bad.is_empty() && secs < 60.0,
        &format!("{cases} cases, mismatches {bad:?}, {secs:.1}s (target < 60s)"),
    );
}

#[test]
fn criterion_02_pz_relation() {
    let lim = Limits::default();
    let (mut cases, mut bad) = (0, Vec::new());
    for (e, f) in corpus() {
        for p in [3u64, 5, 7] {
            let series = poincare_truncation(&f, p, 8, Method::Auto, &lim)
                .unwrap()
                .coefficients;
            let z = zeta_truncation(&f, p, 8, &BasicStepSupport::full(e.n))
                .unwrap()
                .coefficients;
            // P(T)(1 − T) against 1 − T·Z(T), coefficients 0..=8
            let lhs: Vec<BigRational> = (0..=8)
                .map(|k| {
                    if k == 0 {
                        series[0].clone()
                    } else {
                        &series[k] - &series[k - 1]
                    }
                })
                .collect();
            let rhs: Vec<BigRational> = (0..=8)
                .map(|k| if k == 0 { q(1, 1) } else { -z[k - 1].clone() })
                .collect();
            cases += 1;
            if lhs != rhs {
                bad.push(format!("{} p={p}", e.name));
            }
        }
    }
    report(
        2,
        "P(T)(1-T) = 1 - T*Z(T) to order 8, p in {3,5,7}",
        bad.is_empty(),
        &format!("{cases} cases, mismatches {bad:?}"),
    );
}

#[test]
fn criterion_03_rational_reconstruction() {
    let lim = Limits::default();
    let (mut fitted, mut skipped, mut bad) = (0, Vec::new(), Vec::new());
    for (e, f) in corpus() {
        for p in [3u64, 5, 7] {
            let series = poincare_truncation(&f, p, 8, Method::Auto, &lim)
                .unwrap()
                .coefficients;
            match reconstruct_rational(&series, 3) {
                Ok(r) => {
                    fitted += 1;
                    if expand(&r.numerator, &r.denominator, series.len()) != series {
                        bad.push(format!("{} p={p}: held-out mismatch", e.name));
                    }
                    if e.name == "linear" {
                        let want = (QPoly::one(), QPoly::new(vec![q(1, 1), q(-1, p as i64)]));
                        if (r.numerator.clone(), r.denominator.clone()) != want {
                            bad.push(format!("x1 p={p}: got {r}"));
                        }
                    }
                    if e.name == "square" {
                        let factor = QPoly::new(vec![q(1, 1), q(0, 1), q(-1, p as i64)]);
                        if !r.denominator.divrem(&factor).1.is_zero() {
                            bad.push(format!("x^2 p={p}: denominator {}", r.denominator));
                        }
                    }
                }
                Err(_) => skipped.push(format!("{} p={p}", e.name)),
            }
        }
    }
    report(
        3,
        "reconstruction reproduces held-out coefficients; x1 -> 1/(1-T/p); x^2 has factor 1-T^2/p",
        bad.is_empty(),
        &format!("{fitted} fits, no recurrence of order <= 3 for {skipped:?}, failures {bad:?}"),
    );
}

#[test]
fn criterion_04_pole_theorem_equivalence() {
    let s = Settings::default();
    let primes = [5u64, 7, 11, 13];
    let (mut checked, mut inconclusive, mut bad) = (0, Vec::new(), Vec::new());
    for (e, f) in corpus() {
        let rep = verify_pole_theorem(&f, &primes, &s).unwrap();
        for row in &rep.rows {
            match row.status {
                Status::Skipped => continue,
                Status::Inconclusive => {
                    inconclusive.push(format!("{} p={}", e.name, row.p));
                    continue;
                }
                _ => {}
            }
            checked += 1;
            let sing = oracle_singular_count(oracle(&e.name), e.n, row.p);
            let pole = row.get_bool("has_nontrivial_pole");
            if pole != Some(sing > 0) || row.status != Status::Pass {
                bad.push(format!(
                    "{} p={}: pole {pole:?}, #S = {sing}",
                    e.name, row.p
                ));
            }
        }
    }
    report(
        4,
        "nontrivial pole <=> #S_f(F_p) > 0, p in {5,7,11,13}, p > deg f",
        bad.is_empty() && inconclusive.is_empty(),
        &format!("{checked} rows, exceptions {bad:?}, inconclusive {inconclusive:?}"),
    );
}

#[test]
fn criterion_05_gauss_sum_magnitudes() {
    let lim = Limits::default();
    let (mut cases, mut bad) = (0, Vec::new());
    for (text, n, g) in [
        ("x1^2", 1usize, (|x: &[i128]| x[0] * x[0]) as Eval),
        ("x1^2 + x2^2", 2, |x| x[0] * x[0] + x[1] * x[1]),
    ] {
        let f = parse_polynomial(text, n).unwrap();
        for p in [3u64, 5] {
            for m in 1..=3u32 {
                let r = expsum_level(&f, p, m, &BasicStepSupport::full(n), 1, &lim).unwrap();
                let want = (p as f64).powf(-(m as f64) * n as f64 / 2.0);
                let (re, im) = oracle_sum(g, n, p.pow(m));
                cases += 1;
                if (r.magnitude - want).abs() > 1e-9 || (re.hypot(im) - want).abs() > 1e-9 {
                    bad.push(format!("{text} p={p} m={m}: {} vs {want}", r.magnitude));
                }
            }
        }
    }
    report(
        5,
        "|E(p^m)| = p^(-mn/2) for sums of n <= 2 squares, p in {3,5}, m <= 3",
        bad.is_empty(),
        &format!("{cases} cases within 1e-9, failures {bad:?}"),
    );
}

#[test]
fn criterion_06_non_tame_example() {
    let lim = Limits::default();
    let f = parse_polynomial("x1^2*x2 - x1", 2).unwrap();
    let g = oracle("non-tame");
    let mut bad = Vec::new();
    for p in [3u64, 5, 7] {
        let e1 = expsum_level(&f, p, 1, &BasicStepSupport::full(2), 1, &lim).unwrap();
        if e1.exact_zero {
            bad.push(format!("E({p}) is zero"));
        }
        let (re, im) = oracle_sum(g, 2, p);
        if (e1.re - re).abs() > 1e-9 || (e1.im - im).abs() > 1e-9 {
            bad.push(format!("E({p}) differs from direct summation"));
        }
        if p == 3 && (e1.exact_value != Some(q(1, 3)) || (re - 1.0 / 3.0).abs() > 1e-12) {
            bad.push(format!("E(3) = {:?}, oracle {re}", e1.exact_value));
        }
        for m in [2u32, 3] {
            if !expsum_level(&f, p, m, &BasicStepSupport::full(2), 1, &lim)
                .unwrap()
                .exact_zero
            {
                bad.push(format!("E({p}^{m}) is not zero"));
            }
        }
    }
    let t = tameness_check(&f, &Settings::default()).unwrap();
    if t.condition_holds || t.delta_f_hat != Some(Dim::NegInfinity) || t.delta_hat != Some(0) {
        bad.push(format!(
            "tameness: holds {}, δ̂_f {:?}, δ̂ {:?}",
            t.condition_holds, t.delta_f_hat, t.delta_hat
        ));
    }
    report(
        6,
        "x1^2*x2 - x1: E(p) != 0, E(3) = 1/3, E(p^2) = E(p^3) = 0, tameness fails with δ̂_f = -inf, δ̂ = 0",
        bad.is_empty(),
        &format!("p in {{3,5,7}}, failures {bad:?}"),
    );
}

#[test]
fn criterion_07_level_two_clause() {
    let lim = Limits::with_budget(LARGE_BUDGET);
    let d_const = 1.5;
    let (mut rows, mut bad, mut over) = (0, Vec::new(), Vec::new());
    let mut worst: (f64, String) = (0.0, String::new());
    for (e, f) in corpus() {
        let delta = delta_f_hat(&f);
        for p in (5u64..=23).filter(|&p| igusa_core::localring::is_prime(p) && p > degree(&f)) {
            let dec = decomposition_m2(&f, p, 1, &lim).unwrap();
            rows += 1;
            if !dec.b_part_zero || !dec.bound_holds {
                bad.push(format!(
                    "{} p={p}: B zero {}, bound {}",
                    e.name, dec.b_part_zero, dec.bound_holds
                ));
            }
            if !e.homogeneous {
                continue;
            }
            let base = match delta {
                Some(Dim::Finite(d)) => (p as f64).powi(d as i32 - e.n as i32),
                Some(Dim::NegInfinity) => 0.0,
                None => {
                    bad.push(format!("{}: δ̂_f ambiguous", e.name));
                    continue;
                }
            };
            let mag = if dec.total.exact_zero {
                0.0
            } else {
                dec.total.magnitude
            };
            let ratio = if mag == 0.0 { 0.0 } else { mag / base };
            if ratio > worst.0 {
                worst = (ratio, format!("{} p={p}", e.name));
            }
            if mag > d_const * base + dec.total.error_bound {
                over.push(format!("{} p={p} ratio {ratio:.4}", e.name));
            }
        }
    }
    report(
        7,
        "B-part exactly zero and |E(p^2)| <= #C_f(F_p) p^-n; D = 1.5 bounds |E(p^2)| / p^(-n+δ̂_f), p in 5..23",
        bad.is_empty() && over.is_empty(),
        &format!(
            "{rows} rows, decomposition failures {bad:?}, largest ratio {:.4} at {}, exceeding D: {over:?}",
            worst.0, worst.1
        ),
    );
}

#[test]
fn criterion_08_level_one_clause() {
    let lim = Limits::with_budget(LARGE_BUDGET);
    let slack = 2.0;
    let mut ratios: Vec<(String, u64, f64)> = Vec::new();
    let mut bad = Vec::new();
    for (e, f) in corpus().into_iter().filter(|(e, _)| e.homogeneous) {
        let delta = delta_f_hat(&f);
        for p in [5u64, 7, 11, 13, 17, 19, 23]
            .into_iter()
            .filter(|&p| p > degree(&f))
        {
            let r = expsum_level(&f, p, 1, &BasicStepSupport::full(e.n), 1, &lim).unwrap();
            let mag = if r.exact_zero { 0.0 } else { r.magnitude };
            let ratio = match delta {
                _ if mag == 0.0 => 0.0,
                Some(Dim::Finite(d)) => mag / (p as f64).powf((d as f64 - e.n as f64) / 2.0),
                Some(Dim::NegInfinity) => f64::INFINITY,
                None => {
                    bad.push(format!("{}: δ̂_f ambiguous", e.name));
                    continue;
                }
            };
            ratios.push((e.name.clone(), p, ratio));
        }
    }
    let c = ratios
        .iter()
        .filter(|r| r.1 == 5)
        .map(|r| r.2)
        .fold(0.0, f64::max);
    let over: Vec<String> = ratios
        .iter()
        .filter(|r| r.1 > 5 && r.2 > slack * c * (1.0 + 1e-12))
        .map(|r| format!("{} p={} needs {:.3}", r.0, r.1, r.2 / c))
        .collect();
    let c_max = ratios.iter().map(|r| r.2).fold(0.0, f64::max);
    report(
        8,
        "one C fitted at p = 5 bounds |E(p)| / p^((-n+δ̂_f)/2) on p in 7..23 within factor 2 (homogeneous corpus)",
        bad.is_empty() && over.is_empty(),
        &format!("C = {c:.4}, largest ratio {c_max:.4}, validation primes exceeding 2C: {over:?} {bad:?}"),
    );
}

#[test]
fn criterion_09_dimension_estimates() {
    let primes = [5u64, 7];
    let mut bad = Vec::new();
    let crit = |s: &str, n| critical_system(&parse_polynomial(s, n).unwrap());
    let cases = [
        ("C of x1^2 + x2^2", crit("x1^2 + x2^2", 2), Dim::Finite(0)),
        ("C of x1^2*x2^2", crit("x1^2*x2^2", 2), Dim::Finite(1)),
        (
            "C of x1^2*x2 - x1",
            crit("x1^2*x2 - x1", 2),
            Dim::NegInfinity,
        ),
        (
            "S of x1*x2",
            singular_system(&parse_polynomial("x1*x2", 2).unwrap()),
            Dim::Finite(0),
        ),
    ];
    for (tag, sys, want) in cases {
        let got = locus_summary(tag, &sys, false, &primes, 3, 100_000_000)
            .unwrap()
            .estimate
            .consensus;
        if got != Some(want) {
            bad.push(format!("{tag}: {got:?}, expected {want:?}"));
        }
    }
    let mut identities = 0;
    for (e, f) in corpus()
        .into_iter()
        .filter(|(e, f)| e.homogeneous && degree(f) >= 2)
    {
        let t = tameness_check(&f, &Settings::default()).unwrap();
        identities += 1;
        if t.homogeneous_identity_holds != Some(true) {
            bad.push(format!(
                "{}: δ̂ = {:?}, δ̂_f = {:?}",
                e.name, t.delta_hat, t.delta_f_hat
            ));
        }
    }
    report(
        9,
        "δ̂ estimates with consensus over p in {5,7}, k <= 3; δ̂ + 1 = δ̂_f for homogeneous f of degree >= 2",
        bad.is_empty(),
        &format!("4 loci, {identities} identities, failures {bad:?}"),
    );
}

#[test]
fn criterion_10_exact_zero_consistency() {
    let lim = Limits::with_budget(LARGE_BUDGET);
    let (mut sums, mut bad) = (0, Vec::new());
    let mut check = |tag: String, r: &ExpSumResult| {
        sums += 1;
        if !zero_consistent(r) {
            bad.push(tag);
        }
    };
    for (e, f) in corpus() {
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23] {
            for m in 1..=3u32 {
                let pts = (p as u128).pow(m * e.n as u32);
                if pts > LARGE_BUDGET as u128 || (m == 3 && pts > 10_000_000) {
                    break;
                }
                let r = expsum_level(&f, p, m, &BasicStepSupport::full(e.n), 1, &lim).unwrap();
                check(format!("{} p={p} m={m}", e.name), &r);
            }
            if p >= 5 && p > degree(&f) {
                let dec = decomposition_m2(&f, p, 1, &lim).unwrap();
                check(format!("{} p={p} A-part", e.name), &dec.a_part);
                check(format!("{} p={p} B-part", e.name), &dec.b_part);
            }
        }
    }
    report(
        10,
        "exact_zero <=> magnitude < 1e-9 on the sums of criteria 5-8",
        bad.is_empty(),
        &format!("{sums} sums, contradictions {bad:?}"),
    );
}

#[test]
fn criterion_11_alpha_pi_units() {
    let mut bad = Vec::new();
    let d = NumericalData::new(&[(2, 1), (3, 2)], true, 2).unwrap();
    if alpha_pi(&d) != q(-1, 2) {
        bad.push(format!("[(2,1),(3,2)] -> {}", alpha_pi(&d)));
    }
    let d = NumericalData::new(&[], true, 2).unwrap();
    if alpha_pi(&d) != q(-4, 1) {
        bad.push(format!("empty -> {}", alpha_pi(&d)));
    }
    let r = blowup_refine((1, 2), 3).unwrap();
    let ratios: Vec<BigRational> = r.iter().map(|&(a, b)| q(b as i64, a as i64)).collect();
    if ratios != vec![q(3, 2), q(4, 3), q(5, 4)] || !ratios.windows(2).all(|w| w[1] < w[0]) {
        bad.push(format!("blow-up ratios {ratios:?}"));
    }
    report(
        11,
        "alpha_pi and blow-up refinement",
        bad.is_empty(),
        &format!("failures {bad:?}"),
    );
}

const CHECKS: [&str; 9] = [
    "pole-theorem",
    "lower-bound",
    "m1m2",
    "tameness",
    "nontriviality",
    "pz-relation",
    "fiber-product",
    "m2-decomposition",
    "proof-identities",
];

fn run_suite(jobs: usize) -> Vec<(String, Vec<u8>, i32)> {
    CHECKS
        .iter()
        .map(|check| {
            let out = Command::new(env!("CARGO_BIN_EXE_igusa"))
                .args([
                    "--budget",
                    "2e8",
                    "--jobs",
                    &jobs.to_string(),
                    "verify",
                    check,
                    "--corpus",
                    "default",
                ])
                .env_remove("IGUSA_BUDGET")
                .output()
                .unwrap();
            (
                check.to_string(),
                out.stdout,
                out.status.code().unwrap_or(-1),
            )
        })
        .collect()
}

#[test]
fn criterion_12_determinism() {
    let start = Instant::now();
    let one = run_suite(1);
    let eight = run_suite(8);
    let secs = start.elapsed().as_secs_f64();
    let mut bad = Vec::new();
    let mut verdicts = Vec::new();
    for ((check, a, code), (_, b, _)) in one.iter().zip(&eight) {
        if a != b {
            bad.push(check.clone());
        }
        let v: serde_json::Value = serde_json::from_slice(a).unwrap_or(serde_json::Value::Null);
        verdicts.push(format!(
            "{check}={}",
            v["verdict"].as_str().unwrap_or("none")
        ));
        if a.is_empty() || !matches!(*code, 0 | 3 | 4) {
            bad.push(format!("{check}: exit {code}"));
        }
    }
    report(
        12,
        "byte-identical JSON reports with --jobs 1 and --jobs 8",
        bad.is_empty() && secs < 300.0,
        &format!(
            "{} checks twice in {secs:.0}s (target < 300s), differing {bad:?}; {}",
            CHECKS.len(),
            verdicts.join(" ")
        ),
    );
}
