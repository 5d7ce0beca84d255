//! Valuation distributions of f on Z_p^n by recursive residue-class splitting.
//!
//! A residue class ȳ + pZ_p^n is classified by the reduction of f:
//! - f̄(ȳ) ≠ 0: valuation 0 on the whole class;
//! - f̄(ȳ) = 0 with a nonzero gradient: Hensel's lemma gives
//!   measure{v ≥ m} = p^{-n}·p^{-(m-1)} for m ≥ 1;
//! - otherwise f(ȳ + pz) = p^c·g(z) for a primitive g, and the class is the
//!   distribution of g shifted by c.
//!
//! Child polynomials are normalized (content removed, unit cofactors of
//! monomials dropped, absent variables removed, leading unit scaled to 1) and
//! memoized, which keeps the recursion small for the polynomials of interest
//! even at depths where enumeration is hopeless.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{inverse_mod, mul_mod};
use crate::error::{Error, Result};
use crate::polyring::Polynomial;
use crate::zeta::{BasicStepSupport, SupportFactor};

/// Exact distribution of v_p(f(x)) for x uniform on a support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValuationProfile {
    pub p: u64,
    /// dist[m] = measure{x in support : v(f(x)) = m}, for m < depth
    pub dist: Vec<BigRational>,
    /// measure{x in support : v(f(x)) ≥ depth}
    pub tail: BigRational,
}

impl ValuationProfile {
    pub fn depth(&self) -> usize {
        self.dist.len()
    }

    /// N_0..N_depth with N_m = measure{v(f) ≥ m}.
    pub fn tail_measures(&self) -> Vec<BigRational> {
        let mut out = vec![self.tail.clone()];
        for d in self.dist.iter().rev() {
            let next = out.last().unwrap() + d;
            out.push(next);
        }
        out.reverse();
        out
    }
}

type Terms = Vec<(Vec<u32>, u64)>;

#[derive(Clone, Debug)]
struct Prof {
    dist: Vec<BigRational>,
    tail: BigRational,
}

struct Ctx {
    p: u64,
    memo: HashMap<(usize, Terms, usize), Rc<Prof>>,
}

fn pow_u64(p: u64, e: usize) -> u64 {
    p.pow(e as u32)
}

fn rat_pow(p: u64, e: i64) -> BigRational {
    let b = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(b)
    } else {
        BigRational::new(BigInt::one(), b)
    }
}

fn valuation(mut c: u64, p: u64) -> usize {
    let mut v = 0;
    while c.is_multiple_of(p) {
        c /= p;
        v += 1;
    }
    v
}

fn eval_mod_p(terms: &Terms, y: &[u64], p: u64) -> u64 {
    let mut acc = 0u64;
    for (e, c) in terms {
        let mut t = c % p;
        if t == 0 {
            continue;
        }
        for (yi, &ei) in y.iter().zip(e) {
            for _ in 0..ei {
                t = t * yi % p;
            }
        }
        acc = (acc + t) % p;
    }
    acc
}

fn derivatives_mod_p(terms: &Terms, n: usize, p: u64) -> Vec<Terms> {
    (0..n)
        .map(|i| {
            terms
                .iter()
                .filter(|(e, c)| e[i] > 0 && !((c % p) * (e[i] as u64 % p)).is_multiple_of(p))
                .map(|(e, c)| {
                    let mut e2 = e.clone();
                    e2[i] -= 1;
                    (e2, (c % p) * (e[i] as u64 % p) % p)
                })
                .collect()
        })
        .collect()
}

fn binomial(n: u32, k: u32) -> u128 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

// h(ȳ + p z) mod P, as a sparse map
fn expand(terms: &Terms, y: &[u64], p: u64, modulus: u64) -> BTreeMap<Vec<u32>, u64> {
    let n = y.len();
    let mut out: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    for (e, c) in terms {
        let mut acc: Vec<(Vec<u32>, u64)> = vec![(vec![0; n], *c)];
        for i in 0..n {
            let ei = e[i];
            if ei == 0 {
                continue;
            }
            // coefficients of (y_i + p z_i)^{e_i}
            let mut factor = Vec::with_capacity(ei as usize + 1);
            let mut pk = 1u64;
            for k in 0..=ei {
                if k > 0 {
                    pk = mul_mod(pk, p, modulus);
                    if pk == 0 {
                        break;
                    }
                }
                let b = (binomial(ei, k) % modulus as u128) as u64;
                let yk = crate::arith::pow_mod(y[i], (ei - k) as u64, modulus);
                let v = mul_mod(mul_mod(b, yk, modulus), pk, modulus);
                if v != 0 {
                    factor.push((k, v));
                }
            }
            let mut next = Vec::with_capacity(acc.len() * factor.len());
            for (ex, cx) in &acc {
                for &(k, v) in &factor {
                    let mut e2 = ex.clone();
                    e2[i] = k;
                    next.push((e2, mul_mod(*cx, v, modulus)));
                }
            }
            acc = next;
        }
        for (ex, cx) in acc {
            if cx == 0 {
                continue;
            }
            let slot = out.entry(ex).or_insert(0);
            *slot = ((*slot as u128 + cx as u128) % modulus as u128) as u64;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

enum Normalized {
    // h ≡ 0 mod P: all mass at valuation ≥ depth
    Zero,
    // h = p^shift · (unit) · g with g primitive of arity n at depth j
    Node {
        shift: usize,
        n: usize,
        terms: Terms,
        depth: usize,
    },
}

fn normalize(map: BTreeMap<Vec<u32>, u64>, p: u64, depth: usize) -> Normalized {
    if map.is_empty() {
        return Normalized::Zero;
    }
    let shift = map.values().map(|&c| valuation(c, p)).min().unwrap();
    let j = depth - shift;
    let modulus = pow_u64(p, j);
    let div = pow_u64(p, shift);
    let mut terms: Terms = map
        .into_iter()
        .map(|(e, c)| (e, (c / div) % modulus))
        .collect();
    terms.retain(|(_, c)| *c != 0);
    let n_old = terms[0].0.len();

    // a monomial times a cofactor that is a unit everywhere
    let units: Vec<usize> = (0..terms.len())
        .filter(|&i| !terms[i].1.is_multiple_of(p))
        .collect();
    let content: Vec<u32> = (0..n_old)
        .map(|v| terms.iter().map(|(e, _)| e[v]).min().unwrap())
        .collect();
    if units.len() == 1 && terms[units[0]].0 == content {
        let mut e: Vec<u32> = content.into_iter().filter(|&x| x > 0).collect();
        e.sort_unstable_by(|a, b| b.cmp(a));
        return Normalized::Node {
            shift,
            n: e.len(),
            terms: vec![(e, 1 % modulus)],
            depth: j,
        };
    }

    // drop variables that do not occur
    let present: Vec<usize> = (0..n_old)
        .filter(|&v| terms.iter().any(|(e, _)| e[v] > 0))
        .collect();
    let mut terms: Terms = terms
        .into_iter()
        .map(|(e, c)| (present.iter().map(|&v| e[v]).collect(), c))
        .collect();
    terms.sort();
    let lead = terms.iter().find(|(_, c)| c % p != 0).unwrap().1;
    let inv = inverse_mod(lead, modulus).unwrap();
    for t in terms.iter_mut() {
        t.1 = mul_mod(t.1, inv, modulus);
    }
    Normalized::Node {
        shift,
        n: present.len(),
        terms,
        depth: j,
    }
}

impl Ctx {
    fn node(&mut self, n: usize, terms: Terms, depth: usize) -> Rc<Prof> {
        let key = (n, terms, depth);
        if let Some(r) = self.memo.get(&key) {
            return r.clone();
        }
        let boxes = vec![None; n];
        let prof = Rc::new(self.scan(n, &key.1, depth, &boxes));
        self.memo.insert(key, prof.clone());
        prof
    }

    // Distribution over the classes allowed by `fixed` (None = any residue).
    fn scan(&mut self, n: usize, terms: &Terms, depth: usize, fixed: &[Option<u64>]) -> Prof {
        let p = self.p;
        let modulus = pow_u64(p, depth);
        let mut dist = vec![BigRational::zero(); depth];
        let mut tail = BigRational::zero();
        if n == 0 {
            let c = terms.first().map(|t| t.1 % modulus).unwrap_or(0);
            if c == 0 {
                tail = BigRational::one();
            } else {
                dist[valuation(c, p)] = BigRational::one();
            }
            return Prof { dist, tail };
        }
        let grads = derivatives_mod_p(terms, n, p);
        let mut unit = 0u64;
        let mut smooth = 0u64;
        let mut zero_children = 0u64;
        let mut children: BTreeMap<(usize, usize, Terms, usize), u64> = BTreeMap::new();
        let mut y = vec![0u64; n];
        let ranges: Vec<(u64, u64)> = fixed
            .iter()
            .map(|f| match f {
                Some(a) => (*a, *a + 1),
                None => (0, p),
            })
            .collect();
        for (i, r) in ranges.iter().enumerate() {
            y[i] = r.0;
        }
        loop {
            if eval_mod_p(terms, &y, p) != 0 {
                unit += 1;
            } else if grads.iter().any(|g| eval_mod_p(g, &y, p) != 0) {
                smooth += 1;
            } else {
                match normalize(expand(terms, &y, p, modulus), p, depth) {
                    Normalized::Zero => zero_children += 1,
                    Normalized::Node {
                        shift,
                        n,
                        terms,
                        depth,
                    } => {
                        *children.entry((shift, n, terms, depth)).or_insert(0) += 1;
                    }
                }
            }
            // next class
            let mut i = n;
            let mut done = true;
            while i > 0 {
                i -= 1;
                y[i] += 1;
                if y[i] < ranges[i].1 {
                    done = false;
                    break;
                }
                y[i] = ranges[i].0;
            }
            if done {
                break;
            }
        }
        let w = rat_pow(p, -(n as i64));
        let count = |c: u64| BigRational::from_integer(c.into());
        dist[0] += count(unit) * &w;
        if smooth > 0 {
            let s = count(smooth) * &w;
            let one_minus = BigRational::one() - rat_pow(p, -1);
            for (m, slot) in dist.iter_mut().enumerate().skip(1) {
                *slot += &s * &one_minus * rat_pow(p, -(m as i64 - 1));
            }
            tail += &s * rat_pow(p, -(depth as i64 - 1));
        }
        tail += count(zero_children) * &w;
        for ((shift, cn, cterms, cdepth), c) in children {
            let sub = self.node(cn, cterms, cdepth);
            let weight = count(c) * &w;
            for (i, d) in sub.dist.iter().enumerate() {
                if !d.is_zero() {
                    dist[shift + i] += &weight * d;
                }
            }
            tail += &weight * &sub.tail;
        }
        Prof { dist, tail }
    }
}

/// Largest depth J with p^J below 2^62, the range of the word arithmetic.
pub fn max_depth(p: u64) -> usize {
    let mut j = 0;
    let mut v: u128 = 1;
    while v * p as u128 <= 1u128 << 62 {
        v *= p as u128;
        j += 1;
    }
    j
}

/// Exact distribution of v_p(f) on `support` up to `depth`.
pub fn valuation_profile(
    f: &Polynomial,
    p: u64,
    depth: usize,
    support: &BasicStepSupport,
) -> Result<ValuationProfile> {
    if !crate::localring::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    f.check_prime(p)?;
    let n = f.arity();
    support.validate(n, p)?;
    if depth == 0 {
        return Err(Error::invalid("depth must be at least 1"));
    }
    if depth > max_depth(p) {
        return Err(Error::invalid(format!(
            "depth {depth} too large for p = {p} (max {})",
            max_depth(p)
        )));
    }
    let modulus = pow_u64(p, depth);
    let g = f.reduce_mod(modulus)?;
    let terms: Terms = g.terms().iter().map(|(e, c)| (e.clone(), *c)).collect();
    let fixed: Vec<Option<u64>> = support
        .factors()
        .iter()
        .map(|s| match s {
            SupportFactor::Full => None,
            SupportFactor::Residue(a) => Some(*a),
        })
        .collect();
    let mut ctx = Ctx {
        p,
        memo: HashMap::new(),
    };
    let prof = if n == 0 {
        ctx.scan(0, &terms, depth, &[])
    } else {
        ctx.scan(n, &terms, depth, &fixed)
    };
    Ok(ValuationProfile {
        p,
        dist: prof.dist,
        tail: prof.tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{count_bruteforce_on, Limits};
    use crate::localring::ModulusSpec;
    use crate::polyring::parse_polynomial;

    fn brute_measures(
        f: &Polynomial,
        p: u64,
        depth: u32,
        support: &BasicStepSupport,
    ) -> Vec<BigRational> {
        let mut out = vec![support.measure(p)];
        for m in 1..=depth {
            let spec = ModulusSpec::new(p, m).unwrap();
            out.push(
                count_bruteforce_on(f, &spec, support, &Limits::with_budget(1 << 24))
                    .unwrap()
                    .normalized,
            );
        }
        out
    }

    #[test]
    fn tree_matches_enumeration() {
        let cases = [
            ("x1", 1),
            ("x1^2", 1),
            ("x1^2 - 5", 1),
            ("x1*x2", 2),
            ("x1^2 + x2^2", 2),
            ("x1^3 + x2^3", 2),
            ("x1^2*x2^2", 2),
            ("x1^2*x2 - x1", 2),
            ("x1^2 - x2^3", 2),
            ("3*x1^2 + 9*x2", 2),
            ("1", 2),
            ("0", 2),
            ("x1*x2*x3", 3),
            ("x1^3 + x2^3 + x3^3", 3),
        ];
        for (text, n) in cases {
            let f = parse_polynomial(text, n).unwrap();
            for p in [2u64, 3, 5] {
                let depth = match n {
                    1 => 8,
                    2 => {
                        if p == 5 {
                            4
                        } else {
                            6
                        }
                    }
                    _ => {
                        if p == 5 {
                            2
                        } else {
                            4
                        }
                    }
                };
                let full = BasicStepSupport::full(n);
                let prof = valuation_profile(&f, p, depth, &full).unwrap();
                assert_eq!(
                    prof.tail_measures(),
                    brute_measures(&f, p, depth as u32, &full),
                    "{text} p={p}"
                );
            }
        }
    }

    #[test]
    fn tree_respects_supports() {
        let f = parse_polynomial("x1^2*x2 - x1", 2).unwrap();
        for s in ["1,*", "0,*", "*,2", "0,0"] {
            let sup = BasicStepSupport::parse(s, 2).unwrap();
            let prof = valuation_profile(&f, 3, 5, &sup).unwrap();
            assert_eq!(
                prof.tail_measures(),
                brute_measures(&f, 3, 5, &sup),
                "support {s}"
            );
        }
    }

    #[test]
    fn depth_limits() {
        assert_eq!(max_depth(2), 62);
        assert!(valuation_profile(
            &parse_polynomial("x1", 1).unwrap(),
            13,
            40,
            &BasicStepSupport::full(1)
        )
        .is_err());
    }
}
