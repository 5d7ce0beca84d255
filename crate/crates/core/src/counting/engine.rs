//! Enumeration of polynomial values over boxes of residues.
//!
//! The first n-1 coordinates run through an odometer; for each prefix the
//! polynomial becomes univariate in the last coordinate and is stepped along
//! its arithmetic progression by forward differences, so every point costs a
//! handful of modular additions. The first coordinate is split into contiguous
//! chunks that run on the rayon pool and are merged in chunk order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::polyring::ModPoly;

/// Values `start, start + step, ..., start + (count-1)·step` of one coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoordRange {
    pub start: u64,
    pub step: u64,
    pub count: u64,
}

impl CoordRange {
    pub fn full(modulus: u64) -> Self {
        CoordRange {
            start: 0,
            step: 1,
            count: modulus,
        }
    }

    pub fn single(value: u64) -> Self {
        CoordRange {
            start: value,
            step: 1,
            count: 1,
        }
    }
}

/// Total number of points in a box, checked against a budget.
pub fn box_size(ranges: &[CoordRange], budget: u64) -> Result<u64> {
    let mut total: u128 = 1;
    for r in ranges {
        total = total.saturating_mul(r.count as u128);
    }
    if total > budget as u128 {
        return Err(Error::BudgetExceeded {
            needed: total,
            budget,
        });
    }
    Ok(total as u64)
}

/// A polynomial mod M arranged by powers of its last variable.
pub(crate) struct Compiled {
    m: u64,
    n: usize,
    by_power: Vec<Vec<(u64, Vec<u32>)>>,
    prefix_deg: Vec<u32>,
}

impl Compiled {
    pub fn new(f: &ModPoly) -> Result<Self> {
        let m = f.modulus();
        if m > crate::localring::MAX_MODULUS {
            return Err(Error::invalid(format!(
                "modulus {m} too large for enumeration"
            )));
        }
        let n = f.arity();
        if n == 0 {
            let c = f.terms().first().map(|t| t.1).unwrap_or(0);
            return Ok(Compiled {
                m,
                n,
                by_power: vec![vec![(c, vec![])]],
                prefix_deg: vec![],
            });
        }
        let d = f.degree_in(n - 1) as usize;
        let mut by_power = vec![Vec::new(); d + 1];
        for (e, c) in f.terms() {
            by_power[e[n - 1] as usize].push((*c, e[..n - 1].to_vec()));
        }
        let prefix_deg = (0..n - 1).map(|i| f.degree_in(i)).collect();
        Ok(Compiled {
            m,
            n,
            by_power,
            prefix_deg,
        })
    }
}

#[inline]
fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

// Steps the univariate polynomial with coefficients `coeffs` along `r`.
#[inline]
fn run_last<A, V>(coeffs: &[u64], r: CoordRange, m: u64, prefix: &[u64], acc: &mut A, visit: &mut V)
where
    V: FnMut(&mut A, &[u64], u64, u64),
{
    let mut d = coeffs.len();
    while d > 1 && coeffs[d - 1] == 0 {
        d -= 1;
    }
    let coeffs = &coeffs[..d];
    let deg = d - 1;
    let step = r.step % m;
    if deg == 0 {
        let mut x = r.start;
        for _ in 0..r.count {
            visit(acc, prefix, x, coeffs[0]);
            x = add_mod(x, step, m);
        }
        return;
    }
    // values at the first deg+1 points, then their difference table
    let mut diff = [0u64; 16];
    let mut heap;
    let table: &mut [u64] = if deg < 16 {
        &mut diff[..=deg]
    } else {
        heap = vec![0u64; deg + 1];
        &mut heap[..]
    };
    let mut x = r.start;
    for slot in table.iter_mut() {
        let mut v = 0u64;
        for &c in coeffs.iter().rev() {
            v = (v * x + c) % m;
        }
        *slot = v;
        x = add_mod(x, step, m);
    }
    for k in 1..=deg {
        for i in (k..=deg).rev() {
            table[i] = add_mod(table[i], m - table[i - 1], m);
        }
    }
    let mut x = r.start;
    for _ in 0..r.count {
        visit(acc, prefix, x, table[0]);
        for k in 0..deg {
            table[k] = add_mod(table[k], table[k + 1], m);
        }
        x = add_mod(x, step, m);
    }
}

/// Sequential fold over the box `ranges`; `visit(acc, prefix, x_last, value)`.
pub(crate) fn fold_seq<A, V>(c: &Compiled, ranges: &[CoordRange], acc: &mut A, visit: &mut V)
where
    V: FnMut(&mut A, &[u64], u64, u64),
{
    let m = c.m;
    if c.n == 0 {
        visit(acc, &[], 0, c.by_power[0][0].0);
        return;
    }
    if ranges.iter().any(|r| r.count == 0) {
        return;
    }
    let last = c.n - 1;
    let mut coeffs = vec![0u64; c.by_power.len()];
    if last == 0 {
        for (e, terms) in c.by_power.iter().enumerate() {
            coeffs[e] = terms.iter().fold(0, |a, t| add_mod(a, t.0, m));
        }
        run_last(&coeffs, ranges[0], m, &[], acc, visit);
        return;
    }
    let mut idx = vec![0u64; last];
    let mut prefix: Vec<u64> = ranges[..last].iter().map(|r| r.start % m).collect();
    let mut pows: Vec<Vec<u64>> = (0..last)
        .map(|i| powers(prefix[i], c.prefix_deg[i], m))
        .collect();
    loop {
        for (e, terms) in c.by_power.iter().enumerate() {
            let mut s = 0u64;
            for (coef, exps) in terms {
                let mut t = *coef;
                for (i, &k) in exps.iter().enumerate() {
                    if k > 0 {
                        t = t * pows[i][k as usize] % m;
                    }
                }
                s = add_mod(s, t, m);
            }
            coeffs[e] = s;
        }
        run_last(&coeffs, ranges[last], m, &prefix, acc, visit);
        // advance the prefix odometer
        let mut i = last;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < ranges[i].count {
                prefix[i] = add_mod(prefix[i], ranges[i].step % m, m);
                pows[i] = powers(prefix[i], c.prefix_deg[i], m);
                break;
            }
            idx[i] = 0;
            prefix[i] = ranges[i].start % m;
            pows[i] = powers(prefix[i], c.prefix_deg[i], m);
        }
    }
}

fn powers(x: u64, d: u32, m: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(d as usize + 1);
    let mut v = 1 % m;
    for _ in 0..=d {
        out.push(v);
        v = v * x % m;
    }
    out
}

/// Parallel fold: chunks of the first coordinate are folded independently and
/// merged in chunk order, so the result does not depend on the pool size.
pub(crate) fn fold_par<A, I, V, R>(
    c: &Compiled,
    ranges: &[CoordRange],
    init: I,
    visit: V,
    reduce: R,
) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, &[u64], u64, u64) + Sync,
    R: Fn(A, A) -> A,
{
    if c.n == 0 || ranges[0].count < 2 {
        let mut acc = init();
        fold_seq(c, ranges, &mut acc, &mut |a, p, x, v| visit(a, p, x, v));
        return acc;
    }
    let r0 = ranges[0];
    let jobs = rayon::current_num_threads().max(1) as u64;
    let chunks = jobs.min(r0.count);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|j| {
            let lo = j * r0.count / chunks;
            let hi = (j + 1) * r0.count / chunks;
            let mut sub = ranges.to_vec();
            sub[0] = CoordRange {
                start: (r0.start as u128 + lo as u128 * r0.step as u128) as u64 % c.m,
                step: r0.step,
                count: hi - lo,
            };
            let mut acc = init();
            fold_seq(c, &sub, &mut acc, &mut |a, p, x, v| visit(a, p, x, v));
            acc
        })
        .collect();
    let mut it = parts.into_iter();
    let first = it.next().unwrap();
    it.fold(first, reduce)
}

/// Histogram of values of `f` over the box, as counts indexed by residue.
pub(crate) fn histogram(f: &ModPoly, ranges: &[CoordRange], budget: u64) -> Result<Vec<u64>> {
    box_size(ranges, budget)?;
    let c = Compiled::new(f)?;
    let m = f.modulus() as usize;
    Ok(fold_par(
        &c,
        ranges,
        || vec![0u64; m],
        |h, _, _, v| h[v as usize] += 1,
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    ))
}

/// Number of zeros of `f` over the box.
pub(crate) fn count_zeros(f: &ModPoly, ranges: &[CoordRange], budget: u64) -> Result<u64> {
    box_size(ranges, budget)?;
    let c = Compiled::new(f)?;
    Ok(fold_par(
        &c,
        ranges,
        || 0u64,
        |a, _, _, v| *a += (v == 0) as u64,
        |a, b| a + b,
    ))
}
