//! Table-driven enumeration over F_q^n.

use rayon::prelude::*;

use crate::error::Result;
use crate::localring::{check_budget, FastFq, FqField};
use crate::polyring::{CoeffRing, Polynomial};

// A polynomial over F_q arranged by powers of its last variable; coefficients
// are element indices.
struct FqCompiled {
    by_power: Vec<Vec<(u16, Vec<u32>)>>,
}

fn compile(f: &Polynomial, field: &FqField) -> Result<FqCompiled> {
    let n = f.arity();
    let d = if n == 0 {
        0
    } else {
        f.degree_in(n - 1) as usize
    };
    let mut by_power = vec![Vec::new(); d + 1];
    for (mono, c) in f.terms() {
        let e = mono.exponents();
        let idx = field.index(&field.from_rational(c)?) as u16;
        if idx == 0 {
            continue;
        }
        let k = if n == 0 { 0 } else { e[n - 1] as usize };
        let prefix = if n == 0 { vec![] } else { e[..n - 1].to_vec() };
        by_power[k].push((idx, prefix));
    }
    Ok(FqCompiled { by_power })
}

struct Powers {
    q: usize,
    width: usize,
    table: Vec<u16>,
}

impl Powers {
    fn new(fast: &FastFq<'_>, max_deg: usize) -> Self {
        let q = fast.q;
        let width = max_deg + 1;
        let mut table = vec![0u16; q * width];
        for x in 0..q {
            let mut v = 1u16;
            for e in 0..width {
                table[x * width + e] = v;
                v = fast.mul(v, x as u16);
            }
        }
        Powers { q, width, table }
    }

    #[inline]
    fn get(&self, x: u16, e: u32) -> u16 {
        debug_assert!((x as usize) < self.q);
        self.table[x as usize * self.width + e as usize]
    }
}

fn univariate(c: &FqCompiled, prefix: &[u16], pw: &Powers, fast: &FastFq<'_>, out: &mut Vec<u16>) {
    out.clear();
    for terms in &c.by_power {
        let mut s = 0u16;
        for (coef, exps) in terms {
            let mut t = *coef;
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    t = fast.mul(t, pw.get(prefix[i], e));
                }
            }
            s = fast.add(s, t);
        }
        out.push(s);
    }
    while out.len() > 1 && *out.last().unwrap() == 0 {
        out.pop();
    }
}

#[inline]
fn horner(coeffs: &[u16], x: u16, fast: &FastFq<'_>) -> u16 {
    let mut v = 0u16;
    for &c in coeffs.iter().rev() {
        v = fast.add(fast.mul(v, x), c);
    }
    v
}

// Calls `per_prefix` for every point of F_q^{n-1}; chunks of the first
// coordinate run in parallel and are merged in order.
fn fold_prefixes<A, I, F, R>(q: usize, len: usize, init: I, per_prefix: F, reduce: R) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &[u16]) + Sync,
    R: Fn(A, A) -> A,
{
    if len == 0 {
        let mut acc = init();
        per_prefix(&mut acc, &[]);
        return acc;
    }
    let jobs = rayon::current_num_threads().max(1).min(q);
    let parts: Vec<A> = (0..jobs)
        .into_par_iter()
        .map(|j| {
            let lo = j * q / jobs;
            let hi = (j + 1) * q / jobs;
            let mut acc = init();
            let mut pt = vec![0u16; len];
            for first in lo..hi {
                pt[0] = first as u16;
                for v in pt[1..].iter_mut() {
                    *v = 0;
                }
                loop {
                    per_prefix(&mut acc, &pt);
                    let mut i = len;
                    let mut done = true;
                    while i > 1 {
                        i -= 1;
                        pt[i] += 1;
                        if (pt[i] as usize) < q {
                            done = false;
                            break;
                        }
                        pt[i] = 0;
                    }
                    if done {
                        break;
                    }
                }
            }
            acc
        })
        .collect();
    let mut it = parts.into_iter();
    let first = it.next().unwrap();
    it.fold(first, reduce)
}

/// Number of common zeros of `system` in F_q^n.
pub(crate) fn common_zeros(
    system: &[Polynomial],
    n: usize,
    field: &FqField,
    budget: u64,
) -> Result<u64> {
    check_budget(field.q(), n, budget)?;
    let fast = field.fast()?;
    let comp: Vec<FqCompiled> = system
        .iter()
        .map(|f| compile(f, field))
        .collect::<Result<_>>()?;
    let max_deg = system
        .iter()
        .flat_map(|f| f.terms().flat_map(|(m, _)| m.exponents().to_vec()))
        .max()
        .unwrap_or(0) as usize;
    let pw = Powers::new(&fast, max_deg);
    let q = fast.q;
    if n == 0 {
        let all = comp.iter().all(|c| c.by_power[0].is_empty());
        return Ok(all as u64);
    }
    Ok(fold_prefixes(
        q,
        n - 1,
        || (0u64, Vec::new(), Vec::new()),
        |(count, uni, cand): &mut (u64, Vec<u16>, Vec<u16>), prefix| {
            cand.clear();
            cand.extend(0..q as u16);
            for c in &comp {
                univariate(c, prefix, &pw, &fast, uni);
                if uni.len() == 1 && uni[0] == 0 {
                    continue;
                }
                cand.retain(|&x| horner(uni, x, &fast) == 0);
                if cand.is_empty() {
                    break;
                }
            }
            *count += cand.len() as u64;
        },
        |a, b| (a.0 + b.0, a.1, a.2),
    )
    .0)
}

/// Histogram over F_p of Tr(u·f(x)) for x in F_q^n.
pub(crate) fn trace_histogram(
    f: &Polynomial,
    field: &FqField,
    u: u16,
    budget: u64,
) -> Result<Vec<u64>> {
    let n = f.arity();
    check_budget(field.q(), n, budget)?;
    let fast = field.fast()?;
    let comp = compile(f, field)?;
    let max_deg = f.degree().unwrap_or(0) as usize;
    let pw = Powers::new(&fast, max_deg);
    let q = fast.q;
    let p = field.p() as usize;
    Ok(fold_prefixes(
        q,
        n.saturating_sub(1),
        || (vec![0u64; p], Vec::new()),
        |(hist, uni): &mut (Vec<u64>, Vec<u16>), prefix| {
            univariate(&comp, prefix, &pw, &fast, uni);
            if n == 0 {
                hist[fast.trace(fast.mul(u, uni[0])) as usize] += 1;
                return;
            }
            for x in 0..q as u16 {
                let v = horner(uni, x, &fast);
                hist[fast.trace(fast.mul(u, v)) as usize] += 1;
            }
        },
        |mut a, b| {
            for (x, y) in a.0.iter_mut().zip(b.0) {
                *x += y;
            }
            a
        },
    )
    .0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse_polynomial;

    fn brute_common_zeros(system: &[Polynomial], n: usize, field: &FqField) -> u64 {
        let mut count = 0;
        let q = field.q();
        for idx in crate::localring::Odometer::new(q, n) {
            let pt: Vec<_> = idx.iter().map(|&i| field.element(i)).collect();
            if system
                .iter()
                .all(|f| field.is_zero(&f.evaluate(&pt, field).unwrap()))
            {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn common_zeros_match_generic_evaluation() {
        let systems = [
            (vec!["x1^2 + x2^2"], 2),
            (vec!["2*x1*x2 - 1", "x1^2"], 2),
            (vec!["x1*x2", "x2*x3", "x1*x3"], 3),
            (vec!["x1^3 + x2^3 + x3^3"], 3),
            (vec!["0"], 2),
            (vec!["1"], 2),
        ];
        for (p, k) in [(3, 1), (2, 2), (3, 2), (5, 1)] {
            let field = FqField::new(p, k).unwrap();
            for (sys, n) in &systems {
                let polys: Vec<_> = sys
                    .iter()
                    .map(|s| parse_polynomial(s, *n).unwrap())
                    .collect();
                assert_eq!(
                    common_zeros(&polys, *n, &field, 1 << 20).unwrap(),
                    brute_common_zeros(&polys, *n, &field),
                    "{sys:?} over F_{}",
                    field.q()
                );
            }
        }
    }

    #[test]
    fn trace_histogram_sums_to_field_size() {
        let field = FqField::new(3, 2).unwrap();
        let f = parse_polynomial("x1^2 + x1*x2", 2).unwrap();
        let h = trace_histogram(&f, &field, 1, 1 << 20).unwrap();
        assert_eq!(h.iter().sum::<u64>(), 81);
        // oracle
        let mut o = vec![0u64; 3];
        for idx in crate::localring::Odometer::new(9, 2) {
            let pt: Vec<_> = idx.iter().map(|&i| field.element(i)).collect();
            o[field.trace(&f.evaluate(&pt, &field).unwrap()) as usize] += 1;
        }
        assert_eq!(h, o);
    }
}
