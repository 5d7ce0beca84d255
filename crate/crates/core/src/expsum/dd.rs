//! Double-double arithmetic (about 106 bits) and cached tables of N-th roots
//! of unity.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// hi + lo with |lo| ≤ ulp(hi)/2.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };
    pub const ONE: DD = DD { hi: 1.0, lo: 0.0 };
    // 2π to double-double precision
    pub const TWO_PI: DD = DD {
        hi: std::f64::consts::TAU,
        lo: 2.4492935982947064e-16,
    };

    pub fn from_f64(x: f64) -> DD {
        DD { hi: x, lo: 0.0 }
    }

    pub fn add(self, o: DD) -> DD {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DD { hi, lo }
    }

    pub fn neg(self) -> DD {
        DD {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn sub(self, o: DD) -> DD {
        self.add(o.neg())
    }

    pub fn mul(self, o: DD) -> DD {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }

    pub fn mul_f64(self, b: f64) -> DD {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        DD { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> DD {
        let q1 = self.hi / b;
        let r = self.sub(DD::from_f64(q1).mul_f64(b));
        let q2 = r.hi / b;
        let r = r.sub(DD::from_f64(q2).mul_f64(b));
        let q3 = r.hi / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        DD { hi, lo }.add(DD::from_f64(q3))
    }

    /// a / b for integers below 2^53.
    pub fn ratio(a: u64, b: u64) -> DD {
        DD::from_f64(a as f64).div_f64(b as f64)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

// (cos θ, sin θ) for |θ| ≤ π/4 by Taylor series.
fn cos_sin_small(theta: DD) -> (DD, DD) {
    let t2 = theta.mul(theta);
    let mut sin = theta;
    let mut cos = DD::ONE;
    let mut term_s = theta;
    let mut term_c = DD::ONE;
    for k in 1..=20 {
        let k = k as f64;
        term_c = term_c.mul(t2).div_f64((2.0 * k - 1.0) * (2.0 * k)).neg();
        term_s = term_s.mul(t2).div_f64((2.0 * k) * (2.0 * k + 1.0)).neg();
        cos = cos.add(term_c);
        sin = sin.add(term_s);
    }
    (cos, sin)
}

/// (cos, sin) of 2π·r/n, with the quadrant reduction done in integers.
pub fn root_of_unity(r: u64, n: u64) -> (DD, DD) {
    let r = r % n;
    let four_r = 4 * r as u128;
    let k = (four_r / n as u128) as u64;
    let r1 = (four_r % n as u128) as u64; // angle = k·π/2 + 2π·r1/(4n)
    let (c, s) = if 2 * r1 <= n {
        cos_sin_small(DD::TWO_PI.mul(DD::ratio(r1, 4 * n)))
    } else {
        let (c, s) = cos_sin_small(DD::TWO_PI.mul(DD::ratio(n - r1, 4 * n)));
        (s, c)
    };
    match k {
        0 => (c, s),
        1 => (s.neg(), c),
        2 => (c.neg(), s.neg()),
        _ => (s, c.neg()),
    }
}

/// Absolute error bound of each table entry.
pub const TABLE_ERROR: f64 = 1e-30;

pub type RootTable = Arc<Vec<(DD, DD)>>;

/// The table ζ_n^j, j = 0..n, built once per n.
pub fn root_table(n: u64) -> RootTable {
    static CACHE: OnceLock<Mutex<HashMap<u64, RootTable>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&n) {
        return t.clone();
    }
    let t: RootTable = Arc::new((0..n).map(|j| root_of_unity(j, n)).collect());
    cache.lock().unwrap().entry(n).or_insert(t).clone()
}
