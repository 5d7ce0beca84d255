//! Residue rings Z/p^m and finite fields F_{p^k}, plus point enumeration.

mod fq;

use serde::Serialize;

use crate::arith::{mul_mod, pow_mod};
use crate::error::{Error, Result};
use crate::polyring::{IntegersMod, ModPoly, Polynomial};

pub(crate) use fq::FastFq;
pub use fq::{find_irreducible, FqElement, FqField};

/// Deterministic Miller-Rabin; the base set is exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// The ring Z/p^m. The modulus is kept below 2^32 so that products of two
/// residues fit the 64-bit fast paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ModulusSpec {
    p: u64,
    m: u32,
    modulus: u64,
}

/// Largest modulus accepted by [`ModulusSpec`].
pub const MAX_MODULUS: u64 = 1 << 32;

impl ModulusSpec {
    pub fn new(p: u64, m: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if m == 0 {
            return Err(Error::invalid("level m must be at least 1"));
        }
        let modulus = p
            .checked_pow(m)
            .filter(|&q| q <= MAX_MODULUS)
            .ok_or_else(|| {
                Error::invalid(format!("{p}^{m} exceeds the supported modulus range"))
            })?;
        Ok(ModulusSpec { p, m, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn ring(&self) -> IntegersMod {
        IntegersMod::new(self.modulus).unwrap()
    }

    /// Reduces `f`, refusing primes that divide a denominator.
    pub fn reduce(&self, f: &Polynomial) -> Result<ModPoly> {
        f.check_prime(self.p)?;
        f.reduce_mod(self.modulus)
    }

    /// Number of points of (Z/p^m)^n, or `None` on overflow.
    pub fn point_count(&self, n: usize) -> Option<u128> {
        (self.modulus as u128).checked_pow(n as u32)
    }
}

/// Fails unless `base^n` is within `budget`.
pub fn check_budget(base: u64, n: usize, budget: u64) -> Result<u128> {
    let needed = (base as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > budget as u128 {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(needed)
}

/// All tuples in `[0, base)^n` in lexicographic order: the first coordinate
/// varies slowest, the last fastest.
#[derive(Clone, Debug)]
pub struct Odometer {
    base: u64,
    current: Option<Vec<u64>>,
    first_end: u64,
}

impl Odometer {
    pub fn new(base: u64, n: usize) -> Self {
        Odometer::with_first(base, n, 0..base)
    }

    /// Only tuples whose first coordinate lies in `first`; tuples for
    /// disjoint ranges partition the full stream.
    pub fn with_first(base: u64, n: usize, first: std::ops::Range<u64>) -> Self {
        let current = if base == 0 || first.start >= first.end.min(base) {
            None
        } else if n == 0 {
            Some(Vec::new())
        } else {
            let mut v = vec![0; n];
            v[0] = first.start;
            Some(v)
        };
        Odometer {
            base,
            current,
            first_end: first.end.min(base),
        }
    }
}

impl Iterator for Odometer {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            cur[i] += 1;
            let limit = if i == 0 { self.first_end } else { self.base };
            if cur[i] < limit {
                break;
            }
            if i == 0 {
                self.current = None;
                break;
            }
            cur[i] = 0;
        }
        Some(out)
    }
}

/// Enumerates (Z/p^m)^n, subject to the point budget.
pub fn enumerate_residues(spec: &ModulusSpec, n: usize, budget: u64) -> Result<Odometer> {
    check_budget(spec.modulus(), n, budget)?;
    Ok(Odometer::new(spec.modulus(), n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn primality_against_trial_division() {
        for n in 0..5000u64 {
            let trial = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime(n), trial, "n = {n}");
        }
        assert!(is_prime(4_294_967_291));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn modulus_spec_validates() {
        assert!(ModulusSpec::new(4, 1).is_err());
        assert!(ModulusSpec::new(3, 0).is_err());
        assert_eq!(ModulusSpec::new(3, 3).unwrap().modulus(), 27);
        assert!(ModulusSpec::new(3, 40).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let z4: Vec<_> = enumerate_residues(&ModulusSpec::new(2, 2).unwrap(), 1, 1000)
            .unwrap()
            .collect();
        assert_eq!(z4, vec![vec![0], vec![1], vec![2], vec![3]]);
        let z9: Vec<_> = enumerate_residues(&ModulusSpec::new(3, 2).unwrap(), 2, 1000)
            .unwrap()
            .collect();
        assert_eq!(z9.len(), 81);
        assert_eq!(z9.iter().collect::<HashSet<_>>().len(), 81);
        assert!(enumerate_residues(&ModulusSpec::new(3, 2).unwrap(), 4, 1000).is_err());
    }

    #[test]
    fn partitions_recombine_in_order() {
        let full: Vec<_> = Odometer::new(5, 3).collect();
        let mut parts = Vec::new();
        for r in [0..2, 2..3, 3..5] {
            parts.extend(Odometer::with_first(5, 3, r));
        }
        assert_eq!(full, parts);
        assert_eq!(Odometer::new(7, 0).count(), 1);
    }
}
