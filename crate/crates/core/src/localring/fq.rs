use std::sync::OnceLock;

use num_rational::BigRational;
use serde::Serialize;

use super::is_prime;
use crate::arith::inverse_mod;
use crate::error::{Error, Result};
use crate::polyring::{CoeffRing, IntegersMod};

/// Largest field size for which addition and multiplication tables are built.
pub const MAX_TABLE_Q: u64 = 2048;

/// An element of F_{p^k}: coefficients `a_0..a_{k-1}` of a polynomial in the
/// generator, reduced modulo the field modulus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FqElement {
    pub coeffs: Vec<u64>,
}

#[derive(Clone, Debug)]
struct Tables {
    add: Vec<u16>,
    mul: Vec<u16>,
    trace: Vec<u16>,
}

/// The field F_p[t]/(g) for a monic irreducible g of degree k.
#[derive(Clone, Debug)]
pub struct FqField {
    p: u64,
    k: usize,
    q: u64,
    modulus: Vec<u64>,
    tables: OnceLock<Tables>,
}

// ============================================================================
// Dense polynomials over F_p (coefficients low to high)
// ============================================================================

fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(&mut out);
    out
}

// remainder modulo an arbitrary nonzero divisor
fn poly_rem(a: &[u64], d: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let dd = d.len() - 1;
    let lead_inv = inverse_mod(d[dd], p).unwrap();
    while r.len() > dd {
        let top = r.len() - 1;
        let c = r[top] * lead_inv % p;
        if c != 0 {
            for i in 0..=dd {
                let idx = top - dd + i;
                r[idx] = (r[idx] + p * p - c * d[i] % p) % p;
            }
        }
        r.pop();
        trim(&mut r);
    }
    r
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let len = a.len().max(b.len());
    let mut out: Vec<u64> = (0..len)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(&mut out);
    out
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = poly_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

fn poly_pow_mod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = poly_rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_rem(&poly_mul(&acc, &b, p), m, p);
        }
        b = poly_rem(&poly_mul(&b, &b, p), m, p);
        e >>= 1;
    }
    acc
}

/// Ben-Or test: g of degree k is irreducible iff gcd(x^{p^i} - x, g) = 1 for
/// every i <= k/2.
pub(crate) fn is_irreducible(g: &[u64], p: u64) -> bool {
    let k = g.len() - 1;
    if k == 0 {
        return false;
    }
    if k == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    let mut h = x.clone();
    for _ in 1..=k / 2 {
        h = poly_pow_mod(&h, p, g, p);
        let g1 = poly_gcd(&poly_sub(&h, &x, p), g, p);
        if g1.len() > 1 {
            return false;
        }
    }
    true
}

/// The smallest monic irreducible polynomial of degree `k` over F_p, in the
/// lexicographic order that compares `a_{k-1}` first and `a_0` last.
/// Coefficients are returned low to high. For `k = 1` the convention is `x`.
pub fn find_irreducible(p: u64, k: usize) -> Result<Vec<u64>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if k == 0 {
        return Err(Error::invalid("extension degree must be at least 1"));
    }
    if k == 1 {
        return Ok(vec![0, 1]);
    }
    let count = p
        .checked_pow(k as u32)
        .ok_or_else(|| Error::invalid(format!("F_{p}^{k} too large")))?;
    for idx in 0..count {
        let mut g = Vec::with_capacity(k + 1);
        let mut rest = idx;
        for _ in 0..k {
            g.push(rest % p);
            rest /= p;
        }
        g.push(1);
        if is_irreducible(&g, p) {
            return Ok(g);
        }
    }
    unreachable!("irreducible polynomials of every degree exist")
}

// ============================================================================
// The field
// ============================================================================

impl FqField {
    pub fn new(p: u64, k: usize) -> Result<Self> {
        let modulus = find_irreducible(p, k)?;
        Self::with_modulus(p, modulus)
    }

    pub fn prime(p: u64) -> Result<Self> {
        Self::new(p, 1)
    }

    /// Field defined by a given monic modulus (coefficients low to high).
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p >= 1 << 31 {
            return Err(Error::invalid("characteristic too large"));
        }
        let k = modulus.len().saturating_sub(1);
        if k == 0 || modulus[k] != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(Error::invalid(
                "field modulus must be monic with reduced coefficients",
            ));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::invalid("field modulus is reducible"));
        }
        let q = p
            .checked_pow(k as u32)
            .filter(|&q| q < 1 << 40)
            .ok_or_else(|| Error::invalid("field too large"))?;
        Ok(FqField {
            p,
            k,
            q,
            modulus,
            tables: OnceLock::new(),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> FqElement {
        FqElement {
            coeffs: vec![0; self.k],
        }
    }

    pub fn one(&self) -> FqElement {
        self.from_fp(1)
    }

    /// The class of the polynomial variable.
    pub fn generator(&self) -> FqElement {
        self.from_poly(&[0, 1])
    }

    pub fn from_fp(&self, a: u64) -> FqElement {
        let mut coeffs = vec![0; self.k];
        coeffs[0] = a % self.p;
        FqElement { coeffs }
    }

    fn from_poly(&self, a: &[u64]) -> FqElement {
        let mut r = poly_rem(a, &self.modulus, self.p);
        r.resize(self.k, 0);
        FqElement { coeffs: r }
    }

    fn as_poly(&self, a: &FqElement) -> Vec<u64> {
        let mut v = a.coeffs.clone();
        trim(&mut v);
        v
    }

    /// Element with base-p digit encoding `idx = Σ a_i p^i`.
    pub fn element(&self, idx: u64) -> FqElement {
        let mut coeffs = Vec::with_capacity(self.k);
        let mut rest = idx;
        for _ in 0..self.k {
            coeffs.push(rest % self.p);
            rest /= self.p;
        }
        FqElement { coeffs }
    }

    pub fn index(&self, a: &FqElement) -> u64 {
        a.coeffs.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    /// All q elements, in index order.
    pub fn elements(&self) -> impl Iterator<Item = FqElement> + '_ {
        (0..self.q).map(move |i| self.element(i))
    }

    pub fn add(&self, a: &FqElement, b: &FqElement) -> FqElement {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| (x + y) % self.p)
            .collect();
        FqElement { coeffs }
    }

    pub fn neg(&self, a: &FqElement) -> FqElement {
        let coeffs = a.coeffs.iter().map(|x| (self.p - x) % self.p).collect();
        FqElement { coeffs }
    }

    pub fn sub(&self, a: &FqElement, b: &FqElement) -> FqElement {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FqElement, b: &FqElement) -> FqElement {
        self.from_poly(&poly_mul(&self.as_poly(a), &self.as_poly(b), self.p))
    }

    pub fn pow(&self, a: &FqElement, e: u64) -> FqElement {
        let r = poly_pow_mod(&self.as_poly(a), e, &self.modulus, self.p);
        self.from_poly(&r)
    }

    pub fn is_zero(&self, a: &FqElement) -> bool {
        a.coeffs.iter().all(|&c| c == 0)
    }

    pub fn inv(&self, a: &FqElement) -> Option<FqElement> {
        if self.is_zero(a) {
            None
        } else {
            Some(self.pow(a, self.q - 2))
        }
    }

    pub fn frobenius(&self, a: &FqElement) -> FqElement {
        self.pow(a, self.p)
    }

    /// Tr(a) = a + a^p + ... + a^{p^{k-1}}, computed by repeated Frobenius.
    pub fn trace(&self, a: &FqElement) -> u64 {
        let mut acc = a.clone();
        let mut cur = a.clone();
        for _ in 1..self.k {
            cur = self.frobenius(&cur);
            acc = self.add(&acc, &cur);
        }
        debug_assert!(acc.coeffs[1..].iter().all(|&c| c == 0));
        acc.coeffs[0]
    }

    fn tables(&self) -> Result<&Tables> {
        if self.q > MAX_TABLE_Q {
            return Err(Error::BudgetExceeded {
                needed: (self.q as u128).pow(2),
                budget: MAX_TABLE_Q * MAX_TABLE_Q,
            });
        }
        Ok(self.tables.get_or_init(|| {
            let q = self.q as usize;
            let elems: Vec<FqElement> = self.elements().collect();
            let mut add = vec![0u16; q * q];
            let mut mul = vec![0u16; q * q];
            for i in 0..q {
                for j in 0..q {
                    add[i * q + j] = self.index(&self.add(&elems[i], &elems[j])) as u16;
                    mul[i * q + j] = self.index(&self.mul(&elems[i], &elems[j])) as u16;
                }
            }
            let trace = elems.iter().map(|a| self.trace(a) as u16).collect();
            Tables { add, mul, trace }
        }))
    }

    /// Index-level arithmetic for the enumeration loops.
    pub(crate) fn fast(&self) -> Result<FastFq<'_>> {
        let t = self.tables()?;
        Ok(FastFq {
            q: self.q as usize,
            add: &t.add,
            mul: &t.mul,
            trace: &t.trace,
        })
    }
}

/// Borrowed lookup tables; elements are indices in `[0, q)`.
#[derive(Clone, Copy)]
pub(crate) struct FastFq<'a> {
    pub q: usize,
    add: &'a [u16],
    mul: &'a [u16],
    trace: &'a [u16],
}

impl FastFq<'_> {
    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        self.add[a as usize * self.q + b as usize]
    }
    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize * self.q + b as usize]
    }
    #[inline]
    pub fn trace(&self, a: u16) -> u16 {
        self.trace[a as usize]
    }
}

impl CoeffRing for FqField {
    type Elem = FqElement;
    fn zero(&self) -> FqElement {
        FqField::zero(self)
    }
    fn one(&self) -> FqElement {
        FqField::one(self)
    }
    fn add(&self, a: &FqElement, b: &FqElement) -> FqElement {
        FqField::add(self, a, b)
    }
    fn mul(&self, a: &FqElement, b: &FqElement) -> FqElement {
        FqField::mul(self, a, b)
    }
    fn from_rational(&self, c: &BigRational) -> Result<FqElement> {
        let r = IntegersMod::new(self.p)?.from_rational(c)?;
        Ok(self.from_fp(r))
    }
}
