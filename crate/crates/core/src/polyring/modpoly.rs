use crate::arith::mul_mod;

/// A polynomial with coefficients reduced into `[0, modulus)`.
///
/// This is the compiled form used by the enumeration loops; terms with a zero
/// residue are dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModPoly {
    modulus: u64,
    n: usize,
    terms: Vec<(Vec<u32>, u64)>,
}

impl ModPoly {
    pub fn new(modulus: u64, n: usize, terms: Vec<(Vec<u32>, u64)>) -> Self {
        let terms = terms
            .into_iter()
            .map(|(e, c)| (e, c % modulus))
            .filter(|(_, c)| *c != 0)
            .collect();
        ModPoly { modulus, n, terms }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(Vec<u32>, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.iter().map(|(e, _)| e[i]).max().unwrap_or(0)
    }

    /// Value at a point whose coordinates lie in `[0, modulus)`.
    pub fn eval(&self, x: &[u64]) -> u64 {
        let m = self.modulus;
        let mut acc = 0u64;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (xi, &ei) in x.iter().zip(e) {
                for _ in 0..ei {
                    t = mul_mod(t, *xi, m);
                }
            }
            acc = (acc + t) % m;
        }
        acc
    }

    /// Same polynomial with coefficients reduced to a divisor of the modulus.
    pub fn reduce(&self, modulus: u64) -> ModPoly {
        debug_assert_eq!(self.modulus % modulus, 0);
        ModPoly::new(modulus, self.n, self.terms.clone())
    }

    pub fn derivative(&self, i: usize) -> ModPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e[i] > 0)
            .map(|(e, c)| {
                let mut e2 = e.clone();
                e2[i] -= 1;
                (e2, mul_mod(*c, e[i] as u64 % self.modulus, self.modulus))
            })
            .collect();
        ModPoly::new(self.modulus, self.n, terms)
    }
}
