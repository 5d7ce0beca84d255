use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{inverse_mod, mul_mod};
use crate::error::{Error, Result};

/// A commutative ring into which rational coefficients can be mapped.
pub trait CoeffRing {
    type Elem: Clone + PartialEq + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Image of a rational; fails when the denominator is not invertible.
    fn from_rational(&self, c: &BigRational) -> Result<Self::Elem>;
}

/// The field Q.
#[derive(Clone, Copy, Debug, Default)]
pub struct Rationals;

impl CoeffRing for Rationals {
    type Elem = BigRational;
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn from_rational(&self, c: &BigRational) -> Result<BigRational> {
        Ok(c.clone())
    }
}

/// The ring Z; only integral coefficients map.
#[derive(Clone, Copy, Debug, Default)]
pub struct Integers;

impl CoeffRing for Integers {
    type Elem = BigInt;
    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn from_rational(&self, c: &BigRational) -> Result<BigInt> {
        if c.is_integer() {
            Ok(c.to_integer())
        } else {
            Err(Error::NotInvertible(c.denom().to_string()))
        }
    }
}

/// The ring Z/M for a modulus below 2^63, elements in `[0, M)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntegersMod {
    modulus: u64,
}

impl IntegersMod {
    pub fn new(modulus: u64) -> Result<Self> {
        if modulus == 0 || modulus >= 1 << 63 {
            return Err(Error::invalid(format!("modulus {modulus} out of range")));
        }
        Ok(IntegersMod { modulus })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn reduce_int(&self, a: &BigInt) -> u64 {
        a.mod_floor(&BigInt::from(self.modulus)).to_u64().unwrap()
    }

    pub fn inverse(&self, a: u64) -> Option<u64> {
        inverse_mod(a, self.modulus)
    }
}

impl CoeffRing for IntegersMod {
    type Elem = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.modulus
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + *b as u128) % self.modulus as u128) as u64
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mul_mod(*a, *b, self.modulus)
    }
    fn from_rational(&self, c: &BigRational) -> Result<u64> {
        let num = self.reduce_int(c.numer());
        let den = self.reduce_int(c.denom());
        let inv = self
            .inverse(den)
            .ok_or_else(|| Error::NotInvertible(c.denom().to_string()))?;
        Ok(mul_mod(num, inv, self.modulus))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_images() {
        let r = IntegersMod::new(3).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(r.from_rational(&half).unwrap(), 2);
        let neg = BigRational::from_integer((-7).into());
        assert_eq!(r.from_rational(&neg).unwrap(), 2);
        assert!(Integers.from_rational(&half).is_err());
    }
}
