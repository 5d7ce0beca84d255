use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Serialize, Serializer};

use crate::counting::CoordRange;
use crate::error::{Error, Result};
use crate::localring::ModulusSpec;

/// One factor of a basic step function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SupportFactor {
    /// All of Z_p.
    Full,
    /// The coset a + pZ_p.
    Residue(u64),
}

/// Characteristic function of a product of `Full` and `Residue` factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasicStepSupport {
    factors: Vec<SupportFactor>,
}

impl BasicStepSupport {
    pub fn full(n: usize) -> Self {
        BasicStepSupport {
            factors: vec![SupportFactor::Full; n],
        }
    }

    pub fn new(factors: Vec<SupportFactor>) -> Self {
        BasicStepSupport { factors }
    }

    /// Parses a comma-separated list of `*` (full) and residues, e.g. `1,*`.
    /// The word `full` stands for the full support in `n` variables.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let text = text.trim();
        if text.eq_ignore_ascii_case("full") {
            return Ok(Self::full(n));
        }
        let factors = text
            .split(',')
            .map(|s| match s.trim() {
                "*" => Ok(SupportFactor::Full),
                t => t
                    .parse::<u64>()
                    .map(SupportFactor::Residue)
                    .map_err(|_| Error::invalid(format!("bad support factor '{t}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if factors.len() != n {
            return Err(Error::invalid(format!(
                "support has {} factors, expected {n}",
                factors.len()
            )));
        }
        Ok(BasicStepSupport { factors })
    }

    pub fn factors(&self) -> &[SupportFactor] {
        &self.factors
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn is_full(&self) -> bool {
        self.factors.iter().all(|f| *f == SupportFactor::Full)
    }

    pub fn residue_count(&self) -> usize {
        self.factors
            .iter()
            .filter(|f| matches!(f, SupportFactor::Residue(_)))
            .count()
    }

    /// Checks arity and that residues are reduced mod p.
    pub fn validate(&self, n: usize, p: u64) -> Result<()> {
        if self.factors.len() != n {
            return Err(Error::invalid(format!(
                "support has {} factors, expected {n}",
                self.factors.len()
            )));
        }
        for f in &self.factors {
            if let SupportFactor::Residue(a) = f {
                if *a >= p {
                    return Err(Error::invalid(format!(
                        "support residue {a} not reduced mod {p}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Haar measure p^{-#residue factors}.
    pub fn measure(&self, p: u64) -> BigRational {
        BigRational::new(1.into(), BigInt::from(p).pow(self.residue_count() as u32))
    }

    /// The residues mod p^m lying in the support, one range per coordinate.
    pub fn ranges(&self, spec: &ModulusSpec) -> Vec<CoordRange> {
        let q = spec.modulus();
        let p = spec.p();
        self.factors
            .iter()
            .map(|f| match f {
                SupportFactor::Full => CoordRange::full(q),
                SupportFactor::Residue(a) => CoordRange {
                    start: *a,
                    step: p,
                    count: q / p,
                },
            })
            .collect()
    }

    /// Number of residues mod p^m in the support.
    pub fn point_count(&self, spec: &ModulusSpec) -> u128 {
        self.ranges(spec).iter().map(|r| r.count as u128).product()
    }
}

impl fmt::Display for BasicStepSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_full() {
            return write!(f, "full");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|x| match x {
                SupportFactor::Full => "*".to_string(),
                SupportFactor::Residue(a) => a.to_string(),
            })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

impl Serialize for BasicStepSupport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let s = BasicStepSupport::parse("1, *", 2).unwrap();
        assert_eq!(s.to_string(), "1,*");
        assert_eq!(
            BasicStepSupport::parse("full", 3).unwrap(),
            BasicStepSupport::full(3)
        );
        assert!(BasicStepSupport::parse("1,x", 2).is_err());
        assert!(BasicStepSupport::parse("1", 2).is_err());
        assert!(s.validate(2, 2).is_ok());
        assert!(BasicStepSupport::parse("3,*", 2)
            .unwrap()
            .validate(2, 3)
            .is_err());
    }

    #[test]
    fn ranges_cover_the_coset() {
        let s = BasicStepSupport::parse("2,*", 2).unwrap();
        let spec = ModulusSpec::new(3, 2).unwrap();
        let r = s.ranges(&spec);
        assert_eq!(
            r[0],
            CoordRange {
                start: 2,
                step: 3,
                count: 3
            }
        );
        assert_eq!(r[1], CoordRange::full(9));
        assert_eq!(s.point_count(&spec), 27);
        assert_eq!(s.measure(3), BigRational::new(1.into(), 3.into()));
    }
}
