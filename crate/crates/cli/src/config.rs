use std::ops::RangeInclusive;

use igusa_core::localring::is_prime;
use igusa_core::{Error, Result};
use serde::Serialize;

pub const DEFAULT_BUDGET: u64 = 10_000_000;
pub const MIN_BUDGET: u64 = 1_000;
/// Mantissa bits carried by the double-double root tables.
pub const MAX_PRECISION: u32 = 106;
pub const BUDGET_VAR: &str = "IGUSA_BUDGET";

/// Settings echoed into every verification report. The thread count is
/// deliberately absent: it must not change the output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub budget: u64,
    pub precision: u32,
    pub order: u32,
    pub d_max: usize,
    pub primes: Vec<u64>,
    pub levels: [u32; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<String>,
    /// Fixed constant for the level-2 bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m2_constant: Option<f64>,
    /// Fiber value c of the fiber-product check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fiber_c: Option<String>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget < MIN_BUDGET {
            return Err(Error::invalid(format!(
                "budget {} is below the minimum {MIN_BUDGET}",
                self.budget
            )));
        }
        if self.precision == 0 || self.precision > MAX_PRECISION {
            return Err(Error::invalid(format!(
                "precision {} is outside 1..={MAX_PRECISION} bits",
                self.precision
            )));
        }
        if self.primes.is_empty() {
            return Err(Error::invalid("the prime list is empty"));
        }
        if let Some(&p) = self.primes.iter().find(|&&p| !is_prime(p)) {
            return Err(Error::NotPrime(p));
        }
        if (self.order as usize) < 2 * self.d_max + 2 {
            return Err(Error::invalid(format!(
                "order {} is too short for recurrences of order {} (needs {})",
                self.order,
                self.d_max,
                2 * self.d_max + 2
            )));
        }
        if self.levels[0] == 0 || self.levels[0] > self.levels[1] {
            return Err(Error::invalid(format!(
                "empty level range {}..{}",
                self.levels[0], self.levels[1]
            )));
        }
        Ok(())
    }

    pub fn level_range(&self) -> RangeInclusive<u32> {
        self.levels[0]..=self.levels[1]
    }
}

/// Accepts integers and exact scientific forms such as `2e8`.
pub fn parse_count(text: &str) -> Result<u64> {
    let t = text.trim().replace('_', "");
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    match t.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64 => Ok(v as u64),
        _ => Err(Error::invalid(format!(
            "'{text}' is not a nonnegative integer"
        ))),
    }
}

/// The budget from the flag, else the environment, else the default.
pub fn resolve_budget(flag: Option<&str>) -> Result<u64> {
    match flag {
        Some(s) => parse_count(s),
        None => match std::env::var(BUDGET_VAR) {
            Ok(s) => parse_count(&s).map_err(|e| Error::invalid(format!("{BUDGET_VAR}: {e}"))),
            Err(_) => Ok(DEFAULT_BUDGET),
        },
    }
}

/// A comma-separated list of primes and ranges `a..b`; ranges contribute the
/// primes they contain, single entries must be prime.
pub fn parse_primes(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let (a, b) = (parse_count(a)?, parse_count(b.trim_start_matches('='))?);
            out.extend((a..=b).filter(|&q| is_prime(q)));
        } else {
            let q = parse_count(item)?;
            if !is_prime(q) {
                return Err(Error::NotPrime(q));
            }
            out.push(q);
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err(Error::invalid(format!("no primes in '{text}'")));
    }
    Ok(out)
}

/// `a..b` or a single level.
pub fn parse_levels(text: &str) -> Result<[u32; 2]> {
    let bad = || Error::invalid(format!("bad level range '{text}'"));
    let conv = |s: &str| {
        parse_count(s)
            .ok()
            .and_then(|v| u32::try_from(v).ok())
            .ok_or_else(bad)
    };
    let (a, b) = match text.split_once("..") {
        Some((a, b)) => (conv(a)?, conv(b.trim_start_matches('='))?),
        None => {
            let v = conv(text)?;
            (v, v)
        }
    };
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok([a, b])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_lists() {
        assert_eq!(parse_primes("5,7,11,13").unwrap(), vec![5, 7, 11, 13]);
        assert_eq!(
            parse_primes("3..19").unwrap(),
            vec![3, 5, 7, 11, 13, 17, 19]
        );
        assert_eq!(parse_primes("7, 2..5").unwrap(), vec![2, 3, 5, 7]);
        assert!(matches!(parse_primes("4"), Err(Error::NotPrime(4))));
        assert!(parse_primes("24..28").is_err());
    }

    #[test]
    fn counts_and_levels() {
        assert_eq!(parse_count("2e8").unwrap(), 200_000_000);
        assert_eq!(parse_count("10_000").unwrap(), 10_000);
        assert!(parse_count("1.5").is_err());
        assert_eq!(parse_levels("1..3").unwrap(), [1, 3]);
        assert_eq!(parse_levels("2").unwrap(), [2, 2]);
        assert!(parse_levels("3..1").is_err());
        assert!(parse_levels("0..2").is_err());
    }

    #[test]
    fn validation() {
        let mut c = RunConfig {
            budget: DEFAULT_BUDGET,
            precision: 64,
            order: 8,
            d_max: 3,
            primes: vec![5, 7],
            levels: [1, 3],
            corpus: None,
            m2_constant: None,
            fiber_c: None,
        };
        assert!(c.validate().is_ok());
        c.budget = 999;
        assert!(c.validate().is_err());
        c.budget = 1000;
        c.primes = vec![9];
        assert!(c.validate().is_err());
        c.primes = vec![5];
        c.precision = 200;
        assert!(c.validate().is_err());
        c.precision = 64;
        c.d_max = 4;
        assert!(c.validate().is_err());
    }
}
