//! Oscillation exponents: α(π) from numerical data of a resolution, empirical
//! decay estimates of E_f(p^m), and verification harnesses that compare the
//! computed objects with the inequalities and equivalences they should obey.

mod estimate;
mod report;
mod verify;

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};

pub use estimate::{
    critical_values_mod_p, estimate_alpha, estimate_flaw, AlphaEstimate, AlphaValue, FlawEstimate,
    LevelRow,
};
pub use report::{BoundReport, CheckRow, Status, Verdict};
pub use verify::{
    tameness_check, verify_fiber_product, verify_lower_bound, verify_m1_m2,
    verify_m2_decomposition, verify_nontriviality, verify_pole_theorem, verify_proof_identities,
    verify_pz_relation, Settings, TamenessReport,
};

/// One pair (N, ν) of numerical data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DataPair {
    pub big_n: u64,
    pub nu: u64,
}

/// Numerical data of an embedded resolution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NumericalData {
    pub pairs: Vec<DataPair>,
    /// The pairs are already the essential ones. Otherwise pairs equal to
    /// (1, 1) are dropped, which presumes those components are pairwise
    /// disjoint.
    pub essential_only: bool,
    pub n: usize,
}

impl NumericalData {
    pub fn new(pairs: &[(u64, u64)], essential_only: bool, n: usize) -> Result<Self> {
        if let Some(&(a, b)) = pairs.iter().find(|&&(a, b)| a == 0 || b == 0) {
            return Err(Error::invalid(format!(
                "numerical data ({a}, {b}) must be positive"
            )));
        }
        Ok(NumericalData {
            pairs: pairs
                .iter()
                .map(|&(big_n, nu)| DataPair { big_n, nu })
                .collect(),
            essential_only,
            n,
        })
    }

    fn essential(&self) -> impl Iterator<Item = &DataPair> {
        self.pairs
            .iter()
            .filter(move |d| self.essential_only || (d.big_n, d.nu) != (1, 1))
    }
}

/// α(π) = −min ν_i/N_i over the essential data, or −2n when there is none.
pub fn alpha_pi(data: &NumericalData) -> BigRational {
    data.essential()
        .map(|d| BigRational::new(d.nu.into(), d.big_n.into()))
        .min()
        .map(|r| -r)
        .unwrap_or_else(|| BigRational::from_integer((-2 * data.n as i64).into()))
}

/// The pairs (N + j, ν + j), j = 1..=steps, of successive blow-ups; their
/// ratios decrease strictly toward 1.
pub fn blowup_refine(pair: (u64, u64), steps: usize) -> Result<Vec<(u64, u64)>> {
    let (big_n, nu) = pair;
    if big_n == 0 || nu <= big_n {
        return Err(Error::invalid(format!(
            "blow-up refinement needs ν/N > 1, got ({big_n}, {nu})"
        )));
    }
    Ok((1..=steps as u64).map(|j| (big_n + j, nu + j)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn alpha_pi_examples() {
        let d = NumericalData::new(&[(2, 1), (3, 2)], true, 2).unwrap();
        assert_eq!(alpha_pi(&d), q(-1, 2));
        assert_eq!(
            alpha_pi(&NumericalData::new(&[], true, 2).unwrap()),
            q(-4, 1)
        );
        assert_eq!(
            alpha_pi(&NumericalData::new(&[(1, 1)], true, 1).unwrap()),
            q(-1, 1)
        );
        // the non-essential (1, 1) pair is dropped
        let d = NumericalData::new(&[(1, 1), (2, 3)], false, 2).unwrap();
        assert_eq!(alpha_pi(&d), q(-3, 2));
        assert!(NumericalData::new(&[(0, 1)], true, 1).is_err());
    }

    #[test]
    fn alpha_pi_ignores_order_and_duplicates() {
        let a = NumericalData::new(&[(2, 1), (3, 2), (5, 7)], true, 3).unwrap();
        let b = NumericalData::new(&[(5, 7), (2, 1), (3, 2), (2, 1)], true, 3).unwrap();
        assert_eq!(alpha_pi(&a), alpha_pi(&b));
    }

    #[test]
    fn blowup_examples() {
        let r = blowup_refine((1, 2), 3).unwrap();
        assert_eq!(r, vec![(2, 3), (3, 4), (4, 5)]);
        let ratios: Vec<_> = r.iter().map(|&(a, b)| q(b as i64, a as i64)).collect();
        assert_eq!(ratios, vec![q(3, 2), q(4, 3), q(5, 4)]);
        assert!(blowup_refine((2, 2), 3).is_err());
        let long = blowup_refine((1, 2), 1000).unwrap();
        assert!(long
            .windows(2)
            .all(|w| q(w[1].1 as i64, w[1].0 as i64) < q(w[0].1 as i64, w[0].0 as i64)));
        assert!(long.iter().all(|&(a, b)| b > a));
        let (a, b) = *long.last().unwrap();
        assert!(q(b as i64, a as i64) - q(1, 1) < q(1, 1000));
    }
}
