//! Exact and bound-based success probabilities, lottery baselines and committee sizing.

mod bruteforce;
mod lottery;
mod sizing;
mod success;
mod two_voter;

pub use bruteforce::{success_bruteforce, ENUMERATION_BUDGET};
pub use lottery::{lifetime_fork_bound, lottery_failure, lottery_success, LotteryMode};
pub use sizing::{min_committee_size_lottery, min_committee_size_voting, VotingSizing, DEFAULT_K_MAX};
pub use success::{
    asymptotic_lower_bound, failure_given_honest_count, failure_threshold_exact, success_bound, success_exact,
    success_threshold_exact, vote_probability_gap, DishonestRank,
};
pub use two_voter::two_voter_cardinal_dishonest;

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{wilson_interval, Z_99};

/// Byzantine tolerance ρ for a committee of size k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToleranceSpec {
    rho: Ratio<u64>,
    committee_size: usize,
}

impl ToleranceSpec {
    pub fn new(rho: Ratio<u64>, committee_size: usize) -> Result<Self> {
        if *rho.numer() == 0 || rho >= Ratio::from_integer(1) {
            return Err(Error::domain("rho", rho, "(0, 1)"));
        }
        if committee_size == 0 {
            return Err(Error::invalid("k", "the committee needs at least one seat"));
        }
        Ok(ToleranceSpec { rho, committee_size })
    }

    /// The usual one-third tolerance of BFT protocols.
    pub fn one_third(committee_size: usize) -> Result<Self> {
        Self::new(Ratio::new(1, 3), committee_size)
    }

    pub fn rho(&self) -> Ratio<u64> {
        self.rho
    }

    pub fn committee_size(&self) -> usize {
        self.committee_size
    }

    fn rho_k(&self) -> Ratio<u64> {
        self.rho * Ratio::from_integer(self.committee_size as u64)
    }

    /// ⌈(1 − ρ)k⌉ honest members make a committee honest.
    pub fn honest_needed(&self) -> usize {
        self.committee_size - self.rho_k().floor().to_integer() as usize
    }

    /// ⌈ρk⌉.
    pub fn dishonest_cap(&self) -> usize {
        self.rho_k().ceil().to_integer() as usize
    }

    /// Smallest number of dishonest members that breaks the committee:
    /// k − ⌈(1 − ρ)k⌉ + 1. Equals ⌈ρk⌉ unless ρk is an integer.
    pub fn breach_rank(&self) -> usize {
        self.committee_size - self.honest_needed() + 1
    }

    pub fn is_honest(&self, honest_members: usize) -> bool {
        honest_members >= self.honest_needed()
    }
}

/// How a probability was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Mc,
    Bound,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Mc => "mc",
            Method::Bound => "bound",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub method: Method,
}

impl SuccessEstimate {
    pub fn exact(value: f64) -> Self {
        Self::point(value, Method::Exact)
    }

    pub fn bound(value: f64) -> Self {
        Self::point(value, Method::Bound)
    }

    fn point(value: f64, method: Method) -> Self {
        SuccessEstimate {
            value,
            ci_low: value,
            ci_high: value,
            method,
        }
    }

    /// Sample proportion with a 99% Wilson interval.
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, trials, Z_99);
        let value = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        SuccessEstimate {
            value,
            ci_low: ci_low.min(value),
            ci_high: ci_high.max(value),
            method: Method::Mc,
        }
    }

    pub fn ci_width(&self) -> f64 {
        self.ci_high - self.ci_low
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seat_counts_for_common_tolerances() {
        let t = ToleranceSpec::one_third(21).unwrap();
        assert_eq!((t.honest_needed(), t.dishonest_cap(), t.breach_rank()), (14, 7, 8));
        let t = ToleranceSpec::one_third(20).unwrap();
        assert_eq!((t.honest_needed(), t.dishonest_cap(), t.breach_rank()), (14, 7, 7));
        let t = ToleranceSpec::new(Ratio::new(1, 2), 3).unwrap();
        assert_eq!((t.honest_needed(), t.dishonest_cap(), t.breach_rank()), (2, 2, 2));
        let t = ToleranceSpec::one_third(1500).unwrap();
        assert_eq!(t.honest_needed(), 1000);
        assert!(t.is_honest(1000) && !t.is_honest(999));
    }

    #[test]
    fn seat_counts_cover_the_committee() {
        for k in 1..60 {
            for (a, b) in [(1, 3), (1, 2), (2, 5), (1, 7)] {
                let t = ToleranceSpec::new(Ratio::new(a, b), k).unwrap();
                assert!(t.honest_needed() + t.dishonest_cap() >= k);
                assert_eq!(t.honest_needed() + t.breach_rank(), k + 1);
            }
        }
    }

    #[test]
    fn rejects_degenerate_tolerances() {
        assert!(ToleranceSpec::new(Ratio::new(0, 1), 3).is_err());
        assert!(ToleranceSpec::new(Ratio::new(1, 1), 3).is_err());
        assert!(ToleranceSpec::one_third(0).is_err());
    }

    #[test]
    fn monte_carlo_estimates_bracket_the_point() {
        let e = SuccessEstimate::from_counts(0, 1000);
        assert_eq!((e.value, e.ci_low), (0.0, 0.0));
        let e = SuccessEstimate::from_counts(1000, 1000);
        assert_eq!((e.value, e.ci_high), (1.0, 1.0));
        let e = SuccessEstimate::from_counts(517, 1000);
        assert!(e.ci_low < e.value && e.value < e.ci_high);
    }
}
