use num_rational::Ratio;

use super::{lottery_failure, ToleranceSpec};
use crate::error::{Error, Result};
use crate::numeric::{wilson_interval, Z_99};
use crate::simulator::{count_trials, ElectionConfig, RunOptions, TrialCounts};

/// Largest committee size a sizing search will consider.
pub const DEFAULT_K_MAX: usize = 100_000;

fn check_target(target: f64) -> Result<()> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::domain("target", target, "(0, 1)"));
    }
    Ok(())
}

/// Smallest k whose lottery failure probability is at most `target`.
///
/// Failure is not monotone in k (it jumps whenever ⌊ρk⌋ steps), so the scan
/// is linear rather than a bisection.
pub fn min_committee_size_lottery(target: f64, p: f64, rho: Ratio<u64>, k_max: usize) -> Result<usize> {
    check_target(target)?;
    for k in 1..=k_max {
        if lottery_failure(p, &ToleranceSpec::new(rho, k)?)? <= target {
            return Ok(k);
        }
    }
    Err(Error::NoFeasibleSize { k_max, target })
}

/// Result of a simulated committee-size search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VotingSizing {
    pub k: usize,
    pub counts: TrialCounts,
    /// Upper end of the 99% Wilson interval on the failure rate at `k`.
    pub failure_upper: f64,
}

fn failure_upper(failures: u64, trials: u64) -> f64 {
    1.0 - wilson_interval(trials - failures, trials, Z_99).0
}

/// Smallest k for which `trials` simulated elections certify, at 99%
/// confidence, a failure rate of at most `target`.
///
/// Each candidate k is simulated with its own committee size and the base
/// seed; a size is rejected as soon as its failures exceed the most the
/// Wilson bound can absorb.
pub fn min_committee_size_voting(
    base: &ElectionConfig,
    target: f64,
    trials: u64,
    k_max: usize,
    options: RunOptions,
) -> Result<VotingSizing> {
    check_target(target)?;
    if trials == 0 || failure_upper(0, trials) > target {
        return Err(Error::invalid(
            "trials",
            format!("{trials} trials cannot certify a failure rate of {target} even with no failures"),
        ));
    }
    let mut allowed = 0;
    while allowed < trials && failure_upper(allowed + 1, trials) <= target {
        allowed += 1;
    }
    for k in 1..=k_max.min(base.m) {
        let cfg = base.with_committee_size(k);
        let counts = count_trials(&cfg, trials, Some(allowed), options)?;
        if counts.trials == trials && counts.failures() <= allowed {
            return Ok(VotingSizing {
                k,
                counts,
                failure_upper: failure_upper(counts.failures(), trials),
            });
        }
    }
    Err(Error::NoFeasibleSize { k_max, target })
}
