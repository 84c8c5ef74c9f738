use super::ToleranceSpec;
use crate::distributions::{log_binomial_tail, TailDirection};
use crate::error::{Error, Result};

/// How the lottery success probability is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LotteryMode {
    /// Exact binomial tail.
    Exact,
    /// Multiplicative Chernoff lower bound 1 − e^(−(1 − (1−ρ)/p)² p k / 2).
    Chernoff,
}

fn check(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("p", p, "[0, 1]"));
    }
    Ok(())
}

/// Probability that a committee of k members drawn independently, each honest
/// with probability p, has fewer than ⌈(1 − ρ)k⌉ honest members.
pub fn lottery_failure(p: f64, tol: &ToleranceSpec) -> Result<f64> {
    check(p)?;
    let k = tol.committee_size() as u64;
    let need = tol.honest_needed() as i64;
    Ok(log_binomial_tail(k, p, need - 1, TailDirection::AtMost)?.exp())
}

/// Probability that a randomly drawn committee of k members is honest.
pub fn lottery_success(p: f64, tol: &ToleranceSpec, mode: LotteryMode) -> Result<f64> {
    check(p)?;
    match mode {
        LotteryMode::Exact => {
            let failure = lottery_failure(p, tol)?;
            if failure < 0.5 {
                return Ok(1.0 - failure);
            }
            let k = tol.committee_size() as u64;
            let need = tol.honest_needed() as i64;
            Ok(log_binomial_tail(k, p, need, TailDirection::AtLeast)?.exp())
        }
        LotteryMode::Chernoff => {
            let rho = tol.rho();
            let honest_share = 1.0 - *rho.numer() as f64 / *rho.denom() as f64;
            if p <= honest_share {
                return Err(Error::BoundInapplicable(format!(
                    "the Chernoff form needs p > 1 − ρ = {honest_share}, got p = {p}"
                )));
            }
            if p == 1.0 {
                // every member is honest; the bound is tight here
                return Ok(1.0);
            }
            let delta = 1.0 - honest_share / p;
            let k = tol.committee_size() as f64;
            Ok(1.0 - (-delta * delta * p * k / 2.0).exp())
        }
    }
}

/// Union bound min(1, N · q) on the chance that any of N elections fails.
pub fn lifetime_fork_bound(per_election_failure: f64, num_elections: u64) -> f64 {
    (num_elections as f64 * per_election_failure.max(0.0)).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn certain_honesty() {
        let tol = ToleranceSpec::one_third(30).unwrap();
        assert_eq!(lottery_success(1.0, &tol, LotteryMode::Exact).unwrap(), 1.0);
        assert_eq!(lottery_success(1.0, &tol, LotteryMode::Chernoff).unwrap(), 1.0);
    }

    #[test]
    fn small_committee_by_hand() {
        // k = 3 needs 2 honest: p³ + 3p²(1 − p)
        let tol = ToleranceSpec::one_third(3).unwrap();
        let p: f64 = 0.8;
        let expected = p.powi(3) + 3.0 * p * p * (1.0 - p);
        assert_relative_eq!(
            lottery_success(p, &tol, LotteryMode::Exact).unwrap(),
            expected,
            epsilon = 1e-14
        );
        assert_relative_eq!(lottery_failure(p, &tol).unwrap(), 1.0 - expected, epsilon = 1e-14);
    }

    #[test]
    fn chernoff_needs_an_honest_supermajority() {
        let tol = ToleranceSpec::one_third(30).unwrap();
        assert!(matches!(
            lottery_success(2.0 / 3.0, &tol, LotteryMode::Chernoff),
            Err(Error::BoundInapplicable(_))
        ));
    }

    #[test]
    fn exact_dominates_chernoff() {
        for k in (10..=2000).step_by(37) {
            let tol = ToleranceSpec::one_third(k).unwrap();
            for p in [0.7, 0.75, 0.8, 0.85, 0.9, 0.95] {
                let exact = lottery_success(p, &tol, LotteryMode::Exact).unwrap();
                let bound = lottery_success(p, &tol, LotteryMode::Chernoff).unwrap();
                assert!(exact >= bound - 1e-15, "k = {k}, p = {p}");
            }
        }
    }

    #[test]
    fn union_bound() {
        assert_eq!(lifetime_fork_bound(0.0, 200_000_000), 0.0);
        assert_relative_eq!(lifetime_fork_bound(1e-12, 200_000_000), 2e-4, max_relative = 1e-12);
        assert_eq!(lifetime_fork_bound(1e-3, 200_000_000), 1.0);
    }
}
