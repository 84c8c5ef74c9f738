use super::{SuccessEstimate, ToleranceSpec};
use crate::distributions::{DiscreteOrderStatistic, Pmf};
use crate::error::{Error, Result};
use crate::numeric::{binomial_pmf, NeumaierSum};
use crate::simulator::ElectionConfig;
use crate::strategies::VoteProbs;

/// Which dishonest order statistic the honest one has to beat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DishonestRank {
    /// The (k − ⌈(1 − ρ)k⌉ + 1)-th highest dishonest score: the smallest number
    /// of dishonest members that breaks the committee.
    #[default]
    Breach,
    /// The ⌈ρk⌉-th highest dishonest score. Coincides with `Breach` unless ρk is
    /// an integer, where it asks for one dishonest member too few and undercounts
    /// success.
    Cap,
}

fn check_inputs(m: usize, tol: &ToleranceSpec, p: f64, pmf_h: &Pmf, pmf_m: &Pmf) -> Result<()> {
    if m < tol.committee_size() {
        return Err(Error::invalid(
            "m",
            format!("m ≥ k violated: m = {m}, k = {}", tol.committee_size()),
        ));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("p", p, "[0, 1]"));
    }
    if pmf_h.support_max() != pmf_m.support_max() {
        return Err(Error::invalid(
            "pmf_m",
            format!(
                "vote-count supports differ: {} vs {}",
                pmf_h.support_max(),
                pmf_m.support_max()
            ),
        ));
    }
    Ok(())
}

fn breach_index(tol: &ToleranceSpec, rank: DishonestRank) -> usize {
    match rank {
        DishonestRank::Breach => tol.breach_rank(),
        DishonestRank::Cap => tol.dishonest_cap(),
    }
}

/// Failure probability given exactly `honest` honest candidates among `m`, when
/// vote counts are independent across candidates.
///
/// With h = ⌈(1 − ρ)k⌉ and r the breach rank, the committee is honest exactly
/// when the h-th highest honest score strictly beats the r-th highest
/// dishonest score; ties go to the adversary.
pub fn failure_given_honest_count(
    m: usize,
    tol: &ToleranceSpec,
    honest: usize,
    pmf_h: &Pmf,
    pmf_m: &Pmf,
) -> Result<f64> {
    check_inputs(m, tol, 0.5, pmf_h, pmf_m)?;
    if honest > m {
        return Err(Error::invalid(
            "honest",
            format!("{honest} honest candidates out of {m}"),
        ));
    }
    Ok(conditional_failure(m, tol, honest, tol.breach_rank(), pmf_h, pmf_m))
}

fn conditional_failure(m: usize, tol: &ToleranceSpec, a: usize, r: usize, pmf_h: &Pmf, pmf_m: &Pmf) -> f64 {
    let h = tol.honest_needed();
    let b = m - a;
    if a < h {
        return 1.0;
    }
    if b < r {
        return 0.0;
    }
    // h-th highest of a is the (a − h + 1)-th smallest; likewise for dishonest
    let x = DiscreteOrderStatistic::from_pmf(pmf_h, (a - h + 1) as u64, a as u64);
    let y = DiscreteOrderStatistic::from_pmf(pmf_m, (b - r + 1) as u64, b as u64);
    let top = pmf_h.support_max() as i64;
    // Σ_v Pr[X = v] · Pr[Y ≥ v]
    let mut acc = NeumaierSum::default();
    for v in 0..=top {
        let mass = x.pmf_at(v);
        if mass > 0.0 {
            acc.add(mass * y.sf_at(v - 1));
        }
    }
    acc.total().clamp(0.0, 1.0)
}

/// Probability that the elected committee is dishonest, averaged over the
/// Bin(m, p) number of honest candidates.
pub fn failure_threshold_exact(
    m: usize,
    tol: &ToleranceSpec,
    p: f64,
    pmf_h: &Pmf,
    pmf_m: &Pmf,
    rank: DishonestRank,
) -> Result<f64> {
    check_inputs(m, tol, p, pmf_h, pmf_m)?;
    let r = breach_index(tol, rank);
    let mut acc = NeumaierSum::default();
    for a in 0..=m {
        let w = binomial_pmf(m as u64, a as u64, p, 1.0 - p);
        if w > 0.0 {
            acc.add(w * conditional_failure(m, tol, a, r, pmf_h, pmf_m));
        }
    }
    Ok(acc.total().clamp(0.0, 1.0))
}

/// Exact probability of electing an honest committee when every candidate's
/// vote count is drawn independently from `pmf_h` or `pmf_m` by type, as under
/// threshold voting.
pub fn success_threshold_exact(
    m: usize,
    tol: &ToleranceSpec,
    p: f64,
    pmf_h: &Pmf,
    pmf_m: &Pmf,
) -> Result<SuccessEstimate> {
    let failure = failure_threshold_exact(m, tol, p, pmf_h, pmf_m, DishonestRank::Breach)?;
    Ok(SuccessEstimate::exact(1.0 - failure))
}

/// Exact success probability of a configuration whose ballots are independent
/// across candidates. The vote cap t is not modelled.
pub fn success_exact(cfg: &ElectionConfig) -> Result<SuccessEstimate> {
    cfg.validate()?;
    let (pmf_h, pmf_m) = cfg.vote_count_laws()?;
    success_threshold_exact(cfg.m, &cfg.tolerance()?, cfg.signal.prior_honest, &pmf_h, &pmf_m)
}

/// The exponential lower bound evaluated at a configuration, with δ taken from
/// its per-voter approval probabilities.
pub fn success_bound(cfg: &ElectionConfig) -> Result<SuccessEstimate> {
    cfg.validate()?;
    let delta = vote_probability_gap(&cfg.vote_probs()?);
    Ok(SuccessEstimate::bound(asymptotic_lower_bound(cfg.m, cfg.n(), delta)))
}

/// Lower bound 1 − 2m²·e^(−δ²n/2) on the success probability, clamped at 0,
/// where δ separates every honest approval probability from every dishonest one.
pub fn asymptotic_lower_bound(m: usize, n: usize, delta: f64) -> f64 {
    if delta.is_nan() || delta <= 0.0 {
        return 0.0;
    }
    let m = m as f64;
    (1.0 - 2.0 * m * m * (-delta * delta * n as f64 / 2.0).exp()).max(0.0)
}

/// δ = min over voters of the honest approval probability minus the max over
/// voters of the malicious one.
pub fn vote_probability_gap(probs: &[VoteProbs]) -> f64 {
    let min_h = probs.iter().map(|v| v.honest).fold(f64::INFINITY, f64::min);
    let max_m = probs.iter().map(|v| v.malicious).fold(f64::NEG_INFINITY, f64::max);
    min_h - max_m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{pbd_pmf, PmfMethod, PoissonBinomialParams};
    use approx::assert_relative_eq;

    fn binomial_votes(n: usize, q: f64) -> Pmf {
        pbd_pmf(
            &PoissonBinomialParams::homogeneous(n, q).unwrap(),
            PmfMethod::Convolution,
        )
        .unwrap()
    }

    #[test]
    fn degenerate_priors() {
        let tol = ToleranceSpec::one_third(3).unwrap();
        let (h, m) = (binomial_votes(4, 0.8), binomial_votes(4, 0.3));
        assert_eq!(success_threshold_exact(5, &tol, 0.0, &h, &m).unwrap().value, 0.0);
        assert_eq!(success_threshold_exact(5, &tol, 1.0, &h, &m).unwrap().value, 1.0);
    }

    #[test]
    fn single_seat_single_voter_by_hand() {
        // m = 2, k = 1, one voter approving honest w.p. 0.9, malicious w.p. 0.2.
        // One of each type: honest wins iff it has 1 vote and the other has 0.
        let tol = ToleranceSpec::one_third(1).unwrap();
        let (h, m) = (binomial_votes(1, 0.9), binomial_votes(1, 0.2));
        let p: f64 = 0.6;
        let mixed = 0.9 * 0.8;
        let expected = p * p + 2.0 * p * (1.0 - p) * mixed;
        let v = success_threshold_exact(2, &tol, p, &h, &m).unwrap().value;
        assert_relative_eq!(v, expected, epsilon = 1e-15);
    }

    #[test]
    fn cap_rank_undercounts_when_rho_k_is_integral() {
        // k = m = 2, ρ = 1/2: one honest member suffices, so one honest and one
        // dishonest candidate always yield an honest committee
        let tol = ToleranceSpec::new(num_rational::Ratio::new(1, 2), 2).unwrap();
        let (h, m) = (binomial_votes(1, 0.9), binomial_votes(1, 0.2));
        let p: f64 = 0.5;
        let breach = 1.0 - failure_threshold_exact(2, &tol, p, &h, &m, DishonestRank::Breach).unwrap();
        assert_relative_eq!(breach, 1.0 - (1.0 - p).powi(2), epsilon = 1e-15);
        let cap = 1.0 - failure_threshold_exact(2, &tol, p, &h, &m, DishonestRank::Cap).unwrap();
        assert!(cap < breach - 0.1);
        // and they agree when ρk is fractional
        let tol = ToleranceSpec::one_third(2).unwrap();
        let a = failure_threshold_exact(4, &tol, 0.7, &h, &m, DishonestRank::Breach).unwrap();
        let b = failure_threshold_exact(4, &tol, 0.7, &h, &m, DishonestRank::Cap).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn success_grows_with_the_prior() {
        let tol = ToleranceSpec::one_third(5).unwrap();
        let (h, m) = (binomial_votes(6, 0.7), binomial_votes(6, 0.4));
        let mut last = 0.0;
        for i in 0..=20 {
            let v = success_threshold_exact(9, &tol, i as f64 / 20.0, &h, &m).unwrap().value;
            assert!((0.0..=1.0).contains(&v) && v >= last - 1e-14);
            last = v;
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        let tol = ToleranceSpec::one_third(4).unwrap();
        let (h, m) = (binomial_votes(3, 0.7), binomial_votes(3, 0.4));
        assert!(success_threshold_exact(3, &tol, 0.5, &h, &m).is_err());
        assert!(success_threshold_exact(5, &tol, 0.5, &h, &binomial_votes(2, 0.4)).is_err());
        assert!(failure_given_honest_count(5, &tol, 6, &h, &m).is_err());
    }

    #[test]
    fn lower_bound_shape() {
        assert_eq!(asymptotic_lower_bound(10, 0, 0.3), 0.0);
        assert_relative_eq!(
            asymptotic_lower_bound(10, 1000, 0.3),
            1.0 - 200.0 * (-45.0f64).exp(),
            epsilon = 1e-16
        );
        let mut last = 0.0;
        for n in 0..400 {
            let b = asymptotic_lower_bound(10, n, 0.3);
            assert!(b >= last);
            last = b;
        }
        assert_eq!(asymptotic_lower_bound(10, 1000, -0.1), 0.0);
    }

    #[test]
    fn lower_bound_holds_where_both_are_computable() {
        // m = 10, k = 4, 200 voters with δ = 0.4
        let tol = ToleranceSpec::one_third(4).unwrap();
        let n = 200;
        let (h, m) = (binomial_votes(n, 0.7), binomial_votes(n, 0.3));
        let bound = asymptotic_lower_bound(10, n, 0.4);
        assert!(bound > 0.9);
        for a in tol.honest_needed()..=10 {
            let conditional = 1.0 - failure_given_honest_count(10, &tol, a, &h, &m).unwrap();
            assert!(conditional >= bound, "a = {a}");
        }
    }

    #[test]
    fn tiny_failures_keep_their_precision() {
        // far below 1e-16, where differencing tails near 1 would only give noise
        let tol = ToleranceSpec::one_third(21).unwrap();
        let (h, m) = (binomial_votes(150, 0.89), binomial_votes(150, 0.11));
        let f14 = failure_given_honest_count(30, &tol, 14, &h, &m).unwrap();
        let f18 = failure_given_honest_count(30, &tol, 18, &h, &m).unwrap();
        assert!(f14 > 0.0 && f14 < 1e-60, "{f14:e}");
        assert!(f18 < f14);
    }

    #[test]
    fn gap_takes_the_worst_voters() {
        let probs = [
            VoteProbs {
                honest: 0.9,
                malicious: 0.2,
            },
            VoteProbs {
                honest: 0.7,
                malicious: 0.4,
            },
        ];
        assert_relative_eq!(vote_probability_gap(&probs), 0.3, epsilon = 1e-15);
    }
}
