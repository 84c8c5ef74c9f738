use crate::distributions::{hypergeometric_pmf, log_binomial_tail, TailDirection};
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Probability of a dishonest committee in the two-voter, uninformative-signal
/// world where voter 0 approves z0 random candidates and voter 1 approves z1.
///
/// Each candidate is dishonest independently with probability `q_dishonest`;
/// the committee falls when more than `t_byz` of its members are dishonest.
/// With a = |doubly approved| ~ Hypergeometric(m, z0, z1), the adversary can
/// seat dishonest candidates from all z0 + z1 − a approved ones, so the
/// failure probability is Σ_a Pr[a] · Pr[Bin(z0 + z1 − a, q) ≥ t_byz + 1].
pub fn two_voter_cardinal_dishonest(
    z0: usize,
    z1: usize,
    m: usize,
    k: usize,
    t_byz: usize,
    q_dishonest: f64,
) -> Result<f64> {
    if z0 > m || z1 > m {
        return Err(Error::invalid("z", format!("ballots of {z0} and {z1} exceed m = {m}")));
    }
    if z0.max(z1) < k {
        return Err(Error::invalid(
            "z",
            format!("the formula needs max(z0, z1) ≥ k; got z0 = {z0}, z1 = {z1}, k = {k}"),
        ));
    }
    if !(0.0..=1.0).contains(&q_dishonest) {
        return Err(Error::domain("q_dishonest", q_dishonest, "[0, 1]"));
    }
    let mut acc = NeumaierSum::default();
    for a in 0..=z0.min(z1) {
        let w = hypergeometric_pmf(m as u64, z0 as u64, z1 as u64, a as u64)?;
        if w == 0.0 {
            continue;
        }
        let approved = (z0 + z1 - a) as u64;
        let tail = log_binomial_tail(approved, q_dishonest, t_byz as i64 + 1, TailDirection::AtLeast)?.exp();
        acc.add(w * tail);
    }
    Ok(acc.total().clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::binomial_pmf;
    use approx::assert_relative_eq;

    fn at_least(n: u64, q: f64, j: u64) -> f64 {
        (j..=n).map(|x| binomial_pmf(n, x, q, 1.0 - q)).sum()
    }

    #[test]
    fn honest_world_never_fails() {
        assert_eq!(two_voter_cardinal_dishonest(21, 21, 50, 21, 7, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn abstention_reduces_to_one_ballot() {
        for q in [0.1, 0.2, 0.3] {
            let v = two_voter_cardinal_dishonest(21, 0, 50, 21, 7, q).unwrap();
            assert_relative_eq!(v, at_least(21, q, 8), max_relative = 1e-12);
        }
    }

    #[test]
    fn matches_the_double_sum() {
        // Σ_a Pr[a] Σ_x Pr[Bin(a, q) = x] Pr[Bin(z0 + z1 − 2a, q) ≥ t + 1 − x]
        let (z0, z1, m, t, q) = (9u64, 7u64, 20u64, 3u64, 0.25);
        let mut expected = 0.0;
        for a in 0..=z1 {
            let w = hypergeometric_pmf(m, z0, z1, a).unwrap();
            for x in 0..=a {
                let need = (t + 1).saturating_sub(x);
                expected += w * binomial_pmf(a, x, q, 1.0 - q) * at_least(z0 + z1 - 2 * a, q, need);
            }
        }
        let v = two_voter_cardinal_dishonest(z0 as usize, z1 as usize, m as usize, 9, t as usize, q).unwrap();
        assert_relative_eq!(v, expected, max_relative = 1e-12);
    }

    #[test]
    fn regime_is_enforced() {
        assert!(two_voter_cardinal_dishonest(5, 5, 50, 21, 7, 0.1).is_err());
        assert!(two_voter_cardinal_dishonest(60, 0, 50, 21, 7, 0.1).is_err());
    }
}
