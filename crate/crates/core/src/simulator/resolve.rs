use crate::analytics::ToleranceSpec;

/// A seated committee and whether it meets the honesty requirement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Committee {
    /// Seated candidates, sorted.
    pub members: Vec<usize>,
    pub honest_count: usize,
    pub is_honest: bool,
}

/// Seats the k highest-scoring candidates, resolving every tie at the cutoff
/// (including a zero-score fill) in favour of dishonest candidates.
///
/// # Panics
/// If `scores` and `honest` differ in length or hold fewer than k candidates.
pub fn resolve_adversarial(scores: &[u32], honest: &[bool], tol: &ToleranceSpec) -> Committee {
    let mut order = Vec::with_capacity(scores.len());
    let honest_count = seat(scores, honest, tol.committee_size(), &mut order);
    let mut members = order[..tol.committee_size()].to_vec();
    members.sort_unstable();
    Committee {
        members,
        honest_count,
        is_honest: tol.is_honest(honest_count),
    }
}

/// Leaves the seated candidates in `order[..k]` and returns how many are honest.
pub(crate) fn seat(scores: &[u32], honest: &[bool], k: usize, order: &mut Vec<usize>) -> usize {
    assert_eq!(scores.len(), honest.len(), "one type per candidate");
    assert!(k >= 1 && k <= scores.len(), "committee larger than the candidate pool");
    order.clear();
    order.extend(0..scores.len());
    // score descending, dishonest before honest, then index
    order.select_nth_unstable_by(k - 1, |&a, &b| {
        scores[b]
            .cmp(&scores[a])
            .then(honest[a].cmp(&honest[b]))
            .then(a.cmp(&b))
    });
    order[..k].iter().filter(|&&j| honest[j]).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tie_at_the_cutoff_goes_to_the_adversary() {
        let tol = ToleranceSpec::one_third(2).unwrap();
        let c = resolve_adversarial(&[3, 2, 2, 1], &[true, false, true, false], &tol);
        assert_eq!(c.members, vec![0, 1]);
        assert_eq!(c.honest_count, 1);
        assert!(!c.is_honest);
    }

    #[test]
    fn distinct_scores_leave_no_freedom() {
        let tol = ToleranceSpec::one_third(3).unwrap();
        let c = resolve_adversarial(&[5, 1, 4, 0, 3], &[true, false, false, false, true], &tol);
        assert_eq!(c.members, vec![0, 2, 4]);
        assert_eq!(c.honest_count, 2);
        assert!(c.is_honest);
    }

    #[test]
    fn zero_scores_are_filled_adversarially() {
        let tol = ToleranceSpec::one_third(2).unwrap();
        let c = resolve_adversarial(&[0, 0, 0], &[true, false, true], &tol);
        assert!(c.members.contains(&1));
        assert!(!c.is_honest);
    }

    /// Fewest honest members over every committee consistent with the scores.
    fn worst_admissible(scores: &[u32], honest: &[bool], k: usize) -> usize {
        let m = scores.len();
        let mut worst = usize::MAX;
        for mask in 0u32..(1 << m) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let inside = |j: usize| mask >> j & 1 == 1;
            // admissible: nobody left out scores strictly above anyone seated
            let admissible = (0..m)
                .filter(|&o| !inside(o))
                .all(|o| (0..m).filter(|&i| inside(i)).all(|i| scores[o] <= scores[i]));
            if admissible {
                worst = worst.min((0..m).filter(|&j| inside(j) && honest[j]).count());
            }
        }
        worst
    }

    #[test]
    fn matches_the_worst_admissible_committee() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..2000 {
            let m = rng.random_range(1..=7);
            let k = rng.random_range(1..=m);
            let scores: Vec<u32> = (0..m).map(|_| rng.random_range(0..3)).collect();
            let honest: Vec<bool> = (0..m).map(|_| rng.random_bool(0.6)).collect();
            let tol = ToleranceSpec::one_third(k).unwrap();
            let c = resolve_adversarial(&scores, &honest, &tol);
            assert_eq!(c.members.len(), k);
            assert_eq!(c.honest_count, worst_admissible(&scores, &honest, k));
        }
    }
}
