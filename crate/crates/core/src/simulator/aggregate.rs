//! Exact sampling of the seated committee from per-candidate vote-count laws.
//!
//! When ballots are independent across candidates, every honest candidate's
//! count is an iid draw from one law and every malicious candidate's from
//! another. Only the top of each sample matters, so the sampler walks vote
//! levels downward, drawing how many of the not-yet-placed candidates sit at
//! each level from Bin(remaining, f(x)/F(x)), until the committee is full.
//! Candidates above a split level are first counted and then placed one by
//! one from the conditional upper tail, so the walk starts where the seats
//! are likely to be decided. The split only changes cost, never the law.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::streams::{stream, Role};
use super::ElectionConfig;
use crate::analytics::ToleranceSpec;
use crate::distributions::Pmf;
use crate::error::Result;

struct CountLaw {
    /// f(x)/F(x): chance a candidate known to be ≤ x sits exactly at x.
    at_level: Vec<f64>,
    /// Pr[X > x], nonincreasing.
    upper: Vec<f64>,
    /// Split level: smallest x with m · Pr[X > x] ≤ 1.
    top: usize,
}

impl CountLaw {
    fn new(pmf: &Pmf, m: u64) -> Self {
        let n = pmf.support_max();
        let at_level = (0..=n)
            .map(|x| {
                let lower = pmf.cdf(x as i64);
                if x == 0 || lower <= 0.0 {
                    1.0
                } else {
                    (pmf.mass(x as i64) / lower).clamp(0.0, 1.0)
                }
            })
            .collect();
        let upper: Vec<f64> = (0..=n as i64).map(|x| pmf.sf(x)).collect();
        let top = upper.iter().position(|&u| u * m.max(1) as f64 <= 1.0).unwrap_or(n);
        CountLaw { at_level, upper, top }
    }

    fn above_top(&self) -> f64 {
        self.upper[self.top]
    }

    /// Draws one count conditioned on exceeding `top`.
    fn draw_above<R: Rng>(&self, rng: &mut R) -> usize {
        // Pr[X > x | X > top] falls from 1 at x = top; invert it
        let u = rng.random::<f64>() * self.above_top();
        let x = self.top + self.upper[self.top..].partition_point(|&tail| tail > u);
        x.clamp(self.top + 1, self.upper.len() - 1)
    }
}

/// Candidates of one type still to be placed during the walk.
struct Group {
    /// Counts drawn above the law's top level, sorted descending.
    above: Vec<usize>,
    /// Candidates known to be at or below `top`.
    below: u64,
}

fn binomial<R: Rng>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        0
    } else if p >= 1.0 {
        n
    } else {
        Binomial::new(n, p).map(|b| b.sample(rng)).unwrap_or(0)
    }
}

pub(crate) struct AggregateSampler {
    seed: u64,
    m: u64,
    k: usize,
    tol: ToleranceSpec,
    prior: f64,
    honest: CountLaw,
    malicious: CountLaw,
}

impl AggregateSampler {
    pub(crate) fn new(cfg: &ElectionConfig) -> Result<Self> {
        let (honest, malicious) = cfg.vote_count_laws()?;
        Ok(AggregateSampler {
            seed: cfg.seed,
            m: cfg.m as u64,
            k: cfg.k,
            tol: cfg.tolerance()?,
            prior: cfg.signal.prior_honest,
            honest: CountLaw::new(&honest, cfg.m as u64),
            malicious: CountLaw::new(&malicious, cfg.m as u64),
        })
    }

    fn split<R: Rng>(law: &CountLaw, count: u64, rng: &mut R) -> Group {
        let n_above = binomial(count, law.above_top(), rng);
        let mut above: Vec<usize> = (0..n_above).map(|_| law.draw_above(rng)).collect();
        above.sort_unstable_by(|a, b| b.cmp(a));
        Group {
            above,
            below: count - n_above,
        }
    }

    /// Candidates of one group at exactly level x; levels must be visited in
    /// decreasing order.
    fn at<R: Rng>(law: &CountLaw, group: &mut Group, x: usize, rng: &mut R) -> u64 {
        if x > law.top {
            let hits = group.above.iter().take_while(|&&c| c == x).count();
            group.above.drain(..hits);
            return hits as u64;
        }
        let here = binomial(group.below, law.at_level[x], rng);
        group.below -= here;
        here
    }

    /// One trial; true when the committee is honest.
    pub(crate) fn trial(&self, index: u64) -> bool {
        let mut rng = stream(self.seed, Role::Aggregate, index);
        let a = binomial(self.m, self.prior, &mut rng);
        let mut honest = Self::split(&self.honest, a, &mut rng);
        let mut malicious = Self::split(&self.malicious, self.m - a, &mut rng);
        let start = [
            honest.above.first().copied().unwrap_or(0),
            malicious.above.first().copied().unwrap_or(0),
            self.honest.top,
            self.malicious.top,
        ]
        .into_iter()
        .max()
        .unwrap_or(0);

        let mut filled = 0usize;
        let mut honest_seats = 0usize;
        for x in (0..=start).rev() {
            let bad = Self::at(&self.malicious, &mut malicious, x, &mut rng) as usize;
            let good = Self::at(&self.honest, &mut honest, x, &mut rng) as usize;
            // ties at a level are seated dishonest first
            let d = bad.min(self.k - filled);
            filled += d;
            let g = good.min(self.k - filled);
            filled += g;
            honest_seats += g;
            if filled == self.k {
                break;
            }
        }
        self.tol.is_honest(honest_seats)
    }
}
