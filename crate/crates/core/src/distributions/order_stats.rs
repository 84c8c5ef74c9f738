//! Order statistics of integer-valued samples. Ranks count from the smallest:
//! rank 1 is the minimum, rank n the maximum.

use super::Pmf;
use crate::error::{Error, Result};
use crate::numeric::{binomial_cdf, binomial_pmf, NeumaierSum};

const CONSISTENCY_TOL: f64 = 1e-9;

/// The k-th smallest of n iid draws from a distribution on `{0, …, N}`.
#[derive(Debug, Clone)]
pub struct DiscreteOrderStatistic {
    cdf: Vec<f64>,
    sf: Vec<f64>,
    k: u64,
    n: u64,
}

/// Builds the k-th order statistic from a pmf `f` and cdf `F` on the same support.
pub fn order_stat_discrete(pdf: &[f64], cdf: &[f64], k: u64, n: u64) -> Result<DiscreteOrderStatistic> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::invalid("k", format!("need 1 ≤ k ≤ n, got k = {k}, n = {n}")));
    }
    if pdf.is_empty() || pdf.len() != cdf.len() {
        return Err(Error::invalid("cdf", "pdf and cdf must share a non-empty support"));
    }
    let mut previous = 0.0;
    for (x, (&f, &c)) in pdf.iter().zip(cdf).enumerate() {
        if (c - previous - f).abs() > CONSISTENCY_TOL {
            return Err(Error::invalid(
                "cdf",
                format!("F({x}) − F({}) = {} but f({x}) = {f}", x as i64 - 1, c - previous),
            ));
        }
        previous = c;
    }
    if (previous - 1.0).abs() > CONSISTENCY_TOL {
        return Err(Error::invalid("cdf", format!("F ends at {previous}, not 1")));
    }
    let pmf = Pmf::new(pdf.to_vec())?;
    Ok(DiscreteOrderStatistic::from_pmf(&pmf, k, n))
}

impl DiscreteOrderStatistic {
    /// Caller guarantees 1 ≤ k ≤ n.
    pub(crate) fn from_pmf(pmf: &Pmf, k: u64, n: u64) -> Self {
        debug_assert!(k >= 1 && k <= n);
        let support = 0..=pmf.support_max() as i64;
        DiscreteOrderStatistic {
            cdf: support.clone().map(|x| pmf.cdf(x)).collect(),
            sf: support.map(|x| pmf.sf(x)).collect(),
            k,
            n,
        }
    }

    fn tails(&self, x: i64) -> (f64, f64) {
        if x < 0 {
            (0.0, 1.0)
        } else if x as usize >= self.cdf.len() {
            (1.0, 0.0)
        } else {
            (self.cdf[x as usize], self.sf[x as usize])
        }
    }

    /// Pr[X_(k) ≤ x] = Pr[at least k draws ≤ x] = Pr[Bin(n, 1 − F(x)) ≤ n − k].
    pub fn cdf_at(&self, x: i64) -> f64 {
        let (f, s) = self.tails(x);
        binomial_cdf(self.n, (self.n - self.k) as i64, s, f)
    }

    /// Pr[X_(k) > x] = Pr[fewer than k draws ≤ x], summed directly so small
    /// upper tails are not lost to cancellation.
    pub fn sf_at(&self, x: i64) -> f64 {
        let (f, s) = self.tails(x);
        binomial_cdf(self.n, self.k as i64 - 1, f, s)
    }

    /// Differences the tail that is small at `x`, so masses far below the
    /// largest one are not lost to cancellation.
    pub fn pmf_at(&self, x: i64) -> f64 {
        let below = self.cdf_at(x);
        if below <= 0.5 {
            (below - self.cdf_at(x - 1)).max(0.0)
        } else {
            (self.sf_at(x - 1) - self.sf_at(x)).max(0.0)
        }
    }

    pub fn support_max(&self) -> usize {
        self.cdf.len() - 1
    }

    pub fn to_pmf(&self) -> Result<Pmf> {
        Pmf::new((0..=self.support_max() as i64).map(|x| self.pmf_at(x)).collect())
    }
}

/// Pr[the `rank`-th smallest of n1 draws from F1 and n2 draws from F2 is ≤ x],
/// given the two cdfs evaluated at x.
pub fn two_population_order_cdf<F1, F2>(f1: F1, f2: F2, n1: u64, n2: u64, rank: u64, x: f64) -> Result<f64>
where
    F1: Fn(f64) -> f64,
    F2: Fn(f64) -> f64,
{
    let (c1, c2) = (f1(x), f2(x));
    two_population_order_cdf_from_tails(c1, 1.0 - c1, c2, 1.0 - c2, n1, n2, rank)
}

/// Same as [`two_population_order_cdf`] with each cdf value supplied alongside its
/// complement, so tails near 1 keep their precision.
pub(crate) fn two_population_order_cdf_from_tails(
    c1: f64,
    s1: f64,
    c2: f64,
    s2: f64,
    n1: u64,
    n2: u64,
    rank: u64,
) -> Result<f64> {
    if rank == 0 || rank > n1 + n2 {
        return Err(Error::domain("rank", rank, "{1, …, n1 + n2}"));
    }
    // upper[j] = Pr[Bin(n2, F2) ≥ j], accumulated from the top
    let mut upper = vec![0.0; n2 as usize + 2];
    for j in (0..=n2).rev() {
        upper[j as usize] = upper[j as usize + 1] + binomial_pmf(n2, j, c2, s2);
    }
    // Σ_{j1} Pr[Bin(n1, F1) = j1] · Pr[Bin(n2, F2) ≥ rank − j1]
    let mut acc = NeumaierSum::default();
    for j1 in 0..=n1 {
        let need = rank.saturating_sub(j1);
        if need > n2 {
            continue;
        }
        let tail = if need == 0 { 1.0 } else { upper[need as usize] };
        acc.add(binomial_pmf(n1, j1, c1, s1) * tail);
    }
    Ok(acc.total().clamp(0.0, 1.0))
}
