//! Exact finite discrete distributions on `{0, …, n}`.

mod binomial;
mod dominance;
mod order_stats;
mod poisson_binomial;

pub use binomial::{hypergeometric_pmf, log_binomial_tail, TailDirection};
pub use dominance::stochastic_dominance;
pub(crate) use order_stats::two_population_order_cdf_from_tails;
pub use order_stats::{order_stat_discrete, two_population_order_cdf, DiscreteOrderStatistic};
pub use poisson_binomial::{
    chernoff_bounds, pbd_cdf, pbd_cdf_dft, pbd_pmf, PmfMethod, PoissonBinomialParams, TailBounds,
};

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

const NORMALIZATION_TOL: f64 = 1e-9;
const NEGATIVE_TOL: f64 = 1e-15;
const FLUSH_BELOW: f64 = 1e-300;

/// Probability mass function on `{0, …, n}`, with cumulative tables in both
/// directions so upper tails keep full relative precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    masses: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Pmf {
    pub fn new(mut masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::invalid("masses", "a pmf needs at least one support point"));
        }
        for (x, m) in masses.iter_mut().enumerate() {
            if !m.is_finite() || *m < -NEGATIVE_TOL {
                return Err(Error::NumericInstability(format!(
                    "mass {m:e} at {x} is not a probability"
                )));
            }
            if *m < FLUSH_BELOW {
                *m = 0.0;
            }
        }
        let total = masses.iter().copied().collect::<NeumaierSum>().total();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NumericInstability(format!("pmf sums to {total}, not 1")));
        }
        Ok(Self::from_valid(masses))
    }

    fn from_valid(masses: Vec<f64>) -> Self {
        let mut lower = Vec::with_capacity(masses.len());
        let mut acc = NeumaierSum::default();
        for &m in &masses {
            acc.add(m);
            lower.push(acc.total().min(1.0));
        }
        let mut upper = vec![0.0; masses.len()];
        let mut acc = NeumaierSum::default();
        for x in (0..masses.len()).rev() {
            upper[x] = acc.total().min(1.0);
            acc.add(masses[x]);
        }
        Pmf { masses, lower, upper }
    }

    pub fn point_mass(at: usize, support_max: usize) -> Self {
        let mut masses = vec![0.0; support_max.max(at) + 1];
        masses[at] = 1.0;
        Self::from_valid(masses)
    }

    /// Largest support point n.
    pub fn support_max(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, x: i64) -> f64 {
        if x < 0 {
            0.0
        } else {
            self.masses.get(x as usize).copied().unwrap_or(0.0)
        }
    }

    /// Pr[X ≤ x].
    pub fn cdf(&self, x: i64) -> f64 {
        if x < 0 {
            0.0
        } else if x as usize >= self.lower.len() {
            1.0
        } else {
            self.lower[x as usize]
        }
    }

    /// Pr[X > x], accumulated from the top of the support.
    pub fn sf(&self, x: i64) -> f64 {
        if x < 0 {
            1.0
        } else if x as usize >= self.upper.len() {
            0.0
        } else {
            self.upper[x as usize]
        }
    }

    pub fn mean(&self) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .map(|(x, m)| x as f64 * m)
            .collect::<NeumaierSum>()
            .total()
    }

    /// Distribution of the sum of two independent variables.
    pub fn convolve(&self, other: &Pmf) -> Pmf {
        let mut out = vec![0.0; self.masses.len() + other.masses.len() - 1];
        for (i, &a) in self.masses.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.masses.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::from_valid(out)
    }
}
