//! Small numerical kernels shared by the exact and Monte Carlo paths.

use statrs::function::erf::erfc;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// Standard normal CDF, Φ(x).
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal survival function, 1 − Φ(x), without cancellation.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// ln C(n, k); −∞ when k > n.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        f64::NEG_INFINITY
    } else {
        ln_binomial(n, k)
    }
}

/// log Σ exp(terms), shifted by the maximum term.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let mut acc = NeumaierSum::default();
    for &t in terms {
        acc.add((t - max).exp());
    }
    max + acc.total().ln()
}

/// 1 / (1 + e^{−l}) evaluated on the branch that cannot overflow.
pub fn logistic(l: f64) -> f64 {
    if l >= 0.0 {
        1.0 / (1.0 + (-l).exp())
    } else {
        let e = l.exp();
        e / (1.0 + e)
    }
}

/// Compensated (Kahan–Babuška–Neumaier) summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Binomial(n, q) probability mass at j. `q_comp` must equal 1 − q; it is
/// passed separately so callers holding an accurate upper tail keep it.
pub fn binomial_pmf(n: u64, j: u64, q: f64, q_comp: f64) -> f64 {
    if j > n {
        return 0.0;
    }
    if q <= 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    if q_comp <= 0.0 {
        return if j == n { 1.0 } else { 0.0 };
    }
    (ln_choose(n, j) + j as f64 * q.ln() + (n - j) as f64 * q_comp.ln()).exp()
}

/// log Pr[Bin(n, q) ≤ j_max], summed in log space.
pub fn ln_binomial_cdf(n: u64, j_max: i64, q: f64, q_comp: f64) -> f64 {
    if j_max < 0 {
        return f64::NEG_INFINITY;
    }
    let j_max = j_max as u64;
    if j_max >= n || q <= 0.0 {
        return 0.0;
    }
    if q_comp <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let (lq, lqc) = (q.ln(), q_comp.ln());
    let terms: Vec<f64> = (0..=j_max)
        .map(|j| ln_choose(n, j) + j as f64 * lq + (n - j) as f64 * lqc)
        .collect();
    log_sum_exp(&terms).min(0.0)
}

/// Pr[Bin(n, q) ≤ j_max].
pub fn binomial_cdf(n: u64, j_max: i64, q: f64, q_comp: f64) -> f64 {
    ln_binomial_cdf(n, j_max, q, q_comp).exp()
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    const MAX_DEPTH: u32 = 40;
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut worst = 0.0_f64;
    let value = simpson_step(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut worst);
    if worst > tol || !value.is_finite() {
        return Err(Error::Quadrature {
            lo: a,
            hi: b,
            error: worst,
            tolerance: tol,
        });
    }
    Ok(value)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    unresolved: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // always refine at least four levels before accepting a panel
    if depth == 0 || (depth < 36 && delta.abs() <= 15.0 * tol) {
        if depth == 0 && delta.abs() > 15.0 * tol {
            *unresolved += delta.abs() / 15.0;
        }
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, unresolved)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, unresolved)
}
