use num_complex::Complex64;

use super::Pmf;
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Success probabilities of independent Bernoulli trials.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonBinomialParams {
    probs: Vec<f64>,
}

impl PoissonBinomialParams {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0 && **p <= 1.0)) {
            return Err(Error::domain("success probability", p, "[0, 1]"));
        }
        Ok(PoissonBinomialParams { probs })
    }

    pub fn homogeneous(n: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().copied().collect::<NeumaierSum>().total()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmfMethod {
    /// O(n²) dynamic programme; the reference path.
    Convolution,
    /// Discrete Fourier inversion of the characteristic function; O(n²) as well,
    /// kept as an independent cross-check.
    Dft,
}

/// Pmf of the number of successes.
pub fn pbd_pmf(params: &PoissonBinomialParams, method: PmfMethod) -> Result<Pmf> {
    // a fixed evaluation order makes the result exactly permutation invariant
    let mut probs = params.probs().to_vec();
    probs.sort_by(f64::total_cmp);
    match method {
        PmfMethod::Convolution => Ok(convolution(&probs)),
        PmfMethod::Dft => dft(&probs),
    }
}

fn convolution(probs: &[f64]) -> Pmf {
    let mut masses = vec![0.0; probs.len() + 1];
    masses[0] = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        let q = 1.0 - p;
        for j in (1..=i + 1).rev() {
            // subnormal masses are worthless here and make the loop crawl
            let next = masses[j] * q + masses[j - 1] * p;
            masses[j] = if next < f64::MIN_POSITIVE { 0.0 } else { next };
        }
        masses[0] *= q;
        if masses[0] < f64::MIN_POSITIVE {
            masses[0] = 0.0;
        }
    }
    Pmf::from_valid(masses)
}

const DFT_IMAG_TOL: f64 = 1e-8;

/// Characteristic function ∏ (1 − p_j + p_j e^{iωl}) at each l = 0..=n.
fn characteristic_values(probs: &[f64]) -> Vec<Complex64> {
    let n = probs.len();
    let omega = 2.0 * std::f64::consts::PI / (n as f64 + 1.0);
    (0..=n)
        .map(|l| {
            let z = Complex64::from_polar(1.0, omega * l as f64);
            probs.iter().fold(Complex64::new(1.0, 0.0), |acc, &p| {
                acc * (Complex64::new(1.0 - p, 0.0) + z * p)
            })
        })
        .collect()
}

fn dft(probs: &[f64]) -> Result<Pmf> {
    let n = probs.len();
    let omega = 2.0 * std::f64::consts::PI / (n as f64 + 1.0);
    let chi = characteristic_values(probs);
    let mut masses = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut re = NeumaierSum::default();
        let mut im = NeumaierSum::default();
        for (l, c) in chi.iter().enumerate() {
            let term = c * Complex64::from_polar(1.0, -omega * (l * k) as f64);
            re.add(term.re);
            im.add(term.im);
        }
        let scale = 1.0 / (n as f64 + 1.0);
        let (re, im) = (re.total() * scale, im.total() * scale);
        if im.abs() > DFT_IMAG_TOL {
            return Err(Error::NumericInstability(format!(
                "imaginary residue {im:e} at k = {k} in the Fourier pmf"
            )));
        }
        masses.push(re.max(0.0));
    }
    Pmf::new(masses)
}

/// Pr[X ≤ t] from the reference pmf.
pub fn pbd_cdf(params: &PoissonBinomialParams, t: i64) -> Result<f64> {
    if t < 0 || t as usize > params.len() {
        return Err(Error::domain("t", t, "{0, …, n}"));
    }
    Ok(convolution(params.probs()).cdf(t))
}

/// Pr[X ≤ x] by summing the Fourier series for the cumulative mass directly.
pub fn pbd_cdf_dft(params: &PoissonBinomialParams, x: i64) -> Result<f64> {
    let n = params.len();
    if x < 0 {
        return Ok(0.0);
    }
    if x as usize >= n {
        return Ok(1.0);
    }
    let x = x as usize;
    let omega = 2.0 * std::f64::consts::PI / (n as f64 + 1.0);
    let chi = characteristic_values(params.probs());
    let mut acc = NeumaierSum::default();
    acc.add((x as f64 + 1.0) / (n as f64 + 1.0));
    for (l, c) in chi.iter().enumerate().skip(1) {
        // Σ_{k≤x} e^{−iωlk} = (1 − e^{−iωl(x+1)}) / (1 − e^{−iωl})
        let num = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -omega * (l * (x + 1)) as f64);
        let den = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -omega * l as f64);
        let term = c * num / den / (n as f64 + 1.0);
        acc.add(term.re);
    }
    Ok(acc.total().clamp(0.0, 1.0))
}

/// Chernoff–Hoeffding bounds on deviations of t or more from the mean n·p̄.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBounds {
    /// Bound on Pr[X > n·p̄ + t].
    pub upper: f64,
    /// Bound on Pr[X < n·p̄ − t].
    pub lower: f64,
}

/// Both tails are bounded by e^(−2t²/n).
pub fn chernoff_bounds(params: &PoissonBinomialParams, t: f64) -> Result<TailBounds> {
    if params.is_empty() {
        return Err(Error::invalid("params", "the bound needs at least one trial"));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::domain("t", t, "[0, ∞)"));
    }
    let bound = (-2.0 * t * t / params.len() as f64).exp();
    Ok(TailBounds {
        upper: bound,
        lower: bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn enumerate(probs: &[f64]) -> Vec<f64> {
        let n = probs.len();
        let mut out = vec![0.0; n + 1];
        for mask in 0u32..(1 << n) {
            let mut w = 1.0;
            for (i, p) in probs.iter().enumerate() {
                w *= if mask >> i & 1 == 1 { *p } else { 1.0 - p };
            }
            out[mask.count_ones() as usize] += w;
        }
        out
    }

    #[test]
    fn convolution_matches_subset_enumeration() {
        let probs = [0.1, 0.7, 0.35, 0.9, 0.5, 0.02, 0.66];
        let params = PoissonBinomialParams::new(probs.to_vec()).unwrap();
        let pmf = pbd_pmf(&params, PmfMethod::Convolution).unwrap();
        for (a, b) in pmf.masses().iter().zip(enumerate(&probs)) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn empty_and_degenerate_trials() {
        let pmf = pbd_pmf(&PoissonBinomialParams::new(vec![]).unwrap(), PmfMethod::Convolution).unwrap();
        assert_eq!(pmf.masses(), &[1.0]);
        let params = PoissonBinomialParams::new(vec![1.0, 0.0, 1.0]).unwrap();
        let pmf = pbd_pmf(&params, PmfMethod::Convolution).unwrap();
        assert_eq!(pmf.mass(2), 1.0);
        assert!(PoissonBinomialParams::new(vec![1.5]).is_err());
        assert!(PoissonBinomialParams::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn small_instance_matches_hand_enumeration() {
        let params = PoissonBinomialParams::new(vec![0.1, 0.5, 0.9]).unwrap();
        let pmf = pbd_pmf(&params, PmfMethod::Convolution).unwrap();
        assert_relative_eq!(pmf.mass(0), 0.045, epsilon = 1e-15);
        let expected = 0.045 + (0.9 * 0.5 * 0.1 + 0.1 * 0.5 * 0.1 + 0.9 * 0.5 * 0.9);
        assert_relative_eq!(pbd_cdf(&params, 1).unwrap(), expected, epsilon = 1e-15);
        assert_eq!(pbd_cdf(&params, 3).unwrap(), 1.0);
        assert!(pbd_cdf(&params, 4).is_err());
        assert!(pbd_cdf(&params, -1).is_err());
        let ones = PoissonBinomialParams::homogeneous(4, 1.0).unwrap();
        assert_eq!(pbd_cdf(&ones, 3).unwrap(), 0.0);
    }

    #[test]
    fn homogeneous_trials_give_the_binomial() {
        let params = PoissonBinomialParams::homogeneous(30, 0.37).unwrap();
        let pmf = pbd_pmf(&params, PmfMethod::Convolution).unwrap();
        for j in 0..=30u64 {
            let b = crate::numeric::binomial_pmf(30, j, 0.37, 0.63);
            assert!((pmf.mass(j as i64) - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn hoeffding_bound_dominates_exact_tails() {
        let params = PoissonBinomialParams::homogeneous(100, 0.5).unwrap();
        let pmf = pbd_pmf(&params, PmfMethod::Convolution).unwrap();
        let b = chernoff_bounds(&params, 20.0).unwrap();
        assert_relative_eq!(b.upper, (-8.0f64).exp(), max_relative = 1e-14);
        // Pr[X > 70] and Pr[X < 30]
        assert!(pmf.sf(70) <= b.upper);
        assert!(pmf.cdf(29) <= b.lower);
        assert_eq!(chernoff_bounds(&params, 0.0).unwrap().upper, 1.0);
        let mut last = 1.0;
        for i in 1..50 {
            let u = chernoff_bounds(&params, i as f64).unwrap().upper;
            assert!(u < last);
            last = u;
        }
        assert!(chernoff_bounds(&PoissonBinomialParams::new(vec![]).unwrap(), 1.0).is_err());
    }

    #[test]
    fn pmf_is_permutation_invariant() {
        let a = PoissonBinomialParams::new(vec![0.2, 0.9, 0.4, 0.65]).unwrap();
        let b = PoissonBinomialParams::new(vec![0.65, 0.4, 0.2, 0.9]).unwrap();
        let pa = pbd_pmf(&a, PmfMethod::Convolution).unwrap();
        let pb = pbd_pmf(&b, PmfMethod::Convolution).unwrap();
        for (x, y) in pa.masses().iter().zip(pb.masses()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn dft_agrees_with_convolution(probs in prop::collection::vec(0.0f64..=1.0, 0..=12)) {
            let params = PoissonBinomialParams::new(probs).unwrap();
            let a = pbd_pmf(&params, PmfMethod::Convolution).unwrap();
            let b = pbd_pmf(&params, PmfMethod::Dft).unwrap();
            for (x, y) in a.masses().iter().zip(b.masses()) {
                prop_assert!((x - y).abs() < 1e-10);
            }
            for x in -1..=params.len() as i64 + 1 {
                let c = pbd_cdf_dft(&params, x).unwrap();
                if (0..=params.len() as i64).contains(&x) {
                    prop_assert!((c - pbd_cdf(&params, x).unwrap()).abs() < 1e-10);
                }
            }
        }

        #[test]
        fn pmf_is_normalized_with_the_right_mean(probs in prop::collection::vec(0.0f64..=1.0, 0..80)) {
            let params = PoissonBinomialParams::new(probs).unwrap();
            let pmf = pbd_pmf(&params, PmfMethod::Convolution).unwrap();
            let total: f64 = pmf.masses().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!((pmf.mean() - params.mean()).abs() < 1e-9);
        }
    }
}
