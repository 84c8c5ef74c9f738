//! Noisy private signals about producer honesty and the Bayesian posteriors
//! a voter derives from them.
//!
//! A producer of type `t` emits, to every voter `i`, a raw signal
//! `s* = base(t) + N(0, σ_i²)`. The voter's posterior that the producer is
//! honest is a logistic function of the log-likelihood ratio of the two
//! Gaussian hypotheses, so everything here is evaluated through log-odds.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{logistic, std_normal_cdf, std_normal_pdf};

/// Posteriors are kept inside `[POSTERIOR_EPS, 1 − POSTERIOR_EPS]`.
pub const POSTERIOR_EPS: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProducerType {
    Honest,
    Malicious,
}

impl ProducerType {
    pub fn is_honest(self) -> bool {
        matches!(self, ProducerType::Honest)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalParams {
    /// Prior probability that a producer is honest.
    pub prior_honest: f64,
    /// Mean raw signal of an honest producer.
    pub base_honest: f64,
    /// Mean raw signal of a malicious producer.
    pub base_malicious: f64,
    /// Standard deviation of the voter's noise.
    pub noise_sd: f64,
}

impl SignalParams {
    pub fn new(prior_honest: f64, base_honest: f64, base_malicious: f64, noise_sd: f64) -> Result<Self> {
        let params = SignalParams {
            prior_honest,
            base_honest,
            base_malicious,
            noise_sd,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.prior_honest > 0.0 && self.prior_honest < 1.0) {
            return Err(Error::domain("prior_honest", self.prior_honest, "(0, 1)"));
        }
        if !(self.noise_sd > 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::domain("noise_sd", self.noise_sd, "(0, ∞)"));
        }
        if !self.base_honest.is_finite() || !self.base_malicious.is_finite() {
            return Err(Error::invalid("base signals", "must be finite"));
        }
        if self.base_honest < self.base_malicious {
            return Err(Error::invalid(
                "base_honest",
                format!(
                    "base_honest ({}) must be at least base_malicious ({})",
                    self.base_honest, self.base_malicious
                ),
            ));
        }
        Ok(())
    }

    pub fn with_noise_sd(self, noise_sd: f64) -> Self {
        SignalParams { noise_sd, ..self }
    }

    /// True when honest and malicious producers emit identically distributed signals.
    pub fn is_uninformative(&self) -> bool {
        self.base_honest == self.base_malicious
    }

    /// Signal informativeness (p_h − p_m)/σ.
    pub fn informativeness(&self) -> f64 {
        (self.base_honest - self.base_malicious) / self.noise_sd
    }

    pub fn base(&self, producer: ProducerType) -> f64 {
        match producer {
            ProducerType::Honest => self.base_honest,
            ProducerType::Malicious => self.base_malicious,
        }
    }

    pub(crate) fn prior_log_odds(&self) -> f64 {
        (self.prior_honest / (1.0 - self.prior_honest)).ln()
    }

    /// Log-likelihood ratio ln f(s*|H)/f(s*|M) for one signal at noise level `sd`.
    ///
    /// Uses (s−p_m)² − (s−p_h)² = (p_h − p_m)(2s − p_h − p_m) so the two squares
    /// never cancel.
    pub(crate) fn log_likelihood_ratio(&self, raw: f64, sd: f64) -> f64 {
        (self.base_honest - self.base_malicious) * (2.0 * raw - self.base_honest - self.base_malicious)
            / (2.0 * sd * sd)
    }

    /// Posterior log-odds of honesty given one raw signal. Unclamped.
    pub fn log_odds(&self, raw: f64) -> f64 {
        self.prior_log_odds() + self.log_likelihood_ratio(raw, self.noise_sd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct RawSignal(pub f64);

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PosteriorSignal(f64);

impl PosteriorSignal {
    /// Wraps a probability, clamping it into the open unit interval.
    pub fn new(value: f64) -> Self {
        PosteriorSignal(value.clamp(POSTERIOR_EPS, 1.0 - POSTERIOR_EPS))
    }

    pub(crate) fn from_log_odds(log_odds: f64) -> Self {
        PosteriorSignal::new(logistic(log_odds))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Draws one raw signal for a producer of the given type.
pub fn sample_signal<R: Rng + ?Sized>(producer: ProducerType, params: &SignalParams, rng: &mut R) -> RawSignal {
    RawSignal(params.base(producer) + params.noise_sd * rng.sample::<f64, _>(StandardNormal))
}

/// Posterior probability that the producer is honest given raw signal `s_star`.
pub fn posterior(s_star: RawSignal, params: &SignalParams) -> PosteriorSignal {
    if params.is_uninformative() {
        return PosteriorSignal::new(params.prior_honest);
    }
    PosteriorSignal::from_log_odds(params.log_odds(s_star.0))
}

/// The raw signal whose posterior equals `q`.
pub fn posterior_inverse(q: f64, params: &SignalParams) -> Result<RawSignal> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain("q", q, "(0, 1)"));
    }
    if params.is_uninformative() {
        return Err(Error::UninformativeSignals);
    }
    Ok(RawSignal(raw_for_log_odds(params, logit(q))))
}

fn logit(q: f64) -> f64 {
    (q / (1.0 - q)).ln()
}

/// Raw signal with posterior log-odds `target`; log(p(1−q)/((1−p)q)) = prior − target.
pub(crate) fn raw_for_log_odds(params: &SignalParams, target: f64) -> f64 {
    let (ph, pm, sd) = (params.base_honest, params.base_malicious, params.noise_sd);
    let log_ratio = params.prior_log_odds() - target;
    ((ph - pm) * (ph + pm) - 2.0 * sd * sd * log_ratio) / (2.0 * (ph - pm))
}

/// Distribution of the posterior `s` conditioned on the producer's type.
#[derive(Debug, Clone, Copy)]
pub struct PosteriorDistribution {
    params: SignalParams,
    producer: ProducerType,
}

/// Conditional law of the posterior for one producer type.
pub fn posterior_conditional_distribution(
    producer: ProducerType,
    params: &SignalParams,
) -> Result<PosteriorDistribution> {
    if params.is_uninformative() {
        return Err(Error::UninformativeSignals);
    }
    Ok(PosteriorDistribution {
        params: *params,
        producer,
    })
}

impl PosteriorDistribution {
    fn check(x: f64) -> Result<()> {
        if x > 0.0 && x < 1.0 {
            Ok(())
        } else {
            Err(Error::domain("x", x, "(0, 1)"))
        }
    }

    fn standardized(&self, x: f64) -> f64 {
        let raw = raw_for_log_odds(&self.params, logit(x));
        (raw - self.params.base(self.producer)) / self.params.noise_sd
    }

    /// Density of the posterior at `x`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        Self::check(x)?;
        let p = &self.params;
        // d h⁻¹/dx = σ² / ((p_h − p_m) x (1 − x))
        let jacobian = p.noise_sd * p.noise_sd / ((p.base_honest - p.base_malicious) * x * (1.0 - x));
        Ok(std_normal_pdf(self.standardized(x)) / p.noise_sd * jacobian)
    }

    /// Pr[s ≤ x] = Φ((h⁻¹(x) − base)/σ).
    pub fn cdf(&self, x: f64) -> Result<f64> {
        Self::check(x)?;
        Ok(std_normal_cdf(self.standardized(x)))
    }
}

/// Posterior after conditioning on several raw signals about the same producer.
pub fn pooled_posterior(
    raw_signals: &[RawSignal],
    noise_sds: &[f64],
    params: &SignalParams,
) -> Result<PosteriorSignal> {
    if raw_signals.is_empty() {
        return Err(Error::invalid("raw_signals", "at least one signal is required"));
    }
    if raw_signals.len() != noise_sds.len() {
        return Err(Error::invalid(
            "noise_sds",
            format!("{} noise levels for {} signals", noise_sds.len(), raw_signals.len()),
        ));
    }
    if let Some(sd) = noise_sds.iter().find(|sd| !(**sd > 0.0 && sd.is_finite())) {
        return Err(Error::domain("noise_sd", sd, "(0, ∞)"));
    }
    if params.is_uninformative() {
        return Ok(PosteriorSignal::new(params.prior_honest));
    }
    let evidence: f64 = raw_signals
        .iter()
        .zip(noise_sds)
        .map(|(s, &sd)| params.log_likelihood_ratio(s.0, sd))
        .sum();
    Ok(PosteriorSignal::from_log_odds(params.prior_log_odds() + evidence))
}
