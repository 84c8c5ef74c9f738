//! Voting strategies: how a voter turns posteriors into an approval set, and the
//! probability that a single voter approves an honest or a malicious candidate.

use serde::{Deserialize, Serialize};

use crate::distributions::two_population_order_cdf_from_tails;
use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, binomial_pmf, std_normal_cdf, std_normal_pdf, std_normal_sf, NeumaierSum};
use crate::signal::{posterior_inverse, PosteriorSignal, SignalParams};

/// Absolute tolerance of the vote-probability quadratures.
pub const QUADRATURE_TOL: f64 = 1e-8;
/// Standardized noise range integrated over; the Gaussian mass outside is below 1e-22.
const NOISE_RANGE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "z", rename_all = "lowercase")]
pub enum Strategy {
    /// Approve every candidate whose posterior exceeds `z`.
    Threshold(f64),
    /// Approve the `z` candidates with the highest posteriors.
    Cardinal(usize),
    Abstain,
}

impl Strategy {
    /// Single-choice voting.
    pub const SINGLE_CHOICE: Strategy = Strategy::Cardinal(1);

    /// Checks the parameter against an election with `m` candidates and vote cap `t`.
    pub fn validate(&self, m: usize, t: usize) -> Result<()> {
        match *self {
            Strategy::Threshold(z) if !(0.0..=1.0).contains(&z) => Err(Error::domain("threshold z", z, "[0, 1]")),
            Strategy::Cardinal(z) if z == 0 || z > m => Err(Error::invalid(
                "cardinal z",
                format!("z = {z} must lie in 1..={m} (the number of candidates)"),
            )),
            Strategy::Cardinal(z) if z > t => Err(Error::invalid(
                "cardinal z",
                format!("z = {z} exceeds the vote cap t = {t}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Threshold(_) => "threshold",
            Strategy::Cardinal(_) => "cardinal",
            Strategy::Abstain => "abstain",
        }
    }

    /// The strategy parameter as a number, if it has one.
    pub fn parameter(&self) -> Option<f64> {
        match *self {
            Strategy::Threshold(z) => Some(z),
            Strategy::Cardinal(z) => Some(z as f64),
            Strategy::Abstain => None,
        }
    }
}

/// Candidates a voter approves, as sorted indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VoteSet {
    chosen: Vec<usize>,
}

impl VoteSet {
    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    pub fn contains(&self, candidate: usize) -> bool {
        self.chosen.binary_search(&candidate).is_ok()
    }
}

/// Applies `strategy` to one voter's posteriors under vote cap `cap`.
pub fn apply_strategy(posteriors: &[PosteriorSignal], strategy: &Strategy, cap: usize) -> Result<VoteSet> {
    if posteriors.is_empty() {
        return Err(Error::invalid("posteriors", "at least one candidate is required"));
    }
    strategy.validate(posteriors.len(), cap)?;
    let keys: Vec<f64> = posteriors.iter().map(|s| s.value()).collect();
    let cutoff = match *strategy {
        Strategy::Threshold(z) => z,
        _ => f64::NAN,
    };
    let mut chosen = Vec::new();
    select_votes(&keys, strategy, cutoff, cap, &mut chosen);
    chosen.sort_unstable();
    Ok(VoteSet { chosen })
}

/// Writes the approved candidates into `out` (unsorted) and reports whether a
/// threshold ballot had to be truncated to the cap.
///
/// `keys` must be increasing in the posterior; `cutoff` is the threshold mapped
/// to the same scale. Candidates are ranked by key, then by lower index.
pub(crate) fn select_votes(keys: &[f64], strategy: &Strategy, cutoff: f64, cap: usize, out: &mut Vec<usize>) -> bool {
    out.clear();
    match *strategy {
        Strategy::Abstain => false,
        Strategy::Cardinal(z) => {
            out.extend(0..keys.len());
            keep_best(keys, out, z);
            false
        }
        Strategy::Threshold(_) => {
            out.extend((0..keys.len()).filter(|&j| keys[j] > cutoff));
            if out.len() > cap {
                keep_best(keys, out, cap);
                true
            } else {
                false
            }
        }
    }
}

/// Keeps the `count` best candidates of `idx` under (key desc, index asc).
fn keep_best(keys: &[f64], idx: &mut Vec<usize>, count: usize) {
    if count < idx.len() {
        let rank = |&a: &usize, &b: &usize| keys[b].total_cmp(&keys[a]).then(a.cmp(&b));
        if count > 0 {
            idx.select_nth_unstable_by(count - 1, rank);
        }
        idx.truncate(count);
    }
}

/// Probabilities that one voter approves a given honest and a given malicious candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoteProbs {
    pub honest: f64,
    pub malicious: f64,
}

impl VoteProbs {
    /// Gap between the two approval probabilities.
    pub fn separation(&self) -> f64 {
        self.honest - self.malicious
    }
}

/// Approval probabilities under a threshold strategy:
/// 1 − Φ((h⁻¹(z) − base)/σ) for each producer type.
pub fn threshold_vote_probs(z: f64, params: &SignalParams) -> Result<VoteProbs> {
    params.validate()?;
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::domain("threshold z", z, "[0, 1]"));
    }
    if z <= 0.0 {
        return Ok(VoteProbs {
            honest: 1.0,
            malicious: 1.0,
        });
    }
    if z >= 1.0 {
        return Ok(VoteProbs {
            honest: 0.0,
            malicious: 0.0,
        });
    }
    if params.is_uninformative() {
        let v = if params.prior_honest > z { 1.0 } else { 0.0 };
        return Ok(VoteProbs {
            honest: v,
            malicious: v,
        });
    }
    let cut = posterior_inverse(z, params)?.0;
    let sd = params.noise_sd;
    Ok(VoteProbs {
        honest: std_normal_sf((cut - params.base_honest) / sd),
        malicious: std_normal_sf((cut - params.base_malicious) / sd),
    })
}

/// Integrates `g(raw signal)` against the raw-signal law of the given base.
fn expect_over_signal<G: Fn(f64) -> f64>(params: &SignalParams, base: f64, g: G) -> Result<f64> {
    let sd = params.noise_sd;
    adaptive_simpson(
        |u| std_normal_pdf(u) * g(base + sd * u),
        -NOISE_RANGE,
        NOISE_RANGE,
        QUADRATURE_TOL,
    )
}

/// (F, 1 − F) of the honest and malicious posterior laws at the posterior of raw signal `r`.
///
/// The posterior is increasing in the raw signal, so Pr[s ≤ h(r)] = Pr[s* ≤ r].
fn type_cdfs(params: &SignalParams, r: f64) -> [f64; 4] {
    let sd = params.noise_sd;
    let zh = (r - params.base_honest) / sd;
    let zm = (r - params.base_malicious) / sd;
    [
        std_normal_cdf(zh),
        std_normal_sf(zh),
        std_normal_cdf(zm),
        std_normal_sf(zm),
    ]
}

fn require_informative(params: &SignalParams, m: usize) -> Result<()> {
    params.validate()?;
    if m == 0 {
        return Err(Error::invalid("m", "at least one candidate is required"));
    }
    if params.is_uninformative() {
        return Err(Error::UninformativeSignals);
    }
    Ok(())
}

/// Approval probabilities under Cardinal(z) with `m` candidates.
///
/// The target is approved when its posterior beats the (m − z)-th smallest
/// posterior among the other m − 1 candidates. Conditioning on the number a of
/// honest rivals, that order statistic has a two-population law; the result
/// averages over a ~ Bin(m − 1, p).
pub fn cardinal_vote_probs(z: usize, params: &SignalParams, m: usize) -> Result<VoteProbs> {
    require_informative(params, m)?;
    if z == 0 || z > m {
        return Err(Error::invalid("cardinal z", format!("z = {z} must lie in 1..={m}")));
    }
    if z == m {
        return Ok(VoteProbs {
            honest: 1.0,
            malicious: 1.0,
        });
    }
    let rivals = (m - 1) as u64;
    let rank = (m - z) as u64;
    let p = params.prior_honest;
    let weights: Vec<f64> = (0..=rivals).map(|a| binomial_pmf(rivals, a, p, 1.0 - p)).collect();
    let beat_rivals = |r: f64| -> f64 {
        let [ch, sh, cm, sm] = type_cdfs(params, r);
        let mut acc = NeumaierSum::default();
        for (a, w) in weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let a = a as u64;
            // rank ≤ rivals, so the rank is always valid
            let f = two_population_order_cdf_from_tails(ch, sh, cm, sm, a, rivals - a, rank).unwrap_or(f64::NAN);
            acc.add(w * f);
        }
        acc.total()
    };
    Ok(VoteProbs {
        honest: expect_over_signal(params, params.base_honest, beat_rivals)?,
        malicious: expect_over_signal(params, params.base_malicious, beat_rivals)?,
    })
}

/// Approval probabilities under single-choice voting with `m` candidates.
///
/// With a honest candidates in total, a given honest candidate tops the ballot
/// with probability ∫ F_M^{m−a} F_H^{a−1} f_H, and each of the a honest
/// candidates is equally likely to be the given one (weight a/(m·p)); the
/// malicious side is symmetric with b = m − a.
pub fn single_choice_vote_probs(params: &SignalParams, m: usize) -> Result<VoteProbs> {
    require_informative(params, m)?;
    let p = params.prior_honest;
    let mm = m as u64;
    let honest = expect_over_signal(params, params.base_honest, |r| {
        let [ch, _, cm, _] = type_cdfs(params, r);
        (1..=mm)
            .map(|a| {
                let weight = binomial_pmf(mm, a, p, 1.0 - p) * a as f64 / (m as f64 * p);
                weight * cm.powi((mm - a) as i32) * ch.powi(a as i32 - 1)
            })
            .collect::<NeumaierSum>()
            .total()
    })?;
    let malicious = expect_over_signal(params, params.base_malicious, |r| {
        let [ch, _, cm, _] = type_cdfs(params, r);
        (0..mm)
            .map(|a| {
                let b = mm - a;
                let weight = binomial_pmf(mm, a, p, 1.0 - p) * b as f64 / (m as f64 * (1.0 - p));
                weight * ch.powi(a as i32) * cm.powi(b as i32 - 1)
            })
            .collect::<NeumaierSum>()
            .total()
    })?;
    Ok(VoteProbs { honest, malicious })
}
