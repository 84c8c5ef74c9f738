//! Monte Carlo election engine with worst-case committee resolution.

mod aggregate;
mod engine;
mod resolve;
mod streams;

pub use resolve::{resolve_adversarial, Committee};

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{SuccessEstimate, ToleranceSpec};
use crate::distributions::{pbd_pmf, Pmf, PmfMethod, PoissonBinomialParams};
use crate::error::{Error, Result};
use crate::signal::SignalParams;
use crate::strategies::{cardinal_vote_probs, threshold_vote_probs, Strategy, VoteProbs};

use aggregate::AggregateSampler;
use engine::Runner;

/// Trials handed to one worker at a time.
pub const BATCH_SIZE: u64 = 1024;
/// Batches per round when a run may stop early.
const ROUND_BATCHES: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Voter {
    pub noise_sd: f64,
    pub strategy: Strategy,
}

/// Whether voters see only their own signals or pool everyone's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalSharing {
    #[default]
    Private,
    /// Every voter conditions on all n signals about each candidate.
    Pooled,
}

/// How a trial is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// Draw every voter's signal about every candidate.
    #[default]
    PerVoter,
    /// Draw each type's vote-count order statistics directly from the exact
    /// per-candidate count law. Only valid when ballots are independent across
    /// candidates: threshold or abstaining voters, private signals, no cap.
    Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectionConfig {
    /// Number of candidates.
    pub m: usize,
    /// Committee size.
    pub k: usize,
    /// Most candidates one ballot may approve.
    pub t: usize,
    pub rho: Ratio<u64>,
    /// Shared prior and base signals; each voter brings its own noise level.
    pub signal: SignalParams,
    pub voters: Vec<Voter>,
    pub seed: u64,
    #[serde(default)]
    pub sharing: SignalSharing,
    #[serde(default)]
    pub sampling: Sampling,
}

impl ElectionConfig {
    /// `n` identical voters at the signal's noise level.
    #[allow(clippy::too_many_arguments)]
    pub fn uniform(
        m: usize,
        n: usize,
        k: usize,
        t: usize,
        rho: Ratio<u64>,
        signal: SignalParams,
        strategy: Strategy,
        seed: u64,
    ) -> Self {
        ElectionConfig {
            m,
            k,
            t,
            rho,
            signal,
            voters: vec![
                Voter {
                    noise_sd: signal.noise_sd,
                    strategy
                };
                n
            ],
            seed,
            sharing: SignalSharing::Private,
            sampling: Sampling::PerVoter,
        }
    }

    pub fn n(&self) -> usize {
        self.voters.len()
    }

    pub fn tolerance(&self) -> Result<ToleranceSpec> {
        ToleranceSpec::new(self.rho, self.k)
    }

    /// Signal parameters as seen by voter `i`.
    pub fn voter_params(&self, i: usize) -> SignalParams {
        self.signal.with_noise_sd(self.voters[i].noise_sd)
    }

    pub fn with_committee_size(&self, k: usize) -> Self {
        ElectionConfig { k, ..self.clone() }
    }

    /// Chance that each voter approves a given honest or malicious candidate.
    pub fn vote_probs(&self) -> Result<Vec<VoteProbs>> {
        let mut cache: Vec<(Voter, VoteProbs)> = Vec::new();
        let mut out = Vec::with_capacity(self.voters.len());
        for (i, voter) in self.voters.iter().enumerate() {
            if let Some((_, probs)) = cache.iter().find(|(v, _)| v == voter) {
                out.push(*probs);
                continue;
            }
            let params = self.voter_params(i);
            let probs = match voter.strategy {
                Strategy::Threshold(z) => threshold_vote_probs(z, &params)?,
                Strategy::Cardinal(z) => cardinal_vote_probs(z, &params, self.m)?,
                Strategy::Abstain => VoteProbs {
                    honest: 0.0,
                    malicious: 0.0,
                },
            };
            cache.push((*voter, probs));
            out.push(probs);
        }
        Ok(out)
    }

    /// Laws of one honest and one malicious candidate's approval count. Only
    /// defined when ballots are independent across candidates, which rules
    /// out cardinal voters.
    pub fn vote_count_laws(&self) -> Result<(Pmf, Pmf)> {
        if self.voters.iter().any(|v| matches!(v.strategy, Strategy::Cardinal(_))) {
            return Err(Error::invalid(
                "strategy",
                "cardinal ballots are dependent across candidates; vote counts have no independent law",
            ));
        }
        let probs = self.vote_probs()?;
        let law = |f: fn(&VoteProbs) -> f64| {
            pbd_pmf(
                &PoissonBinomialParams::new(probs.iter().map(f).collect())?,
                PmfMethod::Convolution,
            )
        };
        Ok((law(|v| v.honest)?, law(|v| v.malicious)?))
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k", "the committee needs at least one seat"));
        }
        if self.m < self.k {
            return Err(Error::invalid(
                "m",
                format!("m ≥ k violated: m = {}, k = {}", self.m, self.k),
            ));
        }
        if self.t == 0 || self.t > self.m {
            return Err(Error::invalid("t", format!("need 1 ≤ t ≤ m, got t = {}", self.t)));
        }
        if self.m > u32::MAX as usize || self.voters.len() > u32::MAX as usize {
            return Err(Error::invalid("m", "too many candidates or voters"));
        }
        self.tolerance()?;
        self.signal.validate()?;
        for (i, voter) in self.voters.iter().enumerate() {
            self.voter_params(i).validate()?;
            voter.strategy.validate(self.m, self.t)?;
        }
        if self.sampling == Sampling::Aggregate {
            if self.sharing == SignalSharing::Pooled {
                return Err(Error::invalid("sampling", "aggregate sampling needs private signals"));
            }
            if self.t < self.m {
                return Err(Error::invalid(
                    "sampling",
                    "aggregate sampling needs an uncapped ballot (t = m)",
                ));
            }
            if self.voters.iter().any(|v| matches!(v.strategy, Strategy::Cardinal(_))) {
                return Err(Error::invalid(
                    "sampling",
                    "aggregate sampling needs ballots independent across candidates (threshold or abstain)",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElectionOutcome {
    pub honest: Vec<bool>,
    /// Approvals per candidate.
    pub scores: Vec<u32>,
    /// Seated candidates, sorted.
    pub committee: Vec<usize>,
    pub honest_count: usize,
    pub is_honest: bool,
    /// Threshold ballots cut down to the cap in this trial.
    pub truncated_ballots: u32,
}

/// Runs one election. Deterministic in (`cfg.seed`, `trial_index`).
pub fn run_election(cfg: &ElectionConfig, trial_index: u64) -> Result<ElectionOutcome> {
    cfg.validate()?;
    if cfg.sampling == Sampling::Aggregate {
        return Err(Error::invalid(
            "sampling",
            "aggregate sampling draws order statistics only; use per-voter sampling for full outcomes",
        ));
    }
    let mut runner = Runner::new(cfg)?;
    runner.run(trial_index);
    Ok(runner.outcome())
}

/// Counts from a batch of trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialCounts {
    pub trials: u64,
    pub successes: u64,
    /// Trials in which at least one threshold ballot exceeded the cap.
    pub truncated_trials: u64,
}

impl TrialCounts {
    pub fn failures(&self) -> u64 {
        self.trials - self.successes
    }

    fn merge(self, other: TrialCounts) -> TrialCounts {
        TrialCounts {
            trials: self.trials + other.trials,
            successes: self.successes + other.successes,
            truncated_trials: self.truncated_trials + other.truncated_trials,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSummary {
    pub estimate: SuccessEstimate,
    pub counts: TrialCounts,
}

/// Worker count; `None` uses every available core. Results never depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub threads: Option<usize>,
}

enum Trial {
    PerVoter,
    Aggregate(AggregateSampler),
}

fn pool(options: RunOptions) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = options.threads {
        if threads == 0 {
            return Err(Error::invalid("threads", "at least one worker thread is required"));
        }
        builder = builder.num_threads(threads);
    }
    builder.build().map_err(|e| Error::invalid("threads", e.to_string()))
}

fn run_batches(cfg: &ElectionConfig, trial: &Trial, first: u64, end: u64) -> Result<TrialCounts> {
    let batches: Vec<u64> = (first..end).step_by(BATCH_SIZE as usize).collect();
    let per_batch: Vec<Result<TrialCounts>> = batches
        .par_iter()
        .map(|&start| {
            let stop = (start + BATCH_SIZE).min(end);
            let mut counts = TrialCounts::default();
            match trial {
                Trial::PerVoter => {
                    let mut runner = Runner::new(cfg)?;
                    for index in start..stop {
                        let (honest, truncated) = runner.run(index);
                        counts.successes += u64::from(honest);
                        counts.truncated_trials += u64::from(truncated);
                    }
                }
                Trial::Aggregate(sampler) => {
                    for index in start..stop {
                        counts.successes += u64::from(sampler.trial(index));
                    }
                }
            }
            counts.trials = stop - start;
            Ok(counts)
        })
        .collect();
    per_batch
        .into_iter()
        .try_fold(TrialCounts::default(), |acc, c| Ok(acc.merge(c?)))
}

/// Runs `trials` elections, stopping at the end of a round once failures exceed
/// `max_failures`. Whether the limit was exceeded does not depend on the
/// worker count or on stopping early.
pub fn count_trials(
    cfg: &ElectionConfig,
    trials: u64,
    max_failures: Option<u64>,
    options: RunOptions,
) -> Result<TrialCounts> {
    cfg.validate()?;
    let trial = match cfg.sampling {
        Sampling::PerVoter => Trial::PerVoter,
        Sampling::Aggregate => Trial::Aggregate(AggregateSampler::new(cfg)?),
    };
    let pool = pool(options)?;
    pool.install(|| {
        let round = match max_failures {
            Some(_) => BATCH_SIZE * ROUND_BATCHES,
            None => trials.max(1),
        };
        let mut total = TrialCounts::default();
        let mut start = 0;
        while start < trials {
            let end = (start + round).min(trials);
            total = total.merge(run_batches(cfg, &trial, start, end)?);
            start = end;
            if max_failures.is_some_and(|limit| total.failures() > limit) {
                break;
            }
        }
        Ok(total)
    })
}

/// Success rate over `trials` elections with a 99% Wilson interval.
pub fn estimate_success(cfg: &ElectionConfig, trials: u64) -> Result<SuccessEstimate> {
    Ok(simulate(cfg, trials, RunOptions::default())?.estimate)
}

pub fn simulate(cfg: &ElectionConfig, trials: u64, options: RunOptions) -> Result<SimulationSummary> {
    if trials == 0 {
        return Err(Error::invalid("trials", "at least one trial is required"));
    }
    let counts = count_trials(cfg, trials, None, options)?;
    Ok(SimulationSummary {
        estimate: SuccessEstimate::from_counts(counts.successes, counts.trials),
        counts,
    })
}
