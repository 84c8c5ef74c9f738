use rand::Rng;
use rand_distr::StandardNormal;

use super::resolve::seat;
use super::streams::{stream, Role};
use super::{ElectionConfig, ElectionOutcome, SignalSharing};
use crate::analytics::ToleranceSpec;
use crate::error::Result;
use crate::strategies::{select_votes, Strategy};

/// Per-worker scratch space for the per-voter simulation.
///
/// Posteriors are handled as unclamped log-odds: the logistic map is increasing,
/// so rankings and threshold tests are unchanged, and values near 0 or 1 never
/// collapse into artificial ties.
pub(crate) struct Runner<'a> {
    cfg: &'a ElectionConfig,
    tol: ToleranceSpec,
    prior_log_odds: f64,
    /// Threshold z mapped to log-odds, per voter.
    cutoffs: Vec<f64>,
    honest: Vec<bool>,
    keys: Vec<f64>,
    scores: Vec<u32>,
    chosen: Vec<usize>,
    order: Vec<usize>,
    honest_seats: usize,
    truncated: u32,
}

fn logit(z: f64) -> f64 {
    if z <= 0.0 {
        f64::NEG_INFINITY
    } else if z >= 1.0 {
        f64::INFINITY
    } else {
        (z / (1.0 - z)).ln()
    }
}

impl<'a> Runner<'a> {
    pub(crate) fn new(cfg: &'a ElectionConfig) -> Result<Self> {
        let cutoffs = cfg
            .voters
            .iter()
            .map(|v| match v.strategy {
                Strategy::Threshold(z) => logit(z),
                _ => f64::NAN,
            })
            .collect();
        Ok(Runner {
            cfg,
            tol: cfg.tolerance()?,
            prior_log_odds: logit(cfg.signal.prior_honest),
            cutoffs,
            honest: vec![false; cfg.m],
            keys: vec![0.0; cfg.m],
            scores: vec![0; cfg.m],
            chosen: Vec::with_capacity(cfg.m),
            order: Vec::with_capacity(cfg.m),
            honest_seats: 0,
            truncated: 0,
        })
    }

    /// Log-likelihood ratio of honest vs malicious for a raw signal at noise `sd`.
    fn llr(&self, raw: f64, sd: f64) -> f64 {
        let s = &self.cfg.signal;
        (s.base_honest - s.base_malicious) * (2.0 * raw - s.base_honest - s.base_malicious) / (2.0 * sd * sd)
    }

    fn cast(&mut self, voter: usize) {
        let strategy = self.cfg.voters[voter].strategy;
        if select_votes(&self.keys, &strategy, self.cutoffs[voter], self.cfg.t, &mut self.chosen) {
            self.truncated += 1;
        }
        for &j in &self.chosen {
            self.scores[j] += 1;
        }
    }

    /// Runs one trial; returns (committee honest, any ballot truncated).
    pub(crate) fn run(&mut self, trial: u64) -> (bool, bool) {
        let cfg = self.cfg;
        let mut types = stream(cfg.seed, Role::Types, trial);
        for h in self.honest.iter_mut() {
            *h = types.random::<f64>() < cfg.signal.prior_honest;
        }
        self.scores.iter_mut().for_each(|s| *s = 0);
        self.truncated = 0;

        let mut signals = stream(cfg.seed, Role::Signals, trial);
        match cfg.sharing {
            SignalSharing::Private => {
                for i in 0..cfg.voters.len() {
                    let sd = cfg.voters[i].noise_sd;
                    for j in 0..cfg.m {
                        let raw =
                            cfg.signal.base(producer(self.honest[j])) + sd * signals.sample::<f64, _>(StandardNormal);
                        self.keys[j] = self.prior_log_odds + self.llr(raw, sd);
                    }
                    self.cast(i);
                }
            }
            SignalSharing::Pooled => {
                self.keys.iter_mut().for_each(|k| *k = self.prior_log_odds);
                for i in 0..cfg.voters.len() {
                    let sd = cfg.voters[i].noise_sd;
                    for j in 0..cfg.m {
                        let raw =
                            cfg.signal.base(producer(self.honest[j])) + sd * signals.sample::<f64, _>(StandardNormal);
                        self.keys[j] += self.llr(raw, sd);
                    }
                }
                for i in 0..cfg.voters.len() {
                    self.cast(i);
                }
            }
        }
        self.honest_seats = seat(&self.scores, &self.honest, cfg.k, &mut self.order);
        (self.tol.is_honest(self.honest_seats), self.truncated > 0)
    }

    pub(crate) fn outcome(&self) -> ElectionOutcome {
        let mut committee = self.order[..self.cfg.k].to_vec();
        committee.sort_unstable();
        ElectionOutcome {
            honest: self.honest.clone(),
            scores: self.scores.clone(),
            committee,
            honest_count: self.honest_seats,
            is_honest: self.tol.is_honest(self.honest_seats),
            truncated_ballots: self.truncated,
        }
    }
}

fn producer(honest: bool) -> crate::signal::ProducerType {
    if honest {
        crate::signal::ProducerType::Honest
    } else {
        crate::signal::ProducerType::Malicious
    }
}
