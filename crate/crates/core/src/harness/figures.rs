//! Figure reproduction from the frozen defaults in `defaults/figures.toml`.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::config::{toml_error, RawConfig, Source};
use super::{auto_sampling, run_experiment, write_outputs, ExperimentOptions, ExperimentSpec, ResultRow};
use crate::analytics::{min_committee_size_lottery, min_committee_size_voting};
use crate::error::{Error, Result};
use crate::signal::SignalParams;
use crate::simulator::{ElectionConfig, RunOptions};
use crate::strategies::Strategy;

const DEFAULTS: &str = include_str!("../../defaults/figures.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    ThresholdFewVoters,
    Threshold100Voters,
    ConvergenceN,
    CardinalK21,
    CommitteeSize,
    Informativeness,
    PriorSweep,
    SingleVoterCardinal,
}

const ALL: [Figure; 8] = [
    Figure::ThresholdFewVoters,
    Figure::Threshold100Voters,
    Figure::ConvergenceN,
    Figure::CardinalK21,
    Figure::CommitteeSize,
    Figure::Informativeness,
    Figure::PriorSweep,
    Figure::SingleVoterCardinal,
];

impl Figure {
    pub fn id(self) -> &'static str {
        match self {
            Figure::ThresholdFewVoters => "threshold-few-voters",
            Figure::Threshold100Voters => "threshold-100-voters",
            Figure::ConvergenceN => "convergence-n",
            Figure::CardinalK21 => "cardinal-k21",
            Figure::CommitteeSize => "committee-size",
            Figure::Informativeness => "informativeness",
            Figure::PriorSweep => "prior-sweep",
            Figure::SingleVoterCardinal => "single-voter-cardinal",
        }
    }
}

impl std::str::FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ALL.into_iter().find(|f| f.id() == s).ok_or_else(|| {
            Error::invalid(
                "figure",
                format!("unknown figure `{s}`; valid ids: {}", figure_ids().join(", ")),
            )
        })
    }
}

pub fn figure_ids() -> Vec<&'static str> {
    ALL.iter().map(|f| f.id()).collect()
}

/// Version of the frozen defaults; recorded in every sidecar.
pub const DEFAULTS_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFigure {
    description: String,
    series: Vec<RawConfig>,
}

/// Lottery-against-voting committee sizing at several target failure rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommitteeSizeSpec {
    pub description: String,
    pub m: usize,
    pub n: usize,
    pub rho: String,
    pub p: f64,
    pub p_h: f64,
    pub p_m: f64,
    pub sigma: f64,
    /// Common voting threshold.
    pub z: f64,
    pub targets: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub k_max: usize,
}

impl CommitteeSizeSpec {
    pub fn rho(&self) -> Result<Ratio<u64>> {
        self.rho
            .trim()
            .parse()
            .map_err(|_| Error::invalid("rho", format!("`{}` is not a fraction", self.rho)))
    }

    /// The voting election with the committee size left at 1.
    pub fn election(&self) -> Result<ElectionConfig> {
        let signal = SignalParams::new(self.p, self.p_h, self.p_m, self.sigma)?;
        let mut cfg = ElectionConfig::uniform(
            self.m,
            self.n,
            1,
            self.m,
            self.rho()?,
            signal,
            Strategy::Threshold(self.z),
            self.seed,
        );
        cfg.sampling = auto_sampling(&cfg);
        Ok(cfg)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Defaults {
    version: u32,
    figures: BTreeMap<String, SweepFigure>,
    #[serde(rename = "committee-size")]
    committee_size: CommitteeSizeSpec,
}

fn defaults() -> Result<Defaults> {
    let defaults: Defaults = toml::from_str(DEFAULTS).map_err(|e| toml_error(&Source(DEFAULTS), e))?;
    if defaults.version != DEFAULTS_VERSION {
        return Err(Error::invalid("defaults", "figure defaults version mismatch"));
    }
    Ok(defaults)
}

/// Frozen series of a sweep figure, with optional seed and trial overrides.
pub fn figure_series(figure: Figure, seed: Option<u64>, trials: Option<u64>) -> Result<(String, Vec<ExperimentSpec>)> {
    let defaults = defaults()?;
    let def = defaults
        .figures
        .get(figure.id())
        .ok_or_else(|| Error::invalid("figure", format!("{} is not a sweep figure", figure.id())))?;
    let source = Source(DEFAULTS);
    let mut series = Vec::with_capacity(def.series.len());
    for raw in &def.series {
        let mut spec = raw.build(&source)?;
        if let Some(seed) = seed {
            spec.base.seed = seed;
        }
        if let Some(trials) = trials {
            spec.trials = trials;
        }
        series.push(spec);
    }
    Ok((def.description.clone(), series))
}

pub fn committee_size_defaults(seed: Option<u64>, trials: Option<u64>) -> Result<CommitteeSizeSpec> {
    let mut spec = defaults()?.committee_size;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    if let Some(trials) = trials {
        spec.trials = trials;
    }
    Ok(spec)
}

/// One target failure rate of a committee-size comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitteeSizeRow {
    pub target: f64,
    pub p: f64,
    pub rho: String,
    pub m: usize,
    pub n: usize,
    pub p_h: f64,
    pub p_m: f64,
    pub sigma: f64,
    pub strategy: String,
    pub z: Option<f64>,
    pub trials: u64,
    pub lottery_k: usize,
    pub voting_k: usize,
    pub voting_failures: u64,
    /// Upper end of the 99% Wilson interval on the voting failure rate.
    pub failure_upper: f64,
    pub wall_time_ms: Option<u64>,
}

/// Smallest lottery and voting committees for each target failure rate, with
/// the voting election `base` (its committee size is ignored).
pub fn committee_size_rows(
    base: &ElectionConfig,
    targets: &[f64],
    trials: u64,
    k_max: usize,
    options: ExperimentOptions,
) -> Result<Vec<CommitteeSizeRow>> {
    if targets.is_empty() {
        return Err(Error::invalid(
            "targets",
            "at least one target failure rate is required",
        ));
    }
    let mut base = base.clone();
    base.sampling = auto_sampling(&base);
    let strategy = base.voters.first().map(|v| v.strategy).unwrap_or(Strategy::Abstain);
    let mut rows = Vec::with_capacity(targets.len());
    for &target in targets {
        let started = Instant::now();
        let lottery_k = min_committee_size_lottery(target, base.signal.prior_honest, base.rho, k_max)?;
        let voting = min_committee_size_voting(&base, target, trials, k_max, options.run)?;
        rows.push(CommitteeSizeRow {
            target,
            p: base.signal.prior_honest,
            rho: base.rho.to_string(),
            m: base.m,
            n: base.n(),
            p_h: base.signal.base_honest,
            p_m: base.signal.base_malicious,
            sigma: base.signal.noise_sd,
            strategy: strategy.name().to_string(),
            z: strategy.parameter(),
            trials,
            lottery_k,
            voting_k: voting.k,
            voting_failures: voting.counts.failures(),
            failure_upper: voting.failure_upper,
            wall_time_ms: options.timing.then(|| started.elapsed().as_millis() as u64),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub enum FigureRows {
    Sweep(Vec<ResultRow>),
    CommitteeSize(Vec<CommitteeSizeRow>),
}

/// A reproduced figure: its data and every parameter used to produce it.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureOutput {
    pub figure: Figure,
    pub rows: FigureRows,
    pub params: serde_json::Value,
}

impl FigureOutput {
    pub fn write(&self, csv_path: &Path) -> Result<()> {
        match &self.rows {
            FigureRows::Sweep(rows) => write_outputs(csv_path, rows, &self.params),
            FigureRows::CommitteeSize(rows) => write_outputs(csv_path, rows, &self.params),
        }
    }
}

#[derive(Serialize)]
struct Sidecar<'a, T: Serialize> {
    figure: &'a str,
    description: &'a str,
    defaults_version: u32,
    parameters: T,
}

/// Runs a figure's frozen experiment. `seed` and `trials` override the
/// defaults for every series.
pub fn reproduce_figure(
    figure: Figure,
    seed: Option<u64>,
    trials: Option<u64>,
    run: RunOptions,
    timing: bool,
) -> Result<FigureOutput> {
    let options = ExperimentOptions { run, timing };
    if figure == Figure::CommitteeSize {
        let spec = committee_size_defaults(seed, trials)?;
        let rows = committee_size_rows(&spec.election()?, &spec.targets, spec.trials, spec.k_max, options)?;
        let params = serde_json::to_value(Sidecar {
            figure: figure.id(),
            description: &spec.description,
            defaults_version: DEFAULTS_VERSION,
            parameters: &spec,
        })?;
        return Ok(FigureOutput {
            figure,
            rows: FigureRows::CommitteeSize(rows),
            params,
        });
    }
    let (description, series) = figure_series(figure, seed, trials)?;
    let mut rows = Vec::new();
    for spec in &series {
        rows.extend(run_experiment(spec, options)?);
    }
    let params = serde_json::to_value(Sidecar {
        figure: figure.id(),
        description: &description,
        defaults_version: DEFAULTS_VERSION,
        parameters: &series,
    })?;
    Ok(FigureOutput {
        figure,
        rows: FigureRows::Sweep(rows),
        params,
    })
}
