//! Experiment specs, parameter sweeps, figure defaults and CSV/JSON output.

mod config;
mod figures;

pub use config::{load_config, parse_config};
pub use figures::{
    committee_size_defaults, committee_size_rows, figure_ids, figure_series, reproduce_figure, CommitteeSizeRow,
    CommitteeSizeSpec, Figure, FigureOutput, FigureRows, DEFAULTS_VERSION,
};

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analytics::{success_bound, success_exact, SuccessEstimate};
use crate::error::{Error, Result};
use crate::simulator::{simulate, ElectionConfig, RunOptions, Sampling, SignalSharing};
use crate::strategies::Strategy;

/// Largest grid a sweep may expand to.
pub const MAX_GRID: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Exact,
    Mc,
    Bound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    ThresholdZ,
    CardinalZ,
    N,
    K,
    P,
    /// p_h − p_m, moving p_h with p_m held fixed.
    Gap,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::ThresholdZ => "threshold-z",
            Axis::CardinalZ => "cardinal-z",
            Axis::N => "n",
            Axis::K => "k",
            Axis::P => "p",
            Axis::Gap => "gap",
        }
    }

    fn integral(self) -> bool {
        matches!(self, Axis::CardinalZ | Axis::N | Axis::K)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An evenly spaced grid `from, from + step, …` up to `to` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: Axis,
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

/// Grid values are rounded to this many decimals so that 0.1 + 2·0.1 prints as 0.3.
const GRID_DECIMALS: i32 = 10;

impl Sweep {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if self.step.is_nan() || self.step <= 0.0 || !self.from.is_finite() || !self.to.is_finite() {
            return Err(Error::invalid("sweep", "step must be positive and bounds finite"));
        }
        if self.to < self.from {
            return Err(Error::invalid(
                "sweep",
                format!("empty grid: to = {} < from = {}", self.to, self.from),
            ));
        }
        if self.axis.integral() && [self.from, self.to, self.step].iter().any(|v| v.fract() != 0.0) {
            return Err(Error::invalid(
                "sweep",
                format!("axis {} takes integer from, to and step", self.axis),
            ));
        }
        let count = ((self.to - self.from) / self.step + 1e-9).floor() + 1.0;
        if count > MAX_GRID as f64 {
            return Err(Error::invalid(
                "sweep",
                format!("{count} grid points exceed the limit of {MAX_GRID}"),
            ));
        }
        let scale = 10f64.powi(GRID_DECIMALS);
        Ok((0..count as usize)
            .map(|i| ((self.from + i as f64 * self.step) * scale).round() / scale)
            .collect())
    }
}

/// A validated experiment: a base election, an optional one-axis sweep and an engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub base: ElectionConfig,
    pub sweep: Option<Sweep>,
    pub engine: Engine,
    pub trials: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
}

/// One grid point of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub axis_value: Option<f64>,
    pub config: ElectionConfig,
}

fn with_strategy(cfg: &mut ElectionConfig, strategy: Strategy) {
    cfg.voters.iter_mut().for_each(|v| v.strategy = strategy);
}

fn uniform_noise(cfg: &ElectionConfig) -> Option<f64> {
    let first = cfg.voters.first().map_or(cfg.signal.noise_sd, |v| v.noise_sd);
    cfg.voters.iter().all(|v| v.noise_sd == first).then_some(first)
}

fn base_strategy(cfg: &ElectionConfig) -> Option<Strategy> {
    let first = cfg.voters.first()?.strategy;
    cfg.voters.iter().all(|v| v.strategy == first).then_some(first)
}

fn exact_needs_threshold() -> Error {
    Error::invalid(
        "engine",
        "the exact engine needs threshold ballots; use mc or bound for cardinal strategies",
    )
}

impl ExperimentSpec {
    /// Expands the sweep into per-point configurations, validating each one and
    /// the engine against it before any evaluation.
    pub fn points(&self) -> Result<Vec<GridPoint>> {
        let cardinal = self
            .base
            .voters
            .iter()
            .any(|v| matches!(v.strategy, Strategy::Cardinal(_)))
            || self.sweep.is_some_and(|s| s.axis == Axis::CardinalZ);
        if self.engine == Engine::Exact && cardinal {
            return Err(exact_needs_threshold());
        }
        let Some(sweep) = self.sweep else {
            self.check_point(&self.base)?;
            return Ok(vec![GridPoint {
                axis_value: None,
                config: self.base.clone(),
            }]);
        };
        let mut points = Vec::new();
        for x in sweep.grid()? {
            let mut cfg = self.base.clone();
            match sweep.axis {
                Axis::ThresholdZ => with_strategy(&mut cfg, Strategy::Threshold(x)),
                Axis::CardinalZ => with_strategy(&mut cfg, Strategy::Cardinal(x as usize)),
                Axis::N => {
                    let sd = uniform_noise(&self.base).ok_or_else(|| {
                        Error::invalid("sweep", "sweeping n needs a single sigma shared by all voters")
                    })?;
                    let strategy = base_strategy(&self.base).unwrap_or(Strategy::Abstain);
                    cfg.voters = vec![crate::simulator::Voter { noise_sd: sd, strategy }; x as usize];
                }
                Axis::K => cfg.k = x as usize,
                Axis::P => cfg.signal.prior_honest = x,
                Axis::Gap => cfg.signal.base_honest = cfg.signal.base_malicious + x,
            }
            self.check_point(&cfg)
                .map_err(|e| Error::invalid("sweep", format!("at {} = {x}: {e}", sweep.axis)))?;
            points.push(GridPoint {
                axis_value: Some(x),
                config: cfg,
            });
        }
        Ok(points)
    }

    fn check_point(&self, cfg: &ElectionConfig) -> Result<()> {
        cfg.validate()?;
        if self.engine == Engine::Exact && cfg.voters.iter().any(|v| matches!(v.strategy, Strategy::Cardinal(_))) {
            return Err(exact_needs_threshold());
        }
        Ok(())
    }

    /// Caveats worth surfacing before a run.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let threshold = self
            .base
            .voters
            .iter()
            .any(|v| matches!(v.strategy, Strategy::Threshold(_)))
            || self.sweep.is_some_and(|s| s.axis == Axis::ThresholdZ);
        if threshold && self.base.t < self.base.m {
            out.push(match self.engine {
                Engine::Mc => format!(
                    "threshold ballots may exceed the cap t = {}; the simulation truncates them to the best t",
                    self.base.t
                ),
                _ => format!(
                    "threshold ballots may exceed the cap t = {}; the {} engine ignores the cap",
                    self.base.t,
                    if self.engine == Engine::Exact { "exact" } else { "bound" }
                ),
            });
        }
        out
    }
}

/// Options that affect how, but never what, an experiment computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExperimentOptions {
    pub run: RunOptions,
    /// Fill the wall_time_ms column; off by default so output is reproducible.
    pub timing: bool,
}

/// One output row; the column order is part of the file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub axis: String,
    pub axis_value: Option<f64>,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub rho: String,
    pub p: f64,
    pub p_h: f64,
    pub p_m: f64,
    /// A single value, or per-voter values joined by ';'.
    pub sigma: String,
    pub strategy: String,
    pub z: Option<f64>,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub method: String,
    pub wall_time_ms: Option<u64>,
}

fn sigma_column(cfg: &ElectionConfig) -> String {
    match uniform_noise(cfg) {
        Some(sd) => sd.to_string(),
        None => cfg
            .voters
            .iter()
            .map(|v| v.noise_sd.to_string())
            .collect::<Vec<_>>()
            .join(";"),
    }
}

fn strategy_columns(cfg: &ElectionConfig) -> (String, Option<f64>) {
    match base_strategy(cfg) {
        Some(s) => (s.name().to_string(), s.parameter()),
        None if cfg.voters.is_empty() => ("none".to_string(), None),
        None => ("mixed".to_string(), None),
    }
}

/// Evaluates the engine at one configuration.
pub fn evaluate(cfg: &ElectionConfig, engine: Engine, trials: u64, run: RunOptions) -> Result<SuccessEstimate> {
    match engine {
        Engine::Exact => success_exact(cfg),
        Engine::Bound => success_bound(cfg),
        Engine::Mc => {
            let mut cfg = cfg.clone();
            cfg.sampling = auto_sampling(&cfg);
            Ok(simulate(&cfg, trials, run)?.estimate)
        }
    }
}

/// Aggregate sampling when ballots allow it; it draws from the same law far faster.
pub(crate) fn auto_sampling(cfg: &ElectionConfig) -> Sampling {
    let independent = cfg
        .voters
        .iter()
        .all(|v| matches!(v.strategy, Strategy::Threshold(_) | Strategy::Abstain));
    if independent && cfg.t == cfg.m && cfg.sharing == SignalSharing::Private {
        Sampling::Aggregate
    } else {
        Sampling::PerVoter
    }
}

pub fn run_experiment(spec: &ExperimentSpec, options: ExperimentOptions) -> Result<Vec<ResultRow>> {
    let points = spec.points()?;
    let axis = spec.sweep.map_or("none", |s| s.axis.name());
    let mut rows = Vec::with_capacity(points.len());
    for point in &points {
        let cfg = &point.config;
        let started = Instant::now();
        let estimate = evaluate(cfg, spec.engine, spec.trials, options.run)?;
        let elapsed = started.elapsed().as_millis() as u64;
        let (strategy, z) = strategy_columns(cfg);
        rows.push(ResultRow {
            axis: axis.to_string(),
            axis_value: point.axis_value,
            m: cfg.m,
            n: cfg.n(),
            k: cfg.k,
            t: cfg.t,
            rho: cfg.rho.to_string(),
            p: cfg.signal.prior_honest,
            p_h: cfg.signal.base_honest,
            p_m: cfg.signal.base_malicious,
            sigma: sigma_column(cfg),
            strategy,
            z,
            value: estimate.value,
            ci_low: estimate.ci_low,
            ci_high: estimate.ci_high,
            method: estimate.method.to_string(),
            wall_time_ms: options.timing.then_some(elapsed),
        });
    }
    Ok(rows)
}

/// Writes serializable rows as CSV with a header.
pub fn write_csv<W: Write, R: Serialize>(writer: W, rows: &[R]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

/// Path of the JSON sidecar that accompanies a CSV file.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes `rows` to `path` and `params` to the sidecar next to it.
pub fn write_outputs<R: Serialize, P: Serialize>(path: &Path, rows: &[R], params: &P) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_csv(std::fs::File::create(path)?, rows)?;
    let mut json = serde_json::to_string_pretty(params)?;
    json.push('\n');
    std::fs::write(sidecar_path(path), json)?;
    Ok(())
}
