//! TOML experiment files.
//!
//! ```toml
//! m = 30
//! n = 100
//! k = 21
//! t = 30
//! rho = "1/3"
//! p = 0.75
//! p_h = 0.75
//! p_m = 0.5
//! sigma = 0.1            # or one value per voter
//! strategy = { kind = "threshold", z = 0.5 }
//! sweep = { axis = "threshold-z", from = 0.01, to = 0.99, step = 0.01 }
//! engine = "exact"       # exact | mc | bound
//! trials = 100000
//! seed = 1
//! ```

use std::ops::Range;
use std::path::Path;

use num_rational::Ratio;
use serde::Deserialize;
use toml::Spanned;

use super::{Axis, Engine, ExperimentSpec, Sweep};
use crate::error::{Error, Result};
use crate::signal::SignalParams;
use crate::simulator::{ElectionConfig, Sampling, SignalSharing, Voter};
use crate::strategies::Strategy;

const DEFAULT_TRIALS: u64 = 100_000;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub(crate) enum Sigma {
    Shared(f64),
    PerVoter(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawStrategy {
    kind: String,
    z: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawSweep {
    axis: String,
    from: f64,
    to: f64,
    step: f64,
}

/// The file as written, with source spans for error messages.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawConfig {
    m: Spanned<usize>,
    n: Spanned<usize>,
    k: Spanned<usize>,
    t: Spanned<usize>,
    rho: Spanned<String>,
    p: Spanned<f64>,
    p_h: Spanned<f64>,
    p_m: Spanned<f64>,
    sigma: Spanned<Sigma>,
    strategy: Spanned<RawStrategy>,
    sweep: Option<Spanned<RawSweep>>,
    engine: Option<Spanned<String>>,
    trials: Option<Spanned<u64>>,
    seed: Option<Spanned<u64>>,
}

/// Maps byte offsets in a source file to 1-based lines.
pub(crate) struct Source<'a>(pub(crate) &'a str);

impl Source<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.0.len());
        self.0[..end].matches('\n').count() + 1
    }

    fn error<T>(&self, span: &Spanned<T>, key: &str, message: impl Into<String>) -> Error {
        Error::Config {
            line: Some(self.line(span.span())),
            key: key.to_string(),
            message: message.into(),
        }
    }
}

/// First backquoted word of a deserializer message, which names the key.
fn quoted_key(message: &str) -> Option<&str> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(&message[start..start + len])
}

pub(crate) fn toml_error(source: &Source<'_>, err: toml::de::Error) -> Error {
    let message = err.message().trim().to_string();
    Error::Config {
        line: err.span().map(|s| source.line(s)),
        key: quoted_key(&message).unwrap_or("config").to_string(),
        message,
    }
}

fn strategy(source: &Source<'_>, raw: &Spanned<RawStrategy>, m: usize) -> Result<Strategy> {
    let s = raw.get_ref();
    let need_z = || {
        s.z.ok_or_else(|| source.error(raw, "strategy.z", format!("strategy `{}` needs z", s.kind)))
    };
    match s.kind.as_str() {
        "threshold" => Ok(Strategy::Threshold(need_z()?)),
        "cardinal" => {
            let z = need_z()?;
            if z.fract() != 0.0 || z < 1.0 || z > m as f64 {
                return Err(source.error(
                    raw,
                    "strategy.z",
                    format!("cardinal z must be an integer in 1..={m}, got {z}"),
                ));
            }
            Ok(Strategy::Cardinal(z as usize))
        }
        "single-choice" => Ok(Strategy::SINGLE_CHOICE),
        "abstain" => Ok(Strategy::Abstain),
        other => Err(source.error(
            raw,
            "strategy.kind",
            format!("unknown strategy `{other}`; expected threshold, cardinal, single-choice or abstain"),
        )),
    }
}

fn axis(name: &str) -> Option<Axis> {
    [Axis::ThresholdZ, Axis::CardinalZ, Axis::N, Axis::K, Axis::P, Axis::Gap]
        .into_iter()
        .find(|a| a.name() == name)
}

impl RawConfig {
    /// Which raw key an error from the election model refers to.
    fn key_for(&self, err: &Error) -> (&'static str, Range<usize>) {
        let name = match err {
            Error::InvalidParameter { name, .. } => *name,
            Error::Domain { what, .. } => *what,
            _ => "",
        };
        match name {
            "m" => ("m", self.m.span()),
            "k" => ("k", self.k.span()),
            "t" => ("t", self.t.span()),
            "rho" => ("rho", self.rho.span()),
            "prior_honest" => ("p", self.p.span()),
            "base_honest" | "base signals" => ("p_h", self.p_h.span()),
            "base_malicious" => ("p_m", self.p_m.span()),
            "noise_sd" => ("sigma", self.sigma.span()),
            "threshold z" | "cardinal z" => ("strategy.z", self.strategy.span()),
            _ => ("config", 0..0),
        }
    }

    pub(crate) fn build(&self, source: &Source<'_>) -> Result<ExperimentSpec> {
        let (m, n, k, t) = (
            *self.m.get_ref(),
            *self.n.get_ref(),
            *self.k.get_ref(),
            *self.t.get_ref(),
        );
        if k > m {
            return Err(source.error(&self.k, "k", format!("m ≥ k violated: m = {m}, k = {k}")));
        }
        let rho: Ratio<u64> = self.rho.get_ref().trim().parse().map_err(|_| {
            source.error(
                &self.rho,
                "rho",
                format!("`{}` is not a fraction like \"1/3\"", self.rho.get_ref()),
            )
        })?;
        let strategy = strategy(source, &self.strategy, m)?;
        let noise: Vec<f64> = match self.sigma.get_ref() {
            Sigma::Shared(sd) => vec![*sd; n],
            Sigma::PerVoter(list) if list.len() == n => list.clone(),
            Sigma::PerVoter(list) => {
                return Err(source.error(
                    &self.sigma,
                    "sigma",
                    format!("{} values given for n = {n} voters", list.len()),
                ))
            }
        };
        let shared_sd = match self.sigma.get_ref() {
            Sigma::Shared(sd) => *sd,
            Sigma::PerVoter(list) => list.first().copied().unwrap_or(1.0),
        };
        let signal = SignalParams {
            prior_honest: *self.p.get_ref(),
            base_honest: *self.p_h.get_ref(),
            base_malicious: *self.p_m.get_ref(),
            noise_sd: shared_sd,
        };
        let base = ElectionConfig {
            m,
            k,
            t,
            rho,
            signal,
            voters: noise.into_iter().map(|noise_sd| Voter { noise_sd, strategy }).collect(),
            seed: self.seed.as_ref().map_or(0, |s| *s.get_ref()),
            sharing: SignalSharing::Private,
            sampling: Sampling::PerVoter,
        };
        base.validate().map_err(|e| {
            let (key, span) = self.key_for(&e);
            Error::Config {
                line: (key != "config").then(|| source.line(span)),
                key: key.to_string(),
                message: e.to_string(),
            }
        })?;

        let engine = match &self.engine {
            None => Engine::Exact,
            Some(raw) => match raw.get_ref().as_str() {
                "exact" => Engine::Exact,
                "mc" => Engine::Mc,
                "bound" => Engine::Bound,
                other => {
                    return Err(source.error(
                        raw,
                        "engine",
                        format!("unknown engine `{other}`; expected exact, mc or bound"),
                    ))
                }
            },
        };
        let trials = self.trials.as_ref().map_or(DEFAULT_TRIALS, |t| *t.get_ref());
        if trials == 0 {
            if let Some(raw) = &self.trials {
                return Err(source.error(raw, "trials", "at least one trial is required"));
            }
        }

        let sweep = match &self.sweep {
            None => None,
            Some(raw) => {
                let s = raw.get_ref();
                let axis = axis(&s.axis).ok_or_else(|| {
                    source.error(
                        raw,
                        "sweep.axis",
                        format!(
                            "unknown axis `{}`; expected threshold-z, cardinal-z, n, k, p or gap",
                            s.axis
                        ),
                    )
                })?;
                let matches = match axis {
                    Axis::ThresholdZ => matches!(strategy, Strategy::Threshold(_)),
                    Axis::CardinalZ => matches!(strategy, Strategy::Cardinal(_)),
                    _ => true,
                };
                if !matches {
                    return Err(source.error(
                        raw,
                        "sweep.axis",
                        format!("axis {axis} does not match strategy `{}`", self.strategy.get_ref().kind),
                    ));
                }
                Some(Sweep {
                    axis,
                    from: s.from,
                    to: s.to,
                    step: s.step,
                })
            }
        };

        let spec = ExperimentSpec {
            base,
            sweep,
            engine,
            trials,
            output_path: None,
        };
        // every grid point and the engine are checked before any work starts
        spec.points().map_err(|e| {
            let (key, span) = match (&e, &self.sweep, &self.engine) {
                (Error::InvalidParameter { name: "engine", .. }, _, Some(raw)) => ("engine", raw.span()),
                (Error::InvalidParameter { name: "engine", .. }, _, None) => {
                    return Error::Config {
                        line: None,
                        key: "engine".to_string(),
                        message: e.to_string(),
                    }
                }
                (_, Some(raw), _) => ("sweep", raw.span()),
                _ => self.key_for(&e),
            };
            Error::Config {
                line: (key != "config").then(|| source.line(span)),
                key: key.to_string(),
                message: e.to_string(),
            }
        })?;
        Ok(spec)
    }
}

/// Parses and fully validates an experiment file's contents.
pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let source = Source(text);
    let raw: RawConfig = toml::from_str(text).map_err(|e| toml_error(&source, e))?;
    raw.build(&source)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
m = 30
n = 100
k = 21
t = 30
rho = "1/3"
p = 0.75
p_h = 0.75
p_m = 0.5
sigma = 0.1
strategy = { kind = "threshold", z = 0.5 }
sweep = { axis = "threshold-z", from = 0.01, to = 0.99, step = 0.01 }
"#;

    fn config_error(text: &str) -> (Option<usize>, String, String) {
        match parse_config(text).unwrap_err() {
            Error::Config { line, key, message } => (line, key, message),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_file_parses() {
        let spec = parse_config(MINIMAL).unwrap();
        assert_eq!(spec.base.m, 30);
        assert_eq!(spec.base.n(), 100);
        assert_eq!(spec.base.rho, Ratio::new(1, 3));
        assert_eq!(spec.engine, Engine::Exact);
        assert_eq!(spec.trials, DEFAULT_TRIALS);
        assert_eq!(spec.points().unwrap().len(), 99);
    }

    #[test]
    fn half_parses_as_a_fraction() {
        let spec = parse_config(&MINIMAL.replace("\"1/3\"", "\"1/2\"")).unwrap();
        assert_eq!(spec.base.rho, Ratio::new(1, 2));
    }

    #[test]
    fn oversized_committee_names_the_key() {
        let (line, key, message) = config_error(&MINIMAL.replace("k = 21", "k = 31"));
        assert_eq!(key, "k");
        assert_eq!(line, Some(4));
        assert!(message.contains("m ≥ k violated"), "{message}");
    }

    #[test]
    fn unknown_and_missing_keys() {
        let (line, key, _) = config_error(&format!("{MINIMAL}colour = 3\n"));
        assert_eq!(key, "colour");
        assert_eq!(line, Some(13));
        let (_, key, _) = config_error(&MINIMAL.replace("p_m = 0.5\n", ""));
        assert_eq!(key, "p_m");
    }

    #[test]
    fn range_violations_point_at_their_line() {
        let (line, key, _) = config_error(&MINIMAL.replace("p = 0.75", "p = 1.5"));
        assert_eq!((line, key.as_str()), (Some(7), "p"));
        let (line, key, _) = config_error(&MINIMAL.replace("sigma = 0.1", "sigma = -1"));
        assert_eq!((line, key.as_str()), (Some(10), "sigma"));
    }

    #[test]
    fn per_voter_sigma_must_match_n() {
        let text = MINIMAL
            .replace("n = 100", "n = 2")
            .replace("sigma = 0.1", "sigma = [0.1, 0.2]");
        let spec = parse_config(&text).unwrap();
        assert_eq!(spec.base.voters[1].noise_sd, 0.2);
        let (_, key, _) = config_error(&text.replace("[0.1, 0.2]", "[0.1]"));
        assert_eq!(key, "sigma");
    }

    #[test]
    fn exact_engine_needs_threshold_ballots() {
        let text = MINIMAL
            .replace("kind = \"threshold\", z = 0.5", "kind = \"cardinal\", z = 21")
            .replace(
                "axis = \"threshold-z\", from = 0.01, to = 0.99, step = 0.01",
                "axis = \"n\", from = 1, to = 2, step = 1",
            );
        let (_, key, _) = config_error(&text);
        assert_eq!(key, "engine");
        assert!(parse_config(&format!("{text}engine = \"mc\"\n")).is_ok());
    }

    #[test]
    fn sweeps_are_checked_point_by_point() {
        let text = MINIMAL.replace(
            "axis = \"threshold-z\", from = 0.01, to = 0.99, step = 0.01",
            "axis = \"k\", from = 20, to = 40, step = 1",
        );
        let (line, key, message) = config_error(&text);
        assert_eq!((line, key.as_str()), (Some(12), "sweep"));
        assert!(message.contains("k = 31"), "{message}");
    }

    #[test]
    fn axis_must_fit_the_strategy() {
        let text = MINIMAL.replace("threshold-z", "cardinal-z");
        let (_, key, _) = config_error(&text);
        assert_eq!(key, "sweep.axis");
    }
}
