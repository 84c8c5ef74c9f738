use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_rational::Ratio;

use approval_committee::analytics::{
    lifetime_fork_bound, lottery_failure, lottery_success, LotteryMode, ToleranceSpec, DEFAULT_K_MAX,
};
use approval_committee::harness::{
    committee_size_rows, load_config, reproduce_figure, run_experiment, write_csv, write_outputs, Engine,
    ExperimentOptions, ExperimentSpec, Figure,
};
use approval_committee::signal::{posterior, RawSignal, SignalParams};
use approval_committee::simulator::RunOptions;
use approval_committee::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "approval-committee",
    version,
    about = "Committee election success probabilities under noisy signals"
)]
struct Cli {
    /// Experiment file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the seed of the config or figure defaults.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the Monte Carlo trial count.
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Output CSV; a JSON sidecar with all parameters is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores). Never changes results.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Record wall-clock time per row.
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Posterior probability that a candidate is honest given raw signals.
    Posterior {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        p_h: f64,
        #[arg(long)]
        p_m: f64,
        #[arg(long)]
        sigma: f64,
        /// Raw signals to map.
        #[arg(required = true, allow_negative_numbers = true)]
        signals: Vec<f64>,
    },
    /// Exact success probability over the config's grid.
    SuccessExact,
    /// Monte Carlo success probability over the config's grid.
    Simulate,
    /// Runs the config's sweep with its own engine.
    Sweep,
    /// Smallest lottery and voting committees for target failure rates.
    CommitteeSize {
        #[arg(long = "target", required = true)]
        targets: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_K_MAX)]
        k_max: usize,
    },
    /// Lottery success probability, exact and as a Chernoff bound.
    Lottery {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "1/3")]
        rho: String,
        /// Elections covered by the lifetime union bound.
        #[arg(long)]
        elections: Option<u64>,
    },
    /// Regenerates a figure's data from the frozen defaults.
    Reproduce {
        /// One of: threshold-few-voters, threshold-100-voters, convergence-n, cardinal-k21,
        /// committee-size, informativeness, prior-sweep, single-voter-cardinal.
        figure: String,
    },
}

fn spec_from(cli: &Cli, engine: Option<Engine>) -> Result<ExperimentSpec> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config {
        line: None,
        key: "config".to_string(),
        message: "this command needs --config <file>".to_string(),
    })?;
    let mut spec = load_config(path)?;
    if let Some(engine) = engine {
        spec.engine = engine;
        // re-check the grid against the forced engine before any work
        spec.points()?;
    }
    if let Some(seed) = cli.seed {
        spec.base.seed = seed;
    }
    if let Some(trials) = cli.trials {
        spec.trials = trials;
    }
    spec.output_path = cli.out.clone();
    Ok(spec)
}

fn emit<R: serde::Serialize, P: serde::Serialize>(out: Option<&Path>, rows: &[R], params: &P) -> Result<()> {
    match out {
        Some(path) => {
            write_outputs(path, rows, params)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => write_csv(io::stdout().lock(), rows),
    }
}

fn parse_rho(text: &str) -> Result<Ratio<u64>> {
    text.trim().parse().map_err(|_| Error::InvalidParameter {
        name: "rho",
        reason: format!("`{text}` is not a fraction like 1/3"),
    })
}

fn run(cli: &Cli) -> Result<()> {
    let options = ExperimentOptions {
        run: RunOptions { threads: cli.threads },
        timing: cli.timing,
    };
    match &cli.command {
        Command::Posterior {
            p,
            p_h,
            p_m,
            sigma,
            signals,
        } => {
            let params = SignalParams::new(*p, *p_h, *p_m, *sigma)?;
            for &s in signals {
                println!("{s}\t{}", posterior(RawSignal(s), &params).value());
            }
            Ok(())
        }
        Command::SuccessExact | Command::Simulate | Command::Sweep => {
            let engine = match cli.command {
                Command::SuccessExact => Some(Engine::Exact),
                Command::Simulate => Some(Engine::Mc),
                _ => None,
            };
            let spec = spec_from(cli, engine)?;
            for warning in spec.warnings() {
                eprintln!("warning: {warning}");
            }
            let rows = run_experiment(&spec, options)?;
            emit(cli.out.as_deref(), &rows, &spec)
        }
        Command::CommitteeSize { targets, k_max } => {
            let spec = spec_from(cli, None)?;
            let rows = committee_size_rows(&spec.base, targets, spec.trials, *k_max, options)?;
            emit(cli.out.as_deref(), &rows, &spec)
        }
        Command::Lottery { p, k, rho, elections } => {
            let tol = ToleranceSpec::new(parse_rho(rho)?, *k)?;
            let failure = lottery_failure(*p, &tol)?;
            println!("exact_success={}", lottery_success(*p, &tol, LotteryMode::Exact)?);
            println!("exact_failure={failure}");
            match lottery_success(*p, &tol, LotteryMode::Chernoff) {
                Ok(bound) => println!("chernoff_success={bound}"),
                Err(Error::BoundInapplicable(why)) => println!("chernoff_success=n/a ({why})"),
                Err(e) => return Err(e),
            }
            if let Some(n) = elections {
                println!("lifetime_failure_bound={}", lifetime_fork_bound(failure, *n));
            }
            Ok(())
        }
        Command::Reproduce { figure } => {
            let figure: Figure = figure.parse()?;
            let output = reproduce_figure(figure, cli.seed, cli.trials, options.run, options.timing)?;
            let path = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("out").join(format!("{}.csv", figure.id())));
            output.write(&path)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
