//! `dyntun`: command-line driver for the driven quartic oscillator.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure (partial
//! outputs plus an incomplete manifest), 4 I/O error.

mod config;
mod manifest;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{apply_override, locate, ExperimentConfig, Mode};
use manifest::Outputs;
use run::RunError;

#[derive(Parser)]
#[command(
    name = "dyntun",
    version,
    about = "Dynamical tunnelling in a driven quartic oscillator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Physical to scaled parameters, with the adiabaticity check.
    Scale(RunArgs),
    /// Stroboscopic section and period-one islands.
    Poincare(RunArgs),
    /// Floquet spectrum of the one-period propagator.
    Floquet(RunArgs),
    /// Husimi maps of selected Floquet or pair states.
    Husimi(RunArgs),
    /// Island-to-island transfer and its period.
    Tunnel(RunArgs),
    /// ħ_eff over a two-parameter sweep.
    #[command(name = "heff-map")]
    HeffMap(RunArgs),
    /// Stroboscopic density of an initial state.
    Evolve(RunArgs),
    /// Check a config without running it.
    Validate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config key, e.g. `--set grid.n=512`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

enum Failure {
    Config(Vec<String>),
    Numeric(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn report(&self) {
        match self {
            Failure::Config(lines) => lines.iter().for_each(|l| eprintln!("error: {l}")),
            Failure::Numeric(m) | Failure::Io(m) => eprintln!("error: {m}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Scale(a) => (Some(Mode::Scale), a),
        Command::Poincare(a) => (Some(Mode::Poincare), a),
        Command::Floquet(a) => (Some(Mode::Floquet), a),
        Command::Husimi(a) => (Some(Mode::Husimi), a),
        Command::Tunnel(a) => (Some(Mode::Tunnel), a),
        Command::HeffMap(a) => (Some(Mode::HeffMap), a),
        Command::Evolve(a) => (Some(Mode::Evolve), a),
        Command::Validate(a) => (None, a),
    };
    let result = match mode {
        Some(m) => execute(m, args),
        None => validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            f.report();
            ExitCode::from(f.code())
        }
    }
}

struct Loaded {
    text: String,
    overridden: bool,
    cfg: ExperimentConfig,
}

fn load(args: &RunArgs) -> Result<Loaded, Failure> {
    let path = args.config.display();
    let text =
        std::fs::read_to_string(&args.config).map_err(|e| Failure::Io(format!("cannot read config {path}: {e}")))?;
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| parse_failure(&args.config, &e))?;
    for raw in &args.set {
        let Some((key, val)) = raw.split_once('=') else {
            return Err(Failure::Config(vec![format!("--set {raw}: expected KEY=VALUE")]));
        };
        apply_override(&mut value, key.trim(), val).map_err(|e| Failure::Config(vec![format!("--set {key}: {e}")]))?;
    }
    let cfg = if args.set.is_empty() {
        serde_json::from_str(&text).map_err(|e| parse_failure(&args.config, &e))?
    } else {
        serde_json::from_value(value).map_err(|e| Failure::Config(vec![format!("{path} (after --set): {e}")]))?
    };
    Ok(Loaded {
        text,
        overridden: !args.set.is_empty(),
        cfg,
    })
}

/// `file:line:column: message`, without serde's own trailing location.
fn parse_failure(path: &Path, e: &serde_json::Error) -> Failure {
    let msg = e.to_string();
    let suffix = format!(" at line {} column {}", e.line(), e.column());
    let msg = msg.strip_suffix(&suffix).unwrap_or(&msg);
    Failure::Config(vec![format!("{}:{}:{}: {msg}", path.display(), e.line(), e.column())])
}

/// `file:line: key: message` lines for each validation issue.
fn issues(args: &RunArgs, loaded: &Loaded, mode: Mode) -> Vec<String> {
    loaded
        .cfg
        .validate(mode)
        .into_iter()
        .map(|mut issue| {
            if issue.line.is_none() && !loaded.overridden {
                issue.line = locate(&loaded.text, &issue.key);
            }
            format!("{}:{issue}", args.config.display())
        })
        .collect()
}

fn validate(args: &RunArgs) -> Result<(), Failure> {
    let loaded = load(args)?;
    let Some(mode) = loaded.cfg.mode else {
        return Err(Failure::Config(vec![format!(
            "{}: mode: missing (validate checks a config against its declared mode)",
            args.config.display()
        )]));
    };
    let found = issues(args, &loaded, mode);
    if !found.is_empty() {
        return Err(Failure::Config(found));
    }
    println!("{}: ok ({})", args.config.display(), mode.as_str());
    Ok(())
}

fn execute(mode: Mode, args: &RunArgs) -> Result<(), Failure> {
    let loaded = load(args)?;
    let found = issues(args, &loaded, mode);
    if !found.is_empty() {
        return Err(Failure::Config(found));
    }
    let cfg = &loaded.cfg;
    let dir: &Path = match (&args.out, &cfg.output) {
        (Some(d), _) => d,
        (None, Some(d)) => d,
        (None, None) => {
            return Err(Failure::Config(vec![format!(
                "{}: output: no output directory (pass --out or set `output`)",
                args.config.display()
            )]))
        }
    };
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("--threads {n} ignored: {e}");
        }
    }
    let mut out = Outputs::new(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let outcome = run::run(mode, cfg, &mut out);
    for w in &out.warnings {
        log::warn!("{w}");
    }
    let error = outcome.as_ref().err().map(|e| e.to_string());
    let config = serde_json::to_value(cfg).expect("config serializes");
    out.finish(mode.as_str(), config, error)
        .map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    match outcome {
        Ok(()) => Ok(()),
        Err(RunError::Numeric(e)) => Err(Failure::Numeric(e.to_string())),
        Err(RunError::Io(e)) => Err(Failure::Io(format!("{}: {e}", dir.display()))),
    }
}
