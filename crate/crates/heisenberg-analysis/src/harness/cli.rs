//! `hn-verify` command line.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, ExperimentKind};
use crate::harness::experiments::{is_config_error, run_experiment};
use crate::harness::report::{emit_report, parse_formats};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "hn-verify", version, about = "Inequality-verification experiments on the Heisenberg group")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment named by the config's `experiment` field.
    Run(RunArgs),
    /// Strong-type Morrey–Sobolev dilation check.
    Adams(RunArgs),
    /// Weak-type dilation check (p = 1).
    WeakAdams(RunArgs),
    /// BMO endpoint growth fit.
    EndpointBmo(RunArgs),
    /// Campanato endpoint growth fit.
    EndpointCampanato(RunArgs),
    /// Localized maximal operator on Morrey spaces.
    Maximal(RunArgs),
    /// Critical-radius comparison constants.
    RhoLemma(RunArgs),
    /// Heat and fractional kernel bound fits.
    KernelBounds(RunArgs),
    /// Hedberg pointwise bound.
    Hedberg(RunArgs),
    /// Print the default configuration of an experiment kind.
    DefaultConfig {
        /// Experiment kind, e.g. `adams` or `rho-lemma`.
        kind: String,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON config; missing fields take the kind's defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dotted override, e.g. `--set exponents.kappa=0.5`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output formats, e.g. `json,csv,svg`.
    #[arg(long)]
    pub emit: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record wall time in the report.
    #[arg(long)]
    pub timing: bool,
    /// Do not print the summary.
    #[arg(long, short)]
    pub quiet: bool,
}

impl RunArgs {
    /// Config with the command-line overrides applied.
    pub fn resolve(&self, kind: Option<ExperimentKind>) -> Result<ExperimentConfig> {
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        if let Some(list) = &self.emit {
            let formats = parse_formats(list)?;
            overrides.push(format!("output.formats={}", serde_json::to_string(&formats)?));
        }
        if let Some(dir) = &self.out {
            overrides.push(format!("output.dir={}", serde_json::to_string(&dir.to_string_lossy())?));
        }
        if self.timing {
            overrides.push("output.timing=true".into());
        }
        ExperimentConfig::load(self.config.as_deref(), kind, &overrides)
    }
}

fn kind_of(command: &Command) -> Option<ExperimentKind> {
    match command {
        Command::Adams(_) => Some(ExperimentKind::Adams),
        Command::WeakAdams(_) => Some(ExperimentKind::WeakAdams),
        Command::EndpointBmo(_) => Some(ExperimentKind::EndpointBmo),
        Command::EndpointCampanato(_) => Some(ExperimentKind::EndpointCampanato),
        Command::Maximal(_) => Some(ExperimentKind::Maximal),
        Command::RhoLemma(_) => Some(ExperimentKind::RhoLemma),
        Command::KernelBounds(_) => Some(ExperimentKind::KernelBounds),
        Command::Hedberg(_) => Some(ExperimentKind::Hedberg),
        Command::Run(_) | Command::DefaultConfig { .. } => None,
    }
}

/// Runs one parsed command; returns the exit code.
pub fn execute(cli: Cli) -> u8 {
    let args = match &cli.command {
        Command::DefaultConfig { kind } => {
            return match kind.parse::<ExperimentKind>().and_then(|k| Ok(serde_json::to_string_pretty(&ExperimentConfig::for_kind(k))?)) {
                Ok(text) => {
                    let _ = writeln!(std::io::stdout(), "{text}");
                    EXIT_PASS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_CONFIG
                }
            };
        }
        Command::Run(a)
        | Command::Adams(a)
        | Command::WeakAdams(a)
        | Command::EndpointBmo(a)
        | Command::EndpointCampanato(a)
        | Command::Maximal(a)
        | Command::RhoLemma(a)
        | Command::KernelBounds(a)
        | Command::Hedberg(a) => a.clone(),
    };
    match run(&args, kind_of(&cli.command)) {
        Ok(passed) => {
            if passed {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if is_config_error(&e) {
                EXIT_CONFIG
            } else {
                EXIT_FAIL
            }
        }
    }
}

fn run(args: &RunArgs, kind: Option<ExperimentKind>) -> Result<bool> {
    let cfg = args.resolve(kind)?;
    let report = run_experiment(&cfg)?;
    let dir = PathBuf::from(&cfg.output.dir);
    let written = emit_report(&report, &dir, &cfg.stem(), &cfg.output.formats).map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("cannot write reports to {}: {io}", dir.display())),
        other => other,
    })?;
    if !args.quiet {
        // a closed stdout must not turn a finished run into a panic
        let mut out = std::io::stdout().lock();
        for c in &report.checks {
            let _ = writeln!(
                out,
                "{:<4} {} = {} ({:?} {})",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.value,
                c.relation,
                c.limit
            );
        }
        for path in &written {
            let _ = writeln!(out, "wrote {}", path.display());
        }
        let _ = writeln!(out, "{}: {}", report.experiment, if report.passed { "PASS" } else { "FAIL" });
    }
    Ok(report.passed)
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => ExitCode::from(execute(cli)),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            ExitCode::from(code)
        }
    }
}
