//! `qvolume` command-line front end.
//!
//! Results go to standard output (or `--out`), progress to standard error.
//! Exit status: 0 on success, 2 when the run gathered too few statistics, 1
//! on any configuration or input error.

mod commands;
mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{Command, RunConfig, SEED_ENV};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qvolume::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(qvolume::Error::InsufficientStatistics { .. }) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "qvolume", version, about = "Volume ratios of PPT and Bell-violating bipartite states")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate the fraction of states satisfying a predicate.
    Ratio(RatioArgs),
    /// Estimate the fraction of two-qubit states violating a Bell test.
    Bell(BellArgs),
    /// CSV of random-setting detection fractions against the number of settings.
    ScanCurve(ScanArgs),
    /// Newton-identity PSD test of a matrix in text format.
    CheckPsd(MatrixArgs),
    /// PPT test of a bipartite matrix in text format.
    PptCheck(PptArgs),
    /// Print the generators and radii of a state family.
    BasisDump(BasisArgs),
}

#[derive(Args)]
struct Common {
    /// `key=value` file; command-line flags take precedence.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Falls back to QVOLUME_SEED.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    /// json or csv.
    #[arg(long)]
    format: Option<String>,
    #[arg(long, value_name = "PATH")]
    out: Option<String>,
}

#[derive(Args)]
struct RatioArgs {
    #[arg(long)]
    family: Option<String>,
    /// multiphase or hitrun.
    #[arg(long)]
    sampler: Option<String>,
    /// ppt, chsh, cg, 12m or cg-or-chsh.
    #[arg(long)]
    predicate: Option<String>,
    /// Walk length (hitrun) or samples per phase (multiphase); `1e7` is accepted.
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    block_size: Option<String>,
    #[arg(long)]
    phases: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    chains: Option<String>,
    #[arg(long)]
    restarts: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BellArgs {
    #[arg(long)]
    family: Option<String>,
    /// chsh, 12m, cg-body, cg-opt or cg-scan.
    #[arg(long)]
    predicate: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    block_size: Option<String>,
    #[arg(long)]
    chains: Option<String>,
    #[arg(long)]
    restarts: Option<String>,
    #[arg(long, value_name = "M")]
    scan_settings: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    family: Option<String>,
    /// Number of walk states.
    #[arg(long)]
    samples: Option<String>,
    /// Largest number of random settings on the grid.
    #[arg(long, value_name = "M")]
    scan_settings: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct MatrixArgs {
    /// Matrix file; standard input when omitted.
    input: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PptArgs {
    #[arg(long)]
    na: Option<String>,
    #[arg(long)]
    nb: Option<String>,
    /// Matrix file; standard input when omitted.
    input: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BasisArgs {
    #[arg(long)]
    family: Option<String>,
    #[command(flatten)]
    common: Common,
}

fn insert(map: &mut BTreeMap<String, String>, pairs: &[(&str, &Option<String>)]) {
    for (k, v) in pairs {
        if let Some(v) = v {
            map.insert(k.to_string(), v.clone());
        }
    }
}

impl Cmd {
    fn split(&self) -> (Command, &Common, BTreeMap<String, String>) {
        let mut m = BTreeMap::new();
        let (command, common) = match self {
            Cmd::Ratio(a) => {
                insert(
                    &mut m,
                    &[
                        ("family", &a.family),
                        ("sampler", &a.sampler),
                        ("predicate", &a.predicate),
                        ("samples", &a.samples),
                        ("block-size", &a.block_size),
                        ("phases", &a.phases),
                        ("reps", &a.reps),
                        ("chains", &a.chains),
                        ("restarts", &a.restarts),
                    ],
                );
                (Command::Ratio, &a.common)
            }
            Cmd::Bell(a) => {
                insert(
                    &mut m,
                    &[
                        ("family", &a.family),
                        ("predicate", &a.predicate),
                        ("samples", &a.samples),
                        ("block-size", &a.block_size),
                        ("chains", &a.chains),
                        ("restarts", &a.restarts),
                        ("scan-settings", &a.scan_settings),
                    ],
                );
                (Command::Bell, &a.common)
            }
            Cmd::ScanCurve(a) => {
                insert(
                    &mut m,
                    &[("family", &a.family), ("samples", &a.samples), ("scan-settings", &a.scan_settings)],
                );
                (Command::ScanCurve, &a.common)
            }
            Cmd::CheckPsd(a) => {
                insert(&mut m, &[("input", &a.input)]);
                (Command::CheckPsd, &a.common)
            }
            Cmd::PptCheck(a) => {
                insert(&mut m, &[("na", &a.na), ("nb", &a.nb), ("input", &a.input)]);
                (Command::PptCheck, &a.common)
            }
            Cmd::BasisDump(a) => {
                insert(&mut m, &[("family", &a.family)]);
                (Command::BasisDump, &a.common)
            }
        };
        insert(
            &mut m,
            &[
                ("seed", &common.seed),
                ("tol", &common.tol),
                ("format", &common.format),
                ("out", &common.out),
            ],
        );
        (command, common, m)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (command, common, flags) = cli.command.split();
    let file = match &common.config {
        Some(path) => config::read_config_file(path)?,
        None => BTreeMap::new(),
    };
    let cfg = RunConfig::resolve(command, flags, file, std::env::var(SEED_ENV).ok())?;

    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.chains).build_global() {
        log::debug!("thread pool already configured: {e}");
    }
    let cancel = Arc::new(AtomicBool::new(false));
    let flag = Arc::clone(&cancel);
    if let Err(e) = ctrlc::set_handler(move || flag.store(true, Ordering::Relaxed)) {
        log::warn!("cannot install interrupt handler: {e}");
    }

    let artifact = commands::run(&cfg, cancel)?;
    match &cfg.out_path {
        Some(path) => std::fs::write(path, artifact.0)?,
        None => print!("{}", artifact.0),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
