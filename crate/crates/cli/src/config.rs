use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qvolume::positivity::PSD_TOL;
use qvolume::samplers::DEFAULT_BLOCK_SIZE;
use qvolume::FamilyName;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const SEED_ENV: &str = "QVOLUME_SEED";

const DEFAULT_SEED: u64 = 1;
const DEFAULT_SAMPLES: u64 = 1_000_000;
const DEFAULT_REPS: usize = 10;
const DEFAULT_RESTARTS: usize = 32;
const DEFAULT_SCAN_SETTINGS: usize = 1024;
const BELL_TOL: f64 = qvolume::bell_tests::BELL_TOL;

/// Keys accepted in a `--config` file, one `key=value` per line.
const KNOWN_KEYS: [&str; 15] = [
    "family",
    "sampler",
    "predicate",
    "samples",
    "block-size",
    "phases",
    "reps",
    "chains",
    "seed",
    "tol",
    "restarts",
    "scan-settings",
    "format",
    "out",
    "input",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ratio,
    Bell,
    ScanCurve,
    CheckPsd,
    PptCheck,
    BasisDump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    Multiphase,
    Hitrun,
}

impl Sampler {
    pub fn as_str(self) -> &'static str {
        match self {
            Sampler::Multiphase => "multiphase",
            Sampler::Hitrun => "hitrun",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub family: Option<FamilyName>,
    pub sampler: Sampler,
    pub predicate: Option<String>,
    pub samples: u64,
    pub block_size: u64,
    pub phases: Option<usize>,
    pub reps: usize,
    pub chains: usize,
    pub seed: u64,
    tol: Option<f64>,
    pub restarts: usize,
    pub scan_settings: usize,
    pub format: Format,
    pub out_path: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub n_a: Option<usize>,
    pub n_b: Option<usize>,
}

/// Reads a sample count such as `1000000`, `1e7` or `2.5e6`.
pub fn parse_count(key: &str, text: &str) -> Result<u64, CliError> {
    let bad = || CliError::Config(format!("`{key}` expects a positive integer such as 1000000 or 1e6, got `{text}`"));
    if let Ok(v) = text.parse::<u64>() {
        return if v > 0 { Ok(v) } else { Err(bad()) };
    }
    let v: f64 = text.parse().map_err(|_| bad())?;
    if !(v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64) {
        return Err(bad());
    }
    Ok(v as u64)
}

fn parse_usize(key: &str, text: &str) -> Result<usize, CliError> {
    let v = parse_count(key, text)?;
    usize::try_from(v).map_err(|_| CliError::Config(format!("`{key}` is too large: {text}")))
}

fn parse_seed(origin: &str, text: &str) -> Result<u64, CliError> {
    text.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{origin} expects an unsigned 64-bit integer, got `{text}`")))
}

/// Parses a `key=value` config file. Blank lines and `#` comments are
/// skipped; keys may use `-` or `_`.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("{}:{}: expected `key=value`, got `{raw}`", path.display(), i + 1))
        })?;
        let key = key.trim().replace('_', "-");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!(
                "{}:{}: unknown key `{key}` (known: {})",
                path.display(),
                i + 1,
                KNOWN_KEYS.join(", ")
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

impl RunConfig {
    /// Builds the configuration from command-line values layered over the
    /// config file; the seed falls back to `QVOLUME_SEED`.
    pub fn resolve(
        command: Command,
        flags: BTreeMap<String, String>,
        file: BTreeMap<String, String>,
        env_seed: Option<String>,
    ) -> Result<Self, CliError> {
        let mut merged = file;
        merged.extend(flags);
        let get = |k: &str| merged.get(k).map(String::as_str);

        let family = get("family")
            .map(|s| {
                s.parse::<FamilyName>().map_err(|_| {
                    let names: Vec<&str> = FamilyName::ALL.iter().map(|f| f.as_str()).collect();
                    CliError::Config(format!("unknown family `{s}` (choose one of {})", names.join(", ")))
                })
            })
            .transpose()?;
        let sampler = match get("sampler").unwrap_or("hitrun") {
            "hitrun" | "hit-and-run" => Sampler::Hitrun,
            "multiphase" => Sampler::Multiphase,
            other => return Err(CliError::Config(format!("unknown sampler `{other}` (multiphase or hitrun)"))),
        };
        let samples = get("samples").map(|s| parse_count("samples", s)).transpose()?.unwrap_or(DEFAULT_SAMPLES);
        let block_size = match get("block-size") {
            Some(s) => parse_count("block-size", s)?,
            None if samples < 2 * DEFAULT_BLOCK_SIZE => (samples / 10).max(1),
            None => DEFAULT_BLOCK_SIZE,
        };
        let seed = match (get("seed"), env_seed) {
            (Some(s), _) => parse_seed("`seed`", s)?,
            (None, Some(e)) => parse_seed(SEED_ENV, &e)?,
            (None, None) => DEFAULT_SEED,
        };
        let chains = match get("chains") {
            Some(s) => parse_usize("chains", s)?,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        let tol = get("tol")
            .map(|s| match s.parse::<f64>() {
                Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
                _ => Err(CliError::Config(format!("`tol` expects a non-negative number, got `{s}`"))),
            })
            .transpose()?;
        let format = match get("format").unwrap_or("json") {
            "json" => Format::Json,
            "csv" => Format::Csv,
            other => return Err(CliError::Config(format!("unknown format `{other}` (json or csv)"))),
        };
        let cfg = Self {
            command,
            family,
            sampler,
            predicate: get("predicate").map(str::to_string),
            samples,
            block_size,
            phases: get("phases").map(|s| parse_usize("phases", s)).transpose()?,
            reps: get("reps").map(|s| parse_usize("reps", s)).transpose()?.unwrap_or(DEFAULT_REPS),
            chains,
            seed,
            tol,
            restarts: get("restarts").map(|s| parse_usize("restarts", s)).transpose()?.unwrap_or(DEFAULT_RESTARTS),
            scan_settings: get("scan-settings")
                .map(|s| parse_usize("scan-settings", s))
                .transpose()?
                .unwrap_or(DEFAULT_SCAN_SETTINGS),
            format,
            out_path: get("out").map(PathBuf::from),
            input: get("input").map(PathBuf::from),
            n_a: get("na").map(|s| parse_usize("na", s)).transpose()?,
            n_b: get("nb").map(|s| parse_usize("nb", s)).transpose()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let needs_family = matches!(
            self.command,
            Command::Ratio | Command::Bell | Command::ScanCurve | Command::BasisDump
        );
        if needs_family && self.family.is_none() {
            return Err(CliError::Config("`--family` is required for this command".into()));
        }
        if self.command == Command::ScanCurve && self.family != Some(FamilyName::TwoQubit) {
            return Err(CliError::Config("scan-curve runs on `--family two_qubit` only".into()));
        }
        if self.command == Command::PptCheck && (self.n_a.is_none() || self.n_b.is_none()) {
            return Err(CliError::Config("ppt-check needs both `--na` and `--nb`".into()));
        }
        if self.reps < 2 && self.sampler == Sampler::Multiphase {
            return Err(CliError::Config("`reps` must be at least 2 for the multiphase sampler".into()));
        }
        if self.phases.is_some_and(|m| m < 2) {
            return Err(CliError::Config("`phases` must be at least 2".into()));
        }
        Ok(())
    }

    /// Tolerance of PSD-type tests (`--tol`, default `1e-10`).
    pub fn psd_tol(&self) -> f64 {
        self.tol.unwrap_or(PSD_TOL)
    }

    /// Tolerance of Bell-violation tests (`--tol`, default `1e-9`).
    pub fn bell_tol(&self) -> f64 {
        self.tol.unwrap_or(BELL_TOL)
    }

    pub fn family_name(&self) -> FamilyName {
        self.family.expect("validated")
    }
}
