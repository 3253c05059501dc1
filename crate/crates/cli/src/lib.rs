//! Command-line front end for `fdrkit`.
//!
//! Exit codes: 0 on success, 2 on any input or usage error, 3 when every grid
//! point calibrates to a reject-all threshold. Diagnostics go to stderr; data
//! goes to files under `--out`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fdrkit::ingest::{self, CsvConfig};
use fdrkit::{OperatingPointGrid, Polarity, SplitDataset};

pub mod config;
mod curve;
mod det;
mod evaluate;
pub mod format;
pub mod report;
mod identify;
pub mod svg;
mod synth;

use config::ConfigFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

pub const DEFAULT_GRID: &str = "1,2,3,4,5";
pub const DEFAULT_OUT: &str = "fdrkit-out";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: fdrkit::Error,
    },
    #[error(transparent)]
    Core(#[from] fdrkit::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Degenerate(_) => EXIT_DEGENERATE,
            _ => EXIT_INPUT,
        }
    }

    fn input(path: &Path) -> impl FnOnce(fdrkit::Error) -> CliError + '_ {
        move |source| CliError::Input {
            path: path.to_owned(),
            source,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fdrkit", version, about = "Demographic fairness of biometric systems from comparison scores")]
pub struct Cli {
    /// More log output on stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-demographic rate tables, FDR row, AUFDR and optional verdicts.
    Evaluate(EvaluateArgs),
    /// FDR curve data for one or more systems over a shared grid.
    #[command(name = "fdr-curve")]
    FdrCurve(CurveArgs),
    /// Per-demographic DET curves of a test set.
    Det(DetArgs),
    /// Generate a synthetic dev/test score pair.
    Synth(SynthArgs),
    /// Rank-n, DIR/FAR and open-set discrepancy of identification trials.
    Identify(IdentifyArgs),
}

#[derive(Debug, Args)]
pub(crate) struct InputArgs {
    /// Flat key = value file; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Score delimiter in input files.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// `similarity` (higher is a better match) or `distance`.
    #[arg(long)]
    pub polarity: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of csv,json,svg. A text report is always written.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub(crate) struct EvaluateArgs {
    #[command(flatten)]
    pub io: InputArgs,
    /// Development (calibration) score file.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    /// Test score file.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Single score file with a `split` column, instead of --dev/--test.
    #[arg(long, conflicts_with_all = ["dev", "test"])]
    pub data: Option<PathBuf>,
    /// FMR target exponents x (target FMR 10^-x).
    #[arg(long)]
    pub grid: Option<String>,
    /// Weight of the FMR gap against the FNMR gap [default: 0.5].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Fairness tolerance; verdicts are reported only when given.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// System name shown in reports.
    #[arg(long)]
    pub label: Option<String>,
}

#[derive(Debug, Args)]
pub(crate) struct CurveArgs {
    #[command(flatten)]
    pub io: InputArgs,
    /// Development file, once per system.
    #[arg(long, action = clap::ArgAction::Append)]
    pub dev: Vec<PathBuf>,
    /// Test file, once per system.
    #[arg(long, action = clap::ArgAction::Append)]
    pub test: Vec<PathBuf>,
    /// System name, once per system.
    #[arg(long, action = clap::ArgAction::Append)]
    pub label: Vec<String>,
    /// Shared grid, or one per system (all must agree).
    #[arg(long, action = clap::ArgAction::Append)]
    pub grid: Vec<String>,
    /// Weight of the FMR gap against the FNMR gap [default: 0.5].
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub(crate) struct DetArgs {
    #[command(flatten)]
    pub io: InputArgs,
    /// Test score file.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Demographics to plot; all labels in the test file when omitted.
    #[arg(long = "demo", action = clap::ArgAction::Append)]
    pub demos: Vec<String>,
    /// Name used in the output headers.
    #[arg(long)]
    pub label: Option<String>,
}

#[derive(Debug, Args)]
pub(crate) struct SynthArgs {
    /// Preset name (fair3, unfair3).
    #[arg(required_unless_present = "spec", conflicts_with = "spec")]
    pub preset: Option<String>,
    /// JSON generator spec instead of a preset.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Overrides the preset or spec seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for dev.csv and test.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Explicit dev output path.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    /// Explicit test output path.
    #[arg(long)]
    pub test: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub(crate) struct IdentifyArgs {
    /// Trial file (probe_id,probe_demo,in_gallery,mate_id,gallery_id,score).
    #[arg(long)]
    pub trials: PathBuf,
    /// Ranks n for the closed-set table.
    #[arg(long, default_value = "1,5,10")]
    pub rank: String,
    /// Fixed open-set thresholds.
    #[arg(long, conflicts_with = "grid")]
    pub tau: Option<String>,
    /// Calibrate open-set thresholds to FAR 10^-x on --dev trials.
    #[arg(long, requires = "dev")]
    pub grid: Option<String>,
    /// Calibration trial file for --grid.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    /// Weight of the FAR gap against the DIR gap.
    #[arg(long, default_value_t = fdrkit::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// literal, complement or both.
    #[arg(long, default_value = "both")]
    pub mode: String,
    /// `similarity` (higher is a better match) or `distance`.
    #[arg(long)]
    pub polarity: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of csv,json. A text report is always written.
    #[arg(long)]
    pub format: Option<String>,
}

/// Output formats requested besides the always-written text report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Formats {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let mut f = Formats {
            csv: false,
            json: false,
            svg: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.to_ascii_lowercase().as_str() {
                "csv" => f.csv = true,
                "json" => f.json = true,
                "svg" => f.svg = true,
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown format '{other}' (expected csv, json, svg)"
                    )))
                }
            }
        }
        Ok(f)
    }
}

impl Default for Formats {
    fn default() -> Self {
        Formats {
            csv: true,
            json: true,
            svg: false,
        }
    }
}

/// Fully resolved settings shared by the score-file commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub grid: OperatingPointGrid,
    pub alpha: f64,
    pub epsilon: Option<f64>,
    pub polarity: Polarity,
    pub output_dir: PathBuf,
    pub formats: Formats,
    pub label: Option<String>,
    pub csv: CsvConfig,
}

pub(crate) fn unit(name: &str, v: f64) -> Result<f64, CliError> {
    if !(0.0..=1.0).contains(&v) {
        return Err(CliError::Usage(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(v)
}

fn parse_unit(name: &str, raw: &str) -> Result<f64, CliError> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{name} '{raw}' is not a number")))?;
    unit(name, v)
}

pub(crate) fn parse_grid(raw: &str) -> Result<OperatingPointGrid, CliError> {
    raw.parse()
        .map_err(|e: fdrkit::Error| CliError::Usage(format!("--grid: {e}")))
}

pub(crate) fn parse_polarity(raw: Option<&str>) -> Result<Polarity, CliError> {
    raw.map_or(Ok(Polarity::Similarity), |p| {
        p.parse()
            .map_err(|e: fdrkit::Error| CliError::Usage(format!("--polarity: {e}")))
    })
}

fn delimiter(c: char) -> Result<CsvConfig, CliError> {
    if !c.is_ascii() {
        return Err(CliError::Usage(format!("delimiter '{c}' is not ASCII")));
    }
    Ok(CsvConfig {
        delimiter: c as u8,
        split: None,
    })
}

impl RunConfig {
    /// Merges flags over the config file over defaults.
    pub(crate) fn resolve(
        io: &InputArgs,
        dev: Option<&Path>,
        test: Option<&Path>,
        grid: Option<&str>,
        alpha: Option<f64>,
        epsilon: Option<f64>,
        label: Option<&str>,
    ) -> Result<Self, CliError> {
        let file = match &io.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let pick = |flag: Option<String>, key: &str| flag.or_else(|| file.get(key).map(str::to_owned));

        let alpha = match alpha {
            Some(a) => unit("alpha", a)?,
            None => file
                .get("alpha")
                .map(|a| parse_unit("alpha", a))
                .transpose()?
                .unwrap_or(fdrkit::DEFAULT_ALPHA),
        };
        let epsilon = match epsilon {
            Some(e) => Some(unit("epsilon", e)?),
            None => file.get("epsilon").map(|e| parse_unit("epsilon", e)).transpose()?,
        };
        let grid = parse_grid(&pick(grid.map(str::to_owned), "grid").unwrap_or_else(|| DEFAULT_GRID.into()))?;
        let polarity = parse_polarity(pick(io.polarity.clone(), "polarity").as_deref())?;
        let formats = match pick(io.format.clone(), "format") {
            Some(f) => Formats::parse(&f)?,
            None => Formats::default(),
        };
        Ok(RunConfig {
            dev: dev.map(Path::to_owned).or_else(|| file.get("dev").map(PathBuf::from)),
            test: test.map(Path::to_owned).or_else(|| file.get("test").map(PathBuf::from)),
            grid,
            alpha,
            epsilon,
            polarity,
            output_dir: pick(io.out.as_ref().map(|p| p.display().to_string()), "out")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            formats,
            label: pick(label.map(str::to_owned), "label"),
            csv: delimiter(io.delimiter)?,
        })
    }

    pub(crate) fn load_split(&self) -> Result<SplitDataset, CliError> {
        let dev = self
            .dev
            .as_deref()
            .ok_or_else(|| CliError::Usage("--dev is required".into()))?;
        let test = self
            .test
            .as_deref()
            .ok_or_else(|| CliError::Usage("--test is required".into()))?;
        load_pair(dev, test, self.csv, self.polarity)
    }
}

pub(crate) fn load_pair(
    dev: &Path,
    test: &Path,
    csv: CsvConfig,
    polarity: Polarity,
) -> Result<SplitDataset, CliError> {
    let dev_set = ingest::load_scores(dev, csv, polarity).map_err(CliError::input(dev))?;
    let test_set = ingest::load_scores(test, csv, polarity).map_err(CliError::input(test))?;
    SplitDataset::new(dev_set, test_set).map_err(CliError::input(dev))
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_owned(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_owned(),
        source,
    })
}

pub(crate) fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Parses arguments and runs one command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();

    let result = match &cli.command {
        Command::Evaluate(a) => evaluate::run(a),
        Command::FdrCurve(a) => curve::run(a),
        Command::Det(a) => det::run(a),
        Command::Synth(a) => synth::run(a),
        Command::Identify(a) => identify::run(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            e.exit_code()
        }
    }
}
