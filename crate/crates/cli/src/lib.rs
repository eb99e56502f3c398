//! Argument parsing and command dispatch for the `laborcast` binary.
//!
//! Exit codes: 0 success, 1 usage error (bad flags or config file),
//! 2 data error (unreadable or invalid input files), 3 numerical failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use laborcast::dataio::{join_target, parse_dataset, parse_target, reference_dataset, REFERENCE_TARGET};
use laborcast::pipeline::{grid_to_delimited, parse_delimited, rank_features, render_report, run_benchmark};
use laborcast::{BenchmarkGrid, Dataset, Error, FeatureCatalog, ReportFormat, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "laborcast", version, about = "Benchmark regressors and scalers on monthly labor-market indicators")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Args, Clone, Default, PartialEq, Eq)]
pub struct Inputs {
    /// Indicator file; defaults to the bundled 48-month panel.
    #[arg(long, value_name = "PATH")]
    pub features: Option<PathBuf>,
    /// Unemployment-rate file (`date,unemployment_rate`); defaults to the bundled series.
    #[arg(long, value_name = "PATH")]
    pub target: Option<PathBuf>,
}

/// Flags that override keys of the run configuration.
#[derive(Debug, Args, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Months ahead the target is taken from.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Give every model all columns instead of the top-k.
    #[arg(long)]
    pub all_features: bool,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Parse, validate and summarize the input files.
    Ingest {
        #[command(flatten)]
        inputs: Inputs,
        /// Write the imputed panel here.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Rank indicators by booster gain on the training block and print the top k.
    SelectFeatures {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 20)]
        k: usize,
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Run the full model by scaler grid and write its artifacts.
    Benchmark {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value = "table", value_parser = parse_format)]
        format: ReportFormat,
    },
    /// Re-render a stored grid file.
    Report {
        grid: PathBuf,
        #[arg(long, default_value = "table", value_parser = parse_format)]
        format: ReportFormat,
    },
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|_| format!("expected `table` or `delimited`, got `{s}`"))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Ingest { inputs: Inputs, out: Option<PathBuf> },
    SelectFeatures { inputs: Inputs, k: usize, config: Option<PathBuf>, seed: Option<u64>, horizon: Option<usize> },
    Benchmark { inputs: Inputs, config: PathBuf, out: PathBuf, k: Option<usize>, overrides: Overrides, format: ReportFormat },
    Report { grid: PathBuf, format: ReportFormat },
}

#[derive(Debug)]
pub enum CliError {
    /// Rendered clap output plus the exit code it maps to (0 for help and version).
    Clap(clap::Error),
    Usage(String),
    Run(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Clap(e) if !e.use_stderr() => EXIT_OK,
            CliError::Clap(_) | CliError::Usage(_) => EXIT_USAGE,
            CliError::Run(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Run(_) => EXIT_DATA,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Clap(e) => write!(f, "{}", e.render()),
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Run(e) => {
                write!(f, "error: {e}")?;
                let mut src = std::error::Error::source(e);
                while let Some(s) = src {
                    write!(f, "\n  caused by: {s}")?;
                    src = s.source();
                }
                Ok(())
            }
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

pub fn parse_args<I, S>(argv: I) -> Result<Command, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Clap)?;
    let cmd = match cli.command {
        Sub::Ingest { inputs, out } => Command::Ingest { inputs, out },
        Sub::SelectFeatures { inputs, k, config, seed, horizon } => {
            if k == 0 {
                return Err(CliError::Usage("--k must be at least 1".into()));
            }
            Command::SelectFeatures { inputs, k, config, seed, horizon }
        }
        Sub::Benchmark { inputs, config, out, k, overrides, format } => {
            if k == Some(0) {
                return Err(CliError::Usage("--k must be at least 1".into()));
            }
            Command::Benchmark { inputs, config, out, k, overrides, format }
        }
        Sub::Report { grid, format } => Command::Report { grid, format },
    };
    Ok(cmd)
}

/// Parses `argv`, runs the command, and returns the process exit code.
pub fn main_with(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = parse_args(argv).and_then(|cmd| run(&cmd, out, err));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let code = e.exit_code();
            let sink: &mut dyn Write = if code == EXIT_OK { out } else { err };
            let text = e.to_string();
            let _ = if text.ends_with('\n') { write!(sink, "{text}") } else { writeln!(sink, "{text}") };
            code
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Run(Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Run(Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))))
}

pub fn load_inputs(inputs: &Inputs) -> Result<Dataset, CliError> {
    let ds = match &inputs.features {
        Some(p) => parse_dataset(&read(p)?, &FeatureCatalog::reference())?,
        None => reference_dataset(),
    };
    let target = match &inputs.target {
        Some(p) => parse_target(&read(p)?)?,
        None => parse_target(REFERENCE_TARGET)?,
    };
    Ok(join_target(&ds, &target)?)
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            RunConfig::parse(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))
        }
    }
}

pub fn run(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Ingest { inputs, out: dir } => ingest(inputs, dir.as_deref(), out),
        Command::SelectFeatures { inputs, k, config, seed, horizon } => {
            let mut cfg = load_config(config.as_deref())?;
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.horizon = horizon.unwrap_or(cfg.horizon);
            select(inputs, *k, &cfg, out)
        }
        Command::Benchmark { inputs, config, out: dir, k, overrides, format } => {
            let mut cfg = load_config(Some(config))?;
            cfg.seed = overrides.seed.unwrap_or(cfg.seed);
            cfg.horizon = overrides.horizon.unwrap_or(cfg.horizon);
            cfg.top_k = k.unwrap_or(cfg.top_k);
            cfg.all_features |= overrides.all_features;
            cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            benchmark(inputs, &cfg, dir, *format, out, err)
        }
        Command::Report { grid, format } => {
            let grid: BenchmarkGrid = parse_delimited(&read(grid)?)?;
            write!(out, "{}", render_report(&grid, *format)?).map_err(Error::from)?;
            Ok(())
        }
    }
}

fn ingest(inputs: &Inputs, dir: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let ds = load_inputs(inputs)?;
    let imputed = ds.impute()?;
    let dates = ds.dates();
    writeln!(out, "rows {}", ds.n_rows()).map_err(Error::from)?;
    writeln!(out, "features {}", ds.n_cols()).map_err(Error::from)?;
    writeln!(out, "range {} .. {}", dates[0], dates[dates.len() - 1]).map_err(Error::from)?;
    writeln!(out, "missing {}", ds.missing_count()).map_err(Error::from)?;
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(Error::from)?;
        write_file(&dir.join("indicators.csv"), &imputed.to_delimited())?;
    }
    Ok(())
}

fn select(inputs: &Inputs, k: usize, cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let ds = load_inputs(inputs)?.shift_target(cfg.horizon)?;
    let b = cfg.split.boundary_index(ds.n_rows())?;
    let train = ds.slice_rows(0, b).impute()?;
    let sel_cfg = laborcast::trees::BoostConfig { seed: laborcast::seed::derive(cfg.seed, "select", &[]), ..cfg.cat.clone() };
    let ranking = rank_features(&train, k, &sel_cfg).map_err(|e| match e {
        Error::Config(m) => CliError::Usage(m),
        other => CliError::Run(other),
    })?;
    for (code, share) in ranking.entries().iter().take(k) {
        writeln!(out, "{code}\t{share:.6}").map_err(Error::from)?;
    }
    Ok(())
}

fn benchmark(
    inputs: &Inputs,
    cfg: &RunConfig,
    dir: &Path,
    format: ReportFormat,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let ds = load_inputs(inputs)?;
    let run = run_benchmark(&ds, cfg)?;
    fs::create_dir_all(dir).map_err(Error::from)?;
    let report = render_report(&run.grid, ReportFormat::Table)?;
    write_file(&dir.join("grid.csv"), &grid_to_delimited(&run.grid))?;
    write_file(&dir.join("report.txt"), &report)?;
    write_file(&dir.join("config.txt"), &cfg.to_text())?;

    let mut selection = String::new();
    match &run.ranking {
        Some(r) => r.entries().iter().take(run.selected.len()).for_each(|(c, s)| selection.push_str(&format!("{c}\t{s:.6}\n"))),
        None => run.selected.iter().for_each(|c| selection.push_str(&format!("{c}\n"))),
    }
    write_file(&dir.join("selection.txt"), &selection)?;

    let mut audit = format!("train {} .. {} ({} rows)\n", run.train_dates[0], run.train_dates[run.train_dates.len() - 1], run.train_dates.len());
    audit.push_str(&format!("test {} .. {} ({} rows)\n", run.test_dates[0], run.test_dates[run.test_dates.len() - 1], run.test_dates.len()));
    // Scaler statistics depend only on the training block, so one model row suffices.
    for cell in run.cells.iter().filter(|c| c.model == laborcast::ModelKind::ALL[0]) {
        audit.push('\n');
        audit.push_str(&cell.fitted_scaler.audit_text(&run.selected));
    }
    write_file(&dir.join("scalers.txt"), &audit)?;

    for w in run.warnings() {
        writeln!(err, "warning: {w}").map_err(Error::from)?;
    }
    let shown = match format {
        ReportFormat::Table => report,
        ReportFormat::Delimited => render_report(&run.grid, format)?,
    };
    write!(out, "{shown}").map_err(Error::from)?;
    Ok(())
}
