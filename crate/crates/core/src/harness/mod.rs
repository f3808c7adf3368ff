//! Seeded experiment runs over the other modules, with CSV rows and a JSON
//! summary per run. Identical configurations produce identical files for any
//! worker count: every trial draws from its own stream and rows are written
//! in trial order.

mod experiments;
mod stats;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::CodeError;
use crate::commsim::CommError;
use crate::descsys::DescError;
use crate::majority::{MajorityError, TournamentMode};
use crate::matmul::MatmulError;

pub use crate::rng::seeded_bits;
pub use experiments::{
    commsim_report, lemma_rows, CodesRow, CommsimReport, CommsimRow, DescsysRow, MajorityRow, MatmulRow,
};
pub use stats::{block_stats, log_log_fit, summarize, summarize_csv, BlockStats, SizeMean, SlopeFit, StatSummary};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no values to summarize")]
    EmptyInput,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Codes(#[from] CodeError),
    #[error(transparent)]
    Descsys(#[from] DescError),
    #[error(transparent)]
    Matmul(#[from] MatmulError),
    #[error(transparent)]
    Majority(#[from] MajorityError),
    #[error(transparent)]
    Commsim(#[from] CommError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    MatmulBench,
    MajorityBench,
    CommsimVerify,
    DescsysCheck,
    CodesCheck,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::MatmulBench => "matmul_bench",
            Experiment::MajorityBench => "majority_bench",
            Experiment::CommsimVerify => "commsim_verify",
            Experiment::DescsysCheck => "descsys_check",
            Experiment::CodesCheck => "codes_check",
        }
    }

    pub const ALL: [Experiment; 5] = [
        Experiment::MatmulBench,
        Experiment::MajorityBench,
        Experiment::CommsimVerify,
        Experiment::DescsysCheck,
        Experiment::CodesCheck,
    ];
}

impl FromStr for Experiment {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s || e.name().replace('_', "-") == s)
            .ok_or_else(|| HarnessError::UnknownExperiment(s.to_string()))
    }
}

fn default_trials() -> u64 {
    1
}

fn default_workers() -> usize {
    1
}

fn default_mode() -> TournamentMode {
    TournamentMode::Corrected
}

fn default_program_len() -> usize {
    12
}

fn default_c_values() -> Vec<u32> {
    (1..=6).collect()
}

/// Everything that determines a run. `workers` changes only the speed.
///
/// Sizes mean: matrix dimension (`matmul_bench`), string length
/// (`majority_bench`), input length `n` (`commsim_verify`), universe string
/// length (`descsys_check`), maximum string length (`codes_check`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub sizes: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub master_seed: u64,
    /// Tournament mode for `majority_bench`.
    #[serde(default = "default_mode")]
    pub mode: TournamentMode,
    /// Program length bound for `descsys_check`.
    #[serde(default = "default_program_len")]
    pub program_len: usize,
    /// Values of `c` for `descsys_check`.
    #[serde(default = "default_c_values")]
    pub c_values: Vec<u32>,
    /// Record wall-clock times; when false the column is written as 0.
    #[serde(default)]
    pub wallclock: bool,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// CSV destination; the summary goes next to it with extension `.summary.json`.
    pub output: PathBuf,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, sizes: Vec<usize>, trials: u64, master_seed: u64, output: PathBuf) -> Self {
        Self {
            experiment,
            sizes,
            trials,
            master_seed,
            mode: default_mode(),
            program_len: default_program_len(),
            c_values: default_c_values(),
            wallclock: false,
            workers: default_workers(),
            output,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn summary_path(&self) -> PathBuf {
        self.output.with_extension("summary.json")
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.sizes.is_empty() {
            return Err(HarnessError::InvalidConfig("sizes is empty".into()));
        }
        let needs_trials =
            matches!(self.experiment, Experiment::MatmulBench | Experiment::MajorityBench | Experiment::DescsysCheck);
        if needs_trials && self.trials == 0 {
            return Err(HarnessError::InvalidConfig("trials must be positive".into()));
        }
        Ok(())
    }
}

/// The JSON summary written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub experiment: Experiment,
    pub master_seed: u64,
    pub trials: u64,
    pub sizes: Vec<usize>,
    pub rows: u64,
    /// Rows violating the property the experiment checks.
    pub failures: u64,
    /// CSV column summarized in `stats`.
    pub measure: String,
    pub stats: StatSummary,
    /// Experiment-specific figures.
    pub details: serde_json::Value,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    pub summary: ExperimentSummary,
}

/// Writes `header` and then `rows` as CSV.
pub fn write_csv_to<W: std::io::Write, T: Serialize>(out: W, rows: &[T], header: &[&str]) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// [`write_csv_to`] a file, creating its directory.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_csv_to(std::fs::File::create(path)?, rows, header)
}

pub(crate) fn pool(workers: usize) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::ThreadPool(e.to_string()))
}

/// Runs the configured experiment and writes its CSV and JSON summary.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    cfg.validate()?;
    let pool = pool(cfg.workers)?;
    let (table, body) = pool.install(|| experiments::dispatch(cfg))?;
    let csv_path = cfg.output.clone();
    match table {
        experiments::Table::Matmul(rows) => write_csv(&csv_path, &rows, MatmulRow::HEADER)?,
        experiments::Table::Majority(rows) => write_csv(&csv_path, &rows, MajorityRow::HEADER)?,
        experiments::Table::Commsim(rows) => write_csv(&csv_path, &rows, CommsimRow::HEADER)?,
        experiments::Table::Descsys(rows) => write_csv(&csv_path, &rows, DescsysRow::HEADER)?,
        experiments::Table::Codes(rows) => write_csv(&csv_path, &rows, CodesRow::HEADER)?,
    }
    let summary = ExperimentSummary {
        experiment: cfg.experiment,
        master_seed: cfg.master_seed,
        trials: cfg.trials,
        sizes: cfg.sizes.clone(),
        rows: body.rows,
        failures: body.failures,
        measure: body.measure.to_string(),
        stats: body.stats,
        details: body.details,
    };
    let summary_path = cfg.summary_path();
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    std::fs::write(&summary_path, text)?;
    Ok(ExperimentOutcome { csv_path, summary_path, summary })
}
