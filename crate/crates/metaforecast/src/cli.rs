//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{ExperimentConfig, Method, ModelKind};
use crate::error::{HarnessError, Result};
use crate::experiment::{run_cell, run_matrix, RunRecord};
use crate::fitness::Workers;
use crate::pipeline::{load_and_prepare, Prepared};
use crate::report::{append_record, emit_reports, read_records, summary};
use crate::synth::{self, SyntheticSpec};
use crate::weather_csv::{format_stamp, parse_date, write_table_csv};
use crate::selftest;

#[derive(Debug, Parser)]
#[command(name = "metaforecast", version, about = "Metaheuristic hyperparameter search for weather forecasters")]
pub struct Cli {
    /// Experiment file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Trials per cell, overriding the config.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Use the built-in generator instead of a CSV file. Without --config
    /// this selects the small synthetic preset.
    #[arg(long, global = true)]
    pub synthetic: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, clean and split the data; write the cleaned splits.
    Prepare,
    /// Search one model with one optimizer.
    Tune {
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        optimizer: Method,
        #[arg(long, default_value_t = 1)]
        trial: usize,
    },
    /// Run every optimizer and the manual baseline on every model.
    Matrix,
    /// Rewrite the report files from a records log.
    Report {
        /// Defaults to `<out>/records.jsonl`.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Check core invariants on synthetic data.
    Selftest,
    /// Write a synthetic CSV in the loader's format.
    Synth {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 30)]
        days: usize,
        #[arg(long, default_value = "2020-01-01")]
        start: String,
        /// Fraction of precipitation cells left blank.
        #[arg(long, default_value_t = 0.0)]
        blank_precipitation: f64,
        /// Fraction of temperature cells left blank.
        #[arg(long, default_value_t = 0.0)]
        blank_temperature: f64,
    },
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.exit_code() == 1 {
                eprintln!("usage: metaforecast [--config <path> | --synthetic] <prepare|tune|matrix|report|selftest|synth> ...");
            }
            e.exit_code()
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match (&cli.config, cli.synthetic) {
        (Some(path), _) => {
            if !path.is_file() {
                return Err(HarnessError::Usage(format!("config file {} not found", path.display())));
            }
            let mut cfg = ExperimentConfig::load(path)?;
            if cli.synthetic && cfg.data.synthetic.is_none() {
                cfg.data.synthetic = Some(SyntheticSpec::default());
            }
            cfg
        }
        (None, true) => ExperimentConfig::desk(),
        (None, false) => return Err(HarnessError::Usage("pass --config <path> or --synthetic".into())),
    };
    if cli.synthetic {
        cfg.data.path = None;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Write { path: dir.into(), source })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    fs::write(path, text + "\n").map_err(|source| HarnessError::Write { path: path.into(), source })
}

fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Prepare => prepare(&resolve_config(cli)?),
        Command::Tune { model, optimizer, trial } => tune(&resolve_config(cli)?, *model, *optimizer, *trial),
        Command::Matrix => matrix(&resolve_config(cli)?),
        Command::Report { records } => {
            let out = match (&cli.out, &cli.config) {
                (Some(o), _) => o.clone(),
                (None, Some(_)) => resolve_config(cli)?.output_dir,
                (None, None) => PathBuf::from("results"),
            };
            let path = records.clone().unwrap_or_else(|| out.join("records.jsonl"));
            let records = read_records(&path)?;
            let files = emit_reports(&records, &out)?;
            print!("{}", summary(&records));
            println!("{} records reported to {}", records.len(), files.records.parent().unwrap().display());
            Ok(0)
        }
        Command::Selftest => {
            let ok = selftest::run(|line| println!("{line}"));
            Ok(if ok { 0 } else { 3 })
        }
        Command::Synth { output, days, start, blank_precipitation, blank_temperature } => {
            let date = parse_date(start).ok_or_else(|| HarnessError::Usage(format!("bad --start `{start}`")))?;
            if *days == 0 {
                return Err(HarnessError::Usage("--days must be positive".into()));
            }
            let seed = cli.seed.unwrap_or(0);
            let spec = SyntheticSpec { days: *days, start: start.clone(), ..SyntheticSpec::default() };
            let mut table = synth::generate(&spec, date, seed);
            if *blank_precipitation > 0.0 {
                table = synth::punch_holes(&table, "precipitation", *blank_precipitation, seed ^ 1);
            }
            if *blank_temperature > 0.0 {
                table = synth::punch_holes(&table, "temperature", *blank_temperature, seed ^ 2);
            }
            write_table_csv(&table, output)?;
            println!("wrote {} rows to {}", table.len(), output.display());
            Ok(0)
        }
    }
}

#[derive(Serialize)]
struct PrepareSummary<'a> {
    config_hash: String,
    columns: &'a [String],
    dropped_columns: &'a [String],
    filled_cells: usize,
    rows: [usize; 3],
    windows: [usize; 3],
    first_hour: [String; 3],
    scaler_mean: &'a [f64],
    scaler_std: &'a [f64],
}

fn prepare(cfg: &ExperimentConfig) -> Result<i32> {
    let p = load_and_prepare(cfg)?;
    let dir = cfg.output_dir.join("prepared");
    create_dir(&dir)?;
    let splits = [&p.splits.train, &p.splits.validation, &p.splits.test];
    for (name, table) in ["train", "validation", "test"].iter().zip(splits) {
        write_table_csv(table, &dir.join(format!("{name}.csv")))?;
    }
    let s = PrepareSummary {
        config_hash: cfg.hash(),
        columns: p.columns(),
        dropped_columns: &p.dropped_columns,
        filled_cells: p.filled_cells,
        rows: splits.map(|t| t.len()),
        windows: [p.train.len(), p.validation.len(), p.test.len()],
        first_hour: splits.map(|t| format_stamp(t.timestamps()[0])),
        scaler_mean: p.scaler.mean(),
        scaler_std: p.scaler.std(),
    };
    write_json(&dir.join("summary.json"), &s)?;
    println!(
        "rows train/validation/test: {}/{}/{}; features: {}; dropped: [{}]; filled cells: {}",
        s.rows[0],
        s.rows[1],
        s.rows[2],
        p.features(),
        p.dropped_columns.join(", "),
        p.filled_cells
    );
    println!("wrote {}", dir.display());
    Ok(0)
}

fn describe(r: &RunRecord) -> String {
    let params: Vec<String> = r.best_hyperparameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
    match (&r.error, r.test_mape) {
        (None, Some(mape)) => format!(
            "{} {} trial {}: {} | validation {:.6} | test MSE {:.4} MAPE {:.3}% | {} evaluations, {:.1}s",
            r.metaheuristic,
            r.model,
            r.trial,
            params.join(" "),
            r.validation_fitness.unwrap_or(f64::NAN),
            r.test_mse.unwrap_or(f64::NAN),
            mape,
            r.evaluations,
            r.duration_secs
        ),
        (err, _) => format!(
            "{} {} trial {}: FAILED ({})",
            r.metaheuristic,
            r.model,
            r.trial,
            err.as_deref().unwrap_or("no metrics")
        ),
    }
}

fn prepared_for(cfg: &ExperimentConfig) -> Result<Prepared> {
    let p = load_and_prepare(cfg)?;
    if p.train.is_empty() || p.validation.is_empty() || p.test.is_empty() {
        return Err(HarnessError::Run("a split has no complete window".into()));
    }
    Ok(p)
}

fn tune(cfg: &ExperimentConfig, model: ModelKind, method: Method, trial: usize) -> Result<i32> {
    if trial == 0 {
        return Err(HarnessError::Usage("--trial counts from 1".into()));
    }
    let p = prepared_for(cfg)?;
    let record = run_cell(cfg, &p, method, model, trial, &Workers::new(cfg.worker_count()));
    println!("{}", describe(&record));
    create_dir(&cfg.output_dir)?;
    let stem = format!("tune_{method}_{model}");
    write_json(&cfg.output_dir.join(format!("{stem}.json")), &record)?;
    if let Some(blob) = &record.parameters_blob {
        let path = cfg.output_dir.join(format!("{stem}.mfnn"));
        fs::write(&path, blob).map_err(|source| HarnessError::Write { path, source })?;
    }
    append_record(&record, &cfg.output_dir.join("records.jsonl"))?;
    Ok(if record.completed() { 0 } else { 3 })
}

fn matrix(cfg: &ExperimentConfig) -> Result<i32> {
    let p = prepared_for(cfg)?;
    let records = run_matrix(cfg, &p, |r| println!("{}", describe(r)));
    let files = emit_reports(&records, &cfg.output_dir)?;
    print!("{}", summary(&records));
    let failed = records.iter().filter(|r| !r.completed()).count();
    println!("{} records ({} failed) written to {}", records.len(), failed, files.records.parent().unwrap().display());
    Ok(if failed == records.len() { 3 } else { 0 })
}
