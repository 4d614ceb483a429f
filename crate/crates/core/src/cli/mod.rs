//! `streampca` command line: `run`, `plot` and `generate`.
//!
//! Exit status: 0 on success, 2 for usage or config/schema errors (and
//! malformed summaries given to `plot`), 3 when a dataset cannot be read,
//! 1 for anything else.

pub mod config;
pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;

use crate::harness::{aggregate, run_experiment};
pub use config::{example_config, parse_config, read_config, resolve, ConfigError, FileConfig, Resolved};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_DATASET: i32 = 3;

/// Environment variable holding the default worker count for `run`.
pub const THREADS_ENV: &str = "STREAMPCA_THREADS";

#[derive(Parser, Debug)]
#[command(name = "streampca", version, about = "Streaming PCA benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every grid entry for every trial and write CSV tables, a manifest and a chart.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; results do not depend on this.
        #[arg(long, env = THREADS_ENV)]
        threads: Option<usize>,
        #[arg(long)]
        no_plots: bool,
    },
    /// Draw a chart from a summary.csv written by `run`.
    Plot {
        #[arg(long)]
        summary: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        title: Option<String>,
    },
    /// Write an example synthetic experiment config.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        d: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 200_000)]
        total_points: u64,
        #[arg(long, default_value_t = config::DEFAULT_TRIALS)]
        trials: usize,
    },
}

struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let code = match e {
            ConfigError::Schema { .. } => EXIT_SCHEMA,
            ConfigError::Dataset(_) => EXIT_DATASET,
            ConfigError::Other(_) => EXIT_FAILURE,
        };
        fail(code, e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Run {
            config,
            out,
            threads,
            no_plots,
        } => cmd_run(&config, &out, threads, !no_plots),
        Command::Plot { summary, out, title } => cmd_plot(&summary, &out, title),
        Command::Generate {
            out,
            d,
            k,
            total_points,
            trials,
        } => cmd_generate(&out, d, k, total_points, trials),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| fail(EXIT_FAILURE, format!("cannot create {}: {e}", path.display())))
}

fn write_failed(path: &Path, e: impl std::fmt::Display) -> Failure {
    fail(EXIT_FAILURE, format!("writing {}: {e}", path.display()))
}

fn cmd_run(config_path: &Path, out: &Path, threads: Option<usize>, plots: bool) -> Result<(), Failure> {
    let cfg = read_config(config_path)?;
    let base_dir = config_path.parent().unwrap_or(Path::new("."));
    let resolved = resolve(&cfg, base_dir)?;
    let threads = threads
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    fs::create_dir_all(out).map_err(|e| fail(EXIT_FAILURE, format!("cannot create {}: {e}", out.display())))?;

    let exp = &resolved.experiment;
    info!(
        "running {} configs x {} trials, {} points each, on {threads} threads",
        exp.grid.len(),
        exp.trials,
        exp.total_points
    );
    let records = run_experiment(exp, &resolved.backing, &resolved.reference, threads)
        .map_err(|e| fail(EXIT_FAILURE, e.to_string()))?;
    let summary = aggregate(exp, &records);

    let manifest_path = out.join("manifest.toml");
    let manifest = toml::to_string(&resolved.manifest()).map_err(|e| write_failed(&manifest_path, e))?;
    fs::write(&manifest_path, manifest).map_err(|e| write_failed(&manifest_path, e))?;

    let path = out.join("trials.csv");
    output::write_trials(create(&path)?, &exp.checkpoints, &records).map_err(|e| write_failed(&path, e))?;
    let path = out.join("summary.csv");
    output::write_summary(create(&path)?, &summary).map_err(|e| write_failed(&path, e))?;
    let path = out.join("best.csv");
    output::write_best(create(&path)?, &summary).map_err(|e| write_failed(&path, e))?;
    let path = out.join("comparison.csv");
    output::write_comparisons(create(&path)?, &summary).map_err(|e| write_failed(&path, e))?;

    if plots {
        let title = format!("d = {}, k = {}", resolved.backing.dim(), exp.k);
        let path = out.join("curves.svg");
        match svg::render(&output::summary_rows(&summary), &title) {
            Ok(svg) => fs::write(&path, svg).map_err(|e| write_failed(&path, e))?,
            Err(e) => log::warn!("no chart written: {e}"),
        }
    }

    for c in summary.configs.iter().filter(|c| c.failed_trials > 0) {
        log::warn!("{}: {} of {} trials failed", c.config_id, c.failed_trials, exp.trials);
    }
    for b in &summary.best {
        println!(
            "n={} {:<8} best {:<16} mean {:.6} stderr {:.6}",
            b.checkpoint, b.family, b.config_id, b.mean, b.stderr
        );
    }
    for c in &summary.comparisons {
        if let Some(t) = c.test {
            println!(
                "n={} {} vs {}: p = {:.3e}{}",
                c.checkpoint,
                c.first.family,
                c.second.family,
                t.p_value,
                c.winner().map(|w| format!(", {w} better")).unwrap_or_default()
            );
        }
    }
    Ok(())
}

fn cmd_plot(summary: &Path, out: &Path, title: Option<String>) -> Result<(), Failure> {
    let file = File::open(summary).map_err(|e| fail(EXIT_SCHEMA, format!("cannot read {}: {e}", summary.display())))?;
    let rows = output::read_summary(file).map_err(|e| fail(EXIT_SCHEMA, format!("{}: {e}", summary.display())))?;
    let title = title.unwrap_or_else(|| summary.display().to_string());
    let svg = svg::render(&rows, &title).map_err(|e| fail(EXIT_SCHEMA, format!("{}: {e}", summary.display())))?;
    fs::write(out, svg).map_err(|e| write_failed(out, e))
}

fn cmd_generate(out: &Path, d: usize, k: usize, total_points: u64, trials: usize) -> Result<(), Failure> {
    if !(1..=4).contains(&k) || d < k + 1 {
        return Err(fail(EXIT_SCHEMA, "generate supports 1 <= k <= 4 and d > k"));
    }
    if total_points < 2000 {
        return Err(fail(EXIT_SCHEMA, "total_points must be at least 2000"));
    }
    let cfg = example_config(d, k, total_points, trials);
    resolve(&cfg, Path::new("."))?;
    let text = toml::to_string(&cfg).map_err(|e| write_failed(out, e))?;
    fs::write(out, text).map_err(|e| write_failed(out, e))
}
