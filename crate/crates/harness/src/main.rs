use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mixedsde::bihari_eval::{bounds_csv, evaluate};
use mixedsde::config::{self, BihariSpec, ExperimentConfig};
use mixedsde::replay::{replay, ReplaySpec};
use mixedsde::report::{write_file, write_outputs, Metrics};
use mixedsde::{run_and_write, RunOptions};

/// Simulation studies for SDEs driven by Brownian and fractional Brownian
/// motion. Exit status: 0 when every verdict passes, 1 when one fails,
/// 2 on errors.
#[derive(Parser)]
#[command(name = "mixedsde", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML or JSON config.
    Run {
        config: PathBuf,
        /// Write every solved path as CSV below `<output>/paths`.
        #[arg(long)]
        dump_paths: bool,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory, overriding the config's `output`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Re-solve one path of a study and print it as CSV.
    Replay {
        /// Path seed as recorded in report.json.
        #[arg(long)]
        seed: u64,
        /// Partition size (steps).
        #[arg(long)]
        level: usize,
        #[arg(long)]
        preset: String,
        #[arg(long, default_value_t = 0.75)]
        hurst: f64,
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        /// Driver grid of the original study (defaults to --level).
        #[arg(long)]
        driver_steps: Option<usize>,
        #[arg(long)]
        truncation: Option<f64>,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the Bihari bound for a TOML or JSON parameter file.
    BihariEval {
        params: PathBuf,
        /// Also write report.json, summary.csv and bounds.csv here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> mixedsde::Result<bool> {
    match cli.command {
        Command::Run { config, dump_paths, workers, output } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let report = run_and_write(&cfg, &RunOptions { dump_paths, workers }, output.as_deref())?;
            let dir = output.unwrap_or(cfg.output.clone());
            for v in &report.verdicts {
                println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
            }
            for c in &report.failed_cases {
                eprintln!("failed case {} (seed {}): {}\n  replay: {}", c.index, c.seed, c.reason, c.replay);
            }
            println!("wrote {}", dir.display());
            Ok(report.passed())
        }
        Command::Replay { seed, level, preset, hurst, alpha, horizon, driver_steps, truncation, out } => {
            let r = replay(&ReplaySpec { seed, level, preset, hurst, alpha, horizon, driver_steps, truncation })?;
            let text = r.solution.to_csv_string();
            match out {
                Some(p) => write_file(&p, &text)?,
                None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| mixedsde::HarnessError::Io {
                    path: "<stdout>".into(),
                    source: e,
                })?,
            }
            Ok(true)
        }
        Command::BihariEval { params, output } => {
            let spec: BihariSpec = config::load(&params)?;
            let report = evaluate(&spec, None)?;
            print!("{}", bounds_csv(&report));
            for v in &report.verdicts {
                eprintln!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
            }
            if let Some(dir) = output {
                let metrics = Metrics { wall_seconds: 0.0, paths: 0, paths_per_second: 0.0, workers: 1 };
                write_outputs(&dir, &report, &metrics)?;
                write_file(&dir.join("bounds.csv"), &bounds_csv(&report))?;
            }
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
