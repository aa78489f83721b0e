//! Experiment harness: declarative configs, deterministic parallel studies
//! and CSV/JSON reports on top of `mixedsde-core`.

pub mod bihari_eval;
pub mod config;
pub mod error;
pub mod replay;
pub mod report;
pub mod study;

use std::path::Path;
use std::time::Instant;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{HarnessError, Result};
pub use report::{Metrics, StudyReport};

use study::DumpOptions;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Write every solved path below `<output>/paths`.
    pub dump_paths: bool,
    /// Rayon worker count; `None` uses the global pool.
    pub workers: Option<usize>,
}

/// Runs the experiment without writing anything except `audit.csv` /
/// dumped paths into `out_dir` when given.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions, out_dir: Option<&Path>) -> Result<(StudyReport, Metrics)> {
    cfg.validate()?;
    let dump = DumpOptions { dir: out_dir.filter(|_| opts.dump_paths).map(|d| d.join("paths")) };
    let audit_csv = out_dir.map(|d| d.join("audit.csv"));
    if let Some(d) = out_dir {
        std::fs::create_dir_all(d).map_err(error::io_err(d))?;
    }
    let body = || -> Result<StudyReport> {
        match cfg.kind {
            ExperimentKind::Convergence => study::run_convergence_study(cfg, &dump),
            ExperimentKind::Uniqueness => study::run_uniqueness_probe(cfg, &dump),
            ExperimentKind::Moment => study::run_moment_study(cfg, &dump),
            ExperimentKind::Audit => study::run_audit_suite(cfg, audit_csv.as_deref()),
            ExperimentKind::BihariEval => bihari_eval::evaluate(cfg.bihari.as_ref().expect("validated"), Some(cfg)),
        }
    };
    let start = Instant::now();
    let (report, workers) = match opts.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            (pool.install(body)?, n)
        }
        None => (body()?, rayon::current_num_threads()),
    };
    let wall = start.elapsed().as_secs_f64();
    let metrics = Metrics {
        wall_seconds: wall,
        paths: report.seeds,
        paths_per_second: if wall > 0.0 { report.seeds as f64 / wall } else { 0.0 },
        workers,
    };
    Ok((report, metrics))
}

/// Runs and writes `report.json`, `summary.csv` and `metrics.json` into the
/// configured output directory (or `out_dir`).
pub fn run_and_write(cfg: &ExperimentConfig, opts: &RunOptions, out_dir: Option<&Path>) -> Result<StudyReport> {
    let dir = out_dir.unwrap_or(&cfg.output).to_path_buf();
    let (report, metrics) = run_experiment(cfg, opts, Some(&dir))?;
    report::write_outputs(&dir, &report, &metrics)?;
    Ok(report)
}
