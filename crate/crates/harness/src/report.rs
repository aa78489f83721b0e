//! Study reports. `report.json` holds everything a verdict is derived from
//! and nothing that depends on the machine (timings live in `metrics.json`),
//! so two runs of the same config are byte-identical.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use mixedsde_core::grid::fmt_g17;

use crate::config::ExperimentConfig;
use crate::error::{io_err, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Summary of a sample. `level` and `t` locate it within the study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub name: String,
    pub level: Option<usize>,
    pub t: Option<f64>,
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub p90: f64,
    pub min: f64,
    pub max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

/// Type-7 (linear interpolation) sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl Statistic {
    pub fn of(name: &str, level: Option<usize>, t: Option<f64>, values: &[f64]) -> Self {
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        let count = s.len();
        let mean = if count == 0 { f64::NAN } else { s.iter().sum::<f64>() / count as f64 };
        Self {
            name: name.into(),
            level,
            t,
            count,
            mean,
            median: quantile_sorted(&s, 0.5),
            p90: quantile_sorted(&s, 0.9),
            min: s.first().copied().unwrap_or(f64::NAN),
            max: s.last().copied().unwrap_or(f64::NAN),
            std_error: None,
        }
    }

    /// A single number (a fraction, a count) stored as a degenerate sample.
    pub fn scalar(name: &str, value: f64, count: usize) -> Self {
        Self {
            name: name.into(),
            level: None,
            t: None,
            count,
            mean: value,
            median: value,
            p90: value,
            min: value,
            max: value,
            std_error: None,
        }
    }
}

/// Everything needed to re-run one path or case in isolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRef {
    pub index: usize,
    pub seed: u64,
    pub preset: String,
    pub level: Option<usize>,
    pub driver_steps: usize,
    pub reason: String,
    pub replay: String,
}

/// Per-seed values; `values[j]` belongs to `StudyReport::columns[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub index: usize,
    pub seed: u64,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub censored: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub study: String,
    pub preset: String,
    pub master_seed: u64,
    /// The configuration that produced the report (output path blanked).
    pub config: ExperimentConfig,
    pub driver_steps: usize,
    pub seeds: usize,
    pub censored: usize,
    pub statistics: Vec<Statistic>,
    pub verdicts: Vec<Verdict>,
    pub failed_cases: Vec<CaseRef>,
    pub warnings: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<SeedRow>,
}

impl StudyReport {
    pub fn new(cfg: &ExperimentConfig, driver_steps: usize) -> Self {
        let mut config = cfg.clone();
        config.output = Default::default();
        Self {
            study: cfg.kind.as_str().into(),
            preset: cfg.coefficients.label(),
            master_seed: cfg.seed,
            config,
            driver_steps,
            seeds: 0,
            censored: 0,
            statistics: Vec::new(),
            verdicts: Vec::new(),
            failed_cases: Vec::new(),
            warnings: Vec::new(),
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.passed)
    }

    pub fn censoring_rate(&self) -> f64 {
        if self.seeds == 0 {
            0.0
        } else {
            self.censored as f64 / self.seeds as f64
        }
    }

    pub fn statistic(&self, name: &str, level: Option<usize>) -> Option<&Statistic> {
        self.statistics.iter().find(|s| s.name == name && s.level == level)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// `study,statistic,level,t,count,mean,median,p90,min,max,std_error`,
    /// followed by one `verdict` row per verdict.
    pub fn summary_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_g17).unwrap_or_default();
        let mut out = String::from("study,statistic,level,t,count,mean,median,p90,min,max,std_error\n");
        for s in &self.statistics {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                self.study,
                s.name,
                s.level.map(|l| l.to_string()).unwrap_or_default(),
                opt(s.t),
                s.count,
                fmt_g17(s.mean),
                fmt_g17(s.median),
                fmt_g17(s.p90),
                fmt_g17(s.min),
                fmt_g17(s.max),
                opt(s.std_error),
            ));
        }
        for v in &self.verdicts {
            out.push_str(&format!(
                "{},verdict:{},,,,{},,,,,\n",
                self.study,
                v.name,
                if v.passed { "pass" } else { "fail" }
            ));
        }
        out
    }
}

/// Machine-dependent numbers, kept out of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub wall_seconds: f64,
    pub paths: usize,
    pub paths_per_second: f64,
    pub workers: usize,
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(contents.as_bytes()).map_err(io_err(path))
}

pub fn write_outputs(dir: &Path, report: &StudyReport, metrics: &Metrics) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_file(&dir.join("report.json"), &report.to_json()?)?;
    write_file(&dir.join("summary.csv"), &report.summary_csv())?;
    write_file(&dir.join("metrics.json"), &(serde_json::to_string_pretty(metrics)? + "\n"))
}
