//! Single-path replay: re-solves one seed of a study on one partition.

use mixedsde_core::euler::SolutionPath;

use crate::config::{CoefficientSpec, ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::study::Setup;

#[derive(Debug, Clone)]
pub struct ReplaySpec {
    /// Path seed as recorded in a report (not the master seed).
    pub seed: u64,
    pub level: usize,
    pub preset: String,
    pub hurst: f64,
    pub alpha: f64,
    pub horizon: f64,
    /// Driver grid of the original study; defaults to `level`.
    pub driver_steps: Option<usize>,
    pub truncation: Option<f64>,
}

pub struct Replay {
    pub solution: SolutionPath,
    pub w: mixedsde_core::SamplePath,
    pub bh: mixedsde_core::SamplePath,
}

pub fn replay(spec: &ReplaySpec) -> Result<Replay> {
    let steps = spec.driver_steps.unwrap_or(spec.level);
    let mut cfg: ExperimentConfig = toml::from_str("kind = \"convergence\"").expect("static config");
    cfg.kind = ExperimentKind::Convergence;
    cfg.coefficients = CoefficientSpec { preset: Some(spec.preset.clone()), inline: None };
    cfg.hurst = spec.hurst;
    cfg.alpha = spec.alpha;
    cfg.horizon = spec.horizon;
    cfg.truncation = spec.truncation;
    cfg.levels = vec![spec.level];
    cfg.driver_steps = Some(steps);
    if steps % spec.level != 0 {
        return Err(crate::error::HarnessError::Config(format!(
            "level {} is not a sub-grid of the {steps}-step driver grid",
            spec.level
        )));
    }
    let setup = Setup::new(&cfg, steps)?;
    let (w, bh) = setup.drivers(spec.seed)?;
    let solution = setup.solve(spec.level, &w, &bh)?;
    Ok(Replay { solution, w, bh })
}
