//! Declarative experiment configuration, read from TOML or JSON.
//!
//! ```toml
//! kind = "convergence"          # convergence | uniqueness | moment | audit | bihari-eval
//! hurst = 0.75
//! alpha = 0.3
//! levels = [64, 128, 256, 512, 1024]
//! ensemble = 200
//! seed = 2024
//! output = "out/convergence"
//!
//! [coefficients]
//! preset = "linear"             # or an [coefficients.inline] table
//! ```
//!
//! Every field except `kind` has a default; see [`ExperimentConfig`].

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use mixedsde_core::coefficients::{preset, CoefficientSet, Dims, ModulusOfContinuity};
use mixedsde_core::drivers::HurstParameter;
use mixedsde_core::frac::FracOrder;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Convergence,
    Uniqueness,
    Moment,
    Audit,
    BihariEval,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Convergence => "convergence",
            Self::Uniqueness => "uniqueness",
            Self::Moment => "moment",
            Self::Audit => "audit",
            Self::BihariEval => "bihari-eval",
        }
    }
}

/// Scalar coefficients `b(x) = d₀ + d₁x`, `σ_W = s`, `σ_H(x) = h₀ + h₁ sin x`.
/// `K` and the (linear) modulus are derived from the numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineCoefficients {
    pub drift: [f64; 2],
    pub sigma_w: f64,
    pub sigma_h: [f64; 2],
    #[serde(default = "default_x0")]
    pub x0: f64,
}

fn default_x0() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inline: Option<InlineCoefficients>,
}

impl Default for CoefficientSpec {
    fn default() -> Self {
        Self { preset: Some("linear".into()), inline: None }
    }
}

impl CoefficientSpec {
    pub fn label(&self) -> String {
        match (&self.preset, &self.inline) {
            (Some(p), _) => p.clone(),
            (None, Some(_)) => "inline".into(),
            (None, None) => "none".into(),
        }
    }

    /// Coefficient set and default initial state.
    pub fn build(&self) -> Result<(CoefficientSet, Vec<f64>)> {
        match (&self.preset, &self.inline) {
            (Some(name), None) => {
                let p = preset(name)?;
                Ok((p.coefficients, p.x0))
            }
            (None, Some(c)) => Ok((inline_set(c)?, vec![c.x0])),
            _ => Err(HarnessError::Config("coefficients need exactly one of `preset` or `inline`".into())),
        }
    }
}

fn inline_set(c: &InlineCoefficients) -> Result<CoefficientSet> {
    let [d0, d1] = c.drift;
    let s = c.sigma_w;
    let [h0, h1] = c.sigma_h;
    if ![d0, d1, s, h0, h1].iter().all(|v| v.is_finite()) {
        return Err(HarnessError::Config("inline coefficients must be finite".into()));
    }
    let k = [d0.abs(), d1.abs(), s.abs(), h0.abs() + h1.abs()].into_iter().fold(f64::MIN_POSITIVE, f64::max);
    let modulus = ModulusOfContinuity::linear(2.0, (d1 * d1).max(f64::MIN_POSITIVE))?;
    Ok(CoefficientSet::new(
        "inline",
        Dims::scalar(),
        move |_, x, o| o[0] = d0 + d1 * x[0],
        move |_, _, o| o[0] = s,
        move |_, x, o| o[0] = h0 + h1 * x[0].sin(),
        k,
        1.0,
        modulus,
    )?
    .with_dsigma_h(move |_, x, o| o[0] = h1 * x[0].cos()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UniquenessOptions {
    /// Second partition family, as long as `levels`; empty means
    /// `3/2 × levels` (each level must then be even).
    pub alt_levels: Vec<usize>,
    /// Fraction of seeds whose final cross distance must fall below the
    /// coarsest Cauchy gap.
    pub pass_fraction: f64,
    /// Re-run with the bitwise-complemented master seed and require the same
    /// verdict.
    pub flipped_seed_check: bool,
}

impl Default for UniquenessOptions {
    fn default() -> Self {
        Self { alt_levels: Vec::new(), pass_fraction: 0.9, flipped_seed_check: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentOptions {
    pub order: u32,
    pub times: Vec<f64>,
}

impl Default for MomentOptions {
    fn default() -> Self {
        Self { order: 1, times: vec![0.25, 0.5, 0.75, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditOptions {
    pub cases: usize,
    pub nodes: usize,
    /// Cases with an identically zero integrand (appended after `cases`).
    pub zero_cases: usize,
    pub threshold: f64,
    /// Range of the per-case `α`; defaults to just inside `(1 - H, 1/2)`.
    pub alpha_range: Option<[f64; 2]>,
    /// Range of the integrand's Hurst index.
    pub integrand_hurst: [f64; 2],
    /// Cases re-audited on the half grid for refinement stability (capped
    /// at `cases`).
    pub stability_cases: usize,
    pub stability_tolerance: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            cases: 100,
            nodes: 4096,
            zero_cases: 0,
            threshold: 1.05,
            alpha_range: None,
            integrand_hurst: [0.55, 0.95],
            stability_cases: 100,
            stability_tolerance: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "kind")]
pub enum ModulusSpec {
    Rho1 { q: Option<f64>, delta: f64 },
    Rho2 { q: Option<f64>, delta: f64 },
    Linear { q: Option<f64>, scale: f64 },
    Identity { q: Option<f64> },
}

impl ModulusSpec {
    /// Builds the modulus, defaulting its `q` to `q`.
    pub fn build(&self, q: f64) -> Result<ModulusOfContinuity> {
        Ok(match *self {
            Self::Rho1 { q: mq, delta } => ModulusOfContinuity::rho1(mq.unwrap_or(q), delta)?,
            Self::Rho2 { q: mq, delta } => ModulusOfContinuity::rho2(mq.unwrap_or(q), delta)?,
            Self::Linear { q: mq, scale } => ModulusOfContinuity::linear(mq.unwrap_or(q), scale)?,
            Self::Identity { q: mq } => ModulusOfContinuity::identity(mq.unwrap_or(q))?,
        })
    }
}

/// Parameters of one Bihari bound evaluation (`mixedsde bihari-eval`, or
/// the `[bihari]` table of a `bihari-eval` experiment).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BihariSpec {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub p: f64,
    /// Defaults to the conjugate exponent of `p`.
    #[serde(default)]
    pub q: Option<f64>,
    pub modulus: ModulusSpec,
    /// Evaluation times.
    pub t: Vec<f64>,
    /// Decades `k = 1..=divergence_decades` for the divergence diagnostic.
    #[serde(default = "default_decades")]
    pub divergence_decades: u32,
}

fn default_decades() -> u32 {
    12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub coefficients: CoefficientSpec,
    /// Overrides the preset's initial state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "default_hurst")]
    pub hurst: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Partition sizes (number of steps), strictly increasing.
    #[serde(default = "default_levels")]
    pub levels: Vec<usize>,
    /// Steps of the common driver grid; defaults to the least common multiple
    /// of all partitions the study solves on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub driver_steps: Option<usize>,
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    #[serde(default)]
    pub seed: u64,
    /// Truncation level `R` of the driver norm; `None` solves untruncated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Skip the `1 - H < α < min(β, 1/2)` admissibility check.
    #[serde(default)]
    pub allow_inadmissible: bool,
    /// Largest tolerated fraction of censored seeds.
    #[serde(default = "default_max_censoring")]
    pub max_censoring: f64,
    #[serde(default)]
    pub uniqueness: UniquenessOptions,
    #[serde(default)]
    pub moment: MomentOptions,
    #[serde(default)]
    pub audit: AuditOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bihari: Option<BihariSpec>,
}

fn default_hurst() -> f64 {
    0.75
}
fn default_alpha() -> f64 {
    0.3
}
fn default_mu() -> f64 {
    0.5
}
fn default_horizon() -> f64 {
    1.0
}
fn default_levels() -> Vec<usize> {
    vec![64, 128, 256, 512, 1024]
}
fn default_ensemble() -> usize {
    200
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn default_max_censoring() -> f64 {
    0.2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    /// From the extension; anything but `.json` is read as TOML.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Self::Json,
            _ => Self::Toml,
        }
    }
}

pub fn parse_str<T: DeserializeOwned>(text: &str, format: Format) -> Result<T> {
    match format {
        Format::Json => serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("JSON: {e}"))),
        Format::Toml => toml::from_str(text).map_err(|e| HarnessError::Config(format!("TOML: {e}"))),
    }
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::Io { path: path.to_path_buf(), source: e })?;
    parse_str(&text, Format::from_path(path))
}

fn strictly_increasing(v: &[usize]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let cfg: Self = load(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_str(text: &str, format: Format) -> Result<Self> {
        let cfg: Self = parse_str(text, format)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn frac_order(&self, beta: f64) -> Result<FracOrder> {
        Ok(FracOrder::new(self.alpha, HurstParameter::new(self.hurst)?, beta, self.mu)?)
    }

    /// Second partition family of a uniqueness probe.
    pub fn alt_levels(&self) -> Vec<usize> {
        if self.uniqueness.alt_levels.is_empty() {
            self.levels.iter().map(|n| n / 2 * 3).collect()
        } else {
            self.uniqueness.alt_levels.clone()
        }
    }

    /// Partitions the study solves on, in the order they are used.
    pub fn partitions(&self) -> Vec<usize> {
        match self.kind {
            ExperimentKind::Convergence => {
                let mut v = self.levels.clone();
                if let Some(&last) = self.levels.last() {
                    v.push(2 * last);
                }
                v
            }
            ExperimentKind::Uniqueness => {
                let mut v = self.levels.clone();
                v.extend(self.alt_levels());
                v
            }
            ExperimentKind::Moment => self.levels.last().copied().into_iter().collect(),
            ExperimentKind::Audit | ExperimentKind::BihariEval => Vec::new(),
        }
    }

    pub fn driver_steps(&self) -> usize {
        self.driver_steps.unwrap_or_else(|| self.partitions().into_iter().fold(1, lcm))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.kind == ExperimentKind::BihariEval {
            return match &self.bihari {
                Some(_) => Ok(()),
                None => bad("a bihari-eval experiment needs a [bihari] table".into()),
            };
        }
        if self.ensemble == 0 {
            return bad("ensemble must be >= 1".into());
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be > 0, got {}", self.horizon));
        }
        if !(0.0..=1.0).contains(&self.max_censoring) {
            return bad(format!("max_censoring must lie in [0, 1], got {}", self.max_censoring));
        }
        if let Some(r) = self.truncation {
            if !(r > 0.0) {
                return bad(format!("truncation R must be > 0, got {r}"));
            }
        }
        if self.levels.is_empty() || self.levels.contains(&0) {
            return bad("levels must be nonempty and positive".into());
        }
        if !strictly_increasing(&self.levels) {
            return bad(format!("levels must be strictly increasing, got {:?}", self.levels));
        }
        let (cs, x0) = self.coefficients.build()?;
        let x0 = self.x0.clone().unwrap_or(x0);
        if x0.len() != cs.dims().n {
            return bad(format!("x0 has length {}, the coefficients expect {}", x0.len(), cs.dims().n));
        }
        let fo = self.frac_order(cs.beta)?;
        if !self.allow_inadmissible && self.kind != ExperimentKind::Audit {
            fo.check_sde_admissible()?;
        }
        match self.kind {
            ExperimentKind::Convergence if self.levels.len() < 3 => {
                return bad("a convergence study needs at least 3 levels".into())
            }
            ExperimentKind::Uniqueness => {
                if self.uniqueness.alt_levels.is_empty() && self.levels.iter().any(|n| n % 2 != 0) {
                    return bad("default uniqueness.alt_levels (3/2 × levels) needs even levels".into());
                }
                let alt = &self.alt_levels();
                if self.levels.len() < 2 || alt.len() != self.levels.len() || alt.contains(&0) || !strictly_increasing(alt) {
                    return bad(format!(
                        "uniqueness.alt_levels must be positive, strictly increasing and as long as levels (at least 2); got {alt:?}"
                    ));
                }
                if !(self.uniqueness.pass_fraction > 0.0 && self.uniqueness.pass_fraction <= 1.0) {
                    return bad("uniqueness.pass_fraction must lie in (0, 1]".into());
                }
            }
            ExperimentKind::Moment => {
                if self.moment.order == 0 || self.moment.times.is_empty() {
                    return bad("moment needs order >= 1 and at least one time".into());
                }
                if let Some(t) = self.moment.times.iter().find(|&&t| !(t >= 0.0 && t <= self.horizon)) {
                    return bad(format!("moment time {t} outside [0, {}]", self.horizon));
                }
            }
            ExperimentKind::Audit => {
                let a = &self.audit;
                if a.cases + a.zero_cases == 0 || a.nodes < 2 {
                    return bad("audit needs at least one case and two nodes".into());
                }
                if a.stability_cases > 0 && a.nodes % 2 != 0 {
                    return bad("audit.stability_cases needs an even node count".into());
                }
                let [lo, hi] = a.integrand_hurst;
                if !(lo > 0.5 && hi < 1.0 && lo <= hi) {
                    return bad(format!("audit.integrand_hurst must lie in (1/2, 1), got {:?}", a.integrand_hurst));
                }
                if let Some([lo, hi]) = a.alpha_range {
                    if !(lo > 0.0 && hi < 0.5 && lo <= hi) {
                        return bad(format!("audit.alpha_range must lie in (0, 1/2), got {:?}", [lo, hi]));
                    }
                }
            }
            _ => {}
        }
        let steps = self.driver_steps();
        if let Some(p) = self.partitions().into_iter().find(|p| steps % p != 0) {
            return bad(format!("partition with {p} steps is not a sub-grid of the {steps}-step driver grid"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_toml_gets_defaults() {
        let cfg = ExperimentConfig::from_str("kind = \"convergence\"", Format::Toml).unwrap();
        assert_eq!(cfg.levels, vec![64, 128, 256, 512, 1024]);
        assert_eq!(cfg.driver_steps(), 2048);
        assert_eq!(cfg.coefficients.label(), "linear");
    }

    #[test]
    fn uniqueness_driver_grid_is_common_refinement() {
        let text = r#"{"kind": "uniqueness", "levels": [64, 128, 256, 512, 1024, 2048],
                       "coefficients": {"preset": "rho1-lipschitz-free"}}"#;
        let cfg = ExperimentConfig::from_str(text, Format::Json).unwrap();
        assert_eq!(cfg.driver_steps(), 6144);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "kind = \"convergence\"\nlevels = [64, 64, 128]",
            "kind = \"convergence\"\nlevels = [64, 128]",
            "kind = \"convergence\"\nensemble = 0",
            "kind = \"convergence\"\nalpha = 0.1",
            "kind = \"convergence\"\ndriver_steps = 1000",
            "kind = \"convergence\"\nunknown = 1",
            "kind = \"bihari-eval\"",
            "kind = \"convergence\"\n[coefficients]\npreset = \"nope\"",
        ] {
            assert!(ExperimentConfig::from_str(text, Format::Toml).is_err(), "{text}");
        }
        let ok = "kind = \"convergence\"\nalpha = 0.1\nallow_inadmissible = true";
        assert!(ExperimentConfig::from_str(ok, Format::Toml).is_ok());
    }

    #[test]
    fn inline_coefficients() {
        let text = "kind = \"convergence\"\n[coefficients.inline]\ndrift = [0.0, 1.0]\nsigma_w = 0.0\nsigma_h = [0.0, 0.0]";
        let cfg = ExperimentConfig::from_str(text, Format::Toml).unwrap();
        let (cs, x0) = cfg.coefficients.build().unwrap();
        let mut out = [0.0];
        cs.drift(0.0, &[2.0], &mut out);
        assert_eq!((out[0], x0), (2.0, vec![1.0]));
    }
}
