//! Coefficient triples `(b, σ_W, σ_H)`, moduli of continuity, and random
//! falsification probes for the growth / modulus / smoothness hypotheses.
//!
//! Matrices are stored row-major: `σ_W` is `n × m`, `σ_H` is `n × d`, and the
//! spatial derivative of `σ_H` is `n` stacked `n × d` blocks, block `i` being
//! `∂σ_H/∂x_i`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// `(t, x, out)`: writes the coefficient value at `(t, x)` into `out`.
pub type CoefficientFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Step of the central-difference fallback for `∂σ_H/∂x`.
pub const FD_STEP: f64 = 1e-6;

const INV_E: f64 = 0.367_879_441_171_442_33;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulusKind {
    Rho1,
    Rho2,
    Linear,
    Custom,
}

#[derive(Clone)]
enum Shape {
    /// Log-type modulus below `delta`, extended with the left derivative.
    Log { delta: f64, at_delta: f64, slope: f64, double_log: bool },
    Linear { scale: f64 },
    Custom { name: String, f: ScalarFn },
}

/// A concave nondecreasing `ϱ` with `ϱ(0) = 0`, together with the exponent
/// `q > 1` under which `∫_{0+} du / ϱ^q(u^{1/q})` is expected to diverge.
#[derive(Clone)]
pub struct ModulusOfContinuity {
    q: f64,
    shape: Shape,
}

impl fmt::Debug for ModulusOfContinuity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("ModulusOfContinuity");
        s.field("kind", &self.kind()).field("q", &self.q);
        match &self.shape {
            Shape::Log { delta, .. } => s.field("delta", delta),
            Shape::Linear { scale } => s.field("scale", scale),
            Shape::Custom { name, .. } => s.field("name", name),
        };
        s.finish()
    }
}

fn check_q(q: f64) -> Result<()> {
    if q > 1.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("q must be > 1, got {q}")))
    }
}

fn check_log_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < INV_E {
        Ok(())
    } else {
        Err(Error::Parameter(format!("delta must lie in (0, 1/e), got {delta}")))
    }
}

fn check_u(u: f64) -> Result<()> {
    if u >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("modulus argument must be >= 0, got {u}")))
    }
}

/// `u log^{1/q}(1/u)` on `[0, 1)`.
fn rho1_core(u: f64, q: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * (-u.ln()).powf(1.0 / q)
    }
}

/// `u log^{1/q}(1/u) log^{1/q}(log(1/u))` on `[0, 1/e)`.
fn rho2_core(u: f64, q: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        let l = -u.ln();
        u * l.powf(1.0 / q) * l.ln().powf(1.0 / q)
    }
}

/// Left derivative of `u log^{1/q}(1/u)` at `delta`.
pub fn rho1_left_derivative(q: f64, delta: f64) -> f64 {
    let l = -delta.ln();
    l.powf(1.0 / q) - l.powf(1.0 / q - 1.0) / q
}

/// Left derivative of `u log^{1/q}(1/u) log^{1/q}(log(1/u))` at `delta`.
pub fn rho2_left_derivative(q: f64, delta: f64) -> f64 {
    let l = -delta.ln();
    let ll = l.ln();
    let a = l.powf(1.0 / q);
    let b = ll.powf(1.0 / q);
    a * b - l.powf(1.0 / q - 1.0) * b / q - l.powf(1.0 / q - 1.0) * ll.powf(1.0 / q - 1.0) / q
}

/// `ϱ₁(u)`: `u log^{1/q}(1/u)` for `u ≤ δ`, continued linearly with the left
/// derivative at `δ`.
pub fn rho1(u: f64, q: f64, delta: f64) -> Result<f64> {
    ModulusOfContinuity::rho1(q, delta)?.eval(u)
}

/// `ϱ₂(u)`: `u log^{1/q}(1/u) log^{1/q}(log 1/u)` for `u ≤ δ`, continued
/// linearly with the left derivative at `δ`.
pub fn rho2(u: f64, q: f64, delta: f64) -> Result<f64> {
    ModulusOfContinuity::rho2(q, delta)?.eval(u)
}

impl ModulusOfContinuity {
    pub fn rho1(q: f64, delta: f64) -> Result<Self> {
        check_q(q)?;
        check_log_delta(delta)?;
        let slope = rho1_left_derivative(q, delta);
        Ok(Self { q, shape: Shape::Log { delta, at_delta: rho1_core(delta, q), slope, double_log: false } })
    }

    /// Also requires a nonnegative left derivative at `delta`, which fails for
    /// `delta` close to `1/e`.
    pub fn rho2(q: f64, delta: f64) -> Result<Self> {
        check_q(q)?;
        check_log_delta(delta)?;
        let slope = rho2_left_derivative(q, delta);
        if !(slope >= 0.0) {
            return Err(Error::Parameter(format!(
                "rho2 left derivative at delta = {delta} is negative ({slope}); choose a smaller delta"
            )));
        }
        Ok(Self { q, shape: Shape::Log { delta, at_delta: rho2_core(delta, q), slope, double_log: true } })
    }

    /// `ϱ(u) = scale · u` (Lipschitz case).
    pub fn linear(q: f64, scale: f64) -> Result<Self> {
        check_q(q)?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Parameter(format!("linear modulus scale must be > 0, got {scale}")));
        }
        Ok(Self { q, shape: Shape::Linear { scale } })
    }

    /// The identity modulus `ϱ(u) = u`.
    pub fn identity(q: f64) -> Result<Self> {
        Self::linear(q, 1.0)
    }

    /// User-supplied modulus. Concavity and divergence are not checked here;
    /// use [`concavity_probe`] and [`crate::bihari::divergence_diagnostic`].
    pub fn custom(q: f64, name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        check_q(q)?;
        Ok(Self { q, shape: Shape::Custom { name: name.into(), f: Arc::new(f) } })
    }

    pub fn kind(&self) -> ModulusKind {
        match &self.shape {
            Shape::Log { double_log: false, .. } => ModulusKind::Rho1,
            Shape::Log { double_log: true, .. } => ModulusKind::Rho2,
            Shape::Linear { .. } => ModulusKind::Linear,
            Shape::Custom { .. } => ModulusKind::Custom,
        }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn delta(&self) -> Option<f64> {
        match self.shape {
            Shape::Log { delta, .. } => Some(delta),
            _ => None,
        }
    }

    /// Slope of the linear continuation above `delta`.
    pub fn extension_slope(&self) -> Option<f64> {
        match self.shape {
            Shape::Log { slope, .. } => Some(slope),
            _ => None,
        }
    }

    /// Unchecked evaluation; `u` must be nonnegative.
    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        match &self.shape {
            Shape::Log { delta, at_delta, slope, double_log } => {
                if u <= *delta {
                    if *double_log {
                        rho2_core(u, self.q)
                    } else {
                        rho1_core(u, self.q)
                    }
                } else {
                    at_delta + slope * (u - delta)
                }
            }
            Shape::Linear { scale } => scale * u,
            Shape::Custom { f, .. } => f(u),
        }
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        check_u(u)?;
        Ok(self.value(u))
    }

    /// `e^w / ϱ(e^w)`, evaluated without forming `e^w` in the log region so
    /// that arbitrarily negative `w` stays finite.
    pub(crate) fn inverse_ratio_at_log(&self, w: f64) -> f64 {
        match &self.shape {
            Shape::Log { delta, double_log, .. } if w <= delta.ln() => {
                let l = -w;
                let mut r = l.powf(-1.0 / self.q);
                if *double_log {
                    r *= l.ln().powf(-1.0 / self.q);
                }
                r
            }
            Shape::Linear { scale } => 1.0 / scale,
            _ => {
                let u = w.exp();
                u / self.value(u)
            }
        }
    }

    /// Short name used in reports: `rho1`, `rho2`, `linear` or the custom name.
    pub fn label(&self) -> String {
        match &self.shape {
            Shape::Log { double_log: false, .. } => "rho1".into(),
            Shape::Log { double_log: true, .. } => "rho2".into(),
            Shape::Linear { .. } => "linear".into(),
            Shape::Custom { name, .. } => name.clone(),
        }
    }
}

/// Outcome of the random concavity / monotonicity probe of a modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcavityProbe {
    pub samples: usize,
    pub concavity_violations: usize,
    pub monotonicity_violations: usize,
    /// Worst midpoint defect `(ϱ(u)+ϱ(v))/2 - ϱ((u+v)/2)` seen (≤ 0 when concave).
    pub worst_midpoint_defect: f64,
    pub witness: Option<(f64, f64)>,
}

impl ConcavityProbe {
    pub fn passed(&self) -> bool {
        self.concavity_violations == 0 && self.monotonicity_violations == 0
    }
}

/// Midpoint concavity on random pairs in `(0, upper]` (the log region for
/// built-ins, `(0, 1]` otherwise) and monotonicity on random ordered pairs
/// drawn log-uniformly over `[1e-12, 1e3]`.
pub fn concavity_probe(m: &ModulusOfContinuity, samples: usize, seed: u64) -> ConcavityProbe {
    let upper = m.delta().unwrap_or(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ConcavityProbe {
        samples,
        concavity_violations: 0,
        monotonicity_violations: 0,
        worst_midpoint_defect: f64::NEG_INFINITY,
        witness: None,
    };
    for _ in 0..samples {
        let u = upper * (1.0 - rng.random::<f64>());
        let v = upper * (1.0 - rng.random::<f64>());
        let (ru, rv, rm) = (m.value(u), m.value(v), m.value(0.5 * (u + v)));
        let defect = 0.5 * (ru + rv) - rm;
        if defect > out.worst_midpoint_defect {
            out.worst_midpoint_defect = defect;
        }
        if defect > 1e-13 * rm.abs().max(f64::MIN_POSITIVE) {
            out.concavity_violations += 1;
            out.witness.get_or_insert((u, v));
        }
        let a = (rng.random_range(-12.0..3.0f64)) * std::f64::consts::LN_10;
        let b = (rng.random_range(-12.0..3.0f64)) * std::f64::consts::LN_10;
        let (lo, hi) = if a <= b { (a.exp(), b.exp()) } else { (b.exp(), a.exp()) };
        if m.value(lo) > m.value(hi) {
            out.monotonicity_violations += 1;
            out.witness.get_or_insert((lo, hi));
        }
    }
    out
}

/// State, Brownian and fractional dimensions `(n, m, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
    pub d: usize,
}

impl Dims {
    pub fn scalar() -> Self {
        Self { n: 1, m: 1, d: 1 }
    }
}

/// `b`, `σ_W`, `σ_H` with the constants `K`, `β` and the modulus `ϱ`.
#[derive(Clone)]
pub struct CoefficientSet {
    pub name: String,
    dims: Dims,
    drift: CoefficientFn,
    sigma_w: CoefficientFn,
    sigma_h: CoefficientFn,
    dsigma_h: Option<CoefficientFn>,
    pub k: f64,
    pub beta: f64,
    pub modulus: ModulusOfContinuity,
}

impl fmt::Debug for CoefficientSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSet")
            .field("name", &self.name)
            .field("dims", &self.dims)
            .field("k", &self.k)
            .field("beta", &self.beta)
            .field("modulus", &self.modulus)
            .field("dsigma_h_exact", &self.dsigma_h.is_some())
            .finish()
    }
}

impl CoefficientSet {
    pub fn new(
        name: impl Into<String>,
        dims: Dims,
        drift: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        sigma_w: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        sigma_h: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
        k: f64,
        beta: f64,
        modulus: ModulusOfContinuity,
    ) -> Result<Self> {
        if dims.n == 0 || dims.m == 0 || dims.d == 0 {
            return Err(Error::Dimension(format!("all dimensions must be >= 1, got {dims:?}")));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Parameter(format!("K must be > 0, got {k}")));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Parameter(format!("beta must lie in (0, 1], got {beta}")));
        }
        Ok(Self {
            name: name.into(),
            dims,
            drift: Arc::new(drift),
            sigma_w: Arc::new(sigma_w),
            sigma_h: Arc::new(sigma_h),
            dsigma_h: None,
            k,
            beta,
            modulus,
        })
    }

    /// Supplies the exact spatial derivative of `σ_H` (`n` blocks of `n × d`).
    pub fn with_dsigma_h(mut self, f: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.dsigma_h = Some(Arc::new(f));
        self
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn drift(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.drift)(t, x, out)
    }

    #[inline]
    pub fn sigma_w(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.sigma_w)(t, x, out)
    }

    #[inline]
    pub fn sigma_h(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.sigma_h)(t, x, out)
    }

    /// `false` when [`CoefficientSet::dsigma_h`] falls back to central
    /// differences with step [`FD_STEP`] (an approximation).
    pub fn dsigma_h_is_exact(&self) -> bool {
        self.dsigma_h.is_some()
    }

    pub fn dsigma_h(&self, t: f64, x: &[f64], out: &mut [f64]) {
        if let Some(f) = &self.dsigma_h {
            return f(t, x, out);
        }
        let Dims { n, d, .. } = self.dims;
        let block = n * d;
        let mut xp = x.to_vec();
        let mut plus = vec![0.0; block];
        let mut minus = vec![0.0; block];
        for i in 0..n {
            xp[i] = x[i] + FD_STEP;
            self.sigma_h(t, &xp, &mut plus);
            xp[i] = x[i] - FD_STEP;
            self.sigma_h(t, &xp, &mut minus);
            xp[i] = x[i];
            for (o, (p, m)) in out[i * block..(i + 1) * block].iter_mut().zip(plus.iter().zip(&minus)) {
                *o = (p - m) / (2.0 * FD_STEP);
            }
        }
    }
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn euclid_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_finite(v: &[f64], t: f64, x: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|a| a.is_finite()) {
        Ok(())
    } else {
        Err(Error::Coefficient { t, x: x.to_vec(), reason: format!("{what} returned a non-finite value") })
    }
}

/// Sampling region for [`probe_hypotheses`]: `t ∈ [t.0, t.1]`, every
/// coordinate of `x` in `[x.0, x.1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub t: (f64, f64),
    pub x: (f64, f64),
}

/// The point at which a probed inequality was worst.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub t: f64,
    pub s: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub max_ratio: f64,
    pub witness: Option<Witness>,
}

impl InequalityCheck {
    pub fn passed(&self) -> bool {
        self.max_ratio <= 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub samples: usize,
    pub checks: Vec<InequalityCheck>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(InequalityCheck::passed)
    }

    pub fn check(&self, name: &str) -> Option<&InequalityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Checks on `b` and `σ_W` only.
    pub fn regularity_passed(&self) -> bool {
        self.checks.iter().filter(|c| !c.name.starts_with("sigma_h")).all(InequalityCheck::passed)
    }

    /// Checks on `σ_H` and its derivative only.
    pub fn fractional_passed(&self) -> bool {
        self.checks.iter().filter(|c| c.name.starts_with("sigma_h")).all(InequalityCheck::passed)
    }
}

pub const CHECK_NAMES: [&str; 7] = [
    "drift_growth",
    "drift_modulus",
    "sigma_w_growth",
    "sigma_w_modulus",
    "sigma_h_derivative_bound",
    "sigma_h_derivative_lipschitz",
    "sigma_h_time_holder",
];

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// Random falsification search over the growth, modulus and smoothness
/// inequalities. Each check reports the largest observed ratio
/// `lhs / rhs`; a ratio above 1 is a counterexample and carries its witness.
/// Half of the `y` draws are placed at a log-uniform distance from `x` so the
/// modulus is exercised near the diagonal. Matrix norms are Frobenius.
///
/// This can refute a hypothesis but never certify it.
pub fn probe_hypotheses(cs: &CoefficientSet, sample_box: &SampleBox, n_samples: usize, seed: u64) -> Result<HypothesisReport> {
    if n_samples == 0 {
        return Err(Error::Parameter("n_samples must be >= 1".into()));
    }
    let (t0, t1) = sample_box.t;
    let (x0, x1) = sample_box.x;
    if !(t1 >= t0 && t0 >= 0.0 && x1 >= x0) {
        return Err(Error::Parameter(format!("invalid sample box {sample_box:?}")));
    }
    let Dims { n, m, d } = cs.dims;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks: Vec<InequalityCheck> =
        CHECK_NAMES.iter().map(|&name| InequalityCheck { name, max_ratio: 0.0, witness: None }).collect();
    let mut record = |idx: usize, r: f64, w: &dyn Fn() -> Witness| {
        let c = &mut checks[idx];
        if r > c.max_ratio || (r.is_nan() && !c.max_ratio.is_nan()) {
            c.max_ratio = r;
            c.witness = Some(w());
        }
    };

    let (mut bx, mut by) = (vec![0.0; n], vec![0.0; n]);
    let (mut wx, mut wy) = (vec![0.0; n * m], vec![0.0; n * m]);
    let (mut hx, mut hs) = (vec![0.0; n * d], vec![0.0; n * d]);
    let (mut dx, mut dy, mut ds) = (vec![0.0; n * n * d], vec![0.0; n * n * d], vec![0.0; n * n * d]);
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let k = cs.k;
    for draw in 0..n_samples {
        let t = t0 + (t1 - t0) * rng.random::<f64>();
        let s = t0 + (t1 - t0) * rng.random::<f64>();
        for xi in x.iter_mut() {
            *xi = x0 + (x1 - x0) * rng.random::<f64>();
        }
        if draw % 2 == 0 {
            for yi in y.iter_mut() {
                *yi = x0 + (x1 - x0) * rng.random::<f64>();
            }
        } else {
            let scale = 10f64.powf(rng.random_range(-8.0..0.0)) * (x1 - x0).max(1e-300);
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi = xi + scale * (2.0 * rng.random::<f64>() - 1.0);
            }
        }
        let witness = || Witness { t, s, x: x.clone(), y: y.clone() };

        cs.drift(t, &x, &mut bx);
        check_finite(&bx, t, &x, "drift")?;
        cs.drift(t, &y, &mut by);
        check_finite(&by, t, &y, "drift")?;
        cs.sigma_w(t, &x, &mut wx);
        check_finite(&wx, t, &x, "sigma_w")?;
        cs.sigma_w(t, &y, &mut wy);
        check_finite(&wy, t, &y, "sigma_w")?;
        cs.dsigma_h(t, &x, &mut dx);
        check_finite(&dx, t, &x, "dsigma_h")?;
        cs.dsigma_h(t, &y, &mut dy);
        check_finite(&dy, t, &y, "dsigma_h")?;
        cs.sigma_h(t, &x, &mut hx);
        check_finite(&hx, t, &x, "sigma_h")?;
        cs.sigma_h(s, &x, &mut hs);
        check_finite(&hs, s, &x, "sigma_h")?;
        cs.dsigma_h(s, &x, &mut ds);
        check_finite(&ds, s, &x, "dsigma_h")?;

        let growth = k * (1.0 + euclid(&x));
        let dist = euclid_diff(&x, &y);
        let rho = cs.modulus.value(dist * dist);
        record(0, ratio(euclid(&bx), growth), &witness);
        let bd = euclid_diff(&bx, &by);
        record(1, ratio(bd * bd, rho), &witness);
        record(2, ratio(euclid(&wx), growth), &witness);
        let wd = euclid_diff(&wx, &wy);
        record(3, ratio(wd * wd, rho), &witness);

        let block = n * d;
        let mut worst_bound = 0.0f64;
        let mut worst_lip = 0.0f64;
        let mut worst_time = 0.0f64;
        for i in 0..n {
            let r = i * block..(i + 1) * block;
            worst_bound = worst_bound.max(euclid(&dx[r.clone()]));
            worst_lip = worst_lip.max(euclid_diff(&dx[r.clone()], &dy[r.clone()]));
            worst_time = worst_time.max(euclid_diff(&dx[r.clone()], &ds[r]));
        }
        record(4, ratio(worst_bound, k), &witness);
        record(5, ratio(worst_lip, k * dist), &witness);
        let time_lhs = euclid_diff(&hx, &hs) + worst_time;
        record(6, ratio(time_lhs, k * (t - s).abs().powf(cs.beta)), &witness);
    }
    Ok(HypothesisReport { samples: n_samples, checks })
}

/// A named coefficient set with its default initial condition.
#[derive(Debug, Clone)]
pub struct Preset {
    pub coefficients: CoefficientSet,
    pub x0: Vec<f64>,
}

pub const PRESET_NAMES: [&str; 3] = ["linear", "trig", "rho1-lipschitz-free"];

/// `b = -x`, `σ_W = 1/2`, `σ_H = (1 + sin x)/2`; scalar, Lipschitz.
pub fn linear_preset() -> Preset {
    let cs = CoefficientSet::new(
        "linear",
        Dims::scalar(),
        |_, x, out| out[0] = -x[0],
        |_, _, out| out[0] = 0.5,
        |_, x, out| out[0] = 0.5 * (1.0 + x[0].sin()),
        1.0,
        1.0,
        ModulusOfContinuity::identity(2.0).expect("valid"),
    )
    .expect("valid preset")
    .with_dsigma_h(|_, x, out| out[0] = 0.5 * x[0].cos());
    Preset { coefficients: cs, x0: vec![1.0] }
}

/// Two-dimensional state, one Brownian and two fractional components with
/// time-dependent `σ_H`.
pub fn trig_preset() -> Preset {
    let cs = CoefficientSet::new(
        "trig",
        Dims { n: 2, m: 1, d: 2 },
        |_, x, out| {
            out[0] = x[1].sin();
            out[1] = -x[0].sin();
        },
        |_, x, out| {
            out[0] = 0.5 * x[0].cos();
            out[1] = 0.5 * x[1].cos();
        },
        |t, x, out| {
            out[0] = 0.5 * x[0].sin() + 0.25 * t.cos();
            out[1] = 0.0;
            out[2] = 0.0;
            out[3] = 0.5 * x[1].sin() + 0.25 * t.sin();
        },
        1.5,
        1.0,
        ModulusOfContinuity::identity(2.0).expect("valid"),
    )
    .expect("valid preset")
    .with_dsigma_h(|_, x, out| {
        out.fill(0.0);
        out[0] = 0.5 * x[0].cos();
        out[4 + 3] = 0.5 * x[1].cos();
    });
    Preset { coefficients: cs, x0: vec![0.5, -0.5] }
}

/// Knot of the non-Lipschitz drift and of its modulus.
const RHO1_DELTA: f64 = 0.2;
const RHO1_DRIFT_SCALE: f64 = 0.5;

/// `r log^{1/4}(1/r)` below [`RHO1_DELTA`], continued linearly.
fn log_quarter_profile(r: f64) -> f64 {
    if r <= RHO1_DELTA {
        if r == 0.0 {
            0.0
        } else {
            r * (-r.ln()).powf(0.25)
        }
    } else {
        let l = -RHO1_DELTA.ln();
        let at = RHO1_DELTA * l.powf(0.25);
        let slope = l.powf(0.25) - 0.25 * l.powf(-0.75);
        at + slope * (r - RHO1_DELTA)
    }
}

/// Drift `b(x) = ½ sign(x) |x| log^{1/4}(1/|x|)` near 0 (infinite slope at the
/// origin), continued linearly; `|b(x)-b(y)|² ≤ ϱ₁(|x-y|²)` with `q = 2`,
/// `δ = 0.2`. Starts at the non-Lipschitz point `x₀ = 0`.
pub fn rho1_preset() -> Preset {
    let cs = CoefficientSet::new(
        "rho1-lipschitz-free",
        Dims::scalar(),
        |_, x, out| out[0] = RHO1_DRIFT_SCALE * x[0].signum() * log_quarter_profile(x[0].abs()),
        |_, _, out| out[0] = 0.5,
        |_, x, out| out[0] = 0.5 * (1.0 + x[0].sin()),
        1.0,
        1.0,
        ModulusOfContinuity::rho1(2.0, RHO1_DELTA).expect("valid"),
    )
    .expect("valid preset")
    .with_dsigma_h(|_, x, out| out[0] = 0.5 * x[0].cos());
    Preset { coefficients: cs, x0: vec![0.0] }
}

pub fn preset(name: &str) -> Result<Preset> {
    match name {
        "linear" => Ok(linear_preset()),
        "trig" => Ok(trig_preset()),
        "rho1-lipschitz-free" => Ok(rho1_preset()),
        other => Err(Error::Parameter(format!(
            "unknown coefficient preset '{other}' (known: {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}
