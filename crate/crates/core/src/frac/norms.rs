//! The norm family `‖·‖_{α,t}`, `‖·‖_{α,∞}`, `‖·‖_{α,1,t}`, `‖·‖_μ`, `‖·‖_∞`
//! evaluated on piecewise-linear paths.

use rayon::prelude::*;

use super::kernel::{norm_affine_integral, NodeKernel};
use super::FracOrder;
use crate::error::{Error, Result};
use crate::grid::SamplePath;

/// All norms of a path on `[0, t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    /// `‖f‖_{α,t} = |f(t)| + ∫_0^t |f(t)-f(s)|/(t-s)^{α+1} ds`
    pub alpha_t: f64,
    /// `sup_{τ ≤ t} ‖f‖_{α,τ}` over grid times.
    pub alpha_inf: f64,
    /// `∫_0^t |f(s)| s^{-α} ds + ∫_0^t ∫_0^s |f(s)-f(y)|/(s-y)^{α+1} dy ds`
    pub alpha_1_t: f64,
    /// `‖f‖_∞ + sup |f(v)-f(u)|/(v-u)^μ` over grid pairs.
    pub holder_mu: f64,
    pub sup: f64,
}

fn diff(a: &[f64], b: &[f64], out: &mut [f64]) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = x - y;
    }
}

/// Singular part `∫_0^τ |f(τ)-f(s)|/(τ-s)^{α+1} ds` at every node `τ`.
pub(crate) fn difference_integrals(path: &SamplePath, alpha: f64) -> Vec<f64> {
    let t = path.times();
    let dim = path.dim();
    let kernel = NodeKernel::new(path.grid(), alpha + 1.0);
    (0..t.len())
        .into_par_iter()
        .map(|i| {
            let fi = path.value(i);
            let mut acc = 0.0;
            let mut near = vec![0.0; dim];
            let mut far = vec![0.0; dim];
            for j in (0..i).rev() {
                // Segment [t_j, t_{j+1}] seen from t_i: r ∈ [t_i - t_{j+1}, t_i - t_j].
                diff(fi, path.value(j + 1), &mut near);
                diff(fi, path.value(j), &mut far);
                acc += kernel.norm(&near, &far, t[i] - t[j + 1], t[i] - t[j], i - 1 - j);
            }
            acc
        })
        .collect()
}

/// `‖f‖_{α,τ}` at every grid node.
pub fn alpha_norm_profile(path: &SamplePath, alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(difference_integrals(path, alpha)
        .into_iter()
        .enumerate()
        .map(|(i, v)| path.norm_at(i) + v)
        .collect())
}

/// `∫_0^t |f(s)| s^{-α} ds` for a path starting at time 0.
pub(crate) fn weighted_abs_integral(path: &SamplePath, alpha: f64) -> f64 {
    let t = path.times();
    (0..t.len() - 1)
        .map(|j| norm_affine_integral(path.value(j), path.value(j + 1), t[j], t[j + 1], alpha))
        .sum()
}

pub(crate) fn prefix(path: &SamplePath, t: f64) -> Result<Option<SamplePath>> {
    path.grid().check_time(t)?;
    if t <= 0.0 {
        return Ok(None);
    }
    let h = path.grid().horizon();
    if path.grid().node_index(t) == Some(path.len() - 1) || (t - h).abs() <= 1e-12 * h {
        return Ok(Some(path.clone()));
    }
    Ok(Some(path.window(0.0, t)?))
}

/// All norms of `f` on `[0, t]` for the exponents in `fo` (`α` and `μ`).
pub fn norms(f: &SamplePath, fo: &FracOrder, t: f64) -> Result<NormReport> {
    norms_with(f, fo.alpha, fo.mu, t)
}

/// [`norms`] with explicit `α` and Hölder exponent `μ`.
pub fn norms_with(f: &SamplePath, alpha: f64, mu: f64, t: f64) -> Result<NormReport> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 1/2), got {alpha}")));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::Parameter(format!("mu must lie in (0, 1], got {mu}")));
    }
    let Some(p) = prefix(f, t)? else {
        let v = f.norm_at(0);
        return Ok(NormReport { alpha_t: v, alpha_inf: v, alpha_1_t: 0.0, holder_mu: v, sup: v });
    };
    let times = p.times();
    let n = times.len();
    let singular = difference_integrals(&p, alpha);
    let profile: Vec<f64> = singular.iter().enumerate().map(|(i, v)| p.norm_at(i) + v).collect();
    let alpha_t = profile[n - 1];
    let alpha_inf = profile.iter().copied().fold(0.0, f64::max);
    // Outer integral of the singular part: trapezoid over nodes.
    let outer: f64 = (0..n - 1)
        .map(|j| 0.5 * (singular[j] + singular[j + 1]) * (times[j + 1] - times[j]))
        .sum();
    let alpha_1_t = weighted_abs_integral(&p, alpha) + outer;
    let sup = (0..n).map(|i| p.norm_at(i)).fold(0.0, f64::max);
    let seminorm = (0..n)
        .into_par_iter()
        .map(|v| {
            let fv = p.value(v);
            (0..v)
                .map(|u| {
                    let d: f64 = fv.iter().zip(p.value(u)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    d / (times[v] - times[u]).powf(mu)
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(NormReport { alpha_t, alpha_inf, alpha_1_t, holder_mu: sup + seminorm, sup })
}
