//! Numerical audits of the a-priori estimates for fractional integrals.
//!
//! Each audit returns the ratio `|LHS| / RHS` of one inequality evaluated on a
//! concrete pair of paths; `0/0` is read as 0.

use statrs::function::gamma::gamma;

use super::gls::gls_integral;
use super::kernel::{affine_integral, norm_affine_integral, NodeKernel};
use super::norms::{alpha_norm_profile, norms_with, prefix};
use crate::drivers::{driver_norm, driver_norm_profile};
use crate::error::{Error, Result};
use crate::grid::SamplePath;

fn ratio(lhs: f64, rhs: f64, what: &str) -> Result<f64> {
    if rhs > 0.0 {
        Ok(lhs.abs() / rhs)
    } else if lhs == 0.0 {
        Ok(0.0)
    } else {
        Err(Error::Inconsistent(format!("{what}: zero bound with nonzero left side {lhs:e}")))
    }
}

fn prefixed(p: &SamplePath, t: f64) -> Result<SamplePath> {
    prefix(p, t)?.ok_or_else(|| Error::Domain("audit needs t > 0".into()))
}

/// `|∫_0^t f dB^H| / ((1/Γ(α)) ‖B^H‖_{1-α,∞,t} ‖f‖_{α,1,t})`.
pub fn audit_integral_estimate(f: &SamplePath, bh: &SamplePath, alpha: f64, t: f64) -> Result<f64> {
    let lhs = gls_integral(f, bh, alpha, 0.0, t)?;
    let bound = driver_norm(bh, alpha, t)?.value / gamma(alpha);
    let f_norm = norms_with(f, alpha, 1.0, t)?.alpha_1_t;
    ratio(lhs, bound * f_norm, "integral estimate")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupBoundAudit {
    /// `max_u |D_{t-}^{1-α} B_{t-}(u)|` over grid nodes `u < t`.
    pub sup_derivative: f64,
    /// `‖B‖_{1-α,∞,t} / Γ(α)`.
    pub bound: f64,
}

impl SupBoundAudit {
    pub fn holds(&self) -> bool {
        self.sup_derivative < self.bound || (self.sup_derivative == 0.0 && self.bound == 0.0)
    }
}

/// Compares the right fractional derivative of a scalar driver with the
/// driver norm bound, at grid nodes of `[0, t]`.
pub fn audit_sup_bound(bh: &SamplePath, alpha: f64, t: f64) -> Result<SupBoundAudit> {
    if bh.dim() != 1 {
        return Err(Error::Dimension("sup-bound audit expects a scalar driver".into()));
    }
    let p = prefixed(bh, t)?;
    let times = p.times();
    let v = p.values();
    let last = times.len() - 1;
    let order = 1.0 - alpha;
    let kernel = NodeKernel::new(p.grid(), order + 1.0);
    let g = gamma(alpha);
    let mut sup = 0.0f64;
    for u in 0..last {
        let mut integral = 0.0;
        for w in u + 1..=last {
            integral += kernel.signed(v[u] - v[w - 1], v[u] - v[w], times[w - 1] - times[u], times[w] - times[u], w - 1 - u);
        }
        let d = ((v[u] - v[last]) / (times[last] - times[u]).powf(order) + order * integral) / g;
        sup = sup.max(d.abs());
    }
    let profile = driver_norm_profile(&p, alpha)?;
    Ok(SupBoundAudit { sup_derivative: sup, bound: profile[last] / g })
}

/// `∫_0^t |f(s)| (t-s)^{-α} ds`.
fn reverse_weighted(p: &SamplePath, alpha: f64) -> f64 {
    let t = p.times();
    let end = t[t.len() - 1];
    (0..t.len() - 1)
        .map(|j| norm_affine_integral(p.value(j + 1), p.value(j), end - t[j + 1], end - t[j], alpha))
        .sum()
}

/// `∫_0^t ((t-s)^{-2α} + s^{-α}) w(s) ds` for nonnegative node data `w`.
fn mixed_kernel_integral(times: &[f64], w: &[f64], alpha: f64) -> f64 {
    let end = times[times.len() - 1];
    (0..times.len() - 1)
        .map(|j| {
            affine_integral(w[j + 1], w[j], end - times[j + 1], end - times[j], 2.0 * alpha)
                + affine_integral(w[j], w[j + 1], times[j], times[j + 1], alpha)
        })
        .sum()
}

/// Indefinite Stieltjes integral of piecewise-linear data (exact for the
/// interpolants): `I(t_i) = Σ_{j<i} ½(f_j + f_{j+1})·(g_{j+1} - g_j)`.
fn indefinite_stieltjes(f: &SamplePath, g: &SamplePath) -> Result<SamplePath> {
    let mut acc = 0.0;
    let mut values = vec![0.0];
    for j in 0..f.len() - 1 {
        let inc: f64 = (0..f.dim())
            .map(|k| 0.5 * (f.value(j)[k] + f.value(j + 1)[k]) * (g.value(j + 1)[k] - g.value(j)[k]))
            .sum();
        acc += inc;
        values.push(acc);
    }
    SamplePath::scalar(f.grid().clone(), values)
}

/// `‖∫_0^· f ds‖_{α,t} / ∫_0^t |f(s)| (t-s)^{-α} ds`; the first estimate for
/// Lebesgue integrals, whose constant is not tracked.
pub fn nr_drift_ratio(f: &SamplePath, alpha: f64, t: f64) -> Result<f64> {
    if f.dim() != 1 {
        return Err(Error::Dimension("drift audit expects a scalar path".into()));
    }
    let p = prefixed(f, t)?;
    let times = p.times();
    let mut acc = 0.0;
    let mut values = vec![0.0];
    for j in 0..p.len() - 1 {
        acc += 0.5 * (p.value(j)[0] + p.value(j + 1)[0]) * (times[j + 1] - times[j]);
        values.push(acc);
    }
    let primitive = SamplePath::scalar(p.grid().clone(), values)?;
    let lhs = *alpha_norm_profile(&primitive, alpha)?.last().unwrap();
    ratio(lhs, reverse_weighted(&p, alpha), "drift estimate")
}

/// `‖∫_0^· f dB^H‖_{α,t} / (‖B^H‖_{1-α,∞,t} ∫_0^t ((t-s)^{-2α}+s^{-α}) ‖f‖_{α,s} ds)`.
pub fn nr_fbm_ratio(f: &SamplePath, bh: &SamplePath, alpha: f64, t: f64) -> Result<f64> {
    if f.grid() != bh.grid() {
        return Err(Error::Grid("integrand and driver must share a grid".into()));
    }
    let fp = prefixed(f, t)?;
    let bp = prefixed(bh, t)?;
    let integral = indefinite_stieltjes(&fp, &bp)?;
    let lhs = *alpha_norm_profile(&integral, alpha)?.last().unwrap();
    let profile = alpha_norm_profile(&fp, alpha)?;
    let weight = mixed_kernel_integral(fp.times(), &profile, alpha);
    let driver = *driver_norm_profile(&bp, alpha)?.last().unwrap();
    ratio(lhs, driver * weight, "fBm estimate")
}

/// Same as [`nr_fbm_ratio`] for the integrand `σ(s, f(s))`, against the
/// bound with `1 + ‖f‖_{α,s}`.
pub fn nr_sigma_ratio(
    f: &SamplePath,
    bh: &SamplePath,
    sigma: impl Fn(f64, f64) -> f64,
    alpha: f64,
    t: f64,
) -> Result<f64> {
    if f.dim() != 1 || bh.dim() != 1 {
        return Err(Error::Dimension("sigma audit expects scalar paths".into()));
    }
    let fp = prefixed(f, t)?;
    let bp = prefixed(bh, t)?;
    let integrand = SamplePath::scalar(
        fp.grid().clone(),
        fp.times().iter().zip(fp.values()).map(|(&s, &x)| sigma(s, x)).collect(),
    )?;
    let integral = indefinite_stieltjes(&integrand, &bp)?;
    let lhs = *alpha_norm_profile(&integral, alpha)?.last().unwrap();
    let profile: Vec<f64> = alpha_norm_profile(&fp, alpha)?.into_iter().map(|v| 1.0 + v).collect();
    let weight = mixed_kernel_integral(fp.times(), &profile, alpha);
    let driver = *driver_norm_profile(&bp, alpha)?.last().unwrap();
    ratio(lhs, driver * weight, "sigma estimate")
}
