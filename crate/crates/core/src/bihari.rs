//! A Bihari-type bound for
//! `f(t) ≤ a + b t^α ∫_0^t (t-s)^{-α} s^{-α} ϱ(f(s)) ds`, `1/2 < α < 1`:
//!
//! ```text
//! f(t) ≤ [F⁻¹(F(2^{q-1} a^q) + 2^{q-1} b^q C_{α,p}^{q/p} t^{q(1/p-α)+1})]^{1/q}
//! F(x) = ∫_1^x du / ϱ^q(u^{1/q}),   C_{α,p} = B(1-pα, 1-pα)
//! ```
//!
//! with `1 < p < 2`, `α < 1/p`, `1/p + 1/q = 1`.
//!
//! `F` is integrated in the variable `w = ln(u)/q`, i.e.
//! `F(x) = ∫_0^{ln(x)/q} q (e^w/ϱ(e^w))^q dw`, which is smooth for the
//! built-in moduli down to `u = 0` and lets `F⁻¹` work in `ln x`, so results
//! far outside the double range remain representable until the final
//! `x^{1/q}`.

use statrs::function::beta::beta;

use crate::coefficients::ModulusOfContinuity;
use crate::error::{Error, Result};
use crate::quad::adaptive;

/// Relative tolerance of each quadrature piece of `F`.
const F_TOL: f64 = 1e-13;
/// `ln x` search range for `F⁻¹`.
const LN_X_MIN: f64 = -1e12;
const LN_X_MAX: f64 = 1e12;

/// `C_{α,p} = B(1-pα, 1-pα) = ∫_0^1 (1-u)^{-pα} u^{-pα} du`.
pub fn beta_constant(alpha: f64, p: f64) -> Result<f64> {
    if !(alpha > 0.0 && p > 0.0) {
        return Err(Error::Parameter(format!("alpha and p must be positive, got alpha = {alpha}, p = {p}")));
    }
    let e = 1.0 - p * alpha;
    if !(e > 0.0) {
        return Err(Error::Domain(format!("p·alpha = {} >= 1: the beta integral diverges", p * alpha)));
    }
    Ok(beta(e, e))
}

/// Integration breakpoints from `0` to `end`: the kink of the modulus and
/// then doubling distances, so long log-scale ranges stay well resolved.
fn breakpoints(end: f64, kink: Option<f64>) -> Vec<f64> {
    let mut pts = vec![0.0];
    let dir = end.signum();
    let mut anchor = 0.0;
    if let Some(k) = kink {
        if k * dir > 0.0 && k.abs() < end.abs() {
            pts.push(k);
            anchor = k;
        }
    }
    let mut step = 1.0;
    loop {
        let next = anchor + dir * step;
        if next.abs() >= end.abs() {
            break;
        }
        pts.push(next);
        step *= 2.0;
    }
    pts.push(end);
    pts
}

/// `F` in the variable `s = ln x`.
fn barrier_at_ln(s: f64, rho: &ModulusOfContinuity, q: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let end = s / q;
    let kink = rho.delta().map(f64::ln);
    let integrand = |w: f64| q * rho.inverse_ratio_at_log(w).powf(q);
    let pts = breakpoints(end, kink);
    pts.windows(2).map(|w| adaptive(integrand, w[0], w[1], F_TOL)).sum()
}

/// `dF/d(ln x) = x / ϱ^q(x^{1/q})`.
fn barrier_slope_at_ln(s: f64, rho: &ModulusOfContinuity, q: f64) -> f64 {
    rho.inverse_ratio_at_log(s / q).powf(q)
}

fn check_q(q: f64) -> Result<()> {
    if q > 1.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("q must be > 1, got {q}")))
    }
}

/// `F(x) = ∫_1^x du / ϱ^q(u^{1/q})`; negative for `x < 1`.
pub fn barrier_f(x: f64, rho: &ModulusOfContinuity, q: f64) -> Result<f64> {
    check_q(q)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("F needs a positive finite argument, got {x}")));
    }
    let v = barrier_at_ln(x.ln(), rho, q);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { what: "barrier integral".into(), t: x })
    }
}

/// `F⁻¹(y)` as `ln x`, or `None` when `y` lies outside the reachable range
/// of `F` (`ln x` within `[-1e12, 1e12]`).
pub fn barrier_f_inverse_ln(y: f64, rho: &ModulusOfContinuity, q: f64) -> Result<Option<f64>> {
    check_q(q)?;
    if y.is_nan() {
        return Err(Error::Domain("F⁻¹ of NaN".into()));
    }
    if y == 0.0 {
        return Ok(Some(0.0));
    }
    let g = |s: f64| barrier_at_ln(s, rho, q) - y;
    // Bracket on the side of 0 where the root must be.
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    let mut step = 1.0;
    if y > 0.0 {
        loop {
            hi = (hi + step).min(LN_X_MAX);
            if g(hi) >= 0.0 {
                break;
            }
            if hi >= LN_X_MAX {
                return Ok(None);
            }
            lo = hi;
            step *= 2.0;
        }
    } else {
        loop {
            lo = (lo - step).max(LN_X_MIN);
            if g(lo) <= 0.0 {
                break;
            }
            if lo <= LN_X_MIN {
                return Ok(None);
            }
            hi = lo;
            step *= 2.0;
        }
    }
    // Safeguarded Newton on [lo, hi].
    let tol = 1e-9 * y.abs().max(1.0);
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = g(s);
        if r.abs() <= tol * 1e-4 {
            break;
        }
        if r > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let slope = barrier_slope_at_ln(s, rho, q);
        let mut next = s - r / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let converged = (next - s).abs() <= 1e-15 * s.abs().max(1.0);
        s = next;
        if converged {
            break;
        }
    }
    Ok(Some(s))
}

/// `F⁻¹(y)`; `None` signals that `y` is outside `Dom(F⁻¹)`. Results below
/// the smallest positive double are returned as `0`; results above the
/// largest are an error (use [`barrier_f_inverse_ln`]).
pub fn barrier_f_inverse(y: f64, rho: &ModulusOfContinuity, q: f64) -> Result<Option<f64>> {
    barrier_f_inverse_ln(y, rho, q)?.map(|s| finite_exp(s, "F⁻¹")).transpose()
}

fn finite_exp(s: f64, what: &str) -> Result<f64> {
    let v = s.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { what: format!("{what} exceeds the double range (ln = {s})"), t: f64::NAN })
    }
}

#[derive(Debug, Clone)]
pub struct BihariParams {
    pub a: f64,
    pub b_coef: f64,
    /// Kernel exponent, `1/2 < α < 1` (unrelated to the SDE's `α < 1/2`).
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub rho: ModulusOfContinuity,
    pub t: f64,
}

/// Conjugate exponent `q = p/(p-1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

impl BihariParams {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Parameter(m));
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return err(format!("a must be >= 0, got {}", self.a));
        }
        if !(self.b_coef >= 0.0 && self.b_coef.is_finite()) {
            return err(format!("b must be >= 0, got {}", self.b_coef));
        }
        if !(self.alpha > 0.5 && self.alpha < 1.0) {
            return err(format!("alpha must lie in (1/2, 1), got {}", self.alpha));
        }
        if !(self.p > 1.0 && self.p < 2.0) {
            return err(format!("p must lie in (1, 2), got {}", self.p));
        }
        if !(self.alpha < 1.0 / self.p) {
            return err(format!("need alpha < 1/p, got alpha = {}, 1/p = {}", self.alpha, 1.0 / self.p));
        }
        check_q(self.q)?;
        if (1.0 / self.p + 1.0 / self.q - 1.0).abs() > 1e-12 {
            return err(format!("1/p + 1/q must equal 1, got {}", 1.0 / self.p + 1.0 / self.q));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return err(format!("t must be >= 0, got {}", self.t));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundStatus {
    Bound(f64),
    /// The argument of `F⁻¹` left its domain; the bound says nothing.
    EscapedDomain,
}

/// The bound together with its intermediates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BihariEvaluation {
    pub c_alpha_p: f64,
    /// `F(2^{q-1} a^q)`; `-∞` when `a = 0`.
    pub f_of_start: f64,
    /// `2^{q-1} b^q C^{q/p} t^{q(1/p-α)+1}`.
    pub increment: f64,
    /// Argument of `F⁻¹`.
    pub f_argument: f64,
    pub status: BoundStatus,
}

impl BihariEvaluation {
    pub fn value(&self) -> Option<f64> {
        match self.status {
            BoundStatus::Bound(v) => Some(v),
            BoundStatus::EscapedDomain => None,
        }
    }
}

/// Evaluates the bound exactly as displayed in the module docs. `a = 0`
/// gives `0` (the argument of `F⁻¹` is `-∞`, i.e. `F⁻¹ = 0`).
pub fn bihari_bound(params: &BihariParams) -> Result<BihariEvaluation> {
    params.validate()?;
    let BihariParams { a, b_coef, alpha, p, q, ref rho, t } = *params;
    let c = beta_constant(alpha, p)?;
    let two = 2f64.powf(q - 1.0);
    let increment = two * b_coef.powf(q) * c.powf(q / p) * t.powf(q * (1.0 / p - alpha) + 1.0);
    if a == 0.0 {
        return Ok(BihariEvaluation {
            c_alpha_p: c,
            f_of_start: f64::NEG_INFINITY,
            increment,
            f_argument: f64::NEG_INFINITY,
            status: BoundStatus::Bound(0.0),
        });
    }
    // ln(2^{q-1} a^q), kept in logs so tiny `a` does not underflow.
    let ln_start = (q - 1.0) * std::f64::consts::LN_2 + q * a.ln();
    let f_start = barrier_at_ln(ln_start, rho, q);
    let arg = f_start + increment;
    let status = match barrier_f_inverse_ln(arg, rho, q)? {
        Some(s) => BoundStatus::Bound(finite_exp(s / q, "bound")?),
        None => BoundStatus::EscapedDomain,
    };
    Ok(BihariEvaluation { c_alpha_p: c, f_of_start: f_start, increment, f_argument: arg, status })
}

/// `F(10^{-k})` for `k = 1..=k_max`, used to certify numerically that
/// `∫_{0+} du/ϱ^q(u^{1/q})` diverges.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceDiagnostic {
    pub values: Vec<(u32, f64)>,
    /// `|F(10^{-k})|` strictly increasing with `F < 0` throughout.
    pub strictly_increasing: bool,
    /// Successive per-decade increments of `|F|` shrink by less than a factor
    /// of two, i.e. slower than any convergent geometric tail (no plateau).
    /// Judged on the decades below the modulus' kink; needs at least three.
    pub no_plateau: bool,
}

impl DivergenceDiagnostic {
    pub fn certified(&self) -> bool {
        self.strictly_increasing && self.no_plateau
    }
}

pub fn divergence_diagnostic(rho: &ModulusOfContinuity, k_max: u32) -> Result<DivergenceDiagnostic> {
    let q = rho.q();
    let values: Vec<(u32, f64)> = (1..=k_max)
        .map(|k| Ok((k, barrier_at_ln(-(k as f64) * std::f64::consts::LN_10, rho, q))))
        .collect::<Result<_>>()?;
    let mags: Vec<f64> = values.iter().map(|(_, v)| -v).collect();
    let strictly_increasing = mags.iter().all(|&m| m > 0.0) && mags.windows(2).all(|w| w[1] > w[0]);
    // The plateau test reads the tail only: decades where `u^{1/q}` is
    // already below the kink, so the linear extension does not distort it.
    let core = rho.delta().map_or(0, |d| {
        let ln_core = q * d.ln();
        values.iter().position(|&(k, _)| -(k as f64) * std::f64::consts::LN_10 <= ln_core).unwrap_or(values.len())
    });
    let incs: Vec<f64> = mags[core..].windows(2).map(|w| w[1] - w[0]).collect();
    let no_plateau = incs.len() >= 2 && incs.windows(2).all(|w| w[0] > 0.0 && w[1] >= 0.5 * w[0]);
    Ok(DivergenceDiagnostic { values, strictly_increasing, no_plateau })
}
