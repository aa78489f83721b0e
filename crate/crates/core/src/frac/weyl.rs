//! Weyl–Marchaud derivatives of piecewise-linear functions.
//!
//! The singular difference integrals are integrated in closed form against
//! each linear segment, so no quadrature node ever sits on the singularity.

use statrs::function::gamma::gamma;

use super::kernel::affine_integral;
use crate::error::{Error, Result};
use crate::grid::SamplePath;

fn scalar(f: &SamplePath) -> Result<()> {
    if f.dim() != 1 {
        return Err(Error::Dimension(format!(
            "expected a scalar path, got dimension {}; use component_path",
            f.dim()
        )));
    }
    Ok(())
}

fn check_order(order: f64) -> Result<()> {
    if order > 0.0 && order < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("fractional order must lie in (0, 1), got {order}")))
    }
}

/// Linear interpolation of node data at `x`.
pub(crate) fn interp(t: &[f64], f: &[f64], x: f64) -> f64 {
    let i = t.partition_point(|&s| s <= x).clamp(1, t.len() - 1);
    let (t0, t1) = (t[i - 1], t[i]);
    let w = (x - t0) / (t1 - t0);
    f[i - 1] + w * (f[i] - f[i - 1])
}

/// `D_{a+}^α f(x)` with `a = t[0]`, for `t[0] < x ≤ t[last]`.
pub(crate) fn left_at(t: &[f64], f: &[f64], alpha: f64, x: f64) -> f64 {
    let a = t[0];
    let fx = interp(t, f, x);
    let gamma_ = alpha + 1.0;
    // Nodes strictly inside (a, x).
    let hi = t.partition_point(|&s| s < x);
    let mut integral = 0.0;
    let mut y1 = x;
    let mut f1 = fx;
    for j in (0..hi).rev() {
        let (y0, f0) = (t[j], f[j]);
        integral += affine_integral(fx - f1, fx - f0, x - y1, x - y0, gamma_);
        y1 = y0;
        f1 = f0;
    }
    (fx / (x - a).powf(alpha) + alpha * integral) / gamma(1.0 - alpha)
}

/// `D_{b-}^{order} g_{b-}(x)` with `b = t[last]`, for `t[0] ≤ x < b`, without
/// the `(-1)^order` prefactor.
pub(crate) fn right_at(t: &[f64], g: &[f64], order: f64, x: f64) -> f64 {
    let n = t.len();
    let b = t[n - 1];
    let gb = g[n - 1];
    let gx = interp(t, g, x);
    let gamma_ = order + 1.0;
    let lo = t.partition_point(|&s| s <= x);
    let mut integral = 0.0;
    let mut y0 = x;
    let mut g0 = gx;
    for j in lo..n {
        let (y1, g1) = (t[j], g[j]);
        integral += affine_integral(gx - g0, gx - g1, y0 - x, y1 - x, gamma_);
        y0 = y1;
        g0 = g1;
    }
    ((gx - gb) / (b - x).powf(order) + order * integral) / gamma(1.0 - order)
}

fn window_data(f: &SamplePath, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let w = f.window(a, b)?;
    Ok((w.times().iter().map(|s| s + a).collect(), w.values().to_vec()))
}

/// Left Weyl–Marchaud derivative `D_{a+}^α f(x)` on `[a, b]`:
///
/// `(1/Γ(1-α)) ( f(x)/(x-a)^α + α ∫_a^x (f(x)-f(y))/(x-y)^{α+1} dy )`.
pub fn weyl_left(f: &SamplePath, alpha: f64, a: f64, b: f64, x: f64) -> Result<f64> {
    scalar(f)?;
    check_order(alpha)?;
    if !(a < x && x < b) {
        return Err(Error::Domain(format!("x = {x} must lie in ({a}, {b})")));
    }
    let (t, v) = window_data(f, a, b)?;
    Ok(left_at(&t, &v, alpha, x))
}

/// Right derivative of the shifted function `g_{b-}(x) = g(x) - g(b)`:
///
/// `(1/Γ(1-ν)) ( g_{b-}(x)/(b-x)^ν + ν ∫_x^b (g(x)-g(y))/(y-x)^{ν+1} dy )`.
///
/// The complex `(-1)^ν` prefactor is left out; [`super::gls_integral`]
/// accounts for the combined sign.
pub fn weyl_right_of_shifted(g: &SamplePath, order: f64, b: f64, x: f64) -> Result<f64> {
    scalar(g)?;
    check_order(order)?;
    if !(x >= 0.0 && x < b) {
        return Err(Error::Domain(format!("x = {x} must lie in [0, {b})")));
    }
    let (t, v) = window_data(g, 0.0, b)?;
    Ok(right_at(&t, &v, order, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;

    fn line(n: usize, slope: f64, offset: f64) -> SamplePath {
        SamplePath::from_fn(TimeGrid::uniform(1.0, n).unwrap(), |s| offset + slope * s)
    }

    #[test]
    fn left_of_constant() {
        let f = line(10, 0.0, 3.0);
        let (alpha, x) = (0.3, 0.45);
        let v = weyl_left(&f, alpha, 0.0, 1.0, x).unwrap();
        let expected = 3.0 / (gamma(1.0 - alpha) * x.powf(alpha));
        assert!((v - expected).abs() < 1e-13 * expected);
    }

    #[test]
    fn left_of_identity_half_order() {
        // f(y) = y, α = 1/2, x = 1 (inside (0, 2)): (1 + 0.5·2)/√π = 2/√π.
        let f = SamplePath::from_fn(TimeGrid::uniform(2.0, 8).unwrap(), |s| s);
        let v = weyl_left(&f, 0.5, 0.0, 2.0, 1.0).unwrap();
        let expected = 2.0 / std::f64::consts::PI.sqrt();
        assert!((v - expected).abs() < 1e-13, "{v} vs {expected}");
    }

    #[test]
    fn right_of_constant_vanishes() {
        let g = line(12, 0.0, -1.5);
        assert_eq!(weyl_right_of_shifted(&g, 0.6, 1.0, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn right_of_linear_matches_closed_form() {
        // For g(y) = c + m y: D = -m (b-x)^{1-ν} / Γ(2-ν).
        let (m, nu, b) = (1.7, 0.5, 1.0);
        let g = line(16, m, 0.4);
        for x in [0.0, 0.13, 0.5, 0.93] {
            let v = weyl_right_of_shifted(&g, nu, b, x).unwrap();
            let oracle = -m * (b - x).powf(1.0 - nu) / gamma(2.0 - nu);
            assert!((v - oracle).abs() <= 1e-8 * oracle.abs(), "x={x}: {v} vs {oracle}");
        }
        // The worked case x = 0, m = 1: -2/√π.
        let v = weyl_right_of_shifted(&line(4, 1.0, 0.0), 0.5, 1.0, 0.0).unwrap();
        assert!((v + 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        let f = line(4, 1.0, 0.0);
        assert!(weyl_left(&f, 0.3, 0.0, 1.0, 0.0).is_err());
        assert!(weyl_left(&f, 0.3, 0.0, 1.0, 1.0).is_err());
        assert!(weyl_right_of_shifted(&f, 0.3, 1.0, 1.0).is_err());
        assert!(weyl_left(&f, 1.2, 0.0, 1.0, 0.5).is_err());
    }
}
