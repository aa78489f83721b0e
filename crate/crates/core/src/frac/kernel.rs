//! Closed-form integration of power kernels against linear segments.
//!
//! Every singular integral in the crate reduces to a sum over segments of
//! `∫_p^q e(r) r^{-γ} dr`, where `r` is the distance to an anchor point and
//! `e` is affine in `r` (the interpolant is linear on each segment). These
//! integrals are evaluated exactly; the only approximation left is the
//! piecewise-linear reading of the sampled data.

use crate::grid::TimeGrid;
use crate::quad::gauss_legendre;
use std::sync::OnceLock;

/// `∫_p^q r^{k-1} dr` for `0 < p < q` (or `p = 0` when `k > 0`).
#[inline]
pub fn power_moment(k: f64, p: f64, q: f64) -> f64 {
    if p == 0.0 {
        debug_assert!(k > 0.0);
        return q.powf(k) / k;
    }
    let ratio = (q - p) / p;
    if k == 0.0 {
        ratio.ln_1p()
    } else {
        // p^k * ((q/p)^k - 1) / k, free of cancellation for narrow segments.
        p.powf(k) * (k * ratio.ln_1p()).exp_m1() / k
    }
}

/// `∫_p^q e(r) r^{-γ} dr` for `e` affine with `e(p) = ep`, `e(q) = eq`, given
/// the moments `m0 = ∫ r^{-γ}` and `m1 = ∫ r^{1-γ}` over `[p, q]`.
#[inline]
fn affine_from_moments(ep: f64, eq: f64, p: f64, q: f64, m0: f64, m1: f64) -> f64 {
    let slope = (eq - ep) / (q - p);
    if p == 0.0 {
        ep * m0 + slope * m1
    } else {
        ep * m0 + slope * (m1 - p * m0)
    }
}

/// `∫_0^q r^{-γ} dr` when integrable, else 0 (the caller then has `ep = 0`).
#[inline]
fn anchor_m0(q: f64, gamma: f64) -> f64 {
    if gamma < 1.0 {
        q.powf(1.0 - gamma) / (1.0 - gamma)
    } else {
        0.0
    }
}

/// Signed integral `∫_p^q e(r) r^{-γ} dr`. When `p = 0` and `γ ≥ 1` the caller
/// guarantees `ep = 0`, which keeps the integral finite for `γ < 2`.
pub fn affine_integral(ep: f64, eq: f64, p: f64, q: f64, gamma: f64) -> f64 {
    let m1 = power_moment(2.0 - gamma, p, q);
    let m0 = if p == 0.0 { anchor_m0(q, gamma) } else { power_moment(1.0 - gamma, p, q) };
    affine_from_moments(ep, eq, p, q, m0, m1)
}

/// `∫_p^q |e(r)| r^{-γ} dr`, splitting at the sign change of `e`.
pub fn abs_affine_integral(ep: f64, eq: f64, p: f64, q: f64, gamma: f64) -> f64 {
    if ep * eq >= 0.0 {
        return affine_integral(ep, eq, p, q, gamma).abs();
    }
    let root = p + ep / (ep - eq) * (q - p);
    if !(root > p && root < q) {
        return affine_integral(ep, eq, p, q, gamma).abs();
    }
    affine_integral(ep, 0.0, p, root, gamma).abs() + affine_integral(0.0, eq, root, q, gamma).abs()
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

/// `∫_p^q |e(r)| r^{-γ} dr` for vector-valued affine `e` (Euclidean norm).
/// Exact for one component and on the anchor segment; Gauss–Legendre on the
/// smooth remaining segments otherwise.
pub fn norm_affine_integral(ep: &[f64], eq: &[f64], p: f64, q: f64, gamma: f64) -> f64 {
    if ep.len() == 1 {
        return abs_affine_integral(ep[0], eq[0], p, q, gamma);
    }
    if p == 0.0 && ep.iter().all(|&v| v == 0.0) {
        let n = eq.iter().map(|v| v * v).sum::<f64>().sqrt();
        return n / q * power_moment(2.0 - gamma, 0.0, q);
    }
    let (xs, ws) = gl8();
    let mut acc = 0.0;
    if p == 0.0 {
        // r = q v^4 removes the integrable singularity at the anchor.
        for (&v, &w) in xs.iter().zip(ws) {
            let x = v.powi(4);
            let r = q * x;
            let n2: f64 = ep.iter().zip(eq).map(|(a, b)| (a + x * (b - a)).powi(2)).sum();
            acc += w * n2.sqrt() * r.powf(-gamma) * 4.0 * v.powi(3);
        }
        return acc * q;
    }
    for (&x, &w) in xs.iter().zip(ws) {
        let r = p + x * (q - p);
        let n2: f64 = ep.iter().zip(eq).map(|(a, b)| (a + x * (b - a)).powi(2)).sum();
        acc += w * n2.sqrt() * r.powf(-gamma);
    }
    acc * (q - p)
}

/// Kernel moments for segments anchored at grid nodes. On uniform grids all
/// node distances are integer multiples of the step, so the moments come from
/// precomputed tables.
pub struct NodeKernel {
    gamma: f64,
    table: Option<UniformTable>,
}

struct UniformTable {
    /// `∫ r^{-γ}` and `∫ r^{1-γ}` over segment `[j h, (j+1) h]`.
    m0: Vec<f64>,
    m1: Vec<f64>,
}

impl NodeKernel {
    pub fn new(grid: &TimeGrid, gamma: f64) -> Self {
        let table = grid.uniform_step().map(|h| {
            let n = grid.steps();
            let mut m0 = vec![anchor_m0(h, gamma); n];
            let mut m1 = vec![0.0; n];
            for j in 0..n {
                let (p, q) = (j as f64 * h, (j + 1) as f64 * h);
                m1[j] = power_moment(2.0 - gamma, p, q);
                if j > 0 {
                    m0[j] = power_moment(1.0 - gamma, p, q);
                }
            }
            UniformTable { m0, m1 }
        });
        Self { gamma, table }
    }

    /// Signed integral over the segment `[p, q]` which is `offset` cells away
    /// from the anchor node.
    #[inline]
    pub fn signed(&self, ep: f64, eq: f64, p: f64, q: f64, offset: usize) -> f64 {
        match &self.table {
            Some(t) => affine_from_moments(ep, eq, p, q, t.m0[offset], t.m1[offset]),
            None => affine_integral(ep, eq, p, q, self.gamma),
        }
    }

    /// Integral of the absolute value over the segment.
    #[inline]
    pub fn abs(&self, ep: f64, eq: f64, p: f64, q: f64, offset: usize) -> f64 {
        if ep * eq >= 0.0 {
            self.signed(ep, eq, p, q, offset).abs()
        } else {
            abs_affine_integral(ep, eq, p, q, self.gamma)
        }
    }

    /// Norm integral for vector-valued increments.
    pub fn norm(&self, ep: &[f64], eq: &[f64], p: f64, q: f64, offset: usize) -> f64 {
        if ep.len() == 1 {
            self.abs(ep[0], eq[0], p, q, offset)
        } else {
            norm_affine_integral(ep, eq, p, q, self.gamma)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(e: impl Fn(f64) -> f64, p: f64, q: f64, gamma: f64) -> f64 {
        // Midpoint rule after r = p + (q-p) s^4 to tame the singularity at 0.
        let n = 400_000;
        let mut acc = 0.0;
        for i in 0..n {
            let s = (i as f64 + 0.5) / n as f64;
            let r = p + (q - p) * s.powi(4);
            let dr = (q - p) * 4.0 * s.powi(3) / n as f64;
            acc += e(r) * r.powf(-gamma) * dr;
        }
        acc
    }

    #[test]
    fn affine_matches_brute_force() {
        let (p, q, g) = (0.3, 0.7, 1.3);
        let v = affine_integral(2.0, -1.0, p, q, g);
        let b = brute(|r| 2.0 - 3.0 / 0.4 * (r - p), p, q, g);
        assert!((v - b).abs() < 1e-8, "{v} {b}");
        let a = abs_affine_integral(2.0, -1.0, p, q, g);
        let ba = brute(|r| (2.0 - 3.0 / 0.4 * (r - p)).abs(), p, q, g);
        assert!((a - ba).abs() < 1e-7, "{a} {ba}");
    }

    #[test]
    fn anchor_segment_is_finite() {
        // ∫_0^q (c r) r^{-γ} = c q^{2-γ}/(2-γ)
        let v = affine_integral(0.0, 0.5, 0.0, 0.5, 1.25);
        assert!((v - 0.5f64.powf(0.75) / 0.75).abs() < 1e-14);
    }

    #[test]
    fn vector_norm_agrees_with_scalar_for_parallel_data() {
        let (p, q, g) = (0.2, 0.5, 1.4);
        let s = abs_affine_integral(0.6, 0.8, p, q, g);
        let v = norm_affine_integral(&[0.36, 0.48], &[0.48, 0.64], p, q, g);
        assert!((s - v).abs() < 1e-8, "{s} {v}");
    }

    #[test]
    fn uniform_table_matches_direct() {
        let g = TimeGrid::uniform(1.0, 16).unwrap();
        let k = NodeKernel::new(&g, 1.3);
        let h = 1.0 / 16.0;
        let a = k.signed(0.4, -0.2, 3.0 * h, 4.0 * h, 3);
        let b = affine_integral(0.4, -0.2, 3.0 * h, 4.0 * h, 1.3);
        assert!((a - b).abs() < 1e-13);
    }
}
