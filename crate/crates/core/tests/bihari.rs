use mixedsde_core::bihari::*;
use mixedsde_core::coefficients::ModulusOfContinuity;
use mixedsde_core::quad::adaptive;
use proptest::prelude::*;
use statrs::function::beta::{beta, beta_reg};
use std::f64::consts::PI;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `∫_0^t (t-s)^{-e} s^{-e} ds`: by symmetry twice the left half, where
/// `s/t = v^{1/(1-e)}` removes the endpoint singularity.
fn kernel_integral(t: f64, e: f64) -> f64 {
    let k = 1.0 / (1.0 - e);
    let g = |v: f64| k * (1.0 - v.powf(k)).powf(-e);
    t.powf(1.0 - 2.0 * e) * 2.0 * adaptive(g, 0.0, 0.5f64.powf(1.0 - e), 1e-13)
}

#[test]
fn beta_constant_against_quadrature() {
    assert!(rel(beta_constant(0.25, 2.0).unwrap(), PI) < 1e-12);
    assert!(rel(kernel_integral(1.0, 0.5), PI) < 1e-12);
    for (alpha, p) in [(0.3, 1.5), (0.55, 1.6), (0.6, 1.2), (0.1, 1.9)] {
        let c = beta_constant(alpha, p).unwrap();
        assert!(rel(c, kernel_integral(1.0, p * alpha)) < 1e-9, "{alpha} {p}");
    }
}

#[test]
fn kernel_scaling_identity() {
    // ∫_0^t (t-s)^{-pα} s^{-pα} ds = t^{1-2pα} C_{α,p}.
    let (t, alpha, p) = (0.5, 0.3, 1.5);
    let lhs = kernel_integral(t, p * alpha);
    let rhs = t.powf(1.0 - 2.0 * p * alpha) * beta_constant(alpha, p).unwrap();
    assert!(rel(lhs, rhs) < 1e-6);
}

#[test]
fn barrier_against_high_precision_oracle() {
    let rho = ModulusOfContinuity::rho1(2.0, 0.2).unwrap();
    for (x, oracle) in [
        (0.5, -0.738_840_800_719_290_07),
        (0.01, -3.581_788_695_881_646_7),
        (1e-6, -5.779_013_273_217_866_1),
        (30.0, 4.090_439_264_330_783_9),
    ] {
        let f = barrier_f(x, &rho, 2.0).unwrap();
        assert!(rel(f, oracle) < 1e-8, "{x}: {f} vs {oracle}");
    }
}

#[test]
fn linear_modulus_reduces_to_gronwall() {
    // ϱ(u) = c u gives F(x) = ln x / c^q and a closed-form exponential bound.
    let (q, c) = (3.0, 0.7);
    let p = q / (q - 1.0);
    let rho = ModulusOfContinuity::linear(q, c).unwrap();
    let (a, b, alpha) = (0.8, 1.3, 0.6);
    let cap = beta_constant(alpha, p).unwrap();
    for k in 0..50 {
        let t = 0.02 * k as f64;
        let ev = bihari_bound(&BihariParams { a, b_coef: b, alpha, p, q, rho: rho.clone(), t }).unwrap();
        let inc = 2f64.powf(q - 1.0) * b.powf(q) * cap.powf(q / p) * t.powf(q * (1.0 / p - alpha) + 1.0);
        let exact = 2f64.powf((q - 1.0) / q) * a * (c.powf(q) * inc / q).exp();
        assert!(rel(ev.value().unwrap(), exact) < 1e-9, "t = {t}: {:?} vs {exact}", ev.value());
    }
}

fn params(a: f64, b: f64, t: f64) -> BihariParams {
    let q = 8.0 / 3.0;
    BihariParams { a, b_coef: b, alpha: 0.55, p: 1.6, q, rho: ModulusOfContinuity::rho1(q, 0.2).unwrap(), t }
}

#[test]
fn compositional_example() {
    let ev = bihari_bound(&params(1.0, 1.0, 0.5)).unwrap();
    assert!(rel(ev.c_alpha_p, 16.333_549_824_622_713) < 1e-10);
    assert!(rel(ev.increment, 145.305_359_764_079_29) < 1e-10);
    assert!(rel(ev.f_of_start, 1.280_990_074_938_461_3) < 1e-9);
    assert!(rel(ev.value().unwrap(), 1.014_481_764_062_267_0e19) < 1e-8, "{ev:?}");
}

#[test]
fn zero_start_gives_zero() {
    let ev = bihari_bound(&params(0.0, 2.0, 0.9)).unwrap();
    assert_eq!(ev.value(), Some(0.0));
}

#[test]
fn bound_is_monotone_in_each_argument() {
    let v = |a, b, t| bihari_bound(&params(a, b, t)).unwrap().value().unwrap();
    let ladder = [0.01, 0.1, 0.3, 0.6, 1.0];
    for w in ladder.windows(2) {
        assert!(v(w[1], 0.5, 0.5) > v(w[0], 0.5, 0.5));
        assert!(v(0.5, w[1], 0.5) > v(0.5, w[0], 0.5));
        assert!(v(0.5, 0.5, w[1]) > v(0.5, 0.5, w[0]));
    }
    // t = 0 collapses to the start value's bound.
    let start = v(0.5, 0.5, 0.0);
    assert!(rel(start, 2f64.powf(1.0 - 3.0 / 8.0) * 0.5) < 1e-9);
}

/// Equality case of the integral inequality, solved by Picard iteration on a
/// grid with exact kernel weights per cell and the cell maximum of `ϱ(f)`.
fn picard(a: f64, b: f64, alpha: f64, rho: &ModulusOfContinuity, horizon: f64, n: usize) -> Vec<f64> {
    let s: Vec<f64> = (0..=n).map(|i| horizon * i as f64 / n as f64).collect();
    let e = 1.0 - alpha;
    let full = beta(e, e);
    let mut f = vec![a; n + 1];
    for _ in 0..200 {
        let mut next = vec![a; n + 1];
        for i in 1..=n {
            let t = s[i];
            let scale = b * t.powf(alpha) * t.powf(1.0 - 2.0 * alpha) * full;
            let mut acc = 0.0;
            for j in 0..i {
                let w = beta_reg(e, e, (s[j + 1] / t).min(1.0)) - beta_reg(e, e, s[j] / t);
                acc += w * rho.value(f[j].max(f[j + 1]));
            }
            next[i] = a + scale * acc;
        }
        let done = next.iter().zip(&f).all(|(x, y)| (x - y).abs() <= 1e-13 * x.abs());
        f = next;
        if done {
            break;
        }
    }
    f
}

#[test]
fn bound_dominates_the_equality_solution() {
    let q = 8.0 / 3.0;
    let rho = ModulusOfContinuity::rho1(q, 0.2).unwrap();
    let (a, b, alpha) = (0.05, 0.4, 0.55);
    let f = picard(a, b, alpha, &rho, 1.0, 200);
    for i in [10, 50, 100, 200] {
        let t = i as f64 / 200.0;
        let bound = bihari_bound(&BihariParams { a, b_coef: b, alpha, p: 1.6, q, rho: rho.clone(), t })
            .unwrap()
            .value()
            .unwrap();
        assert!(f[i] <= bound, "t = {t}: {} > {bound}", f[i]);
    }
}

#[test]
fn divergence_is_certified_for_osgood_moduli() {
    for rho in [ModulusOfContinuity::rho1(2.0, 0.2).unwrap(), ModulusOfContinuity::rho2(2.0, 0.2).unwrap()] {
        let d = divergence_diagnostic(&rho, 30).unwrap();
        assert!(d.certified(), "{}: {d:?}", rho.label());
    }
    let root = ModulusOfContinuity::custom(2.0, "sqrt", f64::sqrt).unwrap();
    assert!(!divergence_diagnostic(&root, 30).unwrap().certified());
}

#[test]
fn convergent_barrier_has_bounded_inverse_domain() {
    // ϱ(v) = √v with q = 2: F(x) = 2(√x - 1), so F(0+) = -2.
    let root = ModulusOfContinuity::custom(2.0, "sqrt", f64::sqrt).unwrap();
    assert!(rel(barrier_f(0.25, &root, 2.0).unwrap(), -1.0) < 1e-10);
    assert_eq!(barrier_f_inverse(-3.0, &root, 2.0).unwrap(), None);
    assert!(rel(barrier_f_inverse(-1.0, &root, 2.0).unwrap().unwrap(), 0.25) < 1e-9);
}

#[test]
fn invalid_parameters_are_rejected() {
    let mut p = params(1.0, 1.0, 0.5);
    p.alpha = 0.4;
    assert!(bihari_bound(&p).is_err());
    let mut p = params(1.0, 1.0, 0.5);
    p.q = 2.0;
    assert!(bihari_bound(&p).is_err());
    let mut p = params(1.0, 1.0, 0.5);
    p.alpha = 0.7;
    assert!(bihari_bound(&p).is_err());
    assert!(barrier_f(-1.0, &ModulusOfContinuity::identity(2.0).unwrap(), 2.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn inverse_round_trip(lx in (1e-6f64).ln()..(1e3f64).ln()) {
        let rho = ModulusOfContinuity::rho1(2.0, 0.2).unwrap();
        let x = lx.exp();
        let y = barrier_f(x, &rho, 2.0).unwrap();
        let back = barrier_f_inverse(y, &rho, 2.0).unwrap().unwrap();
        prop_assert!(rel(back, x) <= 1e-8, "{} -> {} -> {}", x, y, back);
    }

    #[test]
    fn barrier_is_increasing(l1 in -20.0..10.0f64, l2 in -20.0..10.0f64) {
        prop_assume!((l1 - l2).abs() > 1e-6);
        let rho = ModulusOfContinuity::rho2(2.0, 0.2).unwrap();
        let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
        prop_assert!(barrier_f(lo.exp(), &rho, 2.0).unwrap() < barrier_f(hi.exp(), &rho, 2.0).unwrap());
    }
}
