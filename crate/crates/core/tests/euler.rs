use mixedsde_core::coefficients::{linear_preset, trig_preset, CoefficientSet, Dims, ModulusOfContinuity};
use mixedsde_core::drivers::{path_seed, sample_bm, sample_fbm, DriverSeeds, FbmMethod, HurstParameter};
use mixedsde_core::euler::*;
use mixedsde_core::frac::gls_integral;
use mixedsde_core::{SamplePath, TimeGrid};
use proptest::prelude::*;

fn scalar(b: f64, sw: f64, sh: f64) -> CoefficientSet {
    CoefficientSet::new(
        "affine",
        Dims::scalar(),
        move |_, x, o| o[0] = b * x[0],
        move |_, _, o| o[0] = sw,
        move |_, _, o| o[0] = sh,
        1.0,
        1.0,
        ModulusOfContinuity::identity(2.0).unwrap(),
    )
    .unwrap()
}

fn fbm(n: usize, seed: u64) -> SamplePath {
    sample_fbm(&TimeGrid::uniform(1.0, n).unwrap(), HurstParameter::new(0.75).unwrap(), seed, FbmMethod::CirculantFft)
        .unwrap()
}

#[test]
fn pure_noise_telescopes() {
    let g = TimeGrid::uniform(1.0, 256).unwrap();
    let w = sample_bm(&g, 3, 1).unwrap();
    let bh = fbm(256, 4);
    let zero = SamplePath::constant(g.clone(), &[0.0]);
    let cfg = EulerConfig::new(g, vec![0.5]);

    let x = euler_solve(&scalar(0.0, 1.0, 0.0), &cfg, &w, &zero).unwrap();
    let y = euler_solve(&scalar(0.0, 0.0, 1.0), &cfg, &zero, &bh).unwrap();
    for i in 0..x.path.len() {
        assert!((x.path.value(i)[0] - 0.5 - w.value(i)[0]).abs() < 1e-12);
        assert!((y.path.value(i)[0] - 0.5 - bh.value(i)[0]).abs() < 1e-12);
    }
}

#[test]
fn pure_drift_is_geometric() {
    let g = TimeGrid::uniform(1.0, 100).unwrap();
    let zero = SamplePath::constant(g.clone(), &[0.0]);
    let x = euler_solve(&scalar(1.0, 0.0, 0.0), &EulerConfig::new(g, vec![3.0]), &zero, &zero).unwrap();
    assert!((x.path.last()[0] / (3.0 * 1.01f64.powi(100)) - 1.0).abs() < 1e-12);
}

#[test]
fn frozen_coefficient_matches_generalised_integral() {
    // With σ_H frozen at the left node, one step equals ∫ c dB^H over the cell.
    let bh = fbm(64, 17);
    let g = bh.grid().clone();
    let zero = SamplePath::constant(g.clone(), &[0.0]);
    let c = 0.8;
    let x = euler_solve(&scalar(0.0, 0.0, c), &EulerConfig::new(g.clone(), vec![0.0]), &zero, &bh).unwrap();
    let konst = SamplePath::constant(g.clone(), &[c]);
    let t = g.nodes();
    for i in [0, 5, 31, 63] {
        let step = x.path.value(i + 1)[0] - x.path.value(i)[0];
        let gls = gls_integral(&konst, &bh, 0.3, t[i], t[i + 1]).unwrap();
        assert!((step - gls).abs() <= 1e-8 * step.abs().max(1e-3), "cell {i}: {step} vs {gls}");
    }
}

#[test]
fn truncation_examples() {
    let bh = fbm(512, 5);
    assert_eq!(stopping_time_tr(&bh, 0.3, 1e9).unwrap(), 1.0);
    assert_eq!(stopping_time_tr(&bh, 0.3, 1e-12).unwrap(), bh.times()[1]);
    let mut last = 0.0;
    for r in [1.0, 2.0, 4.0, 8.0] {
        let t = stopping_time_tr(&bh, 0.3, r).unwrap();
        assert!(t >= last, "R = {r}: {t} < {last}");
        last = t;
    }
    assert!(stopping_time_tr(&bh, 0.3, 0.0).is_err());
}

#[test]
fn truncated_solution_freezes_after_stopping_time() {
    let p = linear_preset();
    let g = TimeGrid::uniform(1.0, 256).unwrap();
    let seeds = DriverSeeds::independent(11);
    let w = sample_bm(&g, seeds.w, 1).unwrap();
    let bh = fbm(256, seeds.bh);
    let tr = stopping_time_tr(&bh, 0.3, 2.0).unwrap();
    let cfg = EulerConfig::new(g.clone(), p.x0.clone()).with_truncation(2.0, 0.3);
    let x = euler_solve(&p.coefficients, &cfg, &w, &bh).unwrap();
    assert_eq!(x.stopped_at, Some(tr));
    let k = g.last_index_at_or_before(tr);
    for i in k..x.path.len() {
        assert_eq!(x.path.value(i), x.path.value(k));
    }
    let free = euler_solve(&p.coefficients, &EulerConfig::new(g, p.x0.clone()), &w, &bh).unwrap();
    for i in 0..=k {
        assert_eq!(x.path.value(i), free.path.value(i));
    }
}

#[test]
fn tau_m_is_monotone_in_m() {
    let p = trig_preset();
    let g = TimeGrid::uniform(1.0, 128).unwrap();
    let solve = |seed: u64| {
        let s = DriverSeeds::independent(seed);
        let w = sample_bm(&g, s.w, 1).unwrap();
        let bh = sample_fbm(&g, HurstParameter::new(0.7).unwrap(), s.bh, FbmMethod::CirculantFft).unwrap();
        let bh2 = sample_fbm(&g, HurstParameter::new(0.7).unwrap(), s.bh ^ 1, FbmMethod::CirculantFft).unwrap();
        let mut v = Vec::with_capacity(bh.values().len() * 2);
        for i in 0..bh.len() {
            v.push(bh.value(i)[0]);
            v.push(bh2.value(i)[0]);
        }
        let bh = SamplePath::new(g.clone(), 2, v).unwrap();
        euler_solve(&p.coefficients, &EulerConfig::new(g.clone(), p.x0.clone()), &w, &bh).unwrap()
    };
    let (x, y) = (solve(1), solve(2));
    assert_eq!(stopping_time_tau_m(&x, &y, 0.3, 0.0).unwrap(), 0.0);
    let mut last = 0.0;
    for m in [0.5, 1.0, 2.0, 4.0, 1e6] {
        let t = stopping_time_tau_m(&x, &y, 0.3, m).unwrap();
        assert!(t >= last, "M = {m}");
        last = t;
    }
    assert_eq!(last, 1.0);
}

#[test]
fn stopped_process_is_consistent() {
    let p = linear_preset();
    let g = TimeGrid::uniform(1.0, 64).unwrap();
    let w = sample_bm(&g, 1, 1).unwrap();
    let bh = fbm(64, 2);
    let x = euler_solve(&p.coefficients, &EulerConfig::new(g, p.x0.clone()), &w, &bh).unwrap();
    let s = stop_process(&x, 0.4).unwrap();
    assert_eq!(s.stopped_at, Some(0.4));
    let k = x.path.grid().last_index_at_or_before(0.4);
    assert_eq!(&s.path.values()[..=k], &x.path.values()[..=k]);
    assert!(s.path.values()[k..].iter().all(|&v| v == x.path.value(k)[0]));
    // Stopping twice keeps the earlier time; stopping at T changes nothing.
    assert_eq!(stop_process(&s, 0.8).unwrap().stopped_at, Some(0.4));
    assert_eq!(stop_process(&x, 1.0).unwrap(), x);
}

#[test]
fn solution_csv_round_trip() {
    let p = linear_preset();
    let g = TimeGrid::uniform(1.0, 32).unwrap();
    let w = sample_bm(&g, 9, 1).unwrap();
    let bh = fbm(32, 10);
    let cfg = EulerConfig::new(g, p.x0.clone()).with_truncation(1.5, 0.3);
    let x = euler_solve(&p.coefficients, &cfg, &w, &bh).unwrap();
    let text = x.to_csv_string();
    assert!(text.starts_with("# stopped_at="));
    let back = SolutionPath::read_csv(text.as_bytes()).unwrap();
    assert_eq!(back.path, x.path);
    assert_eq!(back.stopped_at, x.stopped_at);
}

fn ensemble(n: usize, master: u64) -> Vec<SolutionPath> {
    let p = linear_preset();
    let g = TimeGrid::uniform(1.0, 64).unwrap();
    let h = HurstParameter::new(0.7).unwrap();
    (0..n as u64)
        .map(|k| {
            let s = DriverSeeds::independent(path_seed(master, k));
            let w = sample_bm(&g, s.w, 1).unwrap();
            let bh = sample_fbm(&g, h, s.bh, FbmMethod::CirculantFft).unwrap();
            euler_solve(&p.coefficients, &EulerConfig::new(g.clone(), p.x0.clone()), &w, &bh).unwrap()
        })
        .collect()
}

#[test]
fn moment_estimates_are_self_consistent() {
    let small = ensemble(1000, 1);
    let large = ensemble(4000, 2);
    let a = moment_diagnostic(&small, 0.3, 1.0, 1).unwrap();
    let b = moment_diagnostic(&large, 0.3, 1.0, 1).unwrap();
    assert!((a.mean / b.mean - 1.0).abs() < 0.1, "{a:?} vs {b:?}");
    let mut last = 0.0;
    for t in [0.25, 0.5, 0.75, 1.0] {
        let m = moment_diagnostic(&small, 0.3, t, 2).unwrap().mean;
        assert!(m >= last);
        last = m;
    }
    assert!(moment_diagnostic(&[], 0.3, 1.0, 1).is_err());
}

#[test]
fn non_finite_state_is_reported() {
    let g = TimeGrid::uniform(1.0, 50).unwrap();
    let zero = SamplePath::constant(g.clone(), &[0.0]);
    let blow = CoefficientSet::new(
        "blow",
        Dims::scalar(),
        |_, x, o| o[0] = x[0] * x[0] * 1e100,
        |_, _, o| o[0] = 0.0,
        |_, _, o| o[0] = 0.0,
        1.0,
        1.0,
        ModulusOfContinuity::identity(2.0).unwrap(),
    )
    .unwrap();
    let err = euler_solve(&blow, &EulerConfig::new(g, vec![1.0]), &zero, &zero).unwrap_err();
    assert!(err.to_string().contains("Euler cell"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sup_distance_is_a_metric(seed in any::<u64>()) {
        let g = TimeGrid::uniform(1.0, 32).unwrap();
        let a = sample_bm(&g, seed, 2).unwrap();
        let b = sample_bm(&g, seed ^ 7, 2).unwrap();
        let c = sample_bm(&g, seed ^ 9, 2).unwrap();
        let coarse = TimeGrid::uniform(1.0, 8).unwrap();
        let ab = sup_distance(&a, &b, &coarse).unwrap();
        prop_assert_eq!(sup_distance(&a, &a, &coarse).unwrap(), 0.0);
        prop_assert_eq!(ab, sup_distance(&b, &a, &coarse).unwrap());
        prop_assert!(ab <= sup_distance(&a, &c, &coarse).unwrap() + sup_distance(&c, &b, &coarse).unwrap() + 1e-12);
        prop_assert!(ab <= sup_distance(&a, &b, &g).unwrap());
    }

    #[test]
    fn solve_is_deterministic(seed in any::<u64>()) {
        let p = linear_preset();
        let g = TimeGrid::uniform(1.0, 32).unwrap();
        let s = DriverSeeds::independent(seed);
        let w = sample_bm(&g, s.w, 1).unwrap();
        let bh = fbm(32, s.bh);
        let cfg = EulerConfig::new(g, p.x0.clone());
        let x = euler_solve(&p.coefficients, &cfg, &w, &bh).unwrap();
        let y = euler_solve(&p.coefficients, &cfg, &w, &bh).unwrap();
        prop_assert_eq!(x.path, y.path);
    }
}
