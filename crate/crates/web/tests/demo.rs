use mixedsde_core::bihari::beta_constant;
use mixedsde_web::demo::*;

#[test]
fn fbm_path_shape_and_determinism() {
    let p = fbm_path(0.7, 256, 3).unwrap();
    assert_eq!(p.len(), 257);
    assert_eq!(p[0], 0.0);
    assert_eq!(p, fbm_path(0.7, 256, 3).unwrap());
    assert_ne!(p, fbm_path(0.7, 256, 4).unwrap());
    assert!(fbm_path(0.4, 256, 3).is_err());
    assert!(fbm_path(0.7, 0, 3).is_err());
    assert!(fbm_path(0.7, MAX_STEPS + 1, 3).is_err());
}

fn sup_gap(coarse: &[f64], fine: &[f64], stride: usize) -> f64 {
    coarse.iter().enumerate().map(|(i, c)| (c - fine[i * stride]).abs()).fold(0.0, f64::max)
}

#[test]
fn euler_paths_share_noise_across_partitions() {
    let fine = euler_path("linear", 0.75, 1024, 1024, 9).unwrap();
    assert_eq!(fine.len(), 1025);
    assert_eq!(fine[0], 1.0);
    let far = sup_gap(&euler_path("linear", 0.75, 32, 1024, 9).unwrap(), &fine, 32);
    let near = sup_gap(&euler_path("linear", 0.75, 512, 1024, 9).unwrap(), &fine, 2);
    assert!(near < far, "{near} vs {far}");
    assert!(euler_path("linear", 0.75, 48, 1024, 9).is_err());
}

#[test]
fn euler_path_is_node_major() {
    let n = preset_dimension("trig").unwrap();
    assert_eq!(n, 2);
    let x = euler_path("trig", 0.75, 64, 64, 1).unwrap();
    assert_eq!(x.len(), 65 * n);
    assert_eq!(&x[..2], [0.5, -0.5]);
    assert!(preset_dimension("nope").is_err());
}

#[test]
fn bihari_curve_matches_exponential_for_identity_modulus() {
    let (a, b, alpha, p) = (0.5, 0.6, 0.6, 1.5);
    let q = 3.0;
    let curve = bihari_curve(a, b, alpha, p, "identity", 0.0, 1.0, 10).unwrap();
    let cap = beta_constant(alpha, p).unwrap();
    for (k, v) in curve.iter().enumerate() {
        let t = (k + 1) as f64 / 10.0;
        let inc = 2f64.powf(q - 1.0) * b.powf(q) * cap.powf(q / p) * t.powf(q * (1.0 / p - alpha) + 1.0);
        let exact = 2f64.powf((q - 1.0) / q) * a * (inc / q).exp();
        assert!((v / exact - 1.0).abs() < 1e-9, "t={t}: {v} vs {exact}");
    }
    assert!(curve.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn bihari_curve_edge_cases() {
    let zero = bihari_curve(0.0, 1.0, 0.55, 1.6, "rho1", 0.2, 0.5, 5).unwrap();
    assert!(zero.iter().all(|&v| v == 0.0));
    let rho2 = bihari_curve(1.0, 1.0, 0.55, 1.6, "rho2", 0.2, 1.0, 20).unwrap();
    assert!(rho2.iter().all(|v| v.is_finite() || v.is_nan()));
    assert!(bihari_curve(1.0, 1.0, 0.55, 1.6, "sqrt", 0.2, 1.0, 5).is_err());
    assert!(bihari_curve(1.0, 1.0, 0.3, 1.6, "rho1", 0.2, 1.0, 5).is_err());
    assert!(bihari_curve(1.0, 1.0, 0.55, 1.6, "rho1", 0.2, 0.0, 5).is_err());
}
