use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use shc_core::geometry::{ellipse_sd, SdfShape};
use shc_core::levy_models::{omega, stable_constant, LevyModel};
use shc_core::quadrature::{adaptive, GaussLegendre, GradedMesh};
use shc_core::rng::{derive_seed, derive_seed_indexed, unit_stream};
use shc_core::stats::{chunked, ks_two_sample, linear_fit, Acc};
use shc_core::ShcError;
use std::f64::consts::PI;

#[test]
fn streams_are_reproducible_and_distinct() {
    let draw = |seed, i| -> Vec<u64> {
        let mut r = unit_stream(seed, i);
        (0..4).map(|_| r.random()).collect()
    };
    assert_eq!(draw(7, 3), draw(7, 3));
    assert_ne!(draw(7, 3), draw(7, 4));
    assert_ne!(derive_seed(1, "a"), derive_seed(1, "b"));
    assert_ne!(derive_seed_indexed(1, "a", 0), derive_seed_indexed(1, "a", 1));
}

#[test]
fn welford_merge_matches_direct() {
    let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
    let mut whole = Acc::default();
    xs.iter().for_each(|&x| whole.push(x));
    let mut a = Acc::default();
    let mut b = Acc::default();
    xs[..300].iter().for_each(|&x| a.push(x));
    xs[300..].iter().for_each(|&x| b.push(x));
    a.merge(&b);
    assert!((a.mean - whole.mean).abs() < 1e-12);
    assert!((a.variance() - whole.variance()).abs() < 1e-9);
}

#[test]
fn chunked_is_deterministic() {
    let f = |i: u64, acc: &mut [Acc; 1]| acc[0].push((i as f64).sqrt());
    let a = chunked::<1, _>(10_000, f);
    let b = chunked::<1, _>(10_000, f);
    assert_eq!(a[0].mean.to_bits(), b[0].mean.to_bits());
    assert_eq!(a[0].n, 10_000);
}

#[test]
fn ks_identical_is_zero_and_shift_detected() {
    let mut a: Vec<f64> = (0..100).map(|i| i as f64).collect();
    let mut b = a.clone();
    assert_eq!(ks_two_sample(&mut a, &mut b), 0.0);
    let mut c: Vec<f64> = (0..100).map(|i| i as f64 + 50.0).collect();
    assert!((ks_two_sample(&mut a, &mut c) - 0.5).abs() < 1e-12);
}

#[test]
fn linear_fit_recovers_line() {
    let x = [1.0, 2.0, 3.0, 4.0];
    let y: Vec<f64> = x.iter().map(|x| 2.0 - 0.5 * x).collect();
    let f = linear_fit(&x, &y, &[1.0; 4]).unwrap();
    assert!((f.intercept - 2.0).abs() < 1e-12 && (f.slope + 0.5).abs() < 1e-12);
    let s: f64 = f.intercept_weights.iter().sum();
    assert!((s - 1.0).abs() < 1e-12);
}

#[test]
fn gauss_legendre_exact_on_polynomials() {
    let g = GaussLegendre::new(16);
    assert!((g.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
    let v = g.integrate(|x| x.powi(31) + x.powi(30), -1.0, 1.0);
    assert!((v - 2.0 / 31.0).abs() < 1e-13);
    let g5 = GaussLegendre::new(5);
    assert!((g5.integrate(|x| x.powi(8), 0.0, 1.0) - 1.0 / 9.0).abs() < 1e-14);
}

#[test]
fn graded_mesh_handles_endpoint_singularity() {
    let m = GradedMesh::default();
    let r = m.from_zero(|s| s.powf(-0.5), 1.0).unwrap();
    assert!((r.value - 2.0).abs() < 1e-8, "{r:?}");
    let r = m.from_zero(|s| s.powf(-0.95), 2.0).unwrap();
    assert!((r.value - 2f64.powf(0.05) / 0.05).abs() < 4e-5, "{r:?}");
    let r = m.to_infinity(|s| s.powf(-2.5), 1.0).unwrap();
    assert!((r.value - 1.0 / 1.5).abs() < 1e-8, "{r:?}");
}

#[test]
fn graded_mesh_reports_divergence() {
    let m = GradedMesh { max_panels: 200, ..GradedMesh::default() };
    assert!(m.from_zero(|s| 1.0 / s, 1.0).is_err());
}

#[test]
fn finite_and_adaptive_agree_with_closed_forms() {
    let m = GradedMesh::default();
    let v = m.finite(|s| s.powf(-1.5), 1e-4, 1.0).unwrap();
    assert!((v - 2.0 * (1e2 - 1.0)).abs() < 2e-7);
    let v = adaptive(|x| x.sin(), 0.0, PI, 1e-12);
    assert!((v - 2.0).abs() < 1e-12);
}

#[test]
fn sphere_areas() {
    assert!((omega(1) - 2.0).abs() < 1e-12);
    assert!((omega(2) - 2.0 * PI).abs() < 1e-12);
    assert!((omega(3) - 4.0 * PI).abs() < 1e-12);
}

#[test]
fn stable_constants_match_known_values() {
    assert!((stable_constant(1, 1.0) - 1.0 / PI).abs() < 1e-12);
    assert!((stable_constant(2, 1.0) - 1.0 / (2.0 * PI)).abs() < 1e-12);
    // the Gaussian limit has no jumps
    assert!(stable_constant(1, 1.999) < 0.01);
}

#[test]
fn degenerate_diffusion_rejected() {
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    assert!(matches!(LevyModel::brownian_with(a), Err(ShcError::InvalidModel(_))));
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
    let m = LevyModel::brownian_with(a).unwrap();
    assert!(!m.is_isotropic());
    assert_eq!(m.a_norm(), 2.0);
}

#[test]
fn integrability_of_stable() {
    let m = LevyModel::stable(2, 1.5).unwrap();
    let c = stable_constant(2, 1.5);
    let expect = 2.0 * PI * c * (1.0 / 0.5 + 1.0 / 1.5);
    assert!((m.levy_integrability().unwrap() - expect).abs() < 1e-7 * expect);
}

#[test]
fn ellipse_distance_on_axes() {
    assert!((ellipse_sd(0.0, 0.0, 2.0, 1.0) + 1.0).abs() < 1e-12);
    assert!((ellipse_sd(3.0, 0.0, 2.0, 1.0) - 1.0).abs() < 1e-12);
    assert!((ellipse_sd(0.0, 1.5, 2.0, 1.0) - 0.5).abs() < 1e-12);
    assert!((ellipse_sd(0.0, 1.5, 1.0, 2.0) + 0.5).abs() < 1e-12);
}

#[test]
fn capsule_distance() {
    let c = SdfShape::Capsule { p: vec![-0.5, 0.0], q: vec![0.5, 0.0], radius: 0.5 };
    assert!((c.eval(&[0.0, 0.0]) + 0.5).abs() < 1e-15);
    assert!((c.eval(&[1.5, 0.0]) - 0.5).abs() < 1e-15);
    assert!((c.eval(&[0.2, 1.0]) - 0.5).abs() < 1e-15);
}

proptest! {
    #[test]
    fn ellipse_with_equal_axes_is_a_circle(x in -3.0f64..3.0, y in -3.0f64..3.0, r in 0.2f64..2.0) {
        let d = ellipse_sd(x, y, r, r);
        prop_assert!((d - (x.hypot(y) - r)).abs() < 1e-10);
    }

    #[test]
    fn ellipse_distance_is_one_lipschitz(x in -3.0f64..3.0, y in -3.0f64..3.0, dx in -0.1f64..0.1, dy in -0.1f64..0.1) {
        let a = ellipse_sd(x, y, 1.5, 0.7);
        let b = ellipse_sd(x + dx, y + dy, 1.5, 0.7);
        prop_assert!((a - b).abs() <= dx.hypot(dy) * (1.0 + 1e-8) + 1e-12);
    }

    #[test]
    fn acc_merge_is_order_free(xs in prop::collection::vec(-10.0f64..10.0, 2..200), cut in 0usize..200) {
        let cut = cut.min(xs.len());
        let mut whole = Acc::default();
        xs.iter().for_each(|&x| whole.push(x));
        let (mut a, mut b) = (Acc::default(), Acc::default());
        xs[..cut].iter().for_each(|&x| a.push(x));
        xs[cut..].iter().for_each(|&x| b.push(x));
        b.merge(&a);
        prop_assert!((b.mean - whole.mean).abs() < 1e-10);
        prop_assert!((b.variance() - whole.variance()).abs() < 1e-8 * (1.0 + whole.variance()));
    }
}
