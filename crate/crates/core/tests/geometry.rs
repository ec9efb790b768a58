use proptest::prelude::*;
use shc_core::geometry::*;
use shc_core::rng::unit_stream;
use shc_core::{Outcome, ShcError};
use std::f64::consts::PI;

fn ellipse() -> Domain {
    let sdf = SdfShape::Ellipse { center: [0.1, -0.2], a: 1.2, b: 0.8 };
    let r = sdf.natural_r_ball();
    Domain::implicit(sdf, r).unwrap()
}

fn sdf_disk() -> Domain {
    Domain::implicit(SdfShape::Sphere { center: vec![0.0, 0.0], radius: 1.0 }, 1.0).unwrap()
}

#[test]
fn signed_distance_examples() {
    let b2 = Domain::unit_ball(2);
    let b3 = Domain::unit_ball(3);
    assert_eq!(signed_distance(&b2, &[0.0, 0.0]), -1.0);
    assert_eq!(signed_distance(&b3, &[2.0, 0.0, 0.0]), 1.0);
    let h = Domain::half_space(vec![0.0, 0.0], vec![0.0, -1.0]).unwrap();
    assert!((signed_distance(&h, &[5.0, 0.3]) + 0.3).abs() < 1e-15);
}

#[test]
fn projection_examples() {
    let p = boundary_projection(&Domain::unit_ball(2), &[0.5, 0.0]).unwrap();
    assert_eq!((p.y.clone(), p.nu.clone(), p.delta), (vec![1.0, 0.0], vec![1.0, 0.0], 0.5));
    let h = Domain::half_space(vec![0.0, 0.0], vec![0.0, -1.0]).unwrap();
    let p = boundary_projection(&h, &[0.7, 0.3]).unwrap();
    assert!((p.y[0] - 0.7).abs() < 1e-15 && p.y[1].abs() < 1e-15);
    assert_eq!(p.nu, vec![0.0, -1.0]);
    assert!((p.delta - 0.3).abs() < 1e-15);
    assert!(matches!(
        boundary_projection(&Domain::unit_ball(2), &[0.0, 0.0]),
        Err(ShcError::NonUniqueProjection { .. })
    ));
}

#[test]
fn implicit_projection_residuals() {
    let d = ellipse();
    let mut rng = unit_stream(3, 0);
    let sampler = LayerSampler::new(&d, 0.2, 256).unwrap();
    for _ in 0..200 {
        let s = sampler.sample(&mut rng);
        let p = boundary_projection(&d, &s.x).unwrap();
        assert!(d.signed_distance(&p.y).abs() <= 1e-8);
        let g = d.gradient(&p.y);
        let n = g[0].hypot(g[1]);
        let diff = [s.x[0] - p.y[0], s.x[1] - p.y[1]];
        let cross = (diff[0] * g[1] - diff[1] * g[0]) / n;
        assert!(cross.abs() <= 1e-6, "{cross}");
        let res: f64 = (0..2).map(|j| (s.x[j] - (p.y[j] - p.delta * p.nu[j])).powi(2)).sum::<f64>().sqrt();
        assert!(res <= 1e-8, "{res}");
    }
}

#[test]
fn gradient_has_unit_norm_in_the_layer() {
    let d = ellipse();
    let sampler = LayerSampler::new(&d, 0.25, 512).unwrap();
    let mut rng = unit_stream(5, 0);
    for _ in 0..1000 {
        let x = sampler.sample(&mut rng).x;
        let g = d.gradient(&x);
        assert!((g[0].hypot(g[1]) - 1.0).abs() <= 1e-4);
    }
}

#[test]
fn declared_r_ball_is_checked() {
    let sdf = SdfShape::Ellipse { center: [0.0, 0.0], a: 1.2, b: 0.8 };
    assert!(Domain::implicit(sdf.clone(), 1.0).is_err());
    assert!(Domain::implicit(sdf, 0.5).is_ok());
}

#[test]
fn volume_examples() {
    assert!((volume(&Domain::unit_ball(2)).unwrap().value - PI).abs() < 1e-12);
    assert!((volume(&Domain::unit_ball(3)).unwrap().value - 4.0 * PI / 3.0).abs() < 1e-12);
    let v = sdf_disk().qmc_volume(1 << 20).unwrap();
    assert!((v.value - PI).abs() < 1e-3, "{v:?}");
    let h = Domain::half_space(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
    assert!(matches!(volume(&h), Err(ShcError::UnboundedDomain)));
}

#[test]
fn ellipse_volume_matches_area() {
    let v = volume(&ellipse()).unwrap();
    assert!((v.value - PI * 1.2 * 0.8).abs() < 1e-3f64.max(4.0 * v.stderr), "{v:?}");
}

#[test]
fn surface_quadrature_examples() {
    let q = surface_quadrature(&Domain::unit_ball(2), 64).unwrap();
    assert!((q.total() - 2.0 * PI).abs() < 1e-10);
    let q = surface_quadrature(&Domain::unit_ball(3), 500).unwrap();
    assert!((q.total() - 4.0 * PI).abs() < 1e-6);
    let c = 2.5;
    assert!((q.integrate(|_, _| c) - c * 4.0 * PI).abs() < 1e-8 * c * 4.0 * PI);
    for (y, n) in q.nodes.iter().zip(&q.normals) {
        assert!((y.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs() < 1e-10);
        assert_eq!(y, n);
    }
}

#[test]
fn implicit_surface_quadrature() {
    let q = surface_quadrature(&sdf_disk(), 4096).unwrap();
    assert!((q.total() / (2.0 * PI) - 1.0).abs() < 3.0 * q.tolerance, "{}", q.total());
    for y in &q.nodes {
        assert!(sdf_disk().signed_distance(y).abs() <= 1e-10);
    }
}

#[test]
fn layer_width_is_limited_to_half_r() {
    let mut rng = unit_stream(1, 0);
    assert!(layer_sample(&Domain::unit_ball(2), 0.5, &mut rng).is_err());
    assert!(layer_sample(&Domain::unit_ball(2), 0.49, &mut rng).is_ok());
}

#[test]
fn layer_samples_reproduce_shell_area() {
    let d = Domain::unit_ball(2);
    let a = 0.1;
    let sampler = LayerSampler::new(&d, a, 4096).unwrap();
    let mut rng = unit_stream(2, 0);
    let n = 200_000;
    let mut sum = 0.0;
    let mut raw = 0.0;
    for _ in 0..n {
        let s = sampler.sample(&mut rng);
        assert!(s.s > 0.0 && s.s < a && d.signed_distance(&s.x) < 0.0);
        sum += s.weight * s.jacobian;
        raw += s.weight;
    }
    let shell = PI * (1.0 - 0.81);
    assert!((sum / n as f64 - shell).abs() < 0.01 * shell);
    assert!((raw / n as f64 - 2.0 * PI * a).abs() < 1e-9);
}

#[test]
fn flat_layer_jacobian_is_one() {
    let h = Domain::half_space(vec![0.0, 0.0], vec![0.0, 1.0]).unwrap();
    for s in [0.0, 0.1, 5.0] {
        assert_eq!(layer_jacobian(&h, &[0.3, 0.0], &[0.0, 1.0], s), 1.0);
    }
    let b = Domain::unit_ball(3);
    assert!((layer_jacobian(&b, &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 0.2) - 0.64).abs() < 1e-12);
}

#[test]
fn coarea_sandwich_examples() {
    let d = Domain::unit_ball(2);
    let rep = coarea_sandwich_check(&d, |_| 1.0, 1.0, 0.1).unwrap();
    assert!((rep.ratio - 0.95).abs() < 1e-3, "{rep:?}");
    assert_eq!(rep.outcome, Outcome::Pass);
    assert!((rep.layer_integral - 0.2 * PI).abs() < 1e-10);
    let half = coarea_sandwich_check(&d, |x| (x[0] > 0.0) as u8 as f64, 1.0, 0.1).unwrap();
    assert_eq!(half.outcome, Outcome::Pass);
    assert!((half.volume_integral / rep.volume_integral - 0.5).abs() < 1e-3);
    assert!((half.layer_integral / rep.layer_integral - 0.5).abs() < 1e-2);
}

#[test]
fn coarea_sandwich_distance_weight_in_3d() {
    let d = Domain::unit_ball(3);
    let rep = coarea_sandwich_check_with(&d, |x| -d.signed_distance(x), 0.2, 0.2, 1 << 20, 2000).unwrap();
    assert!(rep.ratio >= 0.64 && rep.ratio <= 1.0 / 0.64, "{rep:?}");
    assert_ne!(rep.outcome, Outcome::Fail);
}

#[test]
fn coarea_sandwich_on_implicit_domain() {
    let rep = coarea_sandwich_check_with(&ellipse(), |_| 1.0, 1.0, 0.1, 1 << 20, 4096).unwrap();
    assert_eq!(rep.outcome, Outcome::Pass, "{rep:?}");
}

#[test]
fn ball_and_sdf_ball_agree() {
    let b = Domain::unit_ball(2);
    let s = sdf_disk();
    let mut rng = unit_stream(8, 0);
    let sampler = LayerSampler::new(&b, 0.4, 64).unwrap();
    for _ in 0..500 {
        let x = sampler.sample(&mut rng).x;
        assert!((b.signed_distance(&x) - s.signed_distance(&x)).abs() < 1e-6);
        let (p, q) = (b.boundary_projection(&x).unwrap(), s.boundary_projection(&x).unwrap());
        for j in 0..2 {
            assert!((p.y[j] - q.y[j]).abs() < 1e-6 && (p.nu[j] - q.nu[j]).abs() < 1e-6);
        }
    }
    assert!((s.volume().unwrap().value - PI).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normals_are_constant_along_the_normal_segment(theta in 0.0f64..6.283, s1 in 0.0f64..0.3, s2 in 0.0f64..0.3) {
        let d = ellipse();
        let q = surface_quadrature(&d, 64).unwrap();
        let k = ((theta / 6.283) * 63.0) as usize;
        let (y, nu) = (&q.nodes[k], &q.normals[k]);
        let a = d.r_ball() * 0.9;
        let p1 = d.boundary_projection(&[y[0] - s1.min(a) * nu[0], y[1] - s1.min(a) * nu[1]]).unwrap();
        let p2 = d.boundary_projection(&[y[0] - s2.min(a) * nu[0], y[1] - s2.min(a) * nu[1]]).unwrap();
        for j in 0..2 {
            prop_assert!((p1.nu[j] - p2.nu[j]).abs() < 1e-6);
        }
    }

    #[test]
    fn ball_projection_residual(x in -0.99f64..0.99, y in -0.99f64..0.99, r in 0.5f64..3.0) {
        let d = Domain::ball(vec![0.2, -0.1], r).unwrap();
        let p = [0.2 + x * r, -0.1 + y * r];
        prop_assume!(d.signed_distance(&p).abs() < r * 0.99 && d.signed_distance(&p).abs() > 1e-9);
        let pr = d.boundary_projection(&p).unwrap();
        let res: f64 = (0..2).map(|j| (p[j] - (pr.y[j] - pr.delta * pr.nu[j])).powi(2)).sum::<f64>().sqrt();
        prop_assert!(res <= 1e-8 * r);
    }

    #[test]
    fn sandwich_holds_for_bounded_weights(a in 0.02f64..0.45, w in 0.0f64..2.0) {
        let d = Domain::unit_ball(2);
        let rep = coarea_sandwich_check_with(&d, |x| 1.0 + (w * x[0]).sin() * 0.5, 1.5, a, 1 << 16, 512).unwrap();
        prop_assert!(rep.outcome != Outcome::Fail, "{:?}", rep);
    }
}
