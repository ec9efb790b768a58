use shc_core::estimators::*;
use shc_core::geometry::Domain;
use shc_core::levy_models::{stable_constant, LevyModel};
use shc_core::quadrature::GradedMesh;
use shc_core::ShcError;
use std::f64::consts::PI;

fn brownian() -> LevyModel {
    LevyModel::brownian(2).unwrap()
}

fn disk() -> Domain {
    Domain::unit_ball(2)
}

fn within(e: &Estimate, target: f64, k: f64) -> bool {
    (e.value - target).abs() <= k * e.stderr
}

#[test]
fn brownian_sup_matches_reflection_principle() {
    let t = 1e-3;
    let s = SimSettings::with_steps(1 << 12).seed(11);
    let e = sup_functional(&brownian(), &[1.0, 0.0], t, 1.0, 100_000, &s).unwrap();
    let exact = (2.0 * t / PI).sqrt();
    assert!(within(&e, exact, 3.0), "{e:?} vs {exact}");
}

#[test]
fn sup_does_not_depend_on_direction_for_isotropic_models() {
    let m = LevyModel::stable(2, 1.5).unwrap();
    let s = SimSettings::with_steps(64).seed(3);
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let a = sup_functional(&m, &[1.0, 0.0], 1e-2, 1.0, 200_000, &s).unwrap();
    let b = sup_functional(&m, &[c, c], 1e-2, 1.0, 200_000, &s.seed(4)).unwrap();
    let se = a.stderr.hypot(b.stderr);
    assert!((a.value - b.value).abs() <= 3.0 * se, "{a:?} {b:?}");
}

#[test]
fn cauchy_sup_follows_log_law() {
    let m = LevyModel::stable(2, 1.0).unwrap();
    let law = |t: f64| t * (1.0 / t).ln() / PI;
    // (ratio − 1)·ln(1/t) with its band
    let mut offsets = Vec::new();
    let mut ratios = Vec::new();
    for (i, t) in [1e-2, 1e-3, 1e-4].into_iter().enumerate() {
        let s = SimSettings::with_steps(256).seed(50 + i as u64);
        let e = sup_functional(&m, &[1.0, 0.0], t, 1.0, 400_000, &s).unwrap();
        let (r, band) = (e.value / law(t), e.stderr / law(t));
        offsets.push(((r - 1.0) * (1.0 / t).ln(), band * (1.0 / t).ln()));
        ratios.push((r, band));
    }
    let (c, cb) = offsets[0];
    let (c1, cb1) = offsets[1];
    assert!((c - c1).abs() <= 3.0 * cb.hypot(cb1), "{offsets:?}");
    assert!(ratios[0].0 > ratios[1].0 && ratios[1].0 > ratios[2].0 - 2.0 * ratios[2].1, "{ratios:?}");
    assert!(ratios.iter().all(|(r, b)| *r > 1.0 - 3.0 * b), "{ratios:?}");
    let t: f64 = 1e-4;
    let corrected = ratios[2].0 * (1.0 / t).ln() / ((1.0 / t).ln() + c);
    assert!((corrected - 1.0).abs() <= 0.10, "{corrected} {offsets:?}");
}

#[test]
fn sup_cap_is_monotone_and_bounded() {
    let m = LevyModel::stable(2, 1.5).unwrap();
    let s = SimSettings::with_steps(64).seed(9);
    let mut prev = 0.0;
    for b in [0.01, 0.05, 0.2, 1.0] {
        let e = sup_functional(&m, &[1.0, 0.0], 1e-2, b, 50_000, &s).unwrap();
        assert!(e.value <= b + 1e-12);
        assert!(e.value >= prev - 1e-12, "b = {b}");
        prev = e.value;
    }
}

#[test]
fn sup_is_monotone_in_t() {
    let m = LevyModel::stable(2, 1.5).unwrap();
    let mut prev = f64::INFINITY;
    for (i, t) in [1e-2, 1e-3, 1e-4].into_iter().enumerate() {
        let s = SimSettings::with_steps(64).seed(20 + i as u64);
        let e = sup_functional(&m, &[1.0, 0.0], t, 1.0, 100_000, &s).unwrap();
        assert!(e.value < prev);
        prev = e.value;
    }
}

#[test]
fn halfspace_layer_integral_is_the_capped_sup() {
    let m = LevyModel::stable(2, 1.5).unwrap();
    let s = SimSettings::with_steps(32).seed(13);
    let a = halfspace_layer_integral(&m, &[0.0, 1.0], 0.2, 1e-3, 20_000, &s).unwrap();
    let b = sup_functional(&m, &[0.0, 1.0], 1e-3, 0.2, 20_000, &s).unwrap();
    assert_eq!(a.value, b.value);
    assert!(halfspace_layer_integral(&m, &[0.0, 1.0], 0.0, 1e-3, 10, &s).is_err());
}

#[test]
fn deficit_limits() {
    let s = SimSettings::with_steps(256).seed(2);
    let big = heat_content_deficit(&brownian(), &disk(), 100.0, 20_000, DeficitStrategy::UniformDomain, &s).unwrap();
    assert!((big.estimate.value - PI).abs() <= 0.01 * PI, "{big:?}");
    let tiny = heat_content_deficit(&brownian(), &disk(), 1e-12, 20_000, DeficitStrategy::UniformDomain, &s).unwrap();
    assert!(tiny.estimate.value <= tiny.estimate.stderr.max(1e-12), "{tiny:?}");
}

#[test]
fn deficit_is_monotone_in_t() {
    let m = LevyModel::stable(2, 1.5).unwrap();
    let mut prev = f64::INFINITY;
    for (i, t) in [1e-1, 1e-2, 1e-3].into_iter().enumerate() {
        let s = SimSettings::with_steps(64).seed(40 + i as u64);
        let e = heat_content_deficit(&m, &disk(), t, 100_000, DeficitStrategy::Stratified { a: 0.25 }, &s).unwrap();
        assert!(e.estimate.value < prev);
        prev = e.estimate.value;
    }
}

#[test]
fn deficit_strategies_agree() {
    let m = LevyModel::stable(2, 1.5).unwrap();
    let t = 1e-2;
    let s = SimSettings::with_steps(64).seed(17);
    let u = heat_content_deficit(&m, &disk(), t, 400_000, DeficitStrategy::UniformDomain, &s).unwrap().estimate;
    let st = heat_content_deficit(&m, &disk(), t, 400_000, DeficitStrategy::Stratified { a: 0.25 }, &s).unwrap().estimate;
    let se = u.stderr.hypot(st.stderr);
    assert!((u.value - st.value).abs() <= 3.0 * se, "{u:?} {st:?}");
}

#[test]
fn boundary_layer_reports_interior_bias() {
    let m = LevyModel::stable(2, 1.5).unwrap();
    let s = SimSettings::with_steps(32).seed(1);
    let e = heat_content_deficit(&m, &disk(), 1e-3, 20_000, DeficitStrategy::BoundaryLayer { a: 0.25 }, &s).unwrap();
    let (lo, hi) = e.interior_bias.unwrap();
    assert_eq!(lo, 0.0);
    assert!(hi > 0.0 && hi < e.estimate.value);
    assert!(e.survival_constant.unwrap() > 0.0);
}

#[test]
fn deficit_rejects_unbounded_domains() {
    let h = Domain::half_space(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
    let s = SimSettings::default();
    let r = heat_content_deficit(&brownian(), &h, 1e-3, 100, DeficitStrategy::UniformDomain, &s);
    assert!(matches!(r, Err(ShcError::UnboundedDomain)));
}

#[test]
fn estimates_are_deterministic() {
    let m = LevyModel::stable(2, 1.5).unwrap();
    let s = SimSettings::with_steps(32).seed(77);
    let a = heat_content_deficit(&m, &disk(), 1e-3, 10_000, DeficitStrategy::Stratified { a: 0.25 }, &s).unwrap();
    let b = heat_content_deficit(&m, &disk(), 1e-3, 10_000, DeficitStrategy::Stratified { a: 0.25 }, &s).unwrap();
    assert_eq!(a.estimate.value, b.estimate.value);
    assert_eq!(a.estimate.stderr, b.estimate.stderr);
    let c = heat_content_deficit(&m, &disk(), 1e-3, 10_000, DeficitStrategy::Stratified { a: 0.25 }, &s.seed(78)).unwrap();
    assert_ne!(a.estimate.value, c.estimate.value);
}

#[test]
fn exit_probability_saturates() {
    let m = LevyModel::stable(2, 1.5).unwrap();
    let s = SimSettings::with_steps(64).seed(3);
    let e = exit_probability_ball(&m, 0.1, 10.0, 10_000, &s).unwrap();
    assert!(e.value >= 1.0 - e.stderr.max(1e-12), "{e:?}");
}

#[test]
fn brownian_exit_probability_is_grid_converged() {
    let t = 0.1;
    let coarse = exit_probability_ball(&brownian(), 1.0, t, 100_000, &SimSettings::with_steps(256).seed(1)).unwrap();
    let fine = exit_probability_ball(&brownian(), 1.0, t, 100_000, &SimSettings::with_steps(2560).seed(2)).unwrap();
    let se = coarse.stderr.hypot(fine.stderr);
    assert!((coarse.value - fine.value).abs() <= 2.0 * se, "{coarse:?} {fine:?}");
}

#[test]
fn flat_kernel_matches_slab_reduction() {
    let beta = 0.5;
    let m = LevyModel::stable(2, beta).unwrap();
    let c1 = stable_constant(1, beta);
    for s in [1e-6, 1e-3, 0.1, 0.7] {
        let k = flat_tail_kernel(&m, s).unwrap();
        assert!((k / (c1 * s.powf(-beta) / beta) - 1.0).abs() < 1e-5, "s = {s}");
    }
    let v = GradedMesh::with_rtol(1e-8).from_zero(|s| flat_tail_kernel(&m, s).unwrap(), 1.0).unwrap().value;
    let exact = c1 / (beta * (1.0 - beta));
    assert!((exact - 0.797_884_56).abs() < 1e-8);
    assert!((v / exact - 1.0).abs() < 1e-4, "{v} vs {exact}");
}

#[test]
fn perimeter_methods_agree() {
    let m = LevyModel::stable(2, 0.5).unwrap();
    let budget = PerimeterBudget { n_paths: 400_000, ..PerimeterBudget::default() };
    let q = perimeter(&m, &disk(), PerimeterMethod::Quadrature, &budget).unwrap();
    assert!((q.estimate.value - 5.171_877_630_921_046).abs() < 1e-6, "{q:?}");
    let mc = perimeter(&m, &disk(), PerimeterMethod::MonteCarlo, &budget).unwrap();
    let se = q.estimate.stderr.hypot(mc.estimate.stderr);
    assert!((q.estimate.value - mc.estimate.value).abs() <= 3.0 * se, "{q:?} {mc:?}");
}

#[test]
fn perimeter_scales_with_domain() {
    let beta = 0.5;
    let m = LevyModel::stable(2, beta).unwrap();
    let b = PerimeterBudget::default();
    let p1 = perimeter(&m, &disk(), PerimeterMethod::Quadrature, &b).unwrap().estimate.value;
    let p2 = perimeter(&m, &Domain::ball(vec![0.3, 0.0], 2.0).unwrap(), PerimeterMethod::Quadrature, &b).unwrap().estimate.value;
    let r = p2 / p1 / 2f64.powf(2.0 - beta);
    assert!((r - 1.0).abs() < 0.01, "{r}");
}

#[test]
fn perimeter_diverges_for_unbounded_variation() {
    for m in [LevyModel::stable(2, 1.5).unwrap(), LevyModel::stable(2, 1.0).unwrap(), brownian()] {
        let r = perimeter(&m, &disk(), PerimeterMethod::Quadrature, &PerimeterBudget::default());
        assert!(matches!(r, Err(ShcError::DivergentPerimeter)), "{}", m.label());
    }
}
