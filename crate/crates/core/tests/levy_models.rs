use proptest::prelude::*;
use rand::Rng;
use shc_core::estimators::{sup_functional, SimSettings};
use shc_core::geometry::Domain;
use shc_core::levy_models::*;
use shc_core::rng::unit_stream;
use shc_core::stats::{ks_two_sample, Acc};
use shc_core::ShcError;

fn draws(beta: f64, dt: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = unit_stream(seed, 0);
    (0..n).map(|_| sample_stable_increment(beta, dt, &mut rng).unwrap()).collect()
}

fn increments(model: &LevyModel, dt: f64, cutoff: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let s = IncrementSampler::new(model, dt, cutoff).unwrap();
    let mut rng = unit_stream(seed, 0);
    (0..n)
        .map(|_| {
            let mut v = vec![0.0; model.dim()];
            s.sample_into(&mut rng, &mut v);
            v
        })
        .collect()
}

#[test]
fn stable_index_must_lie_below_two() {
    let mut rng = unit_stream(1, 0);
    assert!(matches!(sample_stable_increment(2.0, 1.0, &mut rng), Err(ShcError::InvalidArgument(_))));
    assert!(sample_stable_increment(0.0, 1.0, &mut rng).is_err());
    assert!(LevyModel::stable(2, 2.0).is_err());
}

#[test]
fn cauchy_median_and_quartiles() {
    let mut x = draws(1.0, 1.0, 1_000_000, 11);
    let beyond = x.iter().filter(|v| v.abs() > 1.0).count() as f64 / x.len() as f64;
    assert!((beyond - 0.5).abs() < 0.005, "{beyond}");
    x.sort_by(f64::total_cmp);
    let median = x[x.len() / 2];
    assert!(median.abs() < 0.01, "{median}");
}

#[test]
fn stable_time_scaling() {
    let mut a = draws(1.5, 2.0, 100_000, 1);
    let mut b: Vec<f64> = draws(1.5, 1.0, 100_000, 2).iter().map(|v| v * 2f64.powf(1.0 / 1.5)).collect();
    let ks = ks_two_sample(&mut a, &mut b);
    assert!(ks < 0.01, "{ks}");
}

#[test]
fn brownian_increment_covariance() {
    let m = LevyModel::brownian(2).unwrap();
    let xs = increments(&m, 0.01, 1.0, 100_000, 3);
    let mut c = [[0.0; 2]; 2];
    for v in &xs {
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] += v[i] * v[j] / xs.len() as f64;
            }
        }
    }
    assert!((c[0][0] / 0.01 - 1.0).abs() < 0.05 && (c[1][1] / 0.01 - 1.0).abs() < 0.05);
    assert!(c[0][1].abs() < 0.05 * 0.01);
}

#[test]
fn density_sampler_matches_exact_stable() {
    let exact = LevyModel::stable(2, 1.5).unwrap();
    let dens = LevyModel::stable_by_density(2, 1.5, 1.0).unwrap();
    let norm = |m: &LevyModel, seed| -> Vec<f64> {
        increments(m, 0.01, 1e-4, 100_000, seed).iter().map(|v| v[0].hypot(v[1])).collect()
    };
    let ks = ks_two_sample(&mut norm(&exact, 5), &mut norm(&dens, 6));
    assert!(ks < 0.02, "{ks}");
}

#[test]
fn truncated_radii_stay_below_r0() {
    let m = LevyModel::truncated_stable(2, 0.5, 1.0).unwrap();
    let table = RadiusTable::new(m.density().unwrap(), 1e-3).unwrap();
    let mut rng = unit_stream(4, 0);
    let max = (0..1_000_000).map(|_| table.radius(rng.random())).fold(0.0, f64::max);
    assert!(max <= 1.0 && max > 0.5, "{max}");
}

#[test]
fn one_step_path_is_start_plus_increment() {
    let m = LevyModel::stable(2, 1.2).unwrap();
    let grid = PathGrid::new(0.1, 1, 1e-3).unwrap();
    let x0 = [0.3, -0.2];
    let path = sample_path(&m, &x0, &grid, 9, 4).unwrap();
    let mut rng = unit_stream(9, 4);
    let inc = sample_increment(&m, 0.1, &grid, &mut rng).unwrap();
    assert_eq!(path.len(), 2);
    assert_eq!(path.position(0), &x0);
    assert_eq!(path.position(1), &[x0[0] + inc[0], x0[1] + inc[1]]);
}

#[test]
fn brownian_path_marginal_variance() {
    let m = LevyModel::brownian(2).unwrap();
    let grid = PathGrid::new(0.5, 8, 1.0).unwrap();
    let mut acc = [Acc::default(), Acc::default()];
    for i in 0..20_000 {
        let p = sample_path(&m, &[0.0, 0.0], &grid, 2, i).unwrap();
        for (k, a) in acc.iter_mut().enumerate() {
            a.push(p.position(8)[k].powi(2));
        }
    }
    for a in &acc {
        assert!((a.mean / 0.5 - 1.0).abs() < 0.05, "{}", a.mean);
    }
}

#[test]
fn fixed_seed_paths_are_bit_identical() {
    let m = LevyModel::truncated_stable(2, 1.5, 1.0).unwrap();
    let grid = PathGrid::for_model(&m, 1e-2, 64).unwrap();
    let a = sample_path(&m, &[0.0, 0.0], &grid, 17, 3).unwrap();
    let b = sample_path(&m, &[0.0, 0.0], &grid, 17, 3).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, sample_path(&m, &[0.0, 0.0], &grid, 17, 4).unwrap());
}

fn path_1d(xs: &[f64]) -> Path {
    let grid = PathGrid::new(1.0, xs.len() - 1, 1.0).unwrap();
    Path::from_positions(2, xs.iter().map(|&x| vec![x, 0.0]).collect(), grid).unwrap()
}

#[test]
fn running_sup_examples() {
    assert_eq!(project_running_sup(&path_1d(&[0.0, 0.0, 0.0]), &[1.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    let s = project_running_sup(&path_1d(&[0.0, 1.0, 0.5, 2.0]), &[1.0, 0.0]).unwrap();
    assert_eq!(s, vec![1.0, 1.0, 2.0]);
    assert!(project_running_sup(&path_1d(&[0.0, 1.0]), &[1.0, 1.0]).is_err());
}

#[test]
fn first_exit_examples() {
    let disk = Domain::unit_ball(2);
    let mut rng = unit_stream(1, 0);
    let inside = first_exit(&path_1d(&[0.0, 0.5, -0.5]), &disk, None, &mut rng).unwrap();
    assert!(!inside.exited && inside.exit_step.is_none());
    let rec = first_exit(&path_1d(&[0.0, 0.5, 0.9, 1.2, 0.0]), &disk, None, &mut rng).unwrap();
    assert_eq!(rec.exit_step, Some(3));
    assert_eq!(rec.exit_time_estimate, Some(0.75));
    assert!(first_exit(&path_1d(&[1.5, 0.0]), &disk, None, &mut rng).is_err());
}

fn exit_fraction(domain: &Domain, t: f64, steps: usize, n: u64) -> (f64, f64) {
    let m = LevyModel::brownian(2).unwrap();
    let grid = PathGrid::new(t, steps, 1.0).unwrap();
    let mut acc = Acc::default();
    for i in 0..n {
        let p = sample_path(&m, &[0.0, 0.0], &grid, 31, i).unwrap();
        let mut rng = unit_stream(32, i);
        acc.push(first_exit(&p, domain, None, &mut rng).unwrap().exited as u8 as f64);
    }
    (acc.mean, acc.stderr())
}

#[test]
fn grid_refinement_of_exit_probability() {
    let disk = Domain::unit_ball(2);
    let (p, _) = exit_fraction(&disk, 0.01, 100, 2000);
    assert_eq!(p, 0.0);
    // a radius where exit by t is common
    let small = Domain::ball(vec![0.0, 0.0], 0.2).unwrap();
    let (a, sa) = exit_fraction(&small, 0.01, 50, 20_000);
    let (b, sb) = exit_fraction(&small, 0.01, 500, 20_000);
    assert!(b >= a - 2.0 * sa.hypot(sb));
    // monitoring bias of order √Δt: both grids see most of the exits
    assert!(a > 0.5 * b && b > 0.1, "{a} {b}");
}

#[test]
fn bridge_correction_raises_coarse_exit_rate() {
    let m = LevyModel::brownian(2).unwrap();
    let small = Domain::ball(vec![0.0, 0.0], 0.2).unwrap();
    let grid = PathGrid::new(0.01, 10, 1.0).unwrap();
    let bridge = BridgeCorrection::for_model(&m, grid.dt());
    assert!(bridge.is_some());
    let (mut plain, mut bridged) = (0, 0);
    for i in 0..10_000 {
        let p = sample_path(&m, &[0.0, 0.0], &grid, 8, i).unwrap();
        plain += first_exit(&p, &small, None, &mut unit_stream(9, i)).unwrap().exited as u32;
        bridged += first_exit(&p, &small, bridge, &mut unit_stream(9, i)).unwrap().exited as u32;
    }
    assert!(bridged > plain);
}

#[test]
fn increments_are_symmetric() {
    let models = [
        LevyModel::brownian(2).unwrap(),
        LevyModel::stable(2, 0.7).unwrap(),
        LevyModel::stable_by_density(2, 1.5, 1.0).unwrap(),
        LevyModel::truncated_stable(2, 1.2, 0.5).unwrap(),
    ];
    for (k, m) in models.iter().enumerate() {
        let xs = increments(m, 0.01, 1e-3, 100_000, 40 + k as u64);
        let mut a: Vec<f64> = xs.iter().map(|v| 0.6 * v[0] + 0.8 * v[1]).collect();
        let mut b: Vec<f64> = increments(m, 0.01, 1e-3, 100_000, 50 + k as u64).iter().map(|v| -(0.6 * v[0] + 0.8 * v[1])).collect();
        let ks = ks_two_sample(&mut a, &mut b);
        assert!(ks < 0.01, "{} {ks}", m.label());
    }
}

#[test]
fn cutoff_consistency_of_sup_functional() {
    let m = LevyModel::stable_by_density(2, 1.5, 1.0).unwrap();
    let t = 1e-2;
    let eps = default_cutoff(&m, t).unwrap();
    let run = |c: f64, seed| {
        let s = SimSettings { cutoff: Some(c), seed, ..SimSettings::with_steps(64) };
        sup_functional(&m, &[1.0, 0.0], t, 1.0, 40_000, &s).unwrap()
    };
    let a = run(eps, 1);
    let b = run(eps / 2.0, 2);
    assert!((a.value - b.value).abs() < 3.0 * a.stderr.hypot(b.stderr), "{a:?} {b:?}");
}

#[test]
fn grid_rejects_bad_parameters() {
    assert!(PathGrid::new(0.0, 4, 0.1).is_err());
    assert!(PathGrid::new(1.0, 0, 0.1).is_err());
    assert!(matches!(PathGrid::new(1.0, 4, 0.0), Err(ShcError::InvalidCutoff(_))));
}

proptest! {
    #[test]
    fn running_sup_monotone_and_refinement_invariant(
        xs in prop::collection::vec(-2.0f64..2.0, 2..40),
        at in 1usize..39,
        frac in 0.0f64..1.0,
    ) {
        let mut xs = xs;
        xs[0] = 0.0;
        let nu = [1.0, 0.0];
        let s = project_running_sup(&path_1d(&xs), &nu).unwrap();
        prop_assert!(s.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(s.iter().all(|v| *v >= 0.0));
        let at = at.min(xs.len() - 1);
        let cur = s[at - 1];
        let mut refined = xs.clone();
        refined.insert(at + 1, cur * frac - (1.0 - frac));
        let r = project_running_sup(&path_1d(&refined), &nu).unwrap();
        prop_assert_eq!(r.last(), s.last());
    }
}
