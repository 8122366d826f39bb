use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::grid::{Boundary, Grid, ScalarField};
use crate::operators::{SubordinationConfig, SubordinationOperator};
use crate::solver::{Solver, SolverConfig, TimeVelocity, VelocityRecipe};

fn line(l: f64, m: usize) -> Grid<f64> {
    Grid::euclidean(&[l], &[m], Boundary::Periodic).unwrap()
}

#[test]
fn bmo_examples() {
    let g = Grid::<f64>::euclidean(&[8.0, 8.0], &[64, 64], Boundary::Periodic).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert_eq!(bmo_norm(&ScalarField::zeros(&g), 100, &mut rng), 0.0);
    let c = bmo_norm(&ScalarField::constant(&g, -2.5), 200, &mut rng);
    assert!((c - 2.5).abs() < 1e-12, "{c}");
    let ind = g.sample(|x| if x[0] < 0.0 { 1.0 } else { 0.0 });
    let a = bmo_norm(&ind, 400, &mut ChaCha8Rng::seed_from_u64(2));
    let b = bmo_norm(&ind, 800, &mut ChaCha8Rng::seed_from_u64(3));
    assert!(a > 0.0 && a <= 1.0 && b > 0.0 && b <= 1.0);
    assert!((a - b).abs() <= 0.1 * b, "{a} {b}");
}

#[test]
fn besov_constant_homogeneity_and_dilation() {
    let g = line(16.0, 512);
    assert_eq!(besov_seminorm(&ScalarField::constant(&g, 3.0), 0.5, 2.0).unwrap(), 0.0);
    let f = g.sample(|x| (-x[0] * x[0]).exp());
    let a = besov_seminorm(&f, 0.5, 2.0).unwrap();
    let b = besov_seminorm(&f.scale(-3.0), 0.5, 2.0).unwrap();
    assert!((b - 3.0 * a).abs() < 1e-10 * b);
    // f(λx) has seminorm λ^{s − N/p} times that of f.
    let lam: f64 = 2.0;
    let fl = g.sample(|x| (-(lam * x[0]).powi(2)).exp());
    let s = 0.5;
    let p = 2.0;
    let got = besov_seminorm(&fl, s, p).unwrap() / a;
    let want = lam.powf(s - 1.0 / p);
    assert!((got - want).abs() < 0.05 * want, "{got} vs {want}");
    assert!(besov_seminorm(&f, 1.5, 2.0).is_err());
}

#[test]
fn besov_energy_identity_shape() {
    // ‖θ‖²_{Ḃ^{1/2,2}_2} and ⟨θ, J^{1/2}θ⟩ are proportional; the fitted
    // constant is positive and stable across a small family.
    let g = line(32.0, 512);
    let op = SubordinationOperator::new(&g, SubordinationConfig::default()).unwrap();
    let mut ratios = Vec::new();
    for w in [0.5, 1.0, 2.0] {
        let f = g.sample(|x| (-(x[0] / w).powi(2)).exp() * (x[0] / w).cos());
        let energy = op.apply(&f).unwrap().inner(&f).unwrap();
        let b = besov_seminorm(&f, 0.5, 2.0).unwrap();
        ratios.push(energy / (b * b));
    }
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(lo > 0.0 && hi / lo < 1.2, "{ratios:?}");
}

#[test]
fn holder_examples() {
    let gamma = 0.5;
    let mut est = Vec::new();
    for m in [256, 512] {
        let g = line(8.0, m);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(holder_seminorm(&ScalarField::constant(&g, 1.0), gamma, 50, &mut rng).unwrap(), 0.0);
        let f = g.sample(|x| x[0].abs().min(1.0).powf(gamma));
        est.push(holder_seminorm(&f, gamma, 200, &mut rng).unwrap());
    }
    assert!(est.iter().all(|e| (e - 1.0).abs() < 0.2), "{est:?}");
    // A jump is detected by growth like h^{-γ} under refinement.
    let jump: Vec<f64> = [256, 1024]
        .iter()
        .map(|&m| {
            let g = line(8.0, m);
            let f = g.sample(|x| if x[0] < 0.3 { 0.0 } else { 1.0 });
            holder_seminorm(&f, gamma, 200, &mut ChaCha8Rng::seed_from_u64(9)).unwrap()
        })
        .collect();
    let slope = (jump[1] / jump[0]).ln() / 4f64.ln();
    assert!((slope - gamma).abs() < 0.15, "{jump:?}");
    // Heisenberg gauge power: ratio 1 at the origin.
    let h = Grid::<f64>::heisenberg(8.0, 32, 128, Boundary::Periodic).unwrap();
    let f = h.sample(|x| crate::group::gauge_coords(true, x).min(1.0).powf(gamma));
    let e = holder_seminorm(&f, gamma, 200, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    assert!((e - 1.0).abs() < 0.2, "{e}");
}

#[test]
fn commutator_examples_and_rate() {
    let g = line(64.0, 2048);
    let op = SubordinationOperator::new(&g, SubordinationConfig::default()).unwrap();
    let f = g.sample(|x| (-(x[0] * x[0]) / 4.0).exp());
    let one = ScalarField::constant(&g, 1.0);
    assert!(commutator(&op, &one, &f).unwrap().max_abs() < 1e-10);
    assert_eq!(commutator(&op, &cutoff(&g, 2.0), &ScalarField::zeros(&g)).unwrap().max_abs(), 0.0);
    let m = 1.0;
    let make = |r: f64| g.sample(move |x| if x[0].abs() <= 2.0 * r { m / 2.0 } else { 0.1 * m });
    let rep = commutator_check(&op, &[1.0, 2.0, 4.0], make, f64::INFINITY).unwrap();
    assert!((rep.slope + 1.0).abs() < 0.3, "{rep:?}");
}

#[test]
fn cutoff_profile() {
    let g = line(8.0, 256);
    let phi = cutoff(&g, 2.0);
    for k in 0..g.len() {
        let x = g.coords(k)[0].abs();
        let v = phi.values[k];
        assert!((0.0..=1.0).contains(&v));
        if x <= 1.0 {
            assert_eq!(v, 1.0);
        }
        if x >= 2.0 {
            assert_eq!(v, 0.0);
        }
    }
}

#[test]
fn split_reconstructs_and_scales() {
    let g = line(64.0, 4096);
    let cfg = SolverConfig { horizon: 0.1, window: 0.1, snapshot_interval: Some(0.05), ..Default::default() };
    let solver = Solver::new(&g, cfg).unwrap();
    let v = TimeVelocity::steady(VelocityRecipe::Constant { components: vec![0.5] }.build(&g).unwrap());
    let m = 1.0;
    let psi0 = g.sample(|x| 0.1 + 0.05 * (x[0] / 3.0).sin());
    let rep = positivity_split_sweep(&solver, &psi0, &v, m, &[1.0, 2.0, 4.0], f64::INFINITY).unwrap();
    assert!(rep.max_reconstruction_error() < 1e-12);
    for r in &rep.rows {
        assert_eq!(r.tracked_initial, 0.0);
        assert!(r.psi_min >= -1e-12 && r.psi_max <= m + 1e-12);
    }
    assert!((rep.slope + 1.0).abs() < 0.3, "{rep:?}");
    assert!(positivity_split_scenario(&solver, &psi0, &v, m, 1.0, 0.6, f64::INFINITY).is_err());
    assert!(positivity_split_scenario(&solver, &psi0, &v, m, 20.0, 1.0, f64::INFINITY).is_err());
}
