use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::grid::{Boundary, Grid, ScalarField, VectorField};
use crate::operators::{SubordinationConfig, SubordinationOperator};
use crate::regularity::log_log_slope;
use crate::solver::{Solver, SolverConfig, TimeVelocity, VelocityRecipe};

const SIGMA: f64 = 0.8;
const OMEGA: f64 = 0.6;

fn line(m: usize) -> Grid<f64> {
    Grid::euclidean(&[8.0], &[m], Boundary::Periodic).unwrap()
}

fn spec(g: &Grid<f64>, r: f64) -> MoleculeSpec {
    MoleculeSpec::on(g, r, SIGMA, OMEGA).unwrap()
}

#[test]
fn spec_invariants() {
    let s = MoleculeSpec::new(0.1, vec![0.0], 0.8, 0.6, 1).unwrap();
    assert_eq!(s.gamma, 1.0 * (1.0 / 0.8 - 1.0));
    assert_eq!(s.kind, MoleculeKind::Small);
    assert_eq!(MoleculeSpec::new(1.5, vec![0.0], 0.8, 0.6, 1).unwrap().kind, MoleculeKind::Big);
    assert!(MoleculeSpec::new(0.1, vec![0.0], 0.4, 0.6, 1).is_err());
    assert!(MoleculeSpec::new(0.1, vec![0.0], 0.8, 0.2, 1).is_err());
    assert!(MoleculeSpec::new(-0.1, vec![0.0], 0.8, 0.6, 1).is_err());
    let mut bad = s.clone();
    bad.kind = MoleculeKind::Big;
    assert!(bad.validate().is_err());
}

#[test]
fn constructed_molecules_pass_with_margin() {
    let g = line(4096);
    for r in [0.2, 0.1, 0.05] {
        let s = spec(&g, r);
        let psi = make_molecule(&s, &g).unwrap();
        let rep = validate_molecule(&psi, &s, &s.x0, &[2.0, 4.0]).unwrap();
        assert!(rep.pass(), "{rep:?}");
        assert!(rep.min_margin() >= 0.05, "{rep:?}");
        assert!(rep.moment.abs() <= 1e-10);
        assert!(rep.height <= s.height_bound());
        let scaled = validate_molecule(&psi.scale(10.0), &s, &s.x0, &[2.0]).unwrap();
        assert!(!scaled.pass());
        assert!(!scaled.checks.iter().find(|c| c.label == "height").unwrap().pass);
        let margins: Vec<f64> = [0.5, 0.8, 1.0]
            .iter()
            .map(|&l| validate_molecule(&psi.scale(l), &s, &s.x0, &[]).unwrap().min_margin())
            .collect();
        assert!(margins[0] > margins[1] && margins[1] > margins[2], "{margins:?}");
    }
}

#[test]
fn big_molecules_skip_the_moment() {
    let g = line(1024);
    let s = spec(&g, 1.5);
    let psi = make_molecule(&s, &g).unwrap();
    let rep = validate_molecule(&psi, &s, &s.x0, &[2.0]).unwrap();
    assert!(rep.pass());
    assert!(rep.checks.iter().all(|c| c.label != "moment"));
    let h = Grid::<f64>::heisenberg(8.0, 64, 256, Boundary::ZeroPadded).unwrap();
    let s = MoleculeSpec::on(&h, 1.5, 0.9, 0.6).unwrap();
    let rep = validate_molecule(&make_molecule(&s, &h).unwrap(), &s, &s.x0, &[2.0, 4.0]).unwrap();
    assert!(rep.pass(), "{rep:?}");
}

#[test]
fn unresolvable_molecules_are_rejected() {
    let g = line(256);
    assert!(matches!(make_molecule(&spec(&g, 0.05), &g), Err(crate::error::Error::Resolution(_))));
    let h = Grid::<f64>::heisenberg(8.0, 64, 256, Boundary::ZeroPadded).unwrap();
    let s = MoleculeSpec::new(1.5, vec![3.5, 0.0, 0.0], 0.9, 0.6, 4).unwrap();
    assert!(matches!(make_molecule(&s, &h), Err(crate::error::Error::Geometry(_))));
}

#[test]
fn centre_moves_with_the_ball_average() {
    let g = line(512);
    let c = 0.7;
    let v = TimeVelocity::steady(VelocityRecipe::Constant { components: vec![c] }.build(&g).unwrap());
    let x = center_ode_step(&[0.25], &v, 0.0, 0.3, 0.01).unwrap();
    assert!((x[0] - (0.25 + c * 0.01)).abs() < 1e-15);
    let x = center_ode_step(&[0.25], &TimeVelocity::zero(&g), 0.0, 0.3, 0.01).unwrap();
    assert_eq!(x, vec![0.25]);
    // Periodic wrap keeps the centre in the box.
    let x = center_ode_step(&[3.999], &v, 0.0, 0.3, 0.01).unwrap();
    assert!(x[0] < -3.9);

    // Cellular flow with stream function sin x sin y against a dense polar
    // quadrature of the disc average.
    let g2 = Grid::<f64>::euclidean(&[2.0 * std::f64::consts::PI; 2], &[256, 256], Boundary::Periodic).unwrap();
    let vx = g2.sample(|p| -p[0].sin() * p[1].cos());
    let vy = g2.sample(|p| p[0].cos() * p[1].sin());
    let field = VectorField::new(g2.clone(), vec![vx.values, vy.values]).unwrap();
    let v = TimeVelocity::steady(field);
    let (c0, rad, dt) = ([0.6, 0.3], 0.8, 0.01);
    let got = center_ode_step(&c0, &v, 0.0, rad, dt).unwrap();
    let (nr, nt) = (400, 400);
    let mut acc = [0.0, 0.0];
    let mut area = 0.0;
    for i in 0..nr {
        let r = (i as f64 + 0.5) * rad / nr as f64;
        for j in 0..nt {
            let a = (j as f64 + 0.5) * 2.0 * std::f64::consts::PI / nt as f64;
            let (x, y) = (c0[0] + r * a.cos(), c0[1] + r * a.sin());
            acc[0] += -x.sin() * y.cos() * r;
            acc[1] += x.cos() * y.sin() * r;
            area += r;
        }
    }
    let want = [acc[0] / area, acc[1] / area];
    let moved = [(got[0] - c0[0]) / dt, (got[1] - c0[1]) / dt];
    let err = ((moved[0] - want[0]).powi(2) + (moved[1] - want[1]).powi(2)).sqrt();
    let scale = (want[0].powi(2) + want[1].powi(2)).sqrt();
    assert!(err < 0.01 * scale, "{moved:?} vs {want:?}");
}

fn solver(g: &Grid<f64>, horizon: f64) -> Solver<f64> {
    Solver::new(g, SolverConfig { horizon, window: horizon, ..Default::default() }).unwrap()
}

#[test]
fn backward_steps_decay_and_keep_the_mean() {
    let g = line(2048);
    let s = spec(&g, 0.1);
    let sol = solver(&g, 0.5);
    for v in [TimeVelocity::zero(&g), TimeVelocity::steady(VelocityRecipe::Constant { components: vec![0.5] }.build(&g).unwrap())] {
        let ev = MoleculeEvolver::new(&sol, &v, 0.5).unwrap();
        let dt = ev.dt_guard();
        let mut st = MoleculeState::new(make_molecule(&s, &g).unwrap(), vec![0.0], 0.0, OMEGA).unwrap();
        for _ in 0..40 {
            let next = ev.step(&st, 0.1, dt).unwrap();
            assert!(next.height <= st.height * (1.0 + 1e-6), "{} > {}", next.height, st.height);
            assert!(next.field.integrate().abs() < 1e-6);
            let (c, h, m) = next.recompute().unwrap();
            assert_eq!((c, h, m), (next.concentration, next.height, next.mass));
            st = next;
        }
        assert!(st.height < 0.5 * make_molecule(&s, &g).unwrap().max_abs());
    }
}

fn schedule(g: &Grid<f64>, r: f64, mu_velocity: f64) -> EvolutionRecord<f64> {
    let sol = solver(g, 0.5);
    let v = TimeVelocity::steady(VelocityRecipe::Constant { components: vec![mu_velocity] }.build(g).unwrap());
    evolve_schedule(&sol, &spec(g, r), &v, mu_velocity.abs(), 0.5, &ScheduleConfig::default()).unwrap()
}

#[test]
fn schedule_tracks_envelopes() {
    let g = line(4096);
    let rec = schedule(&g, 0.1, 0.5);
    assert!(rec.pass(), "{:?}", rec.first_failure());
    assert!(rec.bounds_regenerate());
    assert!(rec.sup_monotone(1e-6));
    assert!((rec.rows.last().unwrap().elapsed - 0.5).abs() < 1e-12);
    assert_eq!(rec.rows.len(), 51);
    // Centre follows the constant flow.
    assert!((rec.final_state.center[0] - 0.25).abs() < 1e-9);
    let csv = rec.csv();
    assert_eq!(csv.lines().count(), rec.rows.len() + 1);
    assert!(csv.lines().all(|l| l.split(',').count() == EvolutionRecord::<f64>::CSV_HEADER.split(',').count()));
    let cap = 1.1 * rec.constants.v_n * 0.5f64.powf(-rec.spec.gamma);
    assert!(rec.final_l1() <= cap);
    // The final mass of a mean-zero molecule is a dipole tail, ∝ r^{1−γ}.
    let small = schedule(&g, 0.05, 0.5);
    let ratio = rec.final_l1() / small.final_l1();
    assert!((ratio.ln() / 2f64.ln() - (1.0 - rec.spec.gamma)).abs() < 0.1, "{ratio}");
}

#[test]
fn corona_scaling() {
    let g = line(4096);
    let op = SubordinationOperator::new(&g, SubordinationConfig::default()).unwrap();
    let zero = VectorField::zeros(&g);
    let mut i2 = Vec::new();
    let radii = [0.2, 0.1, 0.05];
    for r in radii {
        let s = spec(&g, r);
        let st = MoleculeState::new(make_molecule(&s, &g).unwrap(), vec![0.0], 0.0, OMEGA).unwrap();
        let row = corona_diagnostics(&op, &s, &st, &zero, r).unwrap();
        assert_eq!(row.i1, 0.0);
        assert!(row.last_corona_fraction() < 0.05);
        i2.push(row.i2);
    }
    let slope = log_log_slope(&radii, &i2);
    assert!((slope - (OMEGA - 1.0 - (1.0 / SIGMA - 1.0))).abs() < 0.3);
}

#[test]
fn transfer_is_exact_along_replayed_steps() {
    let g = line(512);
    let sol = Solver::new(&g, SolverConfig { horizon: 0.5, window: 0.05, ..Default::default() }).unwrap();
    let v = TimeVelocity::steady(VelocityRecipe::Constant { components: vec![0.3] }.build(&g).unwrap());
    let theta0 = g.sample(|x| (x[0]).cos() + 0.5 * (-x[0] * x[0]).exp());
    let traj = sol.advance(&theta0, &v).unwrap();
    let psi0 = make_molecule(&spec(&g, 0.5), &g).unwrap();
    let rep = transfer_check(&sol, &traj, &psi0, &v).unwrap();
    assert!(rep.max_drift < 1e-9, "{}", rep.max_drift);
    assert!(rep.trajectory_mismatch < 1e-8, "{}", rep.trajectory_mismatch);
    assert_eq!(rep.s[0], 0.0);
    assert!((rep.bracket[0] - traj.last().inner(&psi0).unwrap()).abs() < 1e-9 * rep.bracket[0].abs().max(1.0));
    let other = line(256);
    assert!(transfer_check(&sol, &traj, &ScalarField::zeros(&other), &v).is_err());
}

#[test]
fn duality_bracket_examples() {
    let g = line(256);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let psi = make_molecule(&spec(&g, 0.5), &g).unwrap();
    let b = duality_bracket(&ScalarField::zeros(&g), &psi, f64::INFINITY).unwrap();
    assert_eq!(b.bracket, 0.0);
    for _ in 0..20 {
        let a = g.sample(|_| 0.0).map(|_| 0.0);
        let a = a.with_values((0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect());
        let c = a.with_values((0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect());
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            assert!(duality_bracket(&a, &c, p).unwrap().holds);
        }
    }
    assert!(duality_bracket(&psi, &psi, 0.5).is_err());
}
