//! The numerical core is generic over the scalar type; single precision
//! must track the double-precision results to single-precision accuracy.

use carnot_flow::grid::{Boundary, Grid};
use carnot_flow::molecules::{make_molecule, MoleculeSpec};
use carnot_flow::operators::{heat_kernel, SubordinationConfig, SubordinationOperator};
use carnot_flow::solver::{Solver, SolverConfig, TimeVelocity, VelocityRecipe};

#[test]
fn single_precision_solver_tracks_double() {
    let g32 = Grid::<f32>::euclidean(&[std::f32::consts::TAU], &[128], Boundary::Periodic).unwrap();
    let g64 = Grid::<f64>::euclidean(&[std::f64::consts::TAU], &[128], Boundary::Periodic).unwrap();
    let run32 = {
        let v = TimeVelocity::steady(VelocityRecipe::Constant { components: vec![0.4] }.build(&g32).unwrap());
        let s = Solver::new(&g32, SolverConfig { horizon: 0.5, window: 0.1, picard_tol: 1e-5, ..Default::default() }).unwrap();
        s.advance(&g32.sample(|x| x[0].cos() + 0.5), &v).unwrap()
    };
    let run64 = {
        let v = TimeVelocity::steady(VelocityRecipe::Constant { components: vec![0.4] }.build(&g64).unwrap());
        let s = Solver::new(&g64, SolverConfig { horizon: 0.5, window: 0.1, ..Default::default() }).unwrap();
        s.advance(&g64.sample(|x| x[0].cos() + 0.5), &v).unwrap()
    };
    let a = run32.last();
    let b = run64.last();
    let gap = a.values.iter().zip(&b.values).map(|(x, y)| (*x as f64 - y).abs()).fold(0.0, f64::max);
    assert!(gap < 1e-4, "{gap}");
    // Exact decay e^{−t} of the cosine mode; `−∇·(vθ)` transports by −v.
    // The monotone transport scheme is first order: 2.4e-3 here, half at 256.
    let exact = g64.sample(|x| (-0.5f64).exp() * (x[0] + 0.2).cos() + 0.5);
    let err = b.values.iter().zip(&exact.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(err < 4e-3, "{err}");
}

#[test]
fn single_precision_kernels_and_molecules() {
    let h = Grid::<f32>::heisenberg(6.0, 16, 48, Boundary::Periodic).unwrap();
    let k = heat_kernel(&h, 0.5).unwrap();
    assert!((k.integrate() - 1.0).abs() < 1e-4);
    let op = SubordinationOperator::new(&h, SubordinationConfig::default()).unwrap();
    let one = carnot_flow::grid::ScalarField::constant(&h, 1.0f32);
    assert!(op.apply(&one).unwrap().max_abs() < 1e-4);

    let line = Grid::<f32>::euclidean(&[8.0], &[1024], Boundary::Periodic).unwrap();
    let spec = MoleculeSpec::on(&line, 0.2, 0.8, 0.6).unwrap();
    let psi = make_molecule(&spec, &line).unwrap();
    assert!(psi.integrate().abs() < 1e-5);
    assert!((psi.max_abs() as f64) < spec.height_bound());
}
