use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::config::{ExperimentConfig, Scenario};
use super::{CliError, Sink};
use crate::grid::snapshot::{write_snapshot, Encoding};
use crate::grid::{Grid, ScalarField};
use crate::group::axiom_residuals;
use crate::molecules::{corona_diagnostics, duality_bracket, evolve_suite, make_molecule, validate_molecule, EvolutionRecord, MoleculeState};
use crate::operators::{kernel_properties, SubordinationConfig, SubordinationOperator};
use crate::regularity::{bmo_norm_vector, holder_seminorm, max_principle_check, positivity_check, positivity_split_sweep, Check, NormReport};
use crate::solver::{viscosity_sweep, Solver, TimeVelocity, Trajectory};

type Run = Result<Vec<NormReport>, CliError>;

const P_LIST: [f64; 4] = [1.0, 2.0, 4.0, f64::INFINITY];

/// A single-check verdict.
fn verdict(name: &str, metric: f64, tolerance: f64, pass: bool) -> NormReport {
    NormReport {
        name: name.into(),
        rows: Vec::new(),
        checks: vec![Check { label: name.into(), pass, metric }],
        tolerance,
    }
}

fn below(name: &str, metric: f64, tolerance: f64) -> NormReport {
    verdict(name, metric, tolerance, metric <= tolerance)
}

pub(super) fn dispatch(cfg: &ExperimentConfig, sink: &mut Sink) -> Run {
    match cfg.scenario {
        Scenario::GroupVerify => group_verify(cfg),
        Scenario::KernelVerify => kernel_verify(cfg, sink),
        Scenario::Simulate => simulate(cfg, sink, false),
        Scenario::Positivity => simulate(cfg, sink, true),
        Scenario::MoleculeRun => molecule_run(cfg, sink),
        Scenario::HolderTest => holder_test(cfg, sink),
        Scenario::ViscositySweep => sweep(cfg, sink),
    }
}

fn velocity(cfg: &ExperimentConfig, grid: &Grid<f64>) -> Result<TimeVelocity<f64>, CliError> {
    Ok(TimeVelocity::modulated(cfg.velocity.build(grid)?, cfg.modulation))
}

fn group_verify(cfg: &ExperimentConfig) -> Run {
    let grid = cfg.grid.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let r = axiom_residuals(grid.group(), cfg.group_samples.unwrap_or(1000), &mut rng)?;
    Ok(vec![
        below("associativity", r.associativity, 1e-12),
        below("dilation-homomorphism", r.homomorphism, 1e-12),
        below("inverse-identity", r.inverse, 1e-12),
        below("gauge-homogeneity", r.gauge_homogeneity, 1e-12),
    ])
}

fn kernel_verify(cfg: &ExperimentConfig, sink: &mut Sink) -> Run {
    let grid = cfg.grid.build()?;
    let k = &cfg.kernel;
    let p = kernel_properties(&grid, k.t, k.alpha, k.stencil)?;
    let op = SubordinationOperator::new(&grid, SubordinationConfig::default())?;
    let constant = op.apply(&ScalarField::constant(&grid, 1.0))?.max_abs();
    let mut csv = String::from("t,alpha,mass,min,asymmetry,semigroup_l1,scaling_error,constant_residual\n");
    let _ = writeln!(
        csv,
        "{:e},{},{:e},{:e},{:e},{:e},{:e},{:e}",
        p.t, p.alpha, p.mass, p.min, p.asymmetry, p.semigroup_l1, p.scaling_error, constant
    );
    sink.write("kernel.csv", &csv)?;
    Ok(vec![
        below("kernel-mass", (p.mass - 1.0).abs(), 1e-3),
        below("kernel-symmetry", p.asymmetry, 1e-6),
        below("kernel-semigroup", p.semigroup_l1, 1e-2),
        below("kernel-scaling", p.scaling_error, 1e-2),
        below("fractional-constant", constant, 1e-10),
    ])
}

fn write_snapshots(sink: &mut Sink, traj: &Trajectory<f64>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    for (i, s) in traj.snapshots.iter().enumerate() {
        write_snapshot(&mut buf, s, Encoding::BinaryLe, json!({ "index": i }))?;
    }
    sink.write_bytes("snapshots.bin", &buf)
}

fn simulate(cfg: &ExperimentConfig, sink: &mut Sink, positivity: bool) -> Run {
    let grid = cfg.grid.build()?;
    let theta0 = cfg.initial.sample(&grid, cfg.seed)?;
    let v = velocity(cfg, &grid)?;
    let solver = Solver::new(&grid, cfg.solver.config())?;
    let traj = solver.advance(&theta0, &v)?;
    sink.write("norms.csv", &traj.norms_csv())?;
    if cfg.snapshots {
        write_snapshots(sink, &traj)?;
    }
    let mut out = vec![max_principle_check(&traj.norms, &P_LIST)];
    if positivity {
        let m = cfg.positivity.m;
        out.push(positivity_check(&traj, m)?);
        if !cfg.positivity.split_radii.is_empty() {
            let rep = positivity_split_sweep(&solver, &theta0, &v, m, &cfg.positivity.split_radii, f64::INFINITY)?;
            sink.write("split.csv", &rep.csv())?;
            out.push(below("split-reconstruction", rep.max_reconstruction_error(), 1e-10));
            if rep.rows.len() >= 2 {
                out.push(verdict("split-slope", rep.slope, 0.3, (rep.slope + 1.0).abs() <= 0.3));
            }
        }
    }
    Ok(out)
}

fn molecule_run(cfg: &ExperimentConfig, sink: &mut Sink) -> Run {
    let grid = cfg.grid.build()?;
    if cfg.molecules.is_empty() {
        return Err(CliError::Parse("molecule-run needs at least one [[molecules]] entry".into()));
    }
    let mc = &cfg.molecule_run;
    let v = velocity(cfg, &grid)?;
    let mu = match mc.mu {
        Some(m) => m,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            bmo_norm_vector(&v.field, mc.bmo_samples, &mut rng) * cfg.modulation.bound::<f64>()
        }
    };
    let specs = cfg.molecules.iter().map(|m| m.spec(&grid)).collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::new();
    let mut mol_csv = String::from("r,concentration,concentration_bound,height,height_bound,moment,l1,l1_bound,L2,L2_bound,L4,L4_bound,min_margin\n");
    for s in &specs {
        let psi = make_molecule(s, &grid)?;
        let rep = validate_molecule(&psi, s, &s.x0, &[2.0, 4.0])?;
        let _ = write!(
            mol_csv,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            s.r, rep.concentration, rep.concentration_bound, rep.height, rep.height_bound, rep.moment, rep.l1, rep.l1_bound
        );
        for (_, val, b) in &rep.lp {
            let _ = write!(mol_csv, ",{val:e},{b:e}");
        }
        let _ = writeln!(mol_csv, ",{:e}", rep.min_margin());
        out.push(NormReport {
            name: format!("molecule-conditions r={}", s.r),
            rows: Vec::new(),
            checks: rep.checks.clone(),
            tolerance: 1.0,
        });
        out.push(verdict(&format!("molecule-margin r={}", s.r), rep.min_margin(), 0.05, rep.min_margin() >= 0.05));
    }
    sink.write("molecules.csv", &mol_csv)?;

    let solver = Solver::new(&grid, cfg.solver.config())?;
    let records = evolve_suite(&solver, &specs, &v, mu, mc.t0, &mc.schedule)
        .into_iter()
        .collect::<Result<Vec<EvolutionRecord<f64>>, _>>()?;
    let mut env = String::from(EvolutionRecord::<f64>::CSV_HEADER);
    env.push('\n');
    for rec in &records {
        env.extend(rec.csv().lines().skip(1).map(|l| format!("{l}\n")));
        let name = format!("envelopes r={}", rec.spec.r);
        let worst = rec.rows.iter().map(|r| 1.0 - r.margin).fold(0.0, f64::max);
        let mut rep = verdict(&name, worst, rec.constants.safety, rec.pass());
        rep.checks.push(Check { label: "sup-monotone".into(), pass: rec.sup_monotone(1e-6), metric: 1e-6 });
        rep.checks.push(Check { label: "bounds-regenerate".into(), pass: rec.bounds_regenerate(), metric: 0.0 });
        if let Some(f) = rec.first_failure() {
            rep.checks.push(Check { label: format!("first-failure stage={}", f.stage), pass: false, metric: 1.0 - f.margin });
        }
        out.push(rep);
    }
    sink.write("envelopes.csv", &env)?;

    if mc.corona {
        let op = solver.fractional();
        let field = v.at(mc.schedule.theta_time.unwrap_or(mc.t0));
        let mut csv = String::from("r,radius,i1,i2,reference,last_corona_fraction,i1_regions,i2_regions\n");
        for s in &specs {
            let st = MoleculeState::new(make_molecule(s, &grid)?, s.x0.clone(), 0.0, s.omega_exponent)?;
            let row = corona_diagnostics(op, s, &st, &field, s.r)?;
            let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(";");
            let _ = writeln!(
                csv,
                "{:e},{:e},{:e},{:e},{:e},{:e},{},{}",
                s.r,
                row.radius,
                row.i1,
                row.i2,
                row.reference,
                row.last_corona_fraction(),
                join(&row.i1_regions),
                join(&row.i2_regions)
            );
        }
        sink.write("corona.csv", &csv)?;
    }

    let theta0 = cfg.initial.sample(&grid, cfg.seed)?;
    for rec in &records {
        let b = duality_bracket(&theta0, &rec.final_state.field, f64::INFINITY)?;
        out.push(verdict(&format!("duality-bracket r={}", rec.spec.r), b.bracket.abs(), b.bound, b.holds));
    }
    if let Some(tol) = mc.collapse_tolerance {
        let l1: Vec<f64> = records.iter().map(|r| r.final_l1()).collect();
        let (lo, hi) = l1.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        let spread = hi / lo - 1.0;
        out.push(below("final-l1-collapse", spread, tol));
    }
    Ok(out)
}

fn holder_test(cfg: &ExperimentConfig, sink: &mut Sink) -> Run {
    let h = &cfg.holder;
    if h.refine < 2 {
        return Err(CliError::Parse("holder.refine must be at least 2".into()));
    }
    let mut csv = String::from("resolution,points,spacing,gamma,seminorm\n");
    let mut values = Vec::new();
    for (i, gc) in [cfg.grid.clone(), cfg.grid.refined(h.refine)].iter().enumerate() {
        let grid = gc.build()?;
        let theta0 = cfg.initial.sample(&grid, cfg.seed)?;
        let v = velocity(cfg, &grid)?;
        let traj = Solver::new(&grid, cfg.solver.config())?.advance(&theta0, &v)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let s = holder_seminorm(traj.last(), h.gamma, h.samples, &mut rng)?;
        let _ = writeln!(csv, "{i},{},{:e},{},{s:e}", grid.len(), grid.h_min(), h.gamma);
        values.push(s);
    }
    sink.write("holder.csv", &csv)?;
    let rel = (values[1] - values[0]).abs() / values[0].abs().max(f64::MIN_POSITIVE);
    Ok(vec![below("holder-stability", rel, h.tolerance)])
}

fn sweep(cfg: &ExperimentConfig, sink: &mut Sink) -> Run {
    let grid = cfg.grid.build()?;
    let theta0 = cfg.initial.sample(&grid, cfg.seed)?;
    let v = velocity(cfg, &grid)?;
    let res = viscosity_sweep(&theta0, &v, cfg.solver.config(), &cfg.sweep.eps)?;
    sink.write("sweep.csv", &res.csv())?;
    if let Some(t) = res.trajectories.last() {
        sink.write("norms.csv", &t.norms_csv())?;
    }
    let d = res.final_consecutive_distances();
    let cauchy = d.windows(2).all(|w| w[1] < w[0]);
    let ratio = d.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    let mut out = vec![verdict("viscosity-cauchy", ratio, 1.0, cauchy)];
    for t in &res.trajectories {
        let mut r = max_principle_check(&t.norms, &P_LIST);
        r.name = format!("{} eps={}", r.name, t.eps);
        out.push(r);
    }
    Ok(out)
}
