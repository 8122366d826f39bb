use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{concentration, make_molecule, Frame, MoleculeSpec};
use crate::error::{invalid, Error, Result};
use crate::grid::{ScalarField, VectorField};
use crate::regularity::unit_volume;
use crate::scalar::Real;
use crate::solver::{Prepared, Solver, TimeVelocity};

/// `ψ(·, s)` with its centre and envelope values.
#[derive(Clone, Debug)]
pub struct MoleculeState<T> {
    pub field: ScalarField<T>,
    pub center: Vec<T>,
    /// Backward time `s` elapsed since the molecule was released.
    pub elapsed: T,
    pub omega_exponent: f64,
    pub concentration: f64,
    pub height: f64,
    pub mass: f64,
}

impl<T: Real> MoleculeState<T> {
    pub fn new(field: ScalarField<T>, center: Vec<T>, elapsed: T, omega_exponent: f64) -> Result<Self> {
        let (concentration, height, mass) = envelopes(&field, &center, omega_exponent)?;
        Ok(Self { field, center, elapsed, omega_exponent, concentration, height, mass })
    }

    /// Envelope values recomputed from field and centre.
    pub fn recompute(&self) -> Result<(f64, f64, f64)> {
        envelopes(&self.field, &self.center, self.omega_exponent)
    }
}

fn envelopes<T: Real>(f: &ScalarField<T>, center: &[T], omega: f64) -> Result<(f64, f64, f64)> {
    let c: Vec<f64> = center.iter().map(|v| v.as_f64()).collect();
    Ok((concentration(f, &c, omega), f.max_abs().as_f64(), f.lp_norm(1.0)?.as_f64()))
}

/// Soft-edged ball average of `v` over `B(c, radius)`; the edge is smeared
/// over one lattice resolution.
pub(super) fn ball_average<T: Real>(frame: &Frame<T>, v: &VectorField<T>, c: &[T], radius: T) -> Vec<T> {
    let g = &v.grid;
    let res = g.gauge_resolution();
    let half = T::lit(0.5);
    let mut w_sum = T::zero();
    let mut acc = vec![T::zero(); v.components.len()];
    for k in 0..g.len() {
        let rho = frame.rho(&g.coords(k), c);
        let w = ((radius - rho) / res + half).max(T::zero()).min(T::one());
        if w > T::zero() {
            w_sum += w;
            for (a, comp) in acc.iter_mut().zip(&v.components) {
                *a += w * comp[k];
            }
        }
    }
    acc.into_iter().map(|a| a / w_sum).collect()
}

fn center_step<T: Real>(frame: &Frame<T>, c: &[T], v: &VectorField<T>, factor: T, radius: T, dt: T) -> Result<Vec<T>> {
    frame.check_ball(c, radius)?;
    let m = ball_average(frame, v, c, radius);
    let mut out = c.to_vec();
    for (o, &vj) in out.iter_mut().zip(&m) {
        *o += dt * factor * vj;
    }
    if v.grid.group().is_heisenberg() {
        // Coordinate velocity of v̄₁X₁ + v̄₂X₂ at the centre.
        out[2] += dt * factor * T::lit(0.5) * (c[0] * m[1] - c[1] * m[0]);
    }
    frame.normalize(&mut out);
    Ok(out)
}

/// Forward-Euler step of `x' = v̄_{B(x, radius)}` with `v` sampled at `t`.
pub fn center_ode_step<T: Real>(center: &[T], v: &TimeVelocity<T>, t: T, radius: T, dt: T) -> Result<Vec<T>> {
    if center.len() != v.field.grid.dims() {
        return invalid("centre dimension does not match the grid");
    }
    let frame = Frame::new(&v.field.grid);
    center_step(&frame, center, &v.field, v.factor(t), radius, dt)
}

/// Backward dual evolution `∂_s ψ = −∇·(v(·, t − s)ψ) − J^{1/2}ψ` driven by
/// the exact transposes of the forward solver's steps.
pub struct MoleculeEvolver<'a, T> {
    solver: &'a Solver<T>,
    prepared: Prepared<T>,
    frame: Frame<T>,
    theta_time: T,
}

impl<'a, T: Real> MoleculeEvolver<'a, T> {
    /// `theta_time` is the forward time paired with `s = 0`.
    pub fn new(solver: &'a Solver<T>, v: &TimeVelocity<T>, theta_time: T) -> Result<Self> {
        let prepared = solver.prepare(v)?;
        Ok(Self { solver, prepared, frame: Frame::new(solver.grid()), theta_time })
    }

    /// Largest step allowed by the forward solver's guard.
    pub fn dt_guard(&self) -> T {
        self.solver.default_dt(&self.prepared)
    }

    /// Advances `ψ` and its centre by `dt`, averaging the velocity over
    /// a ball of radius `radius`.
    pub fn step(&self, state: &MoleculeState<T>, radius: T, dt: T) -> Result<MoleculeState<T>> {
        let s = state.elapsed;
        let t_fwd = self.theta_time - s - dt;
        let psi = self.solver.dual_step(&self.prepared, &state.field.values, t_fwd, dt)?;
        let field = state.field.with_values(psi);
        let sup = field.max_abs();
        if !field.is_finite() || sup > T::lit(2.0) * state.field.max_abs() {
            return Err(Error::StepSize(format!("sup norm more than doubled in one step of {dt}")));
        }
        let v = &self.prepared.velocity;
        let t = self.theta_time - s;
        let center = center_step(&self.frame, &state.center, &v.field, v.factor(t), radius, dt)?;
        MoleculeState::new(field, center, s + dt, state.omega_exponent)
    }
}

/// One backward step; see [`MoleculeEvolver::step`].
pub fn backward_evolve_step<T: Real>(
    solver: &Solver<T>,
    state: &MoleculeState<T>,
    v: &TimeVelocity<T>,
    theta_time: T,
    radius: T,
    dt: T,
) -> Result<MoleculeState<T>> {
    MoleculeEvolver::new(solver, v, theta_time)?.step(state, radius, dt)
}

/// Stage schedule knobs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Stage length as a fraction of `r`.
    pub eps_step: f64,
    /// Constant in `K = C_fit(μ + 1)/(ω − γ)`.
    pub c_fit: f64,
    /// Envelope checks pass when `value ≤ safety·bound`.
    pub safety: f64,
    /// Forward time paired with `s = 0`; defaults to `T₀`.
    pub theta_time: Option<f64>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self { eps_step: 0.1, c_fit: 1.0, safety: 1.1, theta_time: None }
    }
}

/// Envelope bounds at `f = min(r + KΣs, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeBounds {
    pub f: f64,
    pub concentration: f64,
    pub height: f64,
    pub l1: f64,
    /// `r + KΣs ≥ 1`: only the maximum principle is left to check.
    pub capped: bool,
}

/// `(f^{ω−γ}, f^{−(N+γ)}, v_N f^{−γ})` at `f = min(r + K·elapsed, 1)`.
pub fn envelope_bounds(r: f64, k: f64, elapsed: f64, gamma: f64, omega: f64, n: u32, v_n: f64) -> EnvelopeBounds {
    let raw = r + k * elapsed;
    let f = raw.min(1.0);
    EnvelopeBounds {
        f: raw,
        concentration: f.powf(omega - gamma),
        height: f.powf(-(n as f64 + gamma)),
        l1: v_n * f.powf(-gamma),
        capped: raw >= 1.0,
    }
}

/// One stage of the schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct StageRow {
    pub stage: usize,
    /// Stage length.
    pub s: f64,
    /// `Σs_i` up to and including this stage.
    pub elapsed: f64,
    pub center: Vec<f64>,
    pub concentration: f64,
    pub height: f64,
    pub l1: f64,
    pub mean: f64,
    pub bounds: EnvelopeBounds,
    /// Smallest `1 − value/bound` over the checked envelopes.
    pub margin: f64,
    pub pass: bool,
}

/// Constants the bounds depend on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RecordConstants {
    pub k: f64,
    pub mu: f64,
    pub eps_step: f64,
    pub v_n: f64,
    pub c_fit: f64,
    pub safety: f64,
    pub t0: f64,
}

/// Envelope time series of one molecule.
#[derive(Clone, Debug)]
pub struct EvolutionRecord<T> {
    pub spec: MoleculeSpec,
    pub constants: RecordConstants,
    pub rows: Vec<StageRow>,
    pub final_state: MoleculeState<T>,
}

fn stage_row(spec: &MoleculeSpec, c: &RecordConstants, stage: usize, elapsed: f64, st: (f64, f64, f64, f64), center: Vec<f64>) -> StageRow {
    let (concentration, height, l1, mean) = st;
    let bounds = envelope_bounds(spec.r, c.k, elapsed, spec.gamma, spec.omega_exponent, spec.n, c.v_n);
    let mut ratios = vec![height / bounds.height, l1 / bounds.l1];
    if !bounds.capped {
        ratios.push(concentration / bounds.concentration);
    }
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    StageRow {
        stage,
        s: 0.0,
        elapsed,
        center,
        concentration,
        height,
        l1,
        mean,
        bounds,
        margin: 1.0 - worst,
        pass: worst <= c.safety,
    }
}

impl<T: Real> EvolutionRecord<T> {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn first_failure(&self) -> Option<&StageRow> {
        self.rows.iter().find(|r| !r.pass)
    }

    pub fn final_l1(&self) -> f64 {
        self.final_state.mass
    }

    /// Bound columns recomputed from the constants equal the stored ones
    /// bit for bit.
    pub fn bounds_regenerate(&self) -> bool {
        let (s, c) = (&self.spec, &self.constants);
        self.rows
            .iter()
            .all(|row| envelope_bounds(s.r, c.k, row.elapsed, s.gamma, s.omega_exponent, s.n, c.v_n) == row.bounds)
    }

    /// `‖ψ(s_{k+1})‖_∞ ≤ (1 + slack)‖ψ(s_k)‖_∞` between consecutive stages.
    pub fn sup_monotone(&self, slack: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].height <= w[0].height * (1.0 + slack))
    }

    pub const CSV_HEADER: &'static str = "stage,s,elapsed,f,center,concentration,height,l1,mean,concentration_bound,height_bound,l1_bound,capped,margin,pass,r,K,gamma,omega,N,v_N,mu,eps_step,safety";

    /// One row per stage; the centre is `;`-separated.
    pub fn csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            self.write_row(&mut out, r);
        }
        out
    }

    fn write_row(&self, out: &mut String, r: &StageRow) {
        let (s, c) = (&self.spec, &self.constants);
        let center: Vec<String> = r.center.iter().map(|x| format!("{x:e}")).collect();
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{:e},{},{:e},{:e},{:e},{:e},{},{:e},{:e},{:e},{:e}",
            r.stage,
            r.s,
            r.elapsed,
            r.bounds.f,
            center.join(";"),
            r.concentration,
            r.height,
            r.l1,
            r.mean,
            r.bounds.concentration,
            r.bounds.height,
            r.bounds.l1,
            r.bounds.capped,
            r.margin,
            r.pass,
            s.r,
            c.k,
            s.gamma,
            s.omega_exponent,
            s.n,
            c.v_n,
            c.mu,
            c.eps_step,
            c.safety
        );
    }
}

/// Releases the molecule of `spec` and runs stages of length `ε_step·r`
/// until `Σs ≥ T₀`, with `K = C_fit(μ + 1)/(ω − γ)`.
///
/// Once `r + KΣs ≥ 1` the bounds freeze at `f = 1` and only height and
/// mass are checked, both of which the maximum principle controls.
/// Violations are recorded in the rows, not raised.
pub fn evolve_schedule<T: Real>(
    solver: &Solver<T>,
    spec: &MoleculeSpec,
    v: &TimeVelocity<T>,
    mu: f64,
    t0: f64,
    cfg: &ScheduleConfig,
) -> Result<EvolutionRecord<T>> {
    spec.validate()?;
    if !spec.is_small() {
        return invalid("the envelope schedule applies to small molecules");
    }
    if !(t0 > 0.0 && mu >= 0.0 && cfg.eps_step > 0.0 && cfg.c_fit > 0.0 && cfg.safety >= 1.0) {
        return invalid("need T0 > 0, mu >= 0, eps_step > 0, C_fit > 0 and safety >= 1");
    }
    let grid = solver.grid();
    let constants = RecordConstants {
        k: cfg.c_fit * (mu + 1.0) / (spec.omega_exponent - spec.gamma),
        mu,
        eps_step: cfg.eps_step,
        v_n: unit_volume(grid.group()),
        c_fit: cfg.c_fit,
        safety: cfg.safety,
        t0,
    };
    let evolver = MoleculeEvolver::new(solver, v, T::lit(cfg.theta_time.unwrap_or(t0)))?;
    let psi0 = make_molecule(spec, grid)?;
    let center: Vec<T> = spec.x0.iter().map(|&x| T::lit(x)).collect();
    let mut state = MoleculeState::new(psi0, center, T::zero(), spec.omega_exponent)?;
    let snapshot = |st: &MoleculeState<T>| -> (f64, f64, f64, f64) {
        (st.concentration, st.height, st.mass, st.field.integrate().as_f64())
    };
    let centre_f64 = |st: &MoleculeState<T>| st.center.iter().map(|x| x.as_f64()).collect::<Vec<_>>();
    let mut rows = vec![stage_row(spec, &constants, 0, 0.0, snapshot(&state), centre_f64(&state))];
    let stage_len = cfg.eps_step * spec.r;
    let guard = evolver.dt_guard().as_f64();
    let mut elapsed = 0.0;
    let mut stage = 0;
    while elapsed < t0 * (1.0 - 1e-12) {
        stage += 1;
        let len = stage_len.min(t0 - elapsed);
        let radius = (spec.r + constants.k * elapsed).min(1.0);
        let n = (len / guard).ceil().max(1.0) as usize;
        let dt = T::lit(len / n as f64);
        for _ in 0..n {
            state = evolver.step(&state, T::lit(radius), dt)?;
        }
        elapsed += len;
        state.elapsed = T::lit(elapsed);
        let mut row = stage_row(spec, &constants, stage, elapsed, snapshot(&state), centre_f64(&state));
        row.s = len;
        rows.push(row);
    }
    Ok(EvolutionRecord { spec: spec.clone(), constants, rows, final_state: state })
}

/// Runs [`evolve_schedule`] for every spec in parallel.
pub fn evolve_suite<T: Real>(
    solver: &Solver<T>,
    specs: &[MoleculeSpec],
    v: &TimeVelocity<T>,
    mu: f64,
    t0: f64,
    cfg: &ScheduleConfig,
) -> Vec<Result<EvolutionRecord<T>>> {
    specs.par_iter().map(|s| evolve_schedule(solver, s, v, mu, t0, cfg)).collect()
}
