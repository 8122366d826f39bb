//! Windowed Picard solver for `∂_t θ − ∇·(vθ) + J^{1/2}θ = εJθ`-type
//! problems, its ε = 0 semi-implicit counterpart, and the exact discrete
//! adjoint used for duality experiments.
//!
//! One step of length `dt` starting at `t` is
//!
//! * ε > 0: `θ ↦ P_{εdt}(θ + dt·(−∇·(uθ) − Λθ))`, which is the fixed point
//!   of the left-endpoint Duhamel map that the Picard iteration converges to;
//! * ε = 0, periodic ℝⁿ: `θ ↦ e^{−dtΛ}(θ − dt·∇·(uθ))` in Fourier space;
//! * ε = 0 elsewhere: `θ ↦ θ + dt·(−∇·(uθ) − Λθ)`,
//!
//! with `u = −v(t)`, `Λ` the subordinated `J^{1/2}` and `P` the lattice heat
//! semigroup. Each map is a nonnegative, mass-preserving matrix under the
//! default step guard, so every `L^p` norm is nonincreasing.

mod transport;
mod velocity;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex};

use crate::error::{invalid, Error, Result};
use crate::fft::{fft_nd, freq, to_complex};
use crate::grid::{clamp_velocity, mollify, Grid, ScalarField};
use crate::operators::{march, Stencil, SubordinationConfig, SubordinationOperator};
use crate::scalar::Real;

pub(crate) use transport::Transport;
pub use velocity::{Modulation, TimeVelocity, VelocityRecipe};

/// Consecutive halvings of the Picard window before giving up.
pub const MAX_HALVINGS: usize = 6;

/// Relative divergence above which a warning is recorded.
pub const DIVERGENCE_WARNING: f64 = 1e-3;

/// Solver parameters; times in the model's units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig<T> {
    /// Viscosity `ε ≥ 0`; zero selects the direct semi-implicit scheme.
    pub eps: T,
    pub horizon: T,
    /// Picard window `T′`.
    pub window: T,
    /// Inner step; `None` selects the stability guard.
    pub dt: Option<T>,
    pub picard_tol: T,
    pub max_iter: usize,
    pub clamp_k: Option<T>,
    /// Mollification radius of the velocity; `None` leaves it untouched.
    pub mollify_scale: Option<T>,
    /// Regularity onset time `T₀`.
    pub t0: T,
    /// Snapshot spacing; `None` gives 20 snapshots over the horizon.
    pub snapshot_interval: Option<T>,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            eps: T::zero(),
            horizon: T::one(),
            window: T::lit(0.02),
            dt: None,
            picard_tol: T::lit(1e-10),
            max_iter: 50,
            clamp_k: None,
            mollify_scale: None,
            t0: T::lit(0.5),
            snapshot_interval: None,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps >= T::zero()) {
            return invalid(format!("eps must be ≥ 0, got {}", self.eps));
        }
        if !(self.horizon > T::zero()) {
            return invalid(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.window > T::zero() && self.window <= self.horizon) {
            return invalid(format!("window must lie in (0, horizon], got {}", self.window));
        }
        if let Some(dt) = self.dt {
            if !(dt > T::zero() && dt <= self.window) {
                return invalid(format!("dt must lie in (0, window], got {dt}"));
            }
        }
        if !(self.picard_tol > T::zero()) {
            return invalid("picard_tol must be positive");
        }
        if self.max_iter == 0 {
            return invalid("max_iter must be at least 1");
        }
        if let Some(s) = self.snapshot_interval {
            if !(s > T::zero()) {
                return invalid("snapshot_interval must be positive");
            }
        }
        if let Some(k) = self.clamp_k {
            if !(k > T::zero()) {
                return invalid("clamp_k must be positive");
            }
        }
        Ok(())
    }

    pub fn snapshot_spacing(&self) -> T {
        self.snapshot_interval.unwrap_or(self.horizon / T::lit(20.0)).min(self.horizon)
    }
}

/// One row of the norm table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormRow {
    pub t: f64,
    pub l1: f64,
    pub l2: f64,
    pub l4: f64,
    pub linf: f64,
    pub boundary_mass: f64,
    /// Largest Picard iteration count among the windows since the previous row.
    pub picard_iters: usize,
}

impl NormRow {
    pub const HEADER: &'static str = "t,L1,L2,L4,Linf,boundary_mass,picard_iters";

    pub fn of<T: Real>(f: &ScalarField<T>, t: T, picard_iters: usize) -> Result<Self> {
        Ok(Self {
            t: t.as_f64(),
            l1: f.lp_norm(1.0)?.as_f64(),
            l2: f.lp_norm(2.0)?.as_f64(),
            l4: f.lp_norm(4.0)?.as_f64(),
            linf: f.lp_norm(f64::INFINITY)?.as_f64(),
            boundary_mass: f.boundary_mass().as_f64(),
            picard_iters,
        })
    }

    /// Norm for `p ∈ {1, 2, 4, ∞}`.
    pub fn norm(&self, p: f64) -> Option<f64> {
        match p {
            1.0 => Some(self.l1),
            2.0 => Some(self.l2),
            4.0 => Some(self.l4),
            p if p.is_infinite() => Some(self.linf),
            _ => None,
        }
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.t, self.l1, self.l2, self.l4, self.linf, self.boundary_mass, self.picard_iters
        )
    }
}

/// Solution history of one run.
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    /// Fields at strictly increasing times (each carries its time).
    pub snapshots: Vec<ScalarField<T>>,
    /// One row per snapshot.
    pub norms: Vec<NormRow>,
    /// Executed steps `(t_n, dt_n)` in order.
    pub steps: Vec<(T, T)>,
    /// Final Picard window after any halving.
    pub window: T,
    pub halvings: usize,
    /// Largest observed distance ratio per Picard window.
    pub contraction: Vec<f64>,
    pub warnings: Vec<String>,
    pub eps: T,
}

impl<T: Real> Trajectory<T> {
    pub fn times(&self) -> Vec<T> {
        self.snapshots.iter().map(|s| s.time.unwrap_or(T::zero())).collect()
    }

    pub fn initial(&self) -> &ScalarField<T> {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &ScalarField<T> {
        self.snapshots.last().expect("trajectory has an initial snapshot")
    }

    /// Snapshot recorded at time `t` (to rounding), if any.
    pub fn at(&self, t: T) -> Option<&ScalarField<T>> {
        let tol = T::lit(1e-9) * (T::one() + t.abs());
        self.snapshots.iter().find(|s| (s.time.unwrap_or(T::zero()) - t).abs() <= tol)
    }

    pub fn norms_csv(&self) -> String {
        let mut s = String::from(NormRow::HEADER);
        s.push('\n');
        for r in &self.norms {
            let _ = writeln!(s, "{}", r.csv_line());
        }
        s
    }

    pub fn write_norms_csv(&self, path: &Path) -> Result<()> {
        std::fs::File::create(path)?.write_all(self.norms_csv().as_bytes())?;
        Ok(())
    }
}

enum Heat<T> {
    None,
    /// Symbol of the 3-point Laplacian on periodic ℝⁿ.
    Spectral(Vec<T>),
    March,
}

/// Precomputed operators for one grid; cheap to re-parameterize in ε.
pub struct Solver<T> {
    grid: Grid<T>,
    cfg: SolverConfig<T>,
    frac: Arc<SubordinationOperator<T>>,
    symbol: Option<Arc<Vec<T>>>,
    heat: Heat<T>,
    exp_cache: Mutex<BTreeMap<u64, Arc<Vec<T>>>>,
}

/// Prepared velocity.
pub(crate) struct Prepared<T> {
    pub transport: Transport<T>,
    pub velocity: TimeVelocity<T>,
    pub warnings: Vec<String>,
}

impl<T: Real> Solver<T> {
    pub fn new(grid: &Grid<T>, cfg: SolverConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let frac = Arc::new(SubordinationOperator::new(grid, SubordinationConfig::default())?);
        let spectral = !grid.group().is_heisenberg() && grid.is_periodic();
        let symbol = if spectral { Some(Arc::new(frac.spectral_symbol()?)) } else { None };
        let mut s = Self {
            grid: grid.clone(),
            cfg,
            frac,
            symbol,
            heat: Heat::None,
            exp_cache: Mutex::new(BTreeMap::new()),
        };
        s.heat = s.heat_for(cfg.eps);
        Ok(s)
    }

    fn heat_for(&self, eps: T) -> Heat<T> {
        if eps == T::zero() {
            return Heat::None;
        }
        if self.symbol.is_none() {
            return Heat::March;
        }
        let g = &self.grid;
        let counts = g.counts();
        let sym = (0..g.len())
            .map(|k| {
                let i = g.unflat(k);
                (0..g.dims())
                    .map(|a| {
                        let h = g.spacing(a);
                        let s = (T::PI() * T::from_i64(freq(i[a], counts[a])).unwrap() / T::count(counts[a])).sin();
                        T::lit(4.0) * s * s / (h * h)
                    })
                    .sum()
            })
            .collect();
        Heat::Spectral(sym)
    }

    /// Same operators with a different configuration.
    pub fn with_config(&self, cfg: SolverConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let mut s = Self {
            grid: self.grid.clone(),
            cfg,
            frac: self.frac.clone(),
            symbol: self.symbol.clone(),
            heat: Heat::None,
            exp_cache: Mutex::new(BTreeMap::new()),
        };
        s.heat = s.heat_for(cfg.eps);
        Ok(s)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig<T> {
        &self.cfg
    }

    pub fn fractional(&self) -> &SubordinationOperator<T> {
        &self.frac
    }

    fn implicit_diffusion(&self) -> bool {
        self.cfg.eps == T::zero() && self.symbol.is_some()
    }

    /// Clamp, then mollify, then build face velocities.
    pub(crate) fn prepare(&self, v: &TimeVelocity<T>) -> Result<Prepared<T>> {
        self.grid.check_same(&v.field.grid)?;
        let mut field = v.field.clone();
        if let Some(k) = self.cfg.clamp_k {
            field = clamp_velocity(&field, k)?;
        }
        if let Some(e) = self.cfg.mollify_scale {
            field = mollify(&field, e)?;
        }
        let transport = Transport::new(&field);
        let mut warnings = Vec::new();
        let div = transport.divergence_residual();
        if div > T::lit(DIVERGENCE_WARNING) {
            warnings.push(format!("velocity divergence residual {div} exceeds {DIVERGENCE_WARNING}"));
        }
        Ok(Prepared { transport, velocity: TimeVelocity::modulated(field, v.modulation), warnings })
    }

    /// Step guard `min(h/(2 sup|v| + 1), 1/(outflow + explicit diffusion rate))`.
    pub(crate) fn default_dt(&self, p: &Prepared<T>) -> T {
        let h = self.grid.h_min();
        let adv = h / (T::lit(2.0) * p.velocity.sup_norm() + T::one());
        let mut rate = p.transport.rate_bound() * p.velocity.modulation.bound::<T>();
        if !self.implicit_diffusion() {
            rate += self.frac.diagonal_rate();
        }
        let mono = if rate > T::zero() { T::one() / rate } else { T::infinity() };
        adv.min(mono).min(self.cfg.window)
    }

    /// `Λθ`.
    fn frac_apply(&self, theta: &[T]) -> Result<Vec<T>> {
        match &self.symbol {
            Some(sym) => Ok(self.spectral_multiply(theta, |k| sym[k])),
            None => {
                let f = ScalarField::new(self.grid.clone(), theta.to_vec())?;
                Ok(self.frac.apply(&f)?.values)
            }
        }
    }

    fn spectral_multiply(&self, theta: &[T], m: impl Fn(usize) -> T) -> Vec<T> {
        let counts = self.grid.counts();
        let mut c = to_complex(theta);
        fft_nd(&mut c, counts, 3, false);
        for (k, z) in c.iter_mut().enumerate() {
            *z = *z * m(k);
        }
        fft_nd(&mut c, counts, 3, true);
        let n = T::count(theta.len());
        c.iter().map(|z| z.re / n).collect()
    }

    /// `e^{−dtΛ}` multiplier, cached per step length.
    fn exp_symbol(&self, dt: T) -> Arc<Vec<T>> {
        let key = dt.as_f64().to_bits();
        let mut cache = self.exp_cache.lock().expect("exp cache");
        cache
            .entry(key)
            .or_insert_with(|| {
                let sym = self.symbol.as_ref().expect("spectral grid");
                Arc::new(sym.iter().map(|&l| (-dt * l).exp()).collect())
            })
            .clone()
    }

    fn heat_apply(&self, theta: Vec<T>, tau: T) -> Vec<T> {
        match &self.heat {
            Heat::None => theta,
            Heat::Spectral(sym) => self.spectral_multiply(&theta, |k| (-tau * sym[k]).exp()),
            Heat::March => {
                let mut out = None;
                march(&self.grid, Stencil::Second, theta, &[tau], |_, u| out = Some(u.to_vec()));
                out.expect("one stop")
            }
        }
    }

    /// `−∇·(uθ) − Λθ` with `u = −v(t)`.
    fn explicit_rate(&self, p: &Prepared<T>, theta: &[T], t: T) -> Result<Vec<T>> {
        let mut out: Vec<T> = self.frac_apply(theta)?.into_iter().map(|x| -x).collect();
        p.transport.add_rate(theta, -p.velocity.factor(t), &mut out);
        Ok(out)
    }

    fn explicit_rate_transpose(&self, p: &Prepared<T>, psi: &[T], t: T) -> Result<Vec<T>> {
        let mut out: Vec<T> = self.frac_apply(psi)?.into_iter().map(|x| -x).collect();
        p.transport.add_rate_transpose(psi, -p.velocity.factor(t), &mut out);
        Ok(out)
    }

    fn forward_step(&self, p: &Prepared<T>, theta: &[T], t: T, dt: T) -> Result<Vec<T>> {
        if self.implicit_diffusion() {
            let mut y = theta.to_vec();
            p.transport.add_rate(theta, -p.velocity.factor(t) * dt, &mut y);
            let e = self.exp_symbol(dt);
            return Ok(self.spectral_multiply(&y, |k| e[k]));
        }
        let r = self.explicit_rate(p, theta, t)?;
        let y: Vec<T> = theta.iter().zip(&r).map(|(&a, &b)| a + dt * b).collect();
        Ok(self.heat_apply(y, self.cfg.eps * dt))
    }

    pub(crate) fn dual_step(&self, p: &Prepared<T>, psi: &[T], t: T, dt: T) -> Result<Vec<T>> {
        if self.implicit_diffusion() {
            let e = self.exp_symbol(dt);
            let y = self.spectral_multiply(psi, |k| e[k]);
            let mut out = y.clone();
            p.transport.add_rate_transpose(&y, -p.velocity.factor(t) * dt, &mut out);
            return Ok(out);
        }
        let y = self.heat_apply(psi.to_vec(), self.cfg.eps * dt);
        let r = self.explicit_rate_transpose(p, &y, t)?;
        Ok(y.iter().zip(&r).map(|(&a, &b)| a + dt * b).collect())
    }

    /// Picard iteration on one window of `n` equal steps. Returns the final
    /// state, the iteration count and the largest distance ratio observed.
    fn picard_window(&self, p: &Prepared<T>, start: &[T], t: T, dt: T, n: usize) -> Result<(Vec<T>, usize, f64)> {
        let vol = self.grid.cell_volume();
        let mut old: Vec<Vec<T>> = vec![start.to_vec(); n + 1];
        let mut prev_d: Option<T> = None;
        let mut worst = 0.0f64;
        for iter in 1..=self.cfg.max_iter {
            let mut new = Vec::with_capacity(n + 1);
            new.push(start.to_vec());
            for i in 0..n {
                let ti = t + dt * T::count(i);
                let r = self.explicit_rate(p, &old[i], ti)?;
                let y: Vec<T> = new[i].iter().zip(&r).map(|(&a, &b)| a + dt * b).collect();
                new.push(self.heat_apply(y, self.cfg.eps * dt));
            }
            let d = new
                .iter()
                .zip(&old)
                .map(|(a, b)| (a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>() * vol).sqrt())
                .fold(T::zero(), T::max);
            if !d.is_finite() {
                return Err(Error::Convergence(format!("Picard iterate is not finite at t = {t}")));
            }
            if d < self.cfg.picard_tol {
                return Ok((new.pop().expect("window state"), iter, worst));
            }
            if let Some(pd) = prev_d {
                let ratio = (d / pd).as_f64();
                worst = worst.max(ratio);
                if iter >= 3 && ratio > 0.95 {
                    return Err(Error::WindowTooLarge(format!(
                        "Picard distance ratio {ratio:.3} > 0.95 on a window of length {}; reduce T′",
                        dt * T::count(n)
                    )));
                }
            }
            prev_d = Some(d);
            old = new;
        }
        Err(Error::Convergence(format!(
            "Picard iteration did not reach tolerance {} in {} iterations",
            self.cfg.picard_tol, self.cfg.max_iter
        )))
    }

    /// Solves one window `[0, T′]` from `theta_init` with the configured
    /// step. Requires `ε > 0`.
    pub fn picard_solve_window(&self, theta_init: &ScalarField<T>, v: &TimeVelocity<T>) -> Result<ScalarField<T>> {
        if !(self.cfg.eps > T::zero()) {
            return invalid("picard_solve_window needs eps > 0");
        }
        self.grid.check_same(&theta_init.grid)?;
        let p = self.prepare(v)?;
        let dt = self.cfg.dt.unwrap_or_else(|| self.default_dt(&p));
        let n = steps_for(self.cfg.window, dt);
        let t0 = theta_init.time.unwrap_or(T::zero());
        let (out, _, _) = self.picard_window(&p, &theta_init.values, t0, self.cfg.window / T::count(n), n)?;
        Ok(theta_init.with_values(out).at_time(t0 + self.cfg.window))
    }

    /// Chains windows up to the horizon, recording snapshots.
    pub fn advance(&self, theta0: &ScalarField<T>, v: &TimeVelocity<T>) -> Result<Trajectory<T>> {
        self.grid.check_same(&theta0.grid)?;
        if !theta0.is_finite() {
            return invalid("initial datum is not finite");
        }
        let p = self.prepare(v)?;
        let cfg = &self.cfg;
        let dt = cfg.dt.unwrap_or_else(|| self.default_dt(&p));
        let mut warnings = p.warnings.clone();
        if cfg.dt.is_some() && dt > self.default_dt(&p) {
            warnings.push(format!("dt {dt} exceeds the monotonicity guard {}", self.default_dt(&p)));
        }
        let spacing = cfg.snapshot_spacing();
        let t_start = theta0.time.unwrap_or(T::zero());
        let horizon = t_start + cfg.horizon;
        let mut state = theta0.values.clone();
        let mut traj = Trajectory {
            snapshots: vec![theta0.clone().at_time(t_start)],
            norms: vec![NormRow::of(theta0, t_start, 0)?],
            steps: Vec::new(),
            window: cfg.window,
            halvings: 0,
            contraction: Vec::new(),
            warnings,
            eps: cfg.eps,
        };
        let mut t = t_start;
        let mut k = 1usize;
        let mut iters_since = 0usize;
        while t < horizon {
            let next_record = (t_start + spacing * T::count(k)).min(horizon);
            let end = (t + traj.window).min(next_record);
            let n = steps_for(end - t, dt);
            let h = (end - t) / T::count(n);
            if cfg.eps > T::zero() {
                match self.picard_window(&p, &state, t, h, n) {
                    Ok((out, iters, ratio)) => {
                        state = out;
                        iters_since = iters_since.max(iters);
                        traj.contraction.push(ratio);
                    }
                    Err(Error::WindowTooLarge(msg)) => {
                        if traj.halvings >= MAX_HALVINGS {
                            return Err(Error::WindowTooLarge(format!("{msg} (after {MAX_HALVINGS} halvings)")));
                        }
                        traj.halvings += 1;
                        traj.window = traj.window / T::lit(2.0);
                        continue;
                    }
                    Err(e) => return Err(e),
                }
            } else {
                for i in 0..n {
                    state = self.forward_step(&p, &state, t + h * T::count(i), h)?;
                }
            }
            for i in 0..n {
                traj.steps.push((t + h * T::count(i), h));
            }
            t = end;
            if end == next_record {
                let f = theta0.with_values(state.clone()).at_time(t);
                traj.norms.push(NormRow::of(&f, t, iters_since)?);
                traj.snapshots.push(f);
                iters_since = 0;
                k += 1;
            }
        }
        Ok(traj)
    }

    /// Applies the transposed step sequence of `traj` in reverse to a
    /// terminal datum, returning `ψ` at the start of every step (index `n`
    /// pairs with `traj.steps[n]`) followed by the terminal datum.
    ///
    /// For forward states `θ_n` the bracket `⟨θ_n, ψ_n⟩` is independent of
    /// `n` up to rounding.
    pub fn dual_sweep(&self, psi_end: &ScalarField<T>, v: &TimeVelocity<T>, steps: &[(T, T)]) -> Result<Vec<ScalarField<T>>> {
        self.grid.check_same(&psi_end.grid)?;
        let p = self.prepare(v)?;
        let mut out = vec![psi_end.clone()];
        let mut psi = psi_end.values.clone();
        for &(t, dt) in steps.iter().rev() {
            psi = self.dual_step(&p, &psi, t, dt)?;
            out.push(psi_end.with_values(psi.clone()).at_time(t));
        }
        out.reverse();
        Ok(out)
    }

    /// Forward states at the start of every step plus the final state.
    pub fn forward_states(&self, theta0: &ScalarField<T>, v: &TimeVelocity<T>, steps: &[(T, T)]) -> Result<Vec<ScalarField<T>>> {
        let p = self.prepare(v)?;
        let mut out = vec![theta0.clone()];
        let mut s = theta0.values.clone();
        for &(t, dt) in steps {
            s = self.forward_step(&p, &s, t, dt)?;
            out.push(theta0.with_values(s.clone()).at_time(t + dt));
        }
        Ok(out)
    }

    /// Uniform step schedule over `[t_start, t_start + horizon]` with the
    /// default guard for `v`.
    pub fn schedule(&self, v: &TimeVelocity<T>, t_start: T) -> Result<Vec<(T, T)>> {
        let p = self.prepare(v)?;
        let dt = self.cfg.dt.unwrap_or_else(|| self.default_dt(&p));
        let n = steps_for(self.cfg.horizon, dt);
        let h = self.cfg.horizon / T::count(n);
        Ok((0..n).map(|i| (t_start + h * T::count(i), h)).collect())
    }
}

fn steps_for<T: Real>(span: T, dt: T) -> usize {
    (span / dt * (T::one() - T::lit(1e-12))).ceil().to_usize().unwrap_or(1).max(1)
}

/// One-shot [`Solver::picard_solve_window`].
pub fn picard_solve_window<T: Real>(theta_init: &ScalarField<T>, v: &TimeVelocity<T>, cfg: SolverConfig<T>) -> Result<ScalarField<T>> {
    Solver::new(&theta_init.grid, cfg)?.picard_solve_window(theta_init, v)
}

/// One-shot [`Solver::advance`].
pub fn advance<T: Real>(theta0: &ScalarField<T>, v: &TimeVelocity<T>, cfg: SolverConfig<T>) -> Result<Trajectory<T>> {
    Solver::new(&theta0.grid, cfg)?.advance(theta0, v)
}

/// Distance between two sweep members at a shared snapshot time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub t: f64,
    pub eps_a: f64,
    pub eps_b: f64,
    pub l2_distance: f64,
}

#[derive(Clone, Debug)]
pub struct SweepResult<T> {
    pub eps: Vec<T>,
    pub trajectories: Vec<Trajectory<T>>,
    pub distances: Vec<SweepRow>,
}

impl<T: Real> SweepResult<T> {
    /// Distance between consecutive ε at the final time, in list order.
    pub fn final_consecutive_distances(&self) -> Vec<f64> {
        let t_end = self.distances.iter().map(|r| r.t).fold(f64::NEG_INFINITY, f64::max);
        self.eps
            .windows(2)
            .filter_map(|w| {
                self.distances
                    .iter()
                    .find(|r| r.t == t_end && r.eps_a == w[0].as_f64() && r.eps_b == w[1].as_f64())
                    .map(|r| r.l2_distance)
            })
            .collect()
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("t,eps_a,eps_b,l2_distance\n");
        for r in &self.distances {
            let _ = writeln!(s, "{},{},{},{}", r.t, r.eps_a, r.eps_b, r.l2_distance);
        }
        s
    }
}

/// Runs every ε of a decreasing positive list and tabulates pairwise `L²`
/// distances at shared snapshot times.
pub fn viscosity_sweep<T: Real>(
    theta0: &ScalarField<T>,
    v: &TimeVelocity<T>,
    cfg: SolverConfig<T>,
    eps_list: &[T],
) -> Result<SweepResult<T>> {
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > T::zero())) {
        return invalid("eps_list must be nonempty and positive");
    }
    if eps_list.windows(2).any(|w| w[1] > w[0]) {
        return invalid("eps_list must be decreasing");
    }
    let base = Solver::new(&theta0.grid, SolverConfig { eps: eps_list[0], ..cfg })?;
    let mut trajectories = Vec::new();
    for &eps in eps_list {
        trajectories.push(base.with_config(SolverConfig { eps, ..cfg })?.advance(theta0, v)?);
    }
    let mut distances = Vec::new();
    for i in 0..trajectories.len() {
        for j in i + 1..trajectories.len() {
            for a in &trajectories[i].snapshots {
                let t = a.time.unwrap_or(T::zero());
                if let Some(b) = trajectories[j].at(t) {
                    distances.push(SweepRow {
                        t: t.as_f64(),
                        eps_a: eps_list[i].as_f64(),
                        eps_b: eps_list[j].as_f64(),
                        l2_distance: a.sub(b)?.lp_norm(2.0)?.as_f64(),
                    });
                }
            }
        }
    }
    Ok(SweepResult { eps: eps_list.to_vec(), trajectories, distances })
}

/// Sup-norm behaviour under truncation `θ₀·1_{ρ(x) < R}`.
#[derive(Clone, Debug)]
pub struct LinftyReport<T> {
    pub radii: Vec<T>,
    /// `sup_t ‖θ^R(·, t)‖_∞` per radius.
    pub sup_norms: Vec<T>,
    pub initial_sup: T,
    pub trajectories: Vec<Trajectory<T>>,
}

impl<T: Real> LinftyReport<T> {
    /// Largest `sup_t‖θ^R‖_∞ / ‖θ₀‖_∞` over all radii.
    pub fn amplification(&self) -> T {
        if self.initial_sup == T::zero() {
            return T::zero();
        }
        self.sup_norms.iter().fold(T::zero(), |m, &s| m.max(s)) / self.initial_sup
    }
}

pub fn solve_linfty<T: Real>(
    theta0: &ScalarField<T>,
    radii: &[T],
    v: &TimeVelocity<T>,
    cfg: SolverConfig<T>,
) -> Result<LinftyReport<T>> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > T::zero())) {
        return invalid("radii must be nonempty and positive");
    }
    let solver = Solver::new(&theta0.grid, cfg)?;
    let g = &theta0.grid;
    let mut sup_norms = Vec::new();
    let mut trajectories = Vec::new();
    for &r in radii {
        let cut = theta0.with_values(
            (0..g.len())
                .map(|k| if g.lattice_gauge(&g.lattice(k)) < r { theta0.values[k] } else { T::zero() })
                .collect(),
        );
        let traj = solver.advance(&cut, v)?;
        sup_norms.push(traj.snapshots.iter().map(|s| s.max_abs()).fold(T::zero(), T::max));
        trajectories.push(traj);
    }
    Ok(LinftyReport { radii: radii.to_vec(), sup_norms, initial_sup: theta0.max_abs(), trajectories })
}
