use super::evolve::MoleculeState;
use super::{Frame, MoleculeSpec};
use crate::error::{invalid, Result};
use crate::grid::{ScalarField, VectorField};
use crate::operators::SubordinationOperator;
use crate::scalar::Real;
use crate::solver::{Solver, TimeVelocity, Trajectory};

/// The two integrals bounding the growth of the concentration, split over
/// the ball `B(x(s), f)` (index 0) and the dyadic coronas
/// `E_k = {f 2^{k−1} < ρ ≤ f 2^k}` (index `k`).
#[derive(Clone, Debug, PartialEq)]
pub struct CoronaRow {
    pub radius: f64,
    /// `∫ ρ^{ω−1} |v − v̄_B| ψ₊`.
    pub i1: f64,
    /// `∫ |J^{1/2} ρ^ω| ψ₊`.
    pub i2: f64,
    pub i1_regions: Vec<f64>,
    pub i2_regions: Vec<f64>,
    /// `f^{ω−1−γ}`.
    pub reference: f64,
}

impl CoronaRow {
    /// Share of `I₂` carried by the outermost corona.
    pub fn last_corona_fraction(&self) -> f64 {
        match self.i2_regions.last() {
            Some(&l) if self.i2 > 0.0 && self.i2_regions.len() > 1 => l / self.i2,
            _ => 0.0,
        }
    }
}

/// Evaluates `I₁` and `I₂` for `state` with ball radius `radius`.
///
/// `ρ = ‖x·x(s)⁻¹‖`; the singular weight `ρ^{ω−1}` is floored at half a
/// lattice resolution.
pub fn corona_diagnostics<T: Real>(
    op: &SubordinationOperator<T>,
    spec: &MoleculeSpec,
    state: &MoleculeState<T>,
    v: &VectorField<T>,
    radius: f64,
) -> Result<CoronaRow> {
    let g = &state.field.grid;
    g.check_same(&v.grid)?;
    if !(radius > 0.0) {
        return invalid("corona radius must be positive");
    }
    let omega = spec.omega_exponent;
    let frame = Frame::new(g);
    let rho: Vec<f64> = (0..g.len()).map(|k| frame.rho(&g.coords(k), &state.center).as_f64()).collect();
    let omega_field = ScalarField::new(g.clone(), rho.iter().map(|&r| T::lit(r.powf(omega))).collect())?;
    let j_omega = op.apply(&omega_field)?;
    let vbar = super::evolve::ball_average(&frame, v, &state.center, T::lit(radius));
    let floor = 0.5 * g.gauge_resolution().as_f64();
    let vol = g.cell_volume().as_f64();
    let mut i1_regions = vec![0.0];
    let mut i2_regions = vec![0.0];
    for (k, &p) in state.field.values.iter().enumerate() {
        let p = p.as_f64();
        if p <= 0.0 {
            continue;
        }
        let region = if rho[k] <= radius { 0 } else { (rho[k] / radius).log2().ceil() as usize };
        if region >= i1_regions.len() {
            i1_regions.resize(region + 1, 0.0);
            i2_regions.resize(region + 1, 0.0);
        }
        let dv = v
            .components
            .iter()
            .zip(&vbar)
            .map(|(c, &m)| {
                let d = (c[k] - m).as_f64();
                d * d
            })
            .sum::<f64>()
            .sqrt();
        i1_regions[region] += rho[k].max(floor).powf(omega - 1.0) * dv * p * vol;
        i2_regions[region] += j_omega.values[k].as_f64().abs() * p * vol;
    }
    Ok(CoronaRow {
        radius,
        i1: i1_regions.iter().sum(),
        i2: i2_regions.iter().sum(),
        i1_regions,
        i2_regions,
        reference: radius.powf(omega - 1.0 - spec.gamma),
    })
}

/// Bracket `b(s) = ⟨θ(·, t − s), ψ(·, s)⟩` along a forward run.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferReport {
    pub s: Vec<f64>,
    pub bracket: Vec<f64>,
    /// `max_s |b(s) − b(0)| / |b(0)|` (absolute when `b(0) = 0`).
    pub max_drift: f64,
    /// Relative `L²` gap between the replayed and the stored final state.
    pub trajectory_mismatch: f64,
}

/// Replays the steps of `traj` forward from its initial state and the
/// transposed steps backward from `psi0`, and tabulates the bracket.
pub fn transfer_check<T: Real>(
    solver: &Solver<T>,
    traj: &Trajectory<T>,
    psi0: &ScalarField<T>,
    v: &TimeVelocity<T>,
) -> Result<TransferReport> {
    traj.initial().grid.check_same(&psi0.grid)?;
    if traj.steps.is_empty() {
        return invalid("trajectory has no steps");
    }
    let theta = solver.forward_states(traj.initial(), v, &traj.steps)?;
    let psi = solver.dual_sweep(psi0, v, &traj.steps)?;
    let n = traj.steps.len();
    let t_end = (traj.steps[n - 1].0 + traj.steps[n - 1].1).as_f64();
    let mut s = Vec::with_capacity(n + 1);
    let mut bracket = Vec::with_capacity(n + 1);
    for i in (0..=n).rev() {
        let t_i = if i == n { t_end } else { traj.steps[i].0.as_f64() };
        s.push(t_end - t_i);
        bracket.push(theta[i].inner(&psi[i])?.as_f64());
    }
    let b0 = bracket[0];
    let scale = if b0 != 0.0 { b0.abs() } else { 1.0 };
    let max_drift = bracket.iter().map(|b| (b - b0).abs() / scale).fold(0.0, f64::max);
    let last = traj.last();
    let gap = theta[n].sub(last)?.lp_norm(2.0)?.as_f64();
    let norm = last.lp_norm(2.0)?.as_f64();
    let trajectory_mismatch = if norm > 0.0 { gap / norm } else { gap };
    Ok(TransferReport { s, bracket, max_drift, trajectory_mismatch })
}

/// `⟨θ₀, ψ⟩` against its Hölder bound `‖θ₀‖_p ‖ψ‖_q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualityBracket {
    pub bracket: f64,
    pub bound: f64,
    pub p: f64,
    pub q: f64,
    pub holds: bool,
}

pub fn duality_bracket<T: Real>(theta0: &ScalarField<T>, psi: &ScalarField<T>, p: f64) -> Result<DualityBracket> {
    if !(p >= 1.0) {
        return invalid(format!("exponent must be at least 1, got {p}"));
    }
    let q = if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    };
    let bracket = theta0.inner(psi)?.as_f64();
    let bound = theta0.lp_norm(p)?.as_f64() * psi.lp_norm(q)?.as_f64();
    Ok(DualityBracket { bracket, bound, p, q, holds: bracket.abs() <= bound + 1e-8 })
}
