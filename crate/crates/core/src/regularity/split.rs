use crate::error::{invalid, Result};
use crate::grid::ScalarField;
use crate::scalar::Real;
use crate::solver::{Solver, TimeVelocity};

use super::functionals::{cutoff, log_log_slope};

/// One radius of the plateau-splitting experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitRow {
    pub r: f64,
    pub rho: f64,
    /// `sup_t ‖ψ − (A_R + B_R)‖_∞`.
    pub reconstruction_error: f64,
    /// Tracked quantity `‖φ_R(A_R − M/2)‖` at the first and last snapshot
    /// (`p`-th power for finite `p`).
    pub tracked_initial: f64,
    pub tracked_final: f64,
    /// `tracked_final / t`.
    pub growth_rate: f64,
    /// `t·R^{-1}(‖ψ₀‖_p + M R^{N/p})` with unit constant.
    pub bound: f64,
    /// `max |A_R − M/2|` over `ρ(x) < ρ` at the final time.
    pub plateau_deviation: f64,
    pub psi_min: f64,
    pub psi_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitReport {
    pub p: f64,
    pub rows: Vec<SplitRow>,
    /// Log-log slope of the growth rate against `R`.
    pub slope: f64,
}

impl SplitReport {
    pub fn max_reconstruction_error(&self) -> f64 {
        self.rows.iter().map(|r| r.reconstruction_error).fold(0.0, f64::max)
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("R,rho,reconstruction_error,tracked_initial,tracked_final,growth_rate,bound,plateau_deviation,psi_min,psi_max\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.r, r.rho, r.reconstruction_error, r.tracked_initial, r.tracked_final, r.growth_rate, r.bound,
                r.plateau_deviation, r.psi_min, r.psi_max
            ));
        }
        s
    }
}

fn tracked<T: Real>(phi: &ScalarField<T>, a: &ScalarField<T>, half: T, p: f64) -> Result<f64> {
    let w = a.map(|x| x - half).mul(phi)?;
    let n = w.lp_norm(p)?.as_f64();
    Ok(if p.is_finite() { n.powf(p) } else { n })
}

/// Splits `ψ₀` into `A₀ = M/2` on `ρ(x) ≤ 2R` (and `ψ₀` elsewhere) plus the
/// remainder `B₀`, evolves `A`, `B` and `ψ` with the same solver and reports
/// the linear reconstruction error and the growth of `‖φ_R(A − M/2)‖`.
pub fn positivity_split_scenario<T: Real>(
    solver: &Solver<T>,
    psi0: &ScalarField<T>,
    v: &TimeVelocity<T>,
    m: T,
    r: T,
    rho: T,
    p: f64,
) -> Result<SplitRow> {
    let g = solver.grid();
    g.check_same(&psi0.grid)?;
    if !(rho > T::zero() && r > T::lit(2.0) * rho) {
        return invalid(format!("need R > 2ρ > 0, got R = {r}, ρ = {rho}"));
    }
    if T::lit(2.0) * r > g.inner_radius() {
        return invalid(format!("plateau radius 2R = {} exceeds the box inner radius {}", T::lit(2.0) * r, g.inner_radius()));
    }
    if psi0.min() < T::zero() || psi0.max() > m {
        return invalid("ψ₀ must lie in [0, M]");
    }
    let half = m / T::lit(2.0);
    let gauge: Vec<T> = (0..g.len()).map(|k| g.lattice_gauge(&g.lattice(k))).collect();
    let a0 = psi0.with_values((0..g.len()).map(|k| if gauge[k] <= T::lit(2.0) * r { half } else { psi0.values[k] }).collect());
    let b0 = psi0.sub(&a0)?;
    let ta = solver.advance(&a0, v)?;
    let tb = solver.advance(&b0, v)?;
    let tp = solver.advance(psi0, v)?;
    let mut recon = 0.0f64;
    for ((a, b), s) in ta.snapshots.iter().zip(&tb.snapshots).zip(&tp.snapshots) {
        recon = recon.max(s.sub(&a.add(b)?)?.max_abs().as_f64());
    }
    let phi = cutoff(g, r);
    let a_end = ta.last();
    let t_end = (a_end.time.unwrap_or(T::zero()) - ta.initial().time.unwrap_or(T::zero())).as_f64();
    let tracked_initial = tracked(&phi, ta.initial(), half, p)?;
    let tracked_final = tracked(&phi, a_end, half, p)?;
    let n = g.group().homogeneous_dim as f64;
    let (psi_norm, mr) = if p.is_finite() {
        (psi0.lp_norm(p)?.as_f64(), m.as_f64() * r.as_f64().powf(n / p))
    } else {
        (psi0.max_abs().as_f64(), m.as_f64())
    };
    let plateau_deviation = (0..g.len())
        .filter(|&k| gauge[k] < rho)
        .map(|k| (a_end.values[k] - half).abs().as_f64())
        .fold(0.0, f64::max);
    Ok(SplitRow {
        r: r.as_f64(),
        rho: rho.as_f64(),
        reconstruction_error: recon,
        tracked_initial,
        tracked_final,
        growth_rate: tracked_final / t_end,
        bound: t_end / r.as_f64() * (psi_norm + mr),
        plateau_deviation,
        psi_min: tp.snapshots.iter().map(|s| s.min().as_f64()).fold(f64::INFINITY, f64::min),
        psi_max: tp.snapshots.iter().map(|s| s.max().as_f64()).fold(f64::NEG_INFINITY, f64::max),
    })
}

/// [`positivity_split_scenario`] over several radii with `ρ = R/4`, plus
/// the log-log slope of the growth rate.
pub fn positivity_split_sweep<T: Real>(
    solver: &Solver<T>,
    psi0: &ScalarField<T>,
    v: &TimeVelocity<T>,
    m: T,
    radii: &[T],
    p: f64,
) -> Result<SplitReport> {
    let mut rows = Vec::new();
    for &r in radii {
        rows.push(positivity_split_scenario(solver, psi0, v, m, r, r / T::lit(4.0), p)?);
    }
    let slope = log_log_slope(&rows.iter().map(|r| r.r).collect::<Vec<_>>(), &rows.iter().map(|r| r.growth_rate).collect::<Vec<_>>());
    Ok(SplitReport { p, rows, slope })
}
