//! Molecules of the local Hardy space and their backward evolution.
//!
//! A molecule of size `r` centred at `x₀` obeys, with `γ = N(1/σ − 1)` and
//! `γ < ω < 1`:
//!
//! * concentration `∫|ψ(x)| ‖x·x₀⁻¹‖^ω dx ≤ r^{ω−γ}`
//! * height `‖ψ‖_∞ ≤ r^{−(N+γ)}`
//! * vanishing mean, for `r < 1` only.
//!
//! Only single molecules are ever tested: Hölder regularity reduces to
//! bounds on brackets against individual molecules, so no decomposition of
//! a general element is attempted.

mod diagnostics;
mod evolve;
mod geometry;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::regularity::{unit_volume, Check};
use crate::scalar::Real;

pub use diagnostics::{
    corona_diagnostics, duality_bracket, transfer_check, CoronaRow, DualityBracket, TransferReport,
};
pub use evolve::{
    backward_evolve_step, center_ode_step, envelope_bounds, evolve_schedule, evolve_suite, EnvelopeBounds,
    EvolutionRecord, MoleculeEvolver, MoleculeState, ScheduleConfig, StageRow,
};
pub(crate) use geometry::Frame;

/// Amplitude slack of the construction: every condition holds with margin
/// `1 − 1/1.1 ≈ 9%`.
pub const CONSTRUCTION_SLACK: f64 = 1.1;

/// Tolerance on `|∫ψ|` for small molecules.
pub const MOMENT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoleculeKind {
    Small,
    Big,
}

/// Parameters of an `r`-molecule. `gamma` and `kind` are derived.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoleculeSpec {
    pub r: f64,
    pub x0: Vec<f64>,
    pub sigma: f64,
    pub gamma: f64,
    /// Concentration exponent (not the mollifier bump).
    pub omega_exponent: f64,
    pub kind: MoleculeKind,
    /// Homogeneous dimension `N`.
    pub n: u32,
}

impl MoleculeSpec {
    pub fn new(r: f64, x0: Vec<f64>, sigma: f64, omega_exponent: f64, n: u32) -> Result<Self> {
        let gamma = n as f64 * (1.0 / sigma - 1.0);
        let kind = if r < 1.0 { MoleculeKind::Small } else { MoleculeKind::Big };
        let s = Self { r, x0, sigma, gamma, omega_exponent, kind, n };
        s.validate()?;
        Ok(s)
    }

    /// Spec for the homogeneous dimension of `grid`, centred at the origin.
    pub fn on<T: Real>(grid: &Grid<T>, r: f64, sigma: f64, omega_exponent: f64) -> Result<Self> {
        Self::new(r, vec![0.0; grid.dims()], sigma, omega_exponent, grid.group().homogeneous_dim)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n as f64;
        if !(self.r > 0.0 && self.r.is_finite()) {
            return invalid(format!("molecule size must be positive, got {}", self.r));
        }
        if !(self.sigma > n / (n + 1.0) && self.sigma < 1.0) {
            return invalid(format!("sigma must lie in ({}, 1), got {}", n / (n + 1.0), self.sigma));
        }
        if self.gamma != n * (1.0 / self.sigma - 1.0) {
            return invalid("gamma must equal N(1/sigma - 1)");
        }
        if !(0.0 < self.gamma && self.gamma < self.omega_exponent && self.omega_exponent < 1.0) {
            return invalid(format!("need 0 < gamma < omega < 1, got gamma={} omega={}", self.gamma, self.omega_exponent));
        }
        let kind = if self.r < 1.0 { MoleculeKind::Small } else { MoleculeKind::Big };
        if kind != self.kind {
            return invalid(format!("kind {:?} inconsistent with r = {}", self.kind, self.r));
        }
        Ok(())
    }

    pub fn is_small(&self) -> bool {
        self.kind == MoleculeKind::Small
    }

    pub fn concentration_bound(&self) -> f64 {
        self.r.powf(self.omega_exponent - self.gamma)
    }

    pub fn height_bound(&self) -> f64 {
        self.r.powf(-(self.n as f64 + self.gamma))
    }

    /// `C r^{−γ}` with `C = v_N + 1`: split `∫|ψ|` at radius `r` and use
    /// height inside, concentration outside.
    pub fn l1_bound(&self, v_n: f64) -> f64 {
        (v_n + 1.0) * self.r.powf(-self.gamma)
    }

    /// Interpolated `L^p` bound `C^{1/p} r^{−N(1−1/p)−γ}`.
    pub fn lp_bound(&self, v_n: f64, p: f64) -> f64 {
        (v_n + 1.0).powf(1.0 / p) * self.r.powf(-(self.n as f64) * (1.0 - 1.0 / p) - self.gamma)
    }
}

fn profile(u: f64) -> f64 {
    if u < 1.0 {
        let a = 1.0 - u * u;
        a * a
    } else {
        0.0
    }
}

/// Concentration integral `∫|ψ(x)| ‖x·c⁻¹‖^ω dx`.
pub fn concentration<T: Real>(psi: &ScalarField<T>, center: &[f64], omega: f64) -> f64 {
    let g = &psi.grid;
    let frame = Frame::<f64>::new(&grid_f64(g));
    let vol = g.cell_volume().as_f64();
    let mut s = 0.0;
    for (k, &v) in psi.values.iter().enumerate() {
        if v != T::zero() {
            let x = g.coords(k).map(|c| c.as_f64());
            s += v.as_f64().abs() * frame.rho(&x, center).powf(omega);
        }
    }
    s * vol
}

fn grid_f64<T: Real>(g: &Grid<T>) -> Grid<f64> {
    Grid::new(g.group().clone(), &g.extents().iter().map(|e| e.as_f64()).collect::<Vec<_>>(), &g.counts()[..g.dims()], g.boundary())
        .expect("a valid grid stays valid in f64")
}

/// Builds the two-bump molecule `c·(φ₊ − λφ₋)`.
///
/// `φ₊` is a `(1 − u²)²` bump of gauge radius `r/4` at `x₀`; `φ₋` is the
/// same bump at `e·x₀` with `e = δ_{r/2}(1, 0, …)`. The weight `λ` cancels
/// the discrete mean and `c` is the largest amplitude meeting every
/// condition, divided by [`CONSTRUCTION_SLACK`].
pub fn make_molecule<T: Real>(spec: &MoleculeSpec, grid: &Grid<T>) -> Result<ScalarField<T>> {
    spec.validate()?;
    if spec.n != grid.group().homogeneous_dim || spec.x0.len() != grid.dims() {
        return invalid("molecule spec does not match the grid");
    }
    let width = spec.r / 4.0;
    let res = grid.gauge_resolution().as_f64();
    if width < 2.0 * res {
        return Err(Error::Resolution(format!("molecule of size {} needs gauge resolution ≤ {}", spec.r, width / 2.0)));
    }
    let frame = Frame::<f64>::new(&grid_f64(grid));
    frame.check_ball(&spec.x0, spec.r)?;
    let mut second = spec.x0.clone();
    second[0] += spec.r / 2.0;
    if grid.group().is_heisenberg() {
        // e·x₀ with e = (r/2, 0, 0).
        second[2] += 0.25 * spec.r * spec.x0[1];
    }
    let mut plus = vec![0.0; grid.len()];
    let mut minus = vec![0.0; grid.len()];
    for k in 0..grid.len() {
        let x = grid.coords(k).map(|c| c.as_f64());
        plus[k] = profile(frame.rho(&x, &spec.x0) / width);
        minus[k] = profile(frame.rho(&x, &second) / width);
    }
    let (sp, sm): (f64, f64) = (plus.iter().sum(), minus.iter().sum());
    if sp == 0.0 || sm == 0.0 {
        return Err(Error::Resolution("molecule bumps contain no grid points".into()));
    }
    let lambda = sp / sm;
    let raw: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| p - lambda * m).collect();
    let unit = ScalarField::new(grid_f64(grid), raw.clone())?;
    let conc = concentration(&unit, &spec.x0, spec.omega_exponent);
    let height = unit.max_abs();
    let c = (spec.concentration_bound() / conc).min(spec.height_bound() / height) / CONSTRUCTION_SLACK;
    let mut values: Vec<T> = raw.iter().map(|&v| T::lit(c * v)).collect();
    if spec.is_small() {
        // Remove the rounding residue of the mean on the positive bump.
        let mean = crate::grid::stable_sum(values.iter().copied());
        let mass: T = crate::grid::stable_sum(plus.iter().map(|&p| T::lit(p)));
        for (v, &p) in values.iter_mut().zip(&plus) {
            *v -= mean * T::lit(p) / mass;
        }
    }
    ScalarField::new(grid.clone(), values)
}

/// Measured conditions of a candidate molecule.
#[derive(Clone, Debug, PartialEq)]
pub struct MoleculeReport {
    pub concentration: f64,
    pub concentration_bound: f64,
    pub height: f64,
    pub height_bound: f64,
    /// `∫ψ`, checked for small molecules only.
    pub moment: f64,
    pub l1: f64,
    pub l1_bound: f64,
    /// `(p, ‖ψ‖_p, bound)`.
    pub lp: Vec<(f64, f64, f64)>,
    pub checks: Vec<Check>,
}

impl MoleculeReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// `1 − value/bound` for the concentration and height conditions.
    pub fn margins(&self) -> (f64, f64) {
        (1.0 - self.concentration / self.concentration_bound, 1.0 - self.height / self.height_bound)
    }

    pub fn min_margin(&self) -> f64 {
        let (a, b) = self.margins();
        a.min(b)
    }
}

/// Evaluates the molecule conditions of `psi` around `center`, plus the
/// `L¹` and `L^p` (for each entry of `ps`) consequences.
pub fn validate_molecule<T: Real>(psi: &ScalarField<T>, spec: &MoleculeSpec, center: &[f64], ps: &[f64]) -> Result<MoleculeReport> {
    spec.validate()?;
    let v_n = unit_volume(psi.grid.group());
    let concentration = concentration(psi, center, spec.omega_exponent);
    let height = psi.max_abs().as_f64();
    let moment = psi.integrate().as_f64();
    let l1 = psi.lp_norm(1.0)?.as_f64();
    let mut lp = Vec::new();
    for &p in ps {
        lp.push((p, psi.lp_norm(p)?.as_f64(), spec.lp_bound(v_n, p)));
    }
    let mut report = MoleculeReport {
        concentration,
        concentration_bound: spec.concentration_bound(),
        height,
        height_bound: spec.height_bound(),
        moment,
        l1,
        l1_bound: spec.l1_bound(v_n),
        lp,
        checks: Vec::new(),
    };
    let ratio_check = |label: &str, v: f64, b: f64| Check { label: label.into(), pass: v <= b, metric: v / b };
    let mut checks = vec![
        ratio_check("concentration", report.concentration, report.concentration_bound),
        ratio_check("height", report.height, report.height_bound),
        ratio_check("l1", report.l1, report.l1_bound),
    ];
    if spec.is_small() {
        checks.push(Check { label: "moment".into(), pass: moment.abs() <= MOMENT_TOL, metric: moment.abs() });
    }
    for &(p, v, b) in &report.lp {
        checks.push(ratio_check(&format!("L{p}"), v, b));
    }
    report.checks = checks;
    Ok(report)
}

#[cfg(test)]
mod tests;
