use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{Boundary, Grid, ScalarField};
use crate::molecules::{MoleculeSpec, ScheduleConfig};
use crate::operators::Stencil;
use crate::solver::{Modulation, SolverConfig, VelocityRecipe};

/// Scenario selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    GroupVerify,
    KernelVerify,
    Simulate,
    Positivity,
    MoleculeRun,
    HolderTest,
    ViscositySweep,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::GroupVerify,
        Scenario::KernelVerify,
        Scenario::Simulate,
        Scenario::Positivity,
        Scenario::MoleculeRun,
        Scenario::HolderTest,
        Scenario::ViscositySweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::GroupVerify => "group-verify",
            Scenario::KernelVerify => "kernel-verify",
            Scenario::Simulate => "simulate",
            Scenario::Positivity => "positivity",
            Scenario::MoleculeRun => "molecule-run",
            Scenario::HolderTest => "holder-test",
            Scenario::ViscositySweep => "viscosity-sweep",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupChoice {
    Heisenberg,
    Euclidean,
}

/// Box and lattice. On H¹ `extents = [horizontal]` and
/// `counts = [horizontal, vertical]`; on ℝⁿ one entry per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub group: GroupChoice,
    pub extents: Vec<f64>,
    pub counts: Vec<usize>,
    pub boundary: Boundary,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { group: GroupChoice::Heisenberg, extents: vec![6.0], counts: vec![16, 48], boundary: Boundary::Periodic }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid<f64>> {
        match self.group {
            GroupChoice::Heisenberg => match (self.extents.as_slice(), self.counts.as_slice()) {
                ([e], [m, m3]) => Grid::heisenberg(*e, *m, *m3, self.boundary),
                _ => invalid("heisenberg grids need extents = [horizontal] and counts = [horizontal, vertical]"),
            },
            GroupChoice::Euclidean => Grid::euclidean(&self.extents, &self.counts, self.boundary),
        }
    }

    /// The same box with every spacing divided by `factor` (vertical by
    /// `factor²` on H¹).
    pub fn refined(&self, factor: usize) -> Self {
        let mut out = self.clone();
        out.counts = match self.group {
            GroupChoice::Heisenberg => vec![self.counts[0] * factor, self.counts.get(1).copied().unwrap_or(0) * factor * factor],
            GroupChoice::Euclidean => self.counts.iter().map(|c| c * factor).collect(),
        };
        out
    }
}

/// Serializable mirror of [`SolverConfig`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub eps: f64,
    pub horizon: f64,
    pub window: f64,
    pub dt: Option<f64>,
    pub picard_tol: f64,
    pub max_iter: usize,
    pub clamp_k: Option<f64>,
    pub mollify_scale: Option<f64>,
    pub t0: f64,
    pub snapshot_interval: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let c = SolverConfig::<f64>::default();
        Self {
            eps: c.eps,
            horizon: c.horizon,
            window: c.window,
            dt: c.dt,
            picard_tol: c.picard_tol,
            max_iter: c.max_iter,
            clamp_k: c.clamp_k,
            mollify_scale: c.mollify_scale,
            t0: c.t0,
            snapshot_interval: c.snapshot_interval,
        }
    }
}

impl SolverSection {
    pub fn config(&self) -> SolverConfig<f64> {
        SolverConfig {
            eps: self.eps,
            horizon: self.horizon,
            window: self.window,
            dt: self.dt,
            picard_tol: self.picard_tol,
            max_iter: self.max_iter,
            clamp_k: self.clamp_k,
            mollify_scale: self.mollify_scale,
            t0: self.t0,
            snapshot_interval: self.snapshot_interval,
        }
    }
}

/// Initial datum `θ₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialDatum {
    /// `a·exp(−(|x'|² + 4x₃²)/w²)` on H¹, `a·exp(−|x|²/w²)` on ℝⁿ.
    Gaussian { amplitude: f64, width: f64 },
    /// `value` on the gauge ball of the given radius, 0 outside.
    Indicator { radius: f64, value: f64 },
    /// `a·cos(k·x)`.
    Cosine { amplitude: f64, wavevector: Vec<f64> },
    /// Independent uniform values in `[low, high)` drawn from the run seed.
    Random { low: f64, high: f64 },
}

impl Default for InitialDatum {
    fn default() -> Self {
        InitialDatum::Gaussian { amplitude: 1.0, width: 1.0 }
    }
}

impl InitialDatum {
    pub fn sample(&self, grid: &Grid<f64>, seed: u64) -> Result<ScalarField<f64>> {
        use rand::{Rng, SeedableRng};
        let heis = grid.group().is_heisenberg();
        Ok(match self {
            InitialDatum::Gaussian { amplitude, width } => {
                if !(*width > 0.0) {
                    return invalid("gaussian width must be positive");
                }
                grid.sample(|x| {
                    let q = if heis { x[0] * x[0] + x[1] * x[1] + 4.0 * x[2] * x[2] } else { x.iter().map(|a| a * a).sum() };
                    amplitude * (-q / (width * width)).exp()
                })
            }
            InitialDatum::Indicator { radius, value } => {
                grid.sample(|x| if crate::group::gauge_coords(heis, &x[..grid.dims()]) < *radius { *value } else { 0.0 })
            }
            InitialDatum::Cosine { amplitude, wavevector } => {
                if wavevector.len() != grid.dims() {
                    return invalid("cosine wavevector must have one entry per axis");
                }
                grid.sample(|x| amplitude * wavevector.iter().zip(x).map(|(k, a)| k * a).sum::<f64>().cos())
            }
            InitialDatum::Random { low, high } => {
                if !(low < high) {
                    return invalid("random datum needs low < high");
                }
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                ScalarField::new(grid.clone(), (0..grid.len()).map(|_| rng.random_range(*low..*high)).collect())?
            }
        })
    }
}

/// One molecule of a `molecule-run`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeEntry {
    pub r: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_omega")]
    pub omega_exponent: f64,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
}

fn default_sigma() -> f64 {
    0.8
}

fn default_omega() -> f64 {
    0.6
}

impl MoleculeEntry {
    pub fn spec(&self, grid: &Grid<f64>) -> Result<MoleculeSpec> {
        let x0 = self.x0.clone().unwrap_or_else(|| vec![0.0; grid.dims()]);
        MoleculeSpec::new(self.r, x0, self.sigma, self.omega_exponent, grid.group().homogeneous_dim)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MoleculeRunConfig {
    pub t0: f64,
    /// bmo bound of the velocity; estimated from the field when absent.
    pub mu: Option<f64>,
    pub bmo_samples: usize,
    pub schedule: ScheduleConfig,
    /// Write I₁/I₂ diagnostics for each released molecule.
    pub corona: bool,
    /// When set, the final `L¹` masses must agree within this relative spread.
    pub collapse_tolerance: Option<f64>,
}

impl Default for MoleculeRunConfig {
    fn default() -> Self {
        Self { t0: 0.5, mu: None, bmo_samples: 400, schedule: ScheduleConfig::default(), corona: true, collapse_tolerance: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub t: f64,
    pub alpha: i64,
    pub stencil: Stencil,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { t: 0.08, alpha: 2, stencil: Stencil::Sixth }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolderConfig {
    pub gamma: f64,
    pub samples: usize,
    pub refine: usize,
    pub tolerance: f64,
}

impl Default for HolderConfig {
    fn default() -> Self {
        Self { gamma: 0.5, samples: 400, refine: 2, tolerance: 0.2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub eps: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { eps: vec![0.04, 0.02, 0.01] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PositivityConfig {
    /// Upper bound `M` of the datum.
    pub m: f64,
    /// Radii of the cut-off split; skipped when empty.
    pub split_radii: Vec<f64>,
}

impl Default for PositivityConfig {
    fn default() -> Self {
        Self { m: 1.0, split_radii: Vec::new() }
    }
}

/// Full experiment description; every section has defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub group_samples: Option<usize>,
    #[serde(default)]
    pub snapshots: bool,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default = "default_velocity")]
    pub velocity: VelocityRecipe,
    #[serde(default)]
    pub modulation: Modulation,
    #[serde(default)]
    pub initial: InitialDatum,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub positivity: PositivityConfig,
    #[serde(default)]
    pub molecules: Vec<MoleculeEntry>,
    #[serde(default)]
    pub molecule_run: MoleculeRunConfig,
    #[serde(default)]
    pub holder: HolderConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

fn default_velocity() -> VelocityRecipe {
    VelocityRecipe::Zero
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
