//! Config-driven experiment runner behind the `carnot-flow` binary.
//!
//! `run` reads a TOML [`ExperimentConfig`], executes its scenario and writes
//! `verdicts.ndjson` plus scenario tables (`norms.csv`, `envelopes.csv`, …)
//! and `config.resolved.toml` with every default filled in. Exit status:
//! 0 when every check passes, 1 on a failed check, 2 on a config error,
//! 3 on a runtime error.

mod config;
mod scenarios;

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

pub use config::{
    ExperimentConfig, GridConfig, GroupChoice, HolderConfig, InitialDatum, KernelConfig, MoleculeEntry, MoleculeRunConfig,
    PositivityConfig, Scenario, SolverSection, SweepConfig,
};

use crate::regularity::NormReport;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Failure modes of a run, mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Parse(m) => format!("{{\"error\":\"parse\",\"message\":{}}}", json!(m)),
            CliError::Runtime(m) => format!("{{\"error\":\"runtime\",\"message\":{}}}", json!(m)),
        }
    }
}

impl From<crate::error::Error> for CliError {
    fn from(e: crate::error::Error) -> Self {
        match e {
            crate::error::Error::Parse(m) | crate::error::Error::InvalidInput(m) => CliError::Parse(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

/// Result of a completed scenario.
#[derive(Debug)]
pub struct Outcome {
    pub scenario: Scenario,
    pub out_dir: PathBuf,
    pub verdicts: Vec<NormReport>,
    /// Files written, relative to `out_dir`.
    pub files: Vec<String>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass())
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

/// Command-line overrides.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Loads, resolves and runs a config file.
pub fn run_path(path: &Path, overrides: &Overrides) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::parse(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    if let Some(s) = overrides.seed {
        cfg.seed = s;
    }
    if let Some(o) = &overrides.out {
        cfg.output = Some(o.clone());
    }
    run(&cfg)
}

/// Runs a resolved config. The output directory defaults to
/// `out/<scenario>`.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let out_dir = cfg.output.clone().unwrap_or_else(|| PathBuf::from("out").join(cfg.scenario.name()));
    fs::create_dir_all(&out_dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut sink = Sink { dir: out_dir.clone(), files: Vec::new() };
    sink.write("config.resolved.toml", &cfg.to_toml())?;
    let verdicts = scenarios::dispatch(cfg, &mut sink)?;
    let mut nd = String::new();
    for v in &verdicts {
        let mut j = v.verdict_json();
        j["scenario"] = json!(cfg.scenario.name());
        nd.push_str(&j.to_string());
        nd.push('\n');
    }
    sink.write("verdicts.ndjson", &nd)?;
    Ok(Outcome { scenario: cfg.scenario, out_dir, verdicts, files: sink.files })
}

/// Collects artifacts in the output directory.
pub(crate) struct Sink {
    dir: PathBuf,
    files: Vec<String>,
}

impl Sink {
    pub fn write(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        self.write_bytes(name, content.as_bytes())
    }

    pub fn write_bytes(&mut self, name: &str, content: &[u8]) -> Result<(), CliError> {
        let p = self.dir.join(name);
        fs::write(&p, content).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display())))?;
        self.files.push(name.to_string());
        Ok(())
    }
}

/// What a scenario checks, its anchor labels and the files it writes.
pub fn describe(name: &str) -> Result<String, CliError> {
    let s = Scenario::from_name(name).ok_or_else(|| {
        let known: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
        CliError::Parse(format!("unknown scenario '{name}'; known: {}", known.join(", ")))
    })?;
    let (what, anchors, files) = match s {
        Scenario::GroupVerify => (
            "Random triples test associativity, inverses, the dilation automorphism and gauge homogeneity.",
            "group law, dilations δ_α, homogeneous gauge",
            "verdicts.ndjson",
        ),
        Scenario::KernelVerify => (
            "Tabulates heat kernels and checks mass, inversion symmetry, the semigroup law and dilation covariance; checks that the half sub-Laplacian kills constants.",
            "heat kernel mass and semigroup identities, subordination",
            "kernel.csv, verdicts.ndjson",
        ),
        Scenario::Simulate => (
            "Solves the transport-diffusion equation in Picard windows and checks that every L^p norm is nonincreasing.",
            "integral formulation, fixed-point existence, L^p maximum principle",
            "norms.csv, snapshots.bin (when snapshots = true), verdicts.ndjson",
        ),
        Scenario::Positivity => (
            "Solves with 0 ≤ θ₀ ≤ M and checks the bounds are kept; optionally runs the cut-off split A_R + B_R.",
            "positivity principle, cut-off commutator interpolation",
            "norms.csv, split.csv (with split_radii), verdicts.ndjson",
        ),
        Scenario::MoleculeRun => (
            "Builds r-molecules, checks their conditions, evolves them backward and tracks concentration, height and L¹ envelopes stage by stage.",
            "molecule conditions, small-time molecule evolution, stage constants, concentration and height lemmas, duality bracket",
            "envelopes.csv, molecules.csv, corona.csv, verdicts.ndjson",
        ),
        Scenario::HolderTest => (
            "Solves to the horizon on two resolutions and compares the Hölder seminorm of the final state.",
            "Hölder regularity via duality, L¹ control of molecules",
            "holder.csv, verdicts.ndjson",
        ),
        Scenario::ViscositySweep => (
            "Solves for a decreasing list of viscosities and checks the final states form a Cauchy sequence.",
            "vanishing viscosity limit, Besov characterisation",
            "sweep.csv, norms.csv, verdicts.ndjson",
        ),
    };
    Ok(format!("{}\n  {what}\n  anchors: {anchors}\n  writes: {files}\n", s.name()))
}
