//! Verifiers for the norm principles and the function-space functionals
//! used along the way: bmo, homogeneous Besov, Hölder, and the cut-off
//! commutator.

mod functionals;
mod report;
mod split;

pub use functionals::{
    ball_offsets, besov_seminorm, bmo_norm, bmo_norm_vector, commutator, commutator_check, cutoff, holder_seminorm,
    log_log_slope, CommutatorReport, CommutatorRow,
};
pub use report::{max_principle_check, positivity_check, Check, NormReport, ReportRow};
pub(crate) use functionals::unit_volume;
pub use split::{positivity_split_scenario, positivity_split_sweep, SplitReport, SplitRow};

#[cfg(test)]
mod tests;
