//! The sub-Laplacian `J`, the heat semigroup `e^{−tJ}` and `J^{1/2}`.

mod cache;
mod frac;
mod heat;
mod sublaplacian;
mod verify;

pub use cache::{KernelCache, KernelStats};
pub use frac::{
    calibrate_euclidean, calibrated_constant, default_t_max, default_t_min, frac_half_singular, frac_half_subordination,
    SingularOperator, SubordinationConfig, SubordinationOperator, FIBRE_INTEGRAL,
};
pub use heat::{heat_apply, heat_flow, heat_kernel, heat_kernel_with, resolvable_time, Stencil};
pub use sublaplacian::sublaplacian_apply;
pub use verify::{kernel_properties, KernelProperties};

pub(crate) use heat::march;
