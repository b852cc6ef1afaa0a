//! Heat semigroup, Schrödinger propagators and fractional kernels.

pub mod bounds;
pub mod convolve;
pub mod heat;
pub mod kalpha;
pub mod trotter;

pub use bounds::{
    gaussian_bound_fit, lipschitz_kernel_check, lipschitz_triples, localized_heat_fit, majorant_fit, BoundKind,
    HeatSampleDesign, KernelBoundReport, PairDesign,
};
pub use convolve::group_convolve;
pub use heat::{heat_kernel_eval, HeatKernel, HeatTable, HeatValue};
pub use kalpha::{kalpha_eval, majorant_kernel, riesz_gamma_factor};
pub use trotter::{NodeCloud, TrotterConfig, TrotterPropagator};
