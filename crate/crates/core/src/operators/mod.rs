//! Primitive sets, cutters, relaxation and the averaged operator.

mod cutter;
mod params;
mod sets;
mod step;

pub use cutter::{
    check_gamma, damped_reflection_gamma, relax, relax_from_image, CustomCutter, Cutter,
};
pub(crate) use params::{check_lambda, check_relax};
pub use params::{classify_params, MethodName, Mode, OperatorParams};
pub(crate) use sets::block_mean;
pub use sets::{PrimitiveSet, Shape};
pub(crate) use step::step_raw;
pub use step::{averaged_step, theta, StepRecord};

/// `min{gamma, 2 - gamma}`; satisfies `psi(psi - 2) = gamma(gamma - 2)`.
pub fn psi(gamma: f64) -> f64 {
    gamma.min(2.0 - gamma)
}
