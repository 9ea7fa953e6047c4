//! Regularity experiments on discrete solutions and supersolutions.

mod harnack;
mod heat_kernel;
mod holder;
mod moser;
mod poincare;
mod scaling;
mod strong_harnack;
mod tails;

pub use harnack::{harnack_batch, harnack_quotient, HarnackQuotient, HarnackReport};
pub use heat_kernel::{
    heat_kernel_profile, FarFieldRatio, HeatKernelConfig, HeatKernelReport, OnDiagonal,
};
pub use holder::{holder_fit, HolderReport, HolderWindow};
pub use moser::{log_level_sets, moser_check, LogLevelReport, MoserMode, MoserReport};
pub use poincare::{poincare_weight, weighted_poincare_ratio, PoincareReport};
pub use scaling::{
    dilation_weight_mismatch, scaling_check, ScalingParams, ScalingProblem, ScalingReport,
    ScalingSetup,
};
pub use strong_harnack::{
    strong_harnack_probe, StrongHarnackConfig, StrongHarnackLevel, StrongHarnackReport,
};
pub use tails::{negative_part_forcing, NegativePartReport};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spacetime::SpaceTimeFunction;

/// Rejects functions with values below `-1e-8 · max(‖u‖_∞, 1)`.
pub(crate) fn require_nonnegative<T: Scalar>(u: &SpaceTimeFunction<T>) -> Result<()> {
    let floor = -T::lit(1e-8) * u.sup_norm().max(T::one());
    let m = u.min_value();
    if m < floor {
        return Err(Error::RejectedInput(format!(
            "function takes the negative value {m}"
        )));
    }
    Ok(())
}

/// Rejects functions whose time range does not cover `[a, b]`.
pub(crate) fn require_window<T: Scalar>(u: &SpaceTimeFunction<T>, a: T, b: T) -> Result<()> {
    let tol = u.dt() * T::lit(1e-9);
    if u.t0() > a + tol || u.final_time() < b - tol {
        return Err(Error::RejectedInput(format!(
            "function lives on [{}, {}] but [{a}, {b}] is needed",
            u.t0(),
            u.final_time()
        )));
    }
    Ok(())
}
