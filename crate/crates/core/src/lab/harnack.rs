use rayon::prelude::*;
use serde::Serialize;

use super::{require_nonnegative, require_window};
use crate::error::{Error, Result};
use crate::grid::{Cylinder, CylinderKind};
use crate::operator::DiscreteOperator;
use crate::samples::{make_certified_samples, SampleConfig};
use crate::scalar::Scalar;
use crate::spacetime::SpaceTimeFunction;

/// `‖u‖_{L¹(U⊖)} / (inf_{U⊕} u + ‖f‖_∞)` for one function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarnackQuotient<T> {
    pub numerator: T,
    pub infimum: T,
    pub source_sup: T,
    /// `None` when the denominator vanishes.
    pub quotient: Option<T>,
}

impl<T: Scalar> HarnackQuotient<T> {
    pub fn is_degenerate(&self) -> bool {
        self.quotient.is_none()
    }
}

/// `u` must be nonnegative and defined on `[-1, 1]`; `source_sup` is
/// `‖f‖_{L∞((-1,1) × B_2)}`. The infimum is the minimum over the nodes of the
/// closed cylinder `U⊕`.
pub fn harnack_quotient<T: Scalar>(
    u: &SpaceTimeFunction<T>,
    source_sup: T,
    alpha: T,
) -> Result<HarnackQuotient<T>> {
    if !(source_sup >= T::zero()) {
        return Err(Error::RejectedInput(format!(
            "source bound {source_sup} must be nonnegative"
        )));
    }
    require_window(u, -T::one(), T::one())?;
    require_nonnegative(u)?;
    let early = Cylinder::new(CylinderKind::UMinus, alpha);
    let late = Cylinder::new(CylinderKind::UPlus, alpha);
    let numerator = u.integrate(&early, |v| v.abs());
    let infimum = u.min_over(&late).max(T::zero());
    let denominator = infimum + source_sup;
    let quotient = (denominator > T::zero()).then(|| numerator / denominator);
    Ok(HarnackQuotient {
        numerator,
        infimum,
        source_sup,
        quotient,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnackReport<T> {
    pub alpha: T,
    pub h: T,
    pub dt: T,
    /// Stream indices of the samples, in order.
    pub indices: Vec<u64>,
    pub samples: Vec<HarnackQuotient<T>>,
    pub max_quotient: Option<T>,
    pub degenerate: usize,
}

impl<T: Scalar> HarnackReport<T> {
    pub fn from_samples(
        alpha: T,
        h: T,
        dt: T,
        indices: Vec<u64>,
        samples: Vec<HarnackQuotient<T>>,
    ) -> Self {
        let max_quotient = samples.iter().filter_map(|s| s.quotient).reduce(T::max);
        let degenerate = samples.iter().filter(|s| s.is_degenerate()).count();
        Self {
            alpha,
            h,
            dt,
            indices,
            samples,
            max_quotient,
            degenerate,
        }
    }

    /// Relative change of the maximal quotient against a reference run.
    pub fn drift(&self, reference: &Self) -> Option<T> {
        let (a, b) = (self.max_quotient?, reference.max_quotient?);
        Some((a - b).abs() / b.abs())
    }
}

/// Quotients of `count` certified supersolutions with `f = 0` on `(-1, 1)`.
pub fn harnack_batch<T: Scalar>(
    op: &DiscreteOperator<T>,
    seed: u64,
    count: usize,
    cfg: &SampleConfig<T>,
) -> Result<HarnackReport<T>> {
    let samples = make_certified_samples(op, seed, count, cfg)?;
    let alpha = op.spec().alpha();
    let quotients = samples
        .par_iter()
        .map(|s| harnack_quotient(&s.u, T::zero(), alpha))
        .collect::<Result<Vec<_>>>()?;
    let indices = samples.iter().map(|s| s.index).collect();
    Ok(HarnackReport::from_samples(
        alpha,
        op.grid().h(),
        cfg.dt,
        indices,
        quotients,
    ))
}
