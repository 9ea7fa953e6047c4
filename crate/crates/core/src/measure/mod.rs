//! Jump measures `μ(x, dy)` and their masses.
//!
//! All built-in kinds are translation invariant, so a measure is described by
//! its behaviour around the origin: `μ(x, x + A) = μ(0, A)`.

mod cusp;
mod mass;
mod sets;
mod table;

pub use cusp::{angular_fraction, cusp_cutoff, cusp_geometry, CuspGeometry};
pub use mass::Estimate;
pub use sets::{point, Point, SetDescriptor};
pub use table::RadialTable;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKind<T> {
    /// `|z|^{-d-α} dz`.
    AlphaStable,
    /// One-dimensional stable measures along the coordinate lines.
    Axes,
    /// Stable density restricted to `{|z₂| > |z₁|^s} ∪ {|z₁| > |z₂|^s}`; planar only.
    Cusp { s: T },
    /// Isotropic density `k(|z|) dz` read from a table.
    Tabulated(RadialTable<T>),
}

impl<T> MeasureKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            MeasureKind::AlphaStable => "alpha_stable",
            MeasureKind::Axes => "axes",
            MeasureKind::Cusp { .. } => "cusp",
            MeasureKind::Tabulated(_) => "tabulated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec<T> {
    kind: MeasureKind<T>,
    dim: usize,
    alpha: T,
    normalization: T,
}

/// `2^α Γ((d+α)/2) / (π^{d/2} |Γ(-α/2)|)`: with this multiplier the stable
/// kernel generates `-(-Δ)^{α/2}`.
pub fn fractional_laplacian_constant<T: Scalar>(dim: usize, alpha: T) -> T {
    let d = T::from_usize_lossy(dim);
    let two = T::lit(2.0);
    two.powf(alpha) * ((d + alpha) / two).gamma()
        / (T::PI().powf(d / two) * (-alpha / two).gamma().abs())
}

/// `∫_lo^hi r^{e-1} dr` for `0 ≤ lo ≤ hi ≤ ∞`.
pub(crate) fn power_integral<T: Scalar>(lo: T, hi: T, e: T) -> Result<T> {
    if !(hi > lo) {
        return Ok(T::zero());
    }
    if e == T::zero() {
        if lo == T::zero() || hi.is_infinite() {
            return Err(Error::RejectedInput(
                "logarithmically divergent power integral".into(),
            ));
        }
        return Ok((hi / lo).ln());
    }
    if (lo == T::zero() && e < T::zero()) || (hi.is_infinite() && e > T::zero()) {
        return Err(Error::RejectedInput(format!(
            "divergent power integral over [{lo}, {hi}] with exponent {}",
            e - T::one()
        )));
    }
    let term = |r: T| {
        if r.is_infinite() || r == T::zero() {
            T::zero()
        } else {
            r.powf(e)
        }
    };
    if e < T::zero() {
        // both terms negative powers; subtract in the stable order
        Ok((term(lo) - term(hi)) / (-e))
    } else {
        Ok((term(hi) - term(lo)) / e)
    }
}

impl<T: Scalar> MeasureSpec<T> {
    fn build(kind: MeasureKind<T>, dim: usize, alpha: T) -> Result<Self> {
        let spec = Self {
            kind,
            dim,
            alpha,
            normalization: T::one(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn alpha_stable(dim: usize, alpha: T) -> Result<Self> {
        Self::build(MeasureKind::AlphaStable, dim, alpha)
    }

    pub fn axes(dim: usize, alpha: T) -> Result<Self> {
        Self::build(MeasureKind::Axes, dim, alpha)
    }

    pub fn cusp(alpha: T, s: T) -> Result<Self> {
        Self::build(MeasureKind::Cusp { s }, 2, alpha)
    }

    /// Tabulated kernel; `alpha` is the order used for time scaling and the
    /// condition checks.
    pub fn tabulated(dim: usize, alpha: T, table: RadialTable<T>) -> Result<Self> {
        Self::build(MeasureKind::Tabulated(table), dim, alpha)
    }

    pub fn new(kind: MeasureKind<T>, dim: usize, alpha: T) -> Result<Self> {
        Self::build(kind, dim, alpha)
    }

    pub fn with_normalization(mut self, c: T) -> Result<Self> {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "normalization must be positive, got {c}"
            )));
        }
        self.normalization = c;
        Ok(self)
    }

    /// Multiplies the kernel by `2 - α`, keeping constants bounded as `α → 2`.
    pub fn robust(self) -> Self {
        let c = T::lit(2.0) - self.alpha;
        Self {
            normalization: c,
            ..self
        }
    }

    /// Scales the kernel so that the stable kind generates `-(-Δ)^{α/2}` and
    /// the axes kind generates `-Σ_a (-∂²_a)^{α/2}`.
    pub fn fractional_laplacian(self) -> Self {
        let dim = match self.kind {
            MeasureKind::Axes => 1,
            _ => self.dim,
        };
        let c = fractional_laplacian_constant(dim, self.alpha);
        Self {
            normalization: c,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.alpha;
        if !(a > T::zero() && a < T::lit(2.0)) {
            return Err(Error::InvalidSpec(format!(
                "alpha must lie in (0, 2), got {a}"
            )));
        }
        if !(1..=2).contains(&self.dim) {
            return Err(Error::InvalidSpec(format!(
                "dimension must be 1 or 2, got {}",
                self.dim
            )));
        }
        if !(self.normalization > T::zero()) || !self.normalization.is_finite() {
            return Err(Error::InvalidSpec("normalization must be positive".into()));
        }
        match &self.kind {
            MeasureKind::Cusp { s } => {
                if self.dim != 2 {
                    return Err(Error::InvalidSpec("cusp measure is planar (d = 2)".into()));
                }
                if !(*s > T::zero() && *s < T::one()) {
                    return Err(Error::InvalidSpec(format!(
                        "cusp exponent must lie in (0, 1), got {s}"
                    )));
                }
                let beta = T::one() - T::one() / *s + a;
                if !(beta > T::zero()) {
                    return Err(Error::InvalidSpec(format!(
                        "cusp effective order 1 - 1/s + alpha = {beta} must be positive"
                    )));
                }
            }
            MeasureKind::Tabulated(t) => {
                let d = T::from_usize_lossy(self.dim);
                if let Some(g) = t.inner_exponent() {
                    if !(g - d < T::lit(2.0)) {
                        return Err(Error::InvalidSpec(format!(
                            "inner exponent {g} leaves the second moment infinite"
                        )));
                    }
                }
                if let Some(g) = t.outer_exponent() {
                    if !(g > d) {
                        return Err(Error::InvalidSpec(format!(
                            "outer exponent {g} leaves the tail mass infinite"
                        )));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn kind(&self) -> &MeasureKind<T> {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn normalization(&self) -> T {
        self.normalization
    }

    pub fn cusp_exponent(&self) -> Option<T> {
        match self.kind {
            MeasureKind::Cusp { s } => Some(s),
            _ => None,
        }
    }

    /// Scale of the operator: `α`, except `1 - 1/s + α` for the cusp.
    pub fn effective_order(&self) -> Result<T> {
        match self.kind {
            MeasureKind::Cusp { s } => {
                let beta = T::one() - T::one() / s + self.alpha;
                if beta > T::zero() {
                    Ok(beta)
                } else {
                    Err(Error::InvalidSpec(format!(
                        "cusp effective order {beta} is not positive"
                    )))
                }
            }
            _ => Ok(self.alpha),
        }
    }

    /// `true` when the measure charges only coordinate lines through `x`
    /// (in one dimension every kind does).
    pub fn is_ray_discrete(&self) -> bool {
        self.dim == 1 || matches!(self.kind, MeasureKind::Axes)
    }

    /// `true` when `μ(0, λA) = λ^{-α} μ(0, A)`.
    pub fn is_homogeneous(&self) -> bool {
        matches!(self.kind, MeasureKind::AlphaStable | MeasureKind::Axes)
    }

    /// Exponent `q` with `|z|^p μ(dz)` integrable near `0` iff `p > q`.
    pub(crate) fn singular_order(&self) -> Result<T> {
        match &self.kind {
            MeasureKind::Tabulated(t) => Ok(t
                .inner_exponent()
                .map(|g| g - T::from_usize_lossy(self.dim))
                .unwrap_or(T::neg_infinity())),
            _ => self.effective_order(),
        }
    }

    /// Exponent `q` with `|z|^p μ(dz)` integrable at infinity iff `p < q`.
    pub(crate) fn decay_order(&self) -> T {
        match &self.kind {
            MeasureKind::Tabulated(t) => t
                .outer_exponent()
                .map(|g| g - T::from_usize_lossy(self.dim))
                .unwrap_or(T::infinity()),
            _ => self.alpha,
        }
    }

    /// The same family with another order (used for `α`-sweeps).
    pub fn with_alpha(&self, alpha: T) -> Result<Self> {
        let s = Self {
            alpha,
            ..self.clone()
        };
        s.validate()?;
        Ok(s)
    }
}
