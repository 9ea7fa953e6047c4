//! Geometry of the cusp support `{|z₂| > |z₁|^s} ∪ {|z₁| > |z₂|^s}`.

use crate::error::{Error, Result};
use crate::quadrature::bracketed_root;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuspGeometry<T> {
    /// Positive root of `r² = z₁² + z₁^{2s}`.
    pub z1: T,
    /// Half-opening angle of the support around each axis at radius `r`.
    pub theta: T,
}

/// Boundary point of the cusp on the circle of radius `r`.
pub fn cusp_geometry<T: Scalar>(s: T, r: T) -> Result<CuspGeometry<T>> {
    if !(s > T::zero() && s < T::one()) || !(r > T::zero()) || !r.is_finite() {
        return Err(Error::RejectedInput(format!(
            "cusp geometry needs 0 < s < 1 and r > 0, got s={s}, r={r}"
        )));
    }
    let two = T::lit(2.0);
    let f = |z: T| z * z + z.powf(two * s) - r * r;
    let hi = r.min(r.powf(T::one() / s));
    let half = r * r / two;
    let lo = half.sqrt().min(half.powf(T::one() / (two * s)));
    let z1 = bracketed_root(f, lo, hi, T::lit(1e-13))?;
    let theta = (z1 / (z1.powf(two * s) + z1 * z1).sqrt())
        .min(T::one())
        .asin();
    Ok(CuspGeometry { z1, theta })
}

/// Radius beyond which the ray at angle `psi ∈ [0, π/4]` from the nearest
/// coordinate axis lies in the support.
pub fn cusp_cutoff<T: Scalar>(s: T, psi: T) -> T {
    let (sn, cs) = psi.sin_cos();
    if sn <= T::zero() {
        return T::zero();
    }
    (sn.powf(s) / cs).powf(T::one() / (T::one() - s))
}

/// Angle between the unit direction `(c, s)` and the nearest coordinate axis.
pub(crate) fn angle_to_nearest_axis<T: Scalar>(dir: [T; 2]) -> T {
    let a = dir[0].abs();
    let b = dir[1].abs();
    a.min(b).atan2(a.max(b))
}

/// Fraction of the circle of radius `r` inside the support.
pub fn angular_fraction<T: Scalar>(s: T, r: T) -> Result<T> {
    let g = cusp_geometry(s, r)?;
    Ok((T::lit(4.0) * g.theta / T::PI()).min(T::one()))
}
