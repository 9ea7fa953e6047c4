//! Space-time functions given analytically: coefficients, sources, exterior data.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::Point;
use crate::scalar::Scalar;

type FieldFn<T> = Arc<dyn Fn(T, Point<T>) -> T + Send + Sync>;
type KernelFn<T> = Arc<dyn Fn(T, Point<T>, Point<T>) -> T + Send + Sync>;

/// A function of `(t, x)`, optionally known to be constant, time independent,
/// or to vanish outside a ball around the origin.
#[derive(Clone)]
pub enum Field<T> {
    Constant(T),
    Function {
        f: FieldFn<T>,
        /// `f(t, x) = 0` whenever `|x| > reach`.
        reach: Option<T>,
        steady: bool,
        /// Known bound on `|f|` (used for `‖f‖_∞`).
        bound: Option<T>,
    },
}

impl<T: Scalar> fmt::Debug for Field<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Constant(c) => write!(f, "Field::Constant({c})"),
            Field::Function { reach, steady, .. } => {
                write!(
                    f,
                    "Field::Function {{ reach: {reach:?}, steady: {steady} }}"
                )
            }
        }
    }
}

impl<T: Scalar> Default for Field<T> {
    fn default() -> Self {
        Field::Constant(T::zero())
    }
}

impl<T: Scalar> Field<T> {
    pub fn zero() -> Self {
        Field::Constant(T::zero())
    }

    pub fn constant(c: T) -> Self {
        Field::Constant(c)
    }

    pub fn new(f: impl Fn(T, Point<T>) -> T + Send + Sync + 'static) -> Self {
        Field::Function {
            f: Arc::new(f),
            reach: None,
            steady: false,
            bound: None,
        }
    }

    /// A time-independent field.
    pub fn steady(f: impl Fn(Point<T>) -> T + Send + Sync + 'static) -> Self {
        Field::Function {
            f: Arc::new(move |_, x| f(x)),
            reach: None,
            steady: true,
            bound: None,
        }
    }

    pub fn with_reach(self, r: T) -> Self {
        match self {
            Field::Function {
                f, steady, bound, ..
            } => Field::Function {
                f,
                reach: Some(r),
                steady,
                bound,
            },
            c => c,
        }
    }

    pub fn with_bound(self, b: T) -> Self {
        match self {
            Field::Function {
                f, reach, steady, ..
            } => Field::Function {
                f,
                reach,
                steady,
                bound: Some(b),
            },
            c => c,
        }
    }

    #[inline]
    pub fn value(&self, t: T, x: Point<T>) -> T {
        match self {
            Field::Constant(c) => *c,
            Field::Function { f, reach, .. } => {
                if let Some(r) = reach {
                    if x[0].hypot(x[1]) > *r {
                        return T::zero();
                    }
                }
                f(t, x)
            }
        }
    }

    pub fn as_constant(&self) -> Option<T> {
        match self {
            Field::Constant(c) => Some(*c),
            _ => None,
        }
    }

    pub fn reach(&self) -> Option<T> {
        match self {
            Field::Constant(c) if *c == T::zero() => Some(T::zero()),
            Field::Constant(_) => None,
            Field::Function { reach, .. } => *reach,
        }
    }

    pub fn is_steady(&self) -> bool {
        match self {
            Field::Constant(_) => true,
            Field::Function { steady, .. } => *steady,
        }
    }

    pub fn bound(&self) -> Option<T> {
        match self {
            Field::Constant(c) => Some(c.abs()),
            Field::Function { bound, .. } => *bound,
        }
    }

    /// Multiplies the field by `c`.
    pub fn scaled(&self, c: T) -> Self {
        match self {
            Field::Constant(v) => Field::Constant(*v * c),
            Field::Function {
                f,
                reach,
                steady,
                bound,
            } => {
                let f = f.clone();
                Field::Function {
                    f: Arc::new(move |t, x| c * f(t, x)),
                    reach: *reach,
                    steady: *steady,
                    bound: bound.map(|b| b * c.abs()),
                }
            }
        }
    }
}

/// Symmetric coefficient `a(t, x, y)` with values in `[1, 2]`.
#[derive(Clone)]
pub enum Coefficient<T> {
    Constant(T),
    Function { a: KernelFn<T>, steady: bool },
}

impl<T: Scalar> fmt::Debug for Coefficient<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Coefficient::Constant({c})"),
            Coefficient::Function { steady, .. } => {
                write!(f, "Coefficient::Function {{ steady: {steady} }}")
            }
        }
    }
}

impl<T: Scalar> Default for Coefficient<T> {
    fn default() -> Self {
        Coefficient::Constant(T::one())
    }
}

impl<T: Scalar> Coefficient<T> {
    pub fn constant(c: T) -> Result<Self> {
        if !(c >= T::one() && c <= T::lit(2.0)) {
            return Err(Error::RejectedInput(format!(
                "coefficient {c} outside [1, 2]"
            )));
        }
        Ok(Coefficient::Constant(c))
    }

    /// Wraps `a`; symmetry and bounds are checked by [`Coefficient::check`].
    pub fn new(
        a: impl Fn(T, Point<T>, Point<T>) -> T + Send + Sync + 'static,
        steady: bool,
    ) -> Self {
        Coefficient::Function {
            a: Arc::new(a),
            steady,
        }
    }

    #[inline]
    pub fn value(&self, t: T, x: Point<T>, y: Point<T>) -> T {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Function { a, .. } => a(t, x, y),
        }
    }

    pub fn as_constant(&self) -> Option<T> {
        match self {
            Coefficient::Constant(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_steady(&self) -> bool {
        match self {
            Coefficient::Constant(_) => true,
            Coefficient::Function { steady, .. } => *steady,
        }
    }

    /// Verifies `1 ≤ a ≤ 2` and `a(t,x,y) = a(t,y,x)` on the given samples.
    pub fn check(&self, samples: &[(T, Point<T>, Point<T>)]) -> Result<()> {
        let tol = T::lit(1e-12);
        for &(t, x, y) in samples {
            let v = self.value(t, x, y);
            if !(v >= T::one() - tol && v <= T::lit(2.0) + tol) {
                return Err(Error::RejectedInput(format!(
                    "coefficient value {v} outside [1, 2] at t={t}"
                )));
            }
            let w = self.value(t, y, x);
            if (v - w).abs() > tol * v {
                return Err(Error::RejectedInput(format!(
                    "coefficient not symmetric at t={t}: {v} vs {w}"
                )));
            }
        }
        Ok(())
    }
}

/// Coefficients of `∂ₜu − Lu = f`.
#[derive(Debug, Clone)]
pub struct EquationCoefficients<T: Scalar> {
    pub a: Coefficient<T>,
    pub f: Field<T>,
}

impl<T: Scalar> Default for EquationCoefficients<T> {
    fn default() -> Self {
        Self {
            a: Coefficient::default(),
            f: Field::zero(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reach_cuts_values() {
        let f = Field::steady(|_x: Point<f64>| 1.0).with_reach(1.0);
        assert_eq!(f.value(0.0, [0.5, 0.5]), 1.0);
        assert_eq!(f.value(0.0, [1.0, 0.5]), 0.0);
    }

    #[test]
    fn coefficient_checks() {
        let good = Coefficient::new(
            |_t, x: Point<f64>, y: Point<f64>| 1.5 + 0.25 * (x[0] * y[0]).sin(),
            true,
        );
        let samples: Vec<_> = (0..20)
            .map(|k| (0.0, [k as f64 * 0.3, 0.0], [1.0 - k as f64, 0.0]))
            .collect();
        assert!(good.check(&samples).is_ok());
        let skew = Coefficient::new(
            |_t, x: Point<f64>, _y: Point<f64>| 1.5 + 0.25 * x[0].sin(),
            true,
        );
        assert!(skew.check(&samples).is_err());
        assert!(Coefficient::constant(0.5f64).is_err());
    }
}
