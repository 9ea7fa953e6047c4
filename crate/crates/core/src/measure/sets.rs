//! Sets whose measure the laboratory evaluates, and their intersection with rays.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point of `R^d` for `d ≤ 2`; in one dimension the second coordinate is zero.
pub type Point<T> = [T; 2];

pub(crate) fn sub<T: Scalar>(a: Point<T>, b: Point<T>) -> Point<T> {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn dot<T: Scalar>(a: Point<T>, b: Point<T>) -> T {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn norm<T: Scalar>(a: Point<T>) -> T {
    a[0].hypot(a[1])
}

/// Builds a point from a slice of length 1 or 2.
pub fn point<T: Scalar>(x: &[T]) -> Point<T> {
    match x.len() {
        1 => [x[0], T::zero()],
        _ => [x[0], x[1]],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SetDescriptor<T> {
    Ball {
        center: Point<T>,
        radius: T,
    },
    Annulus {
        center: Point<T>,
        inner: T,
        outer: T,
    },
    /// Axis-aligned box `[lo, hi]`.
    Cell {
        lo: Point<T>,
        hi: Point<T>,
    },
    /// Complement of a ball.
    Complement {
        center: Point<T>,
        radius: T,
    },
    /// Complement of an axis-aligned box (far field outside a computational box).
    BoxComplement {
        lo: Point<T>,
        hi: Point<T>,
    },
}

/// At most two disjoint radial intervals along one ray.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Spans<T> {
    items: [(T, T); 2],
    len: usize,
}

impl<T: Scalar> Spans<T> {
    fn empty() -> Self {
        Self {
            items: [(T::zero(), T::zero()); 2],
            len: 0,
        }
    }

    fn push(&mut self, a: T, b: T) {
        if b > a {
            self.items[self.len] = (a, b);
            self.len += 1;
        }
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.items[..self.len].iter().copied()
    }
}

impl<T: Scalar> SetDescriptor<T> {
    pub fn ball(center: &[T], radius: T) -> Self {
        SetDescriptor::Ball {
            center: point(center),
            radius,
        }
    }

    pub fn annulus(center: &[T], inner: T, outer: T) -> Self {
        SetDescriptor::Annulus {
            center: point(center),
            inner,
            outer,
        }
    }

    pub fn complement(center: &[T], radius: T) -> Self {
        SetDescriptor::Complement {
            center: point(center),
            radius,
        }
    }

    pub fn cell(lo: &[T], hi: &[T]) -> Self {
        SetDescriptor::Cell {
            lo: point(lo),
            hi: point(hi),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SetDescriptor::Ball { radius, .. } | SetDescriptor::Complement { radius, .. } => {
                radius > T::zero()
            }
            SetDescriptor::Annulus { inner, outer, .. } => inner > T::zero() && outer >= inner,
            SetDescriptor::Cell { lo, hi } | SetDescriptor::BoxComplement { lo, hi } => {
                hi[0] >= lo[0] && hi[1] >= lo[1]
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::RejectedInput(format!("malformed set {self:?}")))
        }
    }

    /// `true` if `x` lies in the closure of the set (the diagonal is touched).
    pub fn touches(&self, x: Point<T>, dim: usize) -> bool {
        match *self {
            SetDescriptor::Ball { center, radius } => norm(sub(x, center)) <= radius,
            SetDescriptor::Annulus {
                center,
                inner,
                outer,
            } => {
                let r = norm(sub(x, center));
                r >= inner && r <= outer && outer > inner
            }
            SetDescriptor::Complement { center, radius } => norm(sub(x, center)) >= radius,
            SetDescriptor::Cell { lo, hi } => (0..dim).all(|k| x[k] >= lo[k] && x[k] <= hi[k]),
            SetDescriptor::BoxComplement { lo, hi } => {
                (0..dim).any(|k| x[k] <= lo[k] || x[k] >= hi[k])
            }
        }
    }

    /// Radial intervals `{r ≥ 0 : x + r·dir ∈ set}` for a unit direction.
    pub(crate) fn ray_spans(&self, x: Point<T>, dir: Point<T>, dim: usize) -> Spans<T> {
        let mut out = Spans::empty();
        match *self {
            SetDescriptor::Ball { center, radius } => {
                if let Some((a, b)) = ball_span(x, dir, center, radius) {
                    out.push(a, b);
                }
            }
            SetDescriptor::Annulus {
                center,
                inner,
                outer,
            } => {
                if let Some((a, b)) = ball_span(x, dir, center, outer) {
                    match ball_span(x, dir, center, inner) {
                        Some((c, d)) => {
                            out.push(a, c.min(b));
                            out.push(d.max(a), b);
                        }
                        None => out.push(a, b),
                    }
                }
            }
            SetDescriptor::Complement { center, radius } => match ball_span(x, dir, center, radius)
            {
                Some((a, b)) => {
                    out.push(T::zero(), a);
                    out.push(b, T::infinity());
                }
                None => out.push(T::zero(), T::infinity()),
            },
            SetDescriptor::Cell { lo, hi } => {
                if let Some((a, b)) = slab_span(x, dir, lo, hi, dim) {
                    out.push(a, b);
                }
            }
            SetDescriptor::BoxComplement { lo, hi } => match slab_span(x, dir, lo, hi, dim) {
                Some((a, b)) => {
                    out.push(T::zero(), a);
                    out.push(b, T::infinity());
                }
                None => out.push(T::zero(), T::infinity()),
            },
        }
        out
    }

    /// Angles (relative to `x`) at which the ray/set intersection changes
    /// smoothness; used as quadrature breakpoints in two dimensions.
    pub(crate) fn critical_angles(&self, x: Point<T>) -> Vec<T> {
        let mut out = Vec::new();
        let mut corners = |lo: Point<T>, hi: Point<T>| {
            for c in [
                [lo[0], lo[1]],
                [hi[0], lo[1]],
                [hi[0], hi[1]],
                [lo[0], hi[1]],
            ] {
                let v = sub(c, x);
                if norm(v) > T::zero() {
                    out.push(v[1].atan2(v[0]));
                }
            }
        };
        match *self {
            SetDescriptor::Cell { lo, hi } | SetDescriptor::BoxComplement { lo, hi } => {
                corners(lo, hi)
            }
            SetDescriptor::Ball { center, radius }
            | SetDescriptor::Complement { center, radius } => {
                tangent_angles(x, center, &[radius], &mut out)
            }
            SetDescriptor::Annulus {
                center,
                inner,
                outer,
            } => tangent_angles(x, center, &[inner, outer], &mut out),
        }
        out
    }
}

fn tangent_angles<T: Scalar>(x: Point<T>, center: Point<T>, radii: &[T], out: &mut Vec<T>) {
    let v = sub(center, x);
    let dist = norm(v);
    if dist == T::zero() {
        return;
    }
    let base = v[1].atan2(v[0]);
    out.push(base);
    out.push(base + T::PI());
    for &r in radii {
        if dist > r {
            let half = (r / dist).asin();
            out.push(base - half);
            out.push(base + half);
        }
    }
}

fn ball_span<T: Scalar>(x: Point<T>, dir: Point<T>, center: Point<T>, radius: T) -> Option<(T, T)> {
    let q = sub(x, center);
    let b = dot(q, dir);
    let c = dot(q, q) - radius * radius;
    let disc = b * b - c;
    if disc <= T::zero() {
        return None;
    }
    let s = disc.sqrt();
    // numerically stable roots of r^2 + 2br + c = 0
    let (r1, r2) = if b > T::zero() {
        let r1 = -b - s;
        (r1, if r1 != T::zero() { c / r1 } else { -b + s })
    } else {
        let r2 = -b + s;
        (if r2 != T::zero() { c / r2 } else { -b - s }, r2)
    };
    let (lo, hi) = (r1.min(r2).max(T::zero()), r1.max(r2));
    if hi > lo {
        Some((lo, hi))
    } else {
        None
    }
}

fn slab_span<T: Scalar>(
    x: Point<T>,
    dir: Point<T>,
    lo: Point<T>,
    hi: Point<T>,
    dim: usize,
) -> Option<(T, T)> {
    let mut t0 = T::zero();
    let mut t1 = T::infinity();
    for k in 0..dim {
        if dir[k] == T::zero() {
            if x[k] < lo[k] || x[k] > hi[k] {
                return None;
            }
        } else {
            let a = (lo[k] - x[k]) / dir[k];
            let b = (hi[k] - x[k]) / dir[k];
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    if t1 > t0 {
        Some((t0, t1))
    } else {
        None
    }
}
