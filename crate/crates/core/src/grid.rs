//! Uniform grids, equation domains and parabolic cylinders.

use crate::error::{Error, Result};
use crate::measure::Point;
use crate::scalar::{near_integer, Scalar};

/// Open equation domain centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain<T> {
    Ball(T),
    /// Open cube of the given half-width.
    Cube(T),
}

impl<T: Scalar> Domain<T> {
    pub fn radius(&self) -> T {
        match *self {
            Domain::Ball(r) | Domain::Cube(r) => r,
        }
    }

    fn contains(&self, x: Point<T>, slack: T) -> bool {
        match *self {
            Domain::Ball(r) => x[0].hypot(x[1]) < r - slack,
            Domain::Cube(r) => x[0].abs().max(x[1].abs()) < r - slack,
        }
    }
}

/// Nodes `x = k h`, `k ∈ {-m, …, m}^d`, covering the box `[-L, L]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    box_radius: T,
    h: T,
    m: usize,
    domain: Domain<T>,
    interior: Vec<usize>,
    slot: Vec<Option<usize>>,
}

impl<T: Scalar> Grid<T> {
    pub fn new(dim: usize, box_radius: T, h: T, domain: Domain<T>) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::RejectedInput(format!(
                "grid dimension must be 1 or 2, got {dim}"
            )));
        }
        if !(h > T::zero()) || !(box_radius > T::zero()) {
            return Err(Error::RejectedInput(
                "grid spacing and box radius must be positive".into(),
            ));
        }
        let m = near_integer(box_radius / h, T::lit(1e-9))
            .filter(|&m| m > 0)
            .ok_or_else(|| {
                Error::RejectedInput(format!(
                    "box radius {box_radius} is not a multiple of h = {h}"
                ))
            })? as usize;
        if domain.radius() > box_radius || !(domain.radius() > T::zero()) {
            return Err(Error::RejectedInput(
                "equation domain must be a nonempty subset of the box".into(),
            ));
        }
        let mut g = Self {
            dim,
            box_radius,
            h,
            m,
            domain,
            interior: Vec::new(),
            slot: Vec::new(),
        };
        let slack = h * T::lit(1e-9);
        let n = g.len();
        g.slot = vec![None; n];
        for i in 0..n {
            if domain.contains(g.coord(i), slack) {
                g.slot[i] = Some(g.interior.len());
                g.interior.push(i);
            }
        }
        if g.interior.is_empty() {
            return Err(Error::RejectedInput(
                "equation domain contains no grid node".into(),
            ));
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn box_radius(&self) -> T {
        self.box_radius
    }

    pub fn domain(&self) -> Domain<T> {
        self.domain
    }

    /// Nodes per coordinate direction.
    pub fn side(&self) -> usize {
        2 * self.m + 1
    }

    pub fn half_width(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume `h^d` carried by each node.
    pub fn cell_volume(&self) -> T {
        self.h.powi(self.dim as i32)
    }

    /// Integer coordinates of node `i` relative to the centre.
    #[inline]
    pub fn multi(&self, i: usize) -> [i64; 2] {
        let s = self.side();
        let m = self.m as i64;
        if self.dim == 1 {
            [i as i64 - m, 0]
        } else {
            [(i % s) as i64 - m, (i / s) as i64 - m]
        }
    }

    #[inline]
    pub fn index_of(&self, k: [i64; 2]) -> Option<usize> {
        let m = self.m as i64;
        if k[0].abs() > m || k[1].abs() > m || (self.dim == 1 && k[1] != 0) {
            return None;
        }
        let s = self.side() as i64;
        Some(((k[0] + m) + if self.dim == 2 { (k[1] + m) * s } else { 0 }) as usize)
    }

    #[inline]
    pub fn coord(&self, i: usize) -> Point<T> {
        let k = self.multi(i);
        [T::lit(k[0] as f64) * self.h, T::lit(k[1] as f64) * self.h]
    }

    pub fn coords(&self) -> Vec<Point<T>> {
        (0..self.len()).map(|i| self.coord(i)).collect()
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    #[inline]
    pub fn interior_slot(&self, i: usize) -> Option<usize> {
        self.slot[i]
    }

    #[inline]
    pub fn is_interior(&self, i: usize) -> bool {
        self.slot[i].is_some()
    }

    /// Index of the node at the origin.
    pub fn origin(&self) -> usize {
        self.index_of([0, 0]).unwrap()
    }

    /// Same box and domain with another spacing.
    pub fn refined(&self, h: T) -> Result<Self> {
        Self::new(self.dim, self.box_radius, h, self.domain)
    }

    /// Exact volumes `|cell_i ∩ B_r(c)|` for the nodes whose cell meets the ball.
    pub fn ball_weights(&self, center: Point<T>, r: T) -> Vec<(usize, T)> {
        let half = self.h * T::lit(0.5);
        let mut out = Vec::new();
        for i in 0..self.len() {
            let x = self.coord(i);
            let lo = [x[0] - half - center[0], x[1] - half - center[1]];
            let hi = [x[0] + half - center[0], x[1] + half - center[1]];
            let v = if self.dim == 1 {
                (hi[0].min(r) - lo[0].max(-r)).max(T::zero())
            } else {
                rect_disc_area(lo, hi, r)
            };
            if v > T::zero() {
                out.push((i, v));
            }
        }
        out
    }

    /// Nodes in the closed ball `|x - c| ≤ r`.
    pub fn nodes_in_ball(&self, center: Point<T>, r: T) -> Vec<usize> {
        let tol = self.h * T::lit(1e-9);
        (0..self.len())
            .filter(|&i| {
                let x = self.coord(i);
                (x[0] - center[0]).hypot(x[1] - center[1]) <= r + tol
            })
            .collect()
    }
}

/// `|B_r|` in dimension `d`.
pub fn ball_volume<T: Scalar>(dim: usize, r: T) -> T {
    if dim == 1 {
        T::lit(2.0) * r
    } else {
        T::PI() * r * r
    }
}

/// Area of `[lo, hi] ∩ B_r(0)` in the plane.
pub fn rect_disc_area<T: Scalar>(lo: Point<T>, hi: Point<T>, r: T) -> T {
    let xa = lo[0].max(-r);
    let xb = hi[0].min(r);
    if !(xb > xa) || !(hi[1] > lo[1]) {
        return T::zero();
    }
    let rr = r * r;
    let s = |x: T| (rr - x * x).max(T::zero()).sqrt();
    let prim = |x: T| {
        let q = (x / r).max(-T::one()).min(T::one());
        T::lit(0.5) * (x * s(x) + rr * q.asin())
    };
    let mut pts = vec![xa, xb];
    for y in [lo[1], hi[1]] {
        if y.abs() < r {
            let c = (rr - y * y).sqrt();
            for p in [-c, c] {
                if p > xa && p < xb {
                    pts.push(p);
                }
            }
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut area = T::zero();
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        if !(q > p) {
            continue;
        }
        let mid = (p + q) * T::lit(0.5);
        let sm = s(mid);
        let (y1, y2) = (lo[1], hi[1]);
        if (y2.min(sm) - y1.max(-sm)) <= T::zero() {
            continue;
        }
        let upper = if y2 < sm {
            y2 * (q - p)
        } else {
            prim(q) - prim(p)
        };
        let lower = if y1 > -sm {
            y1 * (q - p)
        } else {
            prim(p) - prim(q)
        };
        area = area + upper - lower;
    }
    area.max(T::zero())
}

/// `∫_a^b ℓ_k(t) dt` for the piecewise-linear hat functions `ℓ_k` on the
/// uniform time grid `t_k = t0 + k dt`, `k = 0..=n`.
pub fn hat_weights<T: Scalar>(t0: T, dt: T, n: usize, a: T, b: T) -> Vec<(usize, T)> {
    let mut out = Vec::new();
    if !(b > a) {
        return out;
    }
    let pos = |t: T| (t - t0) / dt;
    let (sa, sb) = (pos(a).max(T::zero()), pos(b).min(T::from_usize_lossy(n)));
    if !(sb > sa) {
        return out;
    }
    let first = sa.floor().to_usize().unwrap_or(0);
    let last = sb.ceil().to_usize().unwrap_or(n).min(n);
    for k in first..=last {
        let kk = T::from_usize_lossy(k);
        let mut w = T::zero();
        // left half: ℓ_k(s) = s - (k-1) on [k-1, k]; right half: (k+1) - s on [k, k+1]
        let (l0, l1) = ((kk - T::one()).max(sa), kk.min(sb));
        if l1 > l0 {
            let f = |s: T| (s - kk + T::one()) * (s - kk + T::one()) * T::lit(0.5);
            w = w + f(l1) - f(l0);
        }
        let (r0, r1) = (kk.max(sa), (kk + T::one()).min(sb));
        if r1 > r0 {
            let f = |s: T| -(kk + T::one() - s) * (kk + T::one() - s) * T::lit(0.5);
            w = w + f(r1) - f(r0);
        }
        if w > T::zero() {
            out.push((k, w * dt));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CylinderKind<T> {
    /// `(t0 - r^α, t0 + r^α) × B_r(x0)`.
    Q { center: Point<T>, t0: T, r: T },
    /// `(0, r^α) × B_r(0)`.
    QPlus(T),
    /// `(-r^α, 0) × B_r(0)`.
    QMinus(T),
    /// `(1 - 2^{-α}, 1) × B_{1/2}(0)`.
    UPlus,
    /// `(-1, -1 + 2^{-α}) × B_{1/2}(0)`.
    UMinus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder<T> {
    pub kind: CylinderKind<T>,
    pub alpha: T,
}

impl<T: Scalar> Cylinder<T> {
    pub fn new(kind: CylinderKind<T>, alpha: T) -> Self {
        Self { kind, alpha }
    }

    pub fn time_interval(&self) -> (T, T) {
        let half_a = T::lit(0.5).powf(self.alpha);
        match self.kind {
            CylinderKind::Q { t0, r, .. } => (t0 - r.powf(self.alpha), t0 + r.powf(self.alpha)),
            CylinderKind::QPlus(r) => (T::zero(), r.powf(self.alpha)),
            CylinderKind::QMinus(r) => (-r.powf(self.alpha), T::zero()),
            CylinderKind::UPlus => (T::one() - half_a, T::one()),
            CylinderKind::UMinus => (-T::one(), -T::one() + half_a),
        }
    }

    pub fn center(&self) -> Point<T> {
        match self.kind {
            CylinderKind::Q { center, .. } => center,
            _ => [T::zero(), T::zero()],
        }
    }

    pub fn radius(&self) -> T {
        match self.kind {
            CylinderKind::Q { r, .. } | CylinderKind::QPlus(r) | CylinderKind::QMinus(r) => r,
            CylinderKind::UPlus | CylinderKind::UMinus => T::lit(0.5),
        }
    }

    /// Space-time volume in dimension `d`.
    pub fn volume(&self, dim: usize) -> T {
        let (a, b) = self.time_interval();
        (b - a) * ball_volume(dim, self.radius())
    }
}
