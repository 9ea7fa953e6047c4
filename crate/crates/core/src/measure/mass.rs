//! Masses, moments and integrals of `μ(x, ·)` over sets.
//!
//! Everything is evaluated along rays from `x`: the measure kinds that live
//! on coordinate lines reduce to a handful of one-dimensional closed forms,
//! the planar absolutely continuous kinds integrate a closed-form radial part
//! over the angle.

use std::cell::RefCell;

use super::cusp::{angle_to_nearest_axis, cusp_cutoff, cusp_geometry};
use super::sets::{Point, SetDescriptor};
use super::{power_integral, MeasureKind, MeasureSpec};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::Scalar;

/// A value together with an absolute error bound (zero for closed forms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
}

impl<T: Scalar> Estimate<T> {
    pub(crate) fn exact(value: T) -> Self {
        Self {
            value,
            error: T::zero(),
        }
    }

    fn scaled(self, c: T) -> Self {
        Self {
            value: self.value * c,
            error: self.error * c,
        }
    }
}

/// Relative accuracy requested for integrals of functions against `μ`.
const FUNCTION_TOL: f64 = 1e-9;

fn mass_opts<T: Scalar>() -> QuadOptions<T> {
    QuadOptions {
        rel_tol: T::clamp_tol(T::lit(1e-10)),
        abs_tol: T::lit(1e-300).max(T::min_positive_value()),
        max_intervals: 4000,
    }
}

/// Angular weight applied to a direction.
#[derive(Clone, Copy)]
pub(crate) enum Weight {
    One,
    /// `dir_a²`, so that `|z|^p dir_a²` is `|z|^{p-2} z_a²`.
    Axis(usize),
}

impl Weight {
    fn eval<T: Scalar>(self, dir: Point<T>) -> T {
        match self {
            Weight::One => T::one(),
            Weight::Axis(a) => dir[a] * dir[a],
        }
    }

    /// `∫_0^{2π} w(φ) dφ`.
    fn full_turn<T: Scalar>(self) -> T {
        match self {
            Weight::One => T::lit(2.0) * T::PI(),
            Weight::Axis(_) => T::PI(),
        }
    }
}

fn ray_directions<T: Scalar>(dim: usize) -> Vec<Point<T>> {
    let (z, o) = (T::zero(), T::one());
    if dim == 1 {
        vec![[o, z], [-o, z]]
    } else {
        vec![[o, z], [-o, z], [z, o], [z, -o]]
    }
}

fn first_error<T: Scalar>(slot: &RefCell<Option<Error>>, r: Result<T>) -> T {
    match r {
        Ok(v) => v,
        Err(e) => {
            slot.borrow_mut().get_or_insert(e);
            T::zero()
        }
    }
}

/// Distance along the ray from `x` to the sphere of radius `reach` around the origin.
fn exit_radius<T: Scalar>(x: Point<T>, dir: Point<T>, reach: Option<T>) -> Option<T> {
    reach.map(|r| {
        let b = x[0] * dir[0] + x[1] * dir[1];
        let c = x[0] * x[0] + x[1] * x[1] - r * r;
        let disc = b * b - c;
        if disc <= T::zero() {
            T::zero()
        } else {
            (-b + disc.sqrt()).max(T::zero())
        }
    })
}

fn set_radii<T: Scalar>(set: &SetDescriptor<T>, x: Point<T>) -> Option<Vec<T>> {
    let centered = |c: Point<T>| c[0] == x[0] && c[1] == x[1];
    match *set {
        SetDescriptor::Ball { center, radius } | SetDescriptor::Complement { center, radius }
            if centered(center) =>
        {
            Some(vec![radius])
        }
        SetDescriptor::Annulus {
            center,
            inner,
            outer,
        } if centered(center) => Some(vec![inner, outer]),
        _ => None,
    }
}

impl<T: Scalar> MeasureSpec<T> {
    /// `∫_a^b r^p ν(r) dr` where `ν` is the raw radial density along a ray,
    /// including the polar Jacobian in two dimensions.
    pub(crate) fn radial_moment(&self, a: T, b: T, p: T) -> Result<T> {
        match &self.kind {
            MeasureKind::Tabulated(t) => {
                if self.is_ray_discrete() {
                    t.moment(a, b, p)
                } else {
                    t.moment(a, b, p + T::one())
                }
            }
            _ => power_integral(a, b, p - self.alpha),
        }
    }

    /// Raw radial density along a ray at distance `r` (with the polar Jacobian).
    pub(crate) fn radial_density(&self, r: T) -> Result<T> {
        match &self.kind {
            MeasureKind::Tabulated(t) => {
                let k = t.density(r)?;
                Ok(if self.is_ray_discrete() { k } else { k * r })
            }
            _ => Ok(r.powf(-T::one() - self.alpha)),
        }
    }

    /// Density of `μ(0, dz)` at `z ≠ 0` with respect to Lebesgue measure,
    /// including the normalization; `None` for the axes kind in two dimensions,
    /// which has no density.
    pub fn density(&self, z: &[T]) -> Result<Option<T>> {
        let z = super::point(z);
        let r = (z[0] * z[0] + z[1] * z[1]).sqrt();
        if !(r > T::zero()) {
            return Err(Error::RejectedInput(
                "density is singular at the origin".into(),
            ));
        }
        if self.dim == 2 && matches!(self.kind, MeasureKind::Axes) {
            return Ok(None);
        }
        let raw = match &self.kind {
            MeasureKind::Tabulated(t) => t.density(r)?,
            MeasureKind::Cusp { .. } => {
                let dir = [z[0] / r, z[1] / r];
                if r >= self.ray_cutoff(dir) {
                    r.powf(-T::lit(2.0) - self.alpha)
                } else {
                    T::zero()
                }
            }
            _ => r.powf(-T::from_usize_lossy(self.dim) - self.alpha),
        };
        Ok(Some(raw * self.normalization))
    }

    /// Radius below which the ray in direction `dir` is not charged.
    fn ray_cutoff(&self, dir: Point<T>) -> T {
        match self.kind {
            MeasureKind::Cusp { s } => cusp_cutoff(s, angle_to_nearest_axis(dir)),
            _ => T::zero(),
        }
    }

    fn check_set(&self, x: Point<T>, set: &SetDescriptor<T>, p: T) -> Result<()> {
        set.validate()?;
        if set.touches(x, self.dim) && !(p > self.singular_order()?) {
            return Err(Error::RejectedInput(format!(
                "set {set:?} touches the singularity at x = {x:?}; moment order {p} is not integrable"
            )));
        }
        let unbounded = matches!(
            set,
            SetDescriptor::Complement { .. } | SetDescriptor::BoxComplement { .. }
        );
        if unbounded && !(p < self.decay_order()) {
            return Err(Error::RejectedInput(format!(
                "moment order {p} is not integrable at infinity"
            )));
        }
        Ok(())
    }

    /// `μ(x, A)`.
    pub fn measure_of_set(&self, x: &[T], set: &SetDescriptor<T>) -> Result<Estimate<T>> {
        self.moment_of_set(x, set, T::zero())
    }

    /// `∫_{B_ρ(x)} |x - y|² μ(x, dy)`.
    pub fn second_moment_in_ball(&self, x: &[T], rho: T) -> Result<Estimate<T>> {
        if !(rho > T::zero()) {
            return Err(Error::RejectedInput(format!(
                "radius must be positive, got {rho}"
            )));
        }
        self.moment_of_set(x, &SetDescriptor::ball(x, rho), T::lit(2.0))
    }

    /// `∫_A |x - y|^p μ(x, dy)`.
    pub fn moment_of_set(&self, x: &[T], set: &SetDescriptor<T>, p: T) -> Result<Estimate<T>> {
        self.weighted_moment(super::point(x), set, p, Weight::One)
    }

    /// `∫_A (y - x)_a² μ(x, dy)`.
    pub fn axis_second_moment(
        &self,
        x: &[T],
        set: &SetDescriptor<T>,
        axis: usize,
    ) -> Result<Estimate<T>> {
        if axis >= self.dim {
            return Err(Error::RejectedInput(format!("axis {axis} out of range")));
        }
        self.weighted_moment(super::point(x), set, T::lit(2.0), Weight::Axis(axis))
    }

    pub(crate) fn weighted_moment(
        &self,
        x: Point<T>,
        set: &SetDescriptor<T>,
        p: T,
        w: Weight,
    ) -> Result<Estimate<T>> {
        self.check_set(x, set, p)?;
        let raw = if self.is_ray_discrete() {
            let mut total = T::zero();
            for dir in ray_directions(self.dim) {
                let c = w.eval(dir);
                if c == T::zero() {
                    continue;
                }
                for (a, b) in set.ray_spans(x, dir, self.dim).iter() {
                    total = total + c * self.radial_moment(a, b, p)?;
                }
            }
            Estimate::exact(total)
        } else {
            self.polar_moment(x, set, p, w)?
        };
        Ok(raw.scaled(self.normalization))
    }

    fn polar_moment(
        &self,
        x: Point<T>,
        set: &SetDescriptor<T>,
        p: T,
        w: Weight,
    ) -> Result<Estimate<T>> {
        let radii = set_radii(set, x);
        if radii.is_some() && !matches!(self.kind, MeasureKind::Cusp { .. }) {
            // isotropic kind on a set centred at x: the angle separates
            let dir = [T::one(), T::zero()];
            let mut total = T::zero();
            for (a, b) in set.ray_spans(x, dir, 2).iter() {
                total = total + self.radial_moment(a, b, p)?;
            }
            return Ok(Estimate::exact(total * w.full_turn()));
        }
        let failure = RefCell::new(None);
        let integrand = |phi: T| {
            let (sn, cs) = phi.sin_cos();
            let dir = [cs, sn];
            let cut = self.ray_cutoff(dir);
            let mut acc = T::zero();
            for (a, b) in set.ray_spans(x, dir, 2).iter() {
                let lo = a.max(cut);
                if b > lo {
                    acc = acc + first_error(&failure, self.radial_moment(lo, b, p));
                }
            }
            acc * w.eval(dir)
        };
        let points = self.angular_breakpoints(x, set, radii.as_deref())?;
        let r = integrate(integrand, &points, &mass_opts(), "angular mass integral")?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(Estimate {
            value: r.value,
            error: r.error,
        })
    }

    fn angular_breakpoints(
        &self,
        x: Point<T>,
        set: &SetDescriptor<T>,
        radii: Option<&[T]>,
    ) -> Result<Vec<T>> {
        let two_pi = T::lit(2.0) * T::PI();
        let quarter = T::PI() / T::lit(4.0);
        let mut pts = set.critical_angles(x);
        if let MeasureKind::Cusp { s } = self.kind {
            for k in 0..8 {
                pts.push(quarter * T::from_usize_lossy(k));
            }
            for &r in radii.unwrap_or(&[]) {
                let th = cusp_geometry(s, r)?.theta;
                if th < quarter {
                    for k in 0..4 {
                        let axis = quarter * T::lit(2.0) * T::from_usize_lossy(k);
                        pts.push(axis - th);
                        pts.push(axis + th);
                    }
                }
            }
        }
        let mut pts: Vec<T> = pts
            .into_iter()
            .map(|a| {
                let m = a % two_pi;
                if m < T::zero() {
                    m + two_pi
                } else {
                    m
                }
            })
            .filter(|a| *a > T::zero() && *a < two_pi)
            .collect();
        pts.push(T::zero());
        pts.push(two_pi);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        Ok(pts)
    }

    /// `∫_A f(y) μ(x, dy)` for a set at positive distance from `x`.
    ///
    /// `reach`, when given, is a radius around the origin outside of which
    /// `f` vanishes.
    pub fn integrate_against<F>(
        &self,
        x: &[T],
        set: &SetDescriptor<T>,
        f: F,
        reach: Option<T>,
    ) -> Result<Estimate<T>>
    where
        F: Fn(Point<T>) -> T,
    {
        let x = super::point(x);
        set.validate()?;
        if set.touches(x, self.dim) {
            return Err(Error::RejectedInput(format!(
                "integration set {set:?} touches x = {x:?}"
            )));
        }
        // oscillating far fields never meet a pure relative tolerance; bound
        // the absolute error by the set mass times the sampled size of f
        let mass = self.measure_of_set(&x[..self.dim], set)?.value / self.normalization;
        let scale = self.sample_magnitude(x, set, &f);
        let mut opts: QuadOptions<T> = mass_opts();
        opts.rel_tol = T::clamp_tol(T::lit(FUNCTION_TOL));
        opts.abs_tol = opts.abs_tol.max(opts.rel_tol * mass * scale);
        let raw = if self.is_ray_discrete() {
            let mut total = Estimate::exact(T::zero());
            for dir in ray_directions(self.dim) {
                for (a, b) in set.ray_spans(x, dir, self.dim).iter() {
                    let e = self.ray_function_integral(
                        x,
                        dir,
                        a,
                        b,
                        exit_radius(x, dir, reach),
                        &f,
                        &opts,
                    )?;
                    total.value = total.value + e.value;
                    total.error = total.error + e.error;
                }
            }
            total
        } else {
            let failure = RefCell::new(None);
            // inner noise must stay well below what the outer rule resolves
            let inner = opts
                .with_rel_tol(opts.rel_tol * T::lit(1e-3))
                .with_abs_tol(opts.abs_tol * T::lit(1e-3) / (T::lit(2.0) * T::PI()));
            let integrand = |phi: T| {
                let (sn, cs) = phi.sin_cos();
                let dir = [cs, sn];
                let cut = self.ray_cutoff(dir);
                let mut acc = T::zero();
                for (a, b) in set.ray_spans(x, dir, 2).iter() {
                    let r = self.ray_function_integral(
                        x,
                        dir,
                        a.max(cut),
                        b,
                        exit_radius(x, dir, reach),
                        &f,
                        &inner,
                    );
                    acc = acc + first_error(&failure, r.map(|e| e.value));
                }
                acc
            };
            let points = self.angular_breakpoints(x, set, None)?;
            let r = integrate(integrand, &points, &opts, "angular function integral")?;
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            Estimate {
                value: r.value,
                error: r.error,
            }
        };
        Ok(raw.scaled(self.normalization))
    }

    fn sample_magnitude<F>(&self, x: Point<T>, set: &SetDescriptor<T>, f: &F) -> T
    where
        F: Fn(Point<T>) -> T,
    {
        let dirs: Vec<Point<T>> = if self.is_ray_discrete() {
            ray_directions(self.dim)
        } else {
            (0..16)
                .map(|k| {
                    let (sn, cs) = (T::PI() * T::from_usize_lossy(k) / T::lit(8.0)).sin_cos();
                    [cs, sn]
                })
                .collect()
        };
        let mut m = T::zero();
        for dir in dirs {
            for (a, b) in set.ray_spans(x, dir, self.dim).iter() {
                for c in [1.0, 1.25, 1.5, 2.0, 3.0, 5.0, 9.0] {
                    let r = (a * T::lit(c)).min(b);
                    m = m.max(f([x[0] + r * dir[0], x[1] + r * dir[1]]).abs());
                }
            }
        }
        m
    }

    #[allow(clippy::too_many_arguments)]
    fn ray_function_integral<F>(
        &self,
        x: Point<T>,
        dir: Point<T>,
        a: T,
        b: T,
        limit: Option<T>,
        f: &F,
        opts: &QuadOptions<T>,
    ) -> Result<Estimate<T>>
    where
        F: Fn(Point<T>) -> T,
    {
        let b = limit.map_or(b, |l| b.min(l));
        if !(b > a) {
            return Ok(Estimate::exact(T::zero()));
        }
        let at = |r: T| f([x[0] + r * dir[0], x[1] + r * dir[1]]);
        let failure = RefCell::new(None);
        let r = if b.is_finite() {
            integrate(
                |r: T| at(r) * first_error(&failure, self.radial_density(r)),
                &[a, b],
                opts,
                "ray integral",
            )?
        } else {
            // r = a v^{-1/q} maps [a, ∞) onto (0, 1] and absorbs the power tail
            let q = self.decay_order();
            if !(q.is_finite() && q > T::zero()) {
                return Err(Error::RejectedInput(
                    "unbounded ray integral needs a power-law tail".into(),
                ));
            }
            integrate(
                |v: T| {
                    if v <= T::zero() {
                        return T::zero();
                    }
                    let r = a * v.powf(-T::one() / q);
                    let jac = a / q * v.powf(-T::one() / q - T::one());
                    at(r) * first_error(&failure, self.radial_density(r)) * jac
                },
                &[T::zero(), T::one()],
                opts,
                "ray tail integral",
            )?
        };
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(Estimate {
            value: r.value,
            error: r.error,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ann(r: f64, big_r: f64) -> SetDescriptor<f64> {
        SetDescriptor::annulus(&[0.0, 0.0], r, big_r)
    }

    #[test]
    fn axes_annulus_closed_form() {
        let m = MeasureSpec::axes(2, 1.0f64).unwrap();
        let v = m.measure_of_set(&[0.0, 0.0], &ann(0.5, 1.0)).unwrap();
        assert!((v.value - 4.0).abs() < 1e-13);
        assert_eq!(v.error, 0.0);
    }

    #[test]
    fn stable_line_annulus() {
        let m = MeasureSpec::alpha_stable(1, 1.0f64).unwrap();
        let v = m
            .measure_of_set(&[0.0], &SetDescriptor::annulus(&[0.0], 0.5, 1.0))
            .unwrap();
        assert!((v.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_annulus_is_empty() {
        for m in [
            MeasureSpec::axes(2, 1.0).unwrap(),
            MeasureSpec::alpha_stable(2, 1.3).unwrap(),
            MeasureSpec::cusp(1.5, 0.75).unwrap(),
        ] {
            assert_eq!(
                m.measure_of_set(&[0.0, 0.0], &ann(0.7, 0.7)).unwrap().value,
                0.0
            );
        }
    }

    #[test]
    fn second_moments() {
        let m = MeasureSpec::axes(2, 1.0f64).unwrap();
        assert!((m.second_moment_in_ball(&[0.0, 0.0], 1.0).unwrap().value - 4.0).abs() < 1e-13);
        let m = MeasureSpec::alpha_stable(1, 1.5f64).unwrap();
        assert!((m.second_moment_in_ball(&[0.3], 1.0).unwrap().value - 4.0).abs() < 1e-13);
    }

    #[test]
    fn planar_stable_cell_off_center_matches_polar_closed_form() {
        // full ring of cells versus an annulus is not exact, but an annulus
        // evaluated off-center through the angular path must match the centred closed form
        let m = MeasureSpec::alpha_stable(2, 0.8).unwrap();
        let exact = m.measure_of_set(&[0.0, 0.0], &ann(0.5, 2.0)).unwrap().value;
        let moved = SetDescriptor::annulus(&[0.3, -0.2], 0.5, 2.0);
        let v = m.measure_of_set(&[0.3, -0.2], &moved).unwrap().value;
        assert!((v - exact).abs() < 1e-12 * exact);
        let poly = 2.0 * std::f64::consts::PI / 0.8 * (0.5f64.powf(-0.8) - 2f64.powf(-0.8));
        assert!((exact - poly).abs() < 1e-12 * poly);
    }

    #[test]
    fn touching_sets_rejected() {
        let m = MeasureSpec::alpha_stable(2, 1.0).unwrap();
        assert!(m
            .measure_of_set(&[0.0, 0.0], &SetDescriptor::ball(&[0.0, 0.0], 1.0))
            .is_err());
        let cell = SetDescriptor::cell(&[-0.5, -0.5], &[0.5, 0.5]);
        assert!(m.measure_of_set(&[0.0, 0.0], &cell).is_err());
        assert!(m.axis_second_moment(&[0.0, 0.0], &cell, 0).is_ok());
    }

    #[test]
    fn cell_masses_sum_to_annulus_scale() {
        // the stable mass of a square shell equals a difference of box complements
        let m = MeasureSpec::alpha_stable(2, 1.2).unwrap();
        let x = [0.0, 0.0];
        let outer = SetDescriptor::BoxComplement {
            lo: [-1.5, -1.5],
            hi: [1.5, 1.5],
        };
        let inner = SetDescriptor::BoxComplement {
            lo: [-0.5, -0.5],
            hi: [0.5, 0.5],
        };
        let shell = m.measure_of_set(&x, &inner).unwrap().value
            - m.measure_of_set(&x, &outer).unwrap().value;
        let mut cells = 0.0;
        for i in -1i32..=1 {
            for j in -1i32..=1 {
                if i == 0 && j == 0 {
                    continue;
                }
                let c = SetDescriptor::cell(
                    &[i as f64 - 0.5, j as f64 - 0.5],
                    &[i as f64 + 0.5, j as f64 + 0.5],
                );
                cells += m.measure_of_set(&x, &c).unwrap().value;
            }
        }
        assert!((cells - shell).abs() < 1e-10 * shell, "{cells} vs {shell}");
    }

    #[test]
    fn function_integral_reproduces_constant_tail() {
        let m = MeasureSpec::alpha_stable(1, 0.7f64).unwrap();
        let set = SetDescriptor::complement(&[0.0], 2.0);
        let mass = m.measure_of_set(&[0.4], &set).unwrap().value;
        let v = m
            .integrate_against(&[0.4], &set, |_| 3.0, None)
            .unwrap()
            .value;
        assert!((v - 3.0 * mass).abs() < 1e-9 * mass);
        let m2 = MeasureSpec::alpha_stable(2, 1.1f64).unwrap();
        let set2 = SetDescriptor::BoxComplement {
            lo: [-1.0, -1.0],
            hi: [1.0, 1.0],
        };
        let mass2 = m2.measure_of_set(&[0.2, 0.1], &set2).unwrap().value;
        let v2 = m2
            .integrate_against(&[0.2, 0.1], &set2, |_| 1.0, None)
            .unwrap()
            .value;
        assert!((v2 - mass2).abs() < 1e-8 * mass2);
    }
}
