//! Random analytic data: mixtures of bumps, plateaus and masses concentrated
//! along a coordinate axis. All components are compactly supported, so the
//! same sample can be evaluated exactly on any grid.

use rand::Rng;

use crate::field::Field;
use crate::measure::Point;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Component<T> {
    /// `height·(1 − |x−c|²/w²)³₊`.
    Bump {
        center: Point<T>,
        width: T,
        height: T,
    },
    /// `height` on `B_radius(c)`, falling linearly to 0 over `ramp`.
    Plateau {
        center: Point<T>,
        radius: T,
        ramp: T,
        height: T,
    },
    /// Product of hats: `width` along `axis`, `transverse` across it, centred
    /// at `position·e_axis`.
    AxisMass {
        axis: usize,
        position: T,
        width: T,
        transverse: T,
        height: T,
    },
}

fn hat<T: Scalar>(r: T) -> T {
    (T::one() - r.abs()).max(T::zero())
}

impl<T: Scalar> Component<T> {
    pub fn value(&self, x: Point<T>, dim: usize) -> T {
        let dist = |c: Point<T>| {
            let d0 = x[0] - c[0];
            let d1 = if dim == 2 { x[1] - c[1] } else { T::zero() };
            (d0 * d0 + d1 * d1).sqrt()
        };
        match *self {
            Component::Bump {
                center,
                width,
                height,
            } => {
                let q = dist(center) / width;
                let b = (T::one() - q * q).max(T::zero());
                height * b * b * b
            }
            Component::Plateau {
                center,
                radius,
                ramp,
                height,
            } => height * ((radius + ramp - dist(center)) / ramp).clamp(T::zero(), T::one()),
            Component::AxisMass {
                axis,
                position,
                width,
                transverse,
                height,
            } => {
                let along = hat((x[axis] - position) / width);
                let across = if dim == 2 {
                    hat(x[1 - axis] / transverse)
                } else {
                    T::one()
                };
                height * along * across
            }
        }
    }

    /// Radius of a ball around 0 outside which the component vanishes.
    pub fn reach(&self) -> T {
        let norm = |c: Point<T>| (c[0] * c[0] + c[1] * c[1]).sqrt();
        match *self {
            Component::Bump { center, width, .. } => norm(center) + width,
            Component::Plateau {
                center,
                radius,
                ramp,
                ..
            } => norm(center) + radius + ramp,
            Component::AxisMass {
                position,
                width,
                transverse,
                ..
            } => (position.abs() + width).hypot(transverse),
        }
    }

    /// Integral over `R^d`.
    pub fn mass(&self, dim: usize) -> T {
        let pi = T::PI();
        match *self {
            // ∫(1−q²)³ over the unit ball: 32/35 in 1-D, π/4 in 2-D
            Component::Bump { width, height, .. } => {
                if dim == 1 {
                    height * width * T::lit(32.0 / 35.0)
                } else {
                    height * width * width * pi / T::lit(4.0)
                }
            }
            Component::Plateau {
                radius,
                ramp,
                height,
                ..
            } => {
                if dim == 1 {
                    height * (T::lit(2.0) * radius + ramp)
                } else {
                    // ∫₀^{R+ρ} 2πr·profile(r) dr
                    let (a, b) = (radius, radius + ramp);
                    let ramp_part = (b * b * b - T::lit(3.0) * b * a * a + T::lit(2.0) * a * a * a)
                        / (T::lit(3.0) * ramp);
                    height * pi * (a * a + ramp_part)
                }
            }
            Component::AxisMass {
                width,
                transverse,
                height,
                ..
            } => {
                if dim == 1 {
                    height * width
                } else {
                    height * width * transverse
                }
            }
        }
    }
}

/// Nonnegative sum of components.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture<T> {
    pub dim: usize,
    pub components: Vec<Component<T>>,
}

impl<T: Scalar> Mixture<T> {
    pub fn new(dim: usize, components: Vec<Component<T>>) -> Self {
        Self { dim, components }
    }

    pub fn value(&self, x: Point<T>) -> T {
        self.components.iter().map(|c| c.value(x, self.dim)).sum()
    }

    pub fn reach(&self) -> T {
        self.components
            .iter()
            .map(|c| c.reach())
            .fold(T::zero(), T::max)
    }

    pub fn sup_bound(&self) -> T {
        self.components
            .iter()
            .map(|c| match *c {
                Component::Bump { height, .. }
                | Component::Plateau { height, .. }
                | Component::AxisMass { height, .. } => height.abs(),
            })
            .sum()
    }

    /// Time-independent field with the known reach and bound.
    pub fn to_field(&self) -> Field<T> {
        if self.components.is_empty() {
            return Field::zero();
        }
        let me = self.clone();
        Field::steady(move |x| me.value(x))
            .with_reach(self.reach())
            .with_bound(self.sup_bound())
    }
}

fn uniform<T: Scalar, R: Rng>(rng: &mut R, lo: f64, hi: f64) -> T {
    T::lit(rng.random_range(lo..hi))
}

fn random_point<T: Scalar, R: Rng>(rng: &mut R, dim: usize, radius: f64) -> Point<T> {
    let r = radius * rng.random_range(0.0..1.0f64).powf(1.0 / dim as f64);
    if dim == 1 {
        let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        [T::lit(s * r), T::zero()]
    } else {
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        [T::lit(r * phi.cos()), T::lit(r * phi.sin())]
    }
}

/// Nonnegative data supported in `B_radius(0)`: one to three bumps or plateaus.
pub fn random_interior<T: Scalar, R: Rng>(rng: &mut R, dim: usize, radius: f64) -> Mixture<T> {
    let n = rng.random_range(1..=3usize);
    let components = (0..n)
        .map(|_| {
            let size = rng.random_range(0.1..0.4) * radius;
            let center = random_point(rng, dim, radius - size);
            let height = uniform(rng, 0.2, 2.0);
            if rng.random_bool(0.5) {
                Component::Bump {
                    center,
                    width: T::lit(size),
                    height,
                }
            } else {
                let ramp = size * rng.random_range(0.2..0.6);
                Component::Plateau {
                    center,
                    radius: T::lit(size - ramp),
                    ramp: T::lit(ramp),
                    height,
                }
            }
        })
        .collect();
    Mixture::new(dim, components)
}

/// Nonnegative data supported in the shell `inner < |x| < outer`: bumps and
/// masses concentrated along a coordinate axis. May be empty.
pub fn random_exterior<T: Scalar, R: Rng>(
    rng: &mut R,
    dim: usize,
    inner: f64,
    outer: f64,
) -> Mixture<T> {
    let n = rng.random_range(0..=2usize);
    let gap = outer - inner;
    let components = (0..n)
        .map(|_| {
            let width = gap * rng.random_range(0.05..0.25);
            let dist = inner + width + rng.random_range(0.0..1.0) * (gap - 2.0 * width);
            let height = uniform(rng, 0.2, 3.0);
            if dim == 2 && rng.random_bool(0.5) {
                let axis = rng.random_range(0..2usize);
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                Component::AxisMass {
                    axis,
                    position: T::lit(sign * dist),
                    width: T::lit(width),
                    transverse: T::lit(width * rng.random_range(0.05..0.3)),
                    height,
                }
            } else {
                let dir = random_point::<f64, R>(rng, dim, 1.0);
                let norm = dir[0].hypot(dir[1]).max(1e-12);
                let center = [T::lit(dir[0] / norm * dist), T::lit(dir[1] / norm * dist)];
                Component::Bump {
                    center,
                    width: T::lit(width),
                    height,
                }
            }
        })
        .collect();
    Mixture::new(dim, components)
}

/// Values ±1, constant on the cells `[k c, (k+1) c)^d` of side `c` that meet
/// `B_radius`, and 0 outside `B_radius`. Grids whose spacing divides `c` see
/// the same function.
pub fn rough_signs<T: Scalar, R: Rng>(rng: &mut R, dim: usize, cell: f64, radius: f64) -> Field<T> {
    let m = (radius / cell).ceil() as i64;
    let side = (2 * m) as usize;
    let cells = if dim == 1 { side } else { side * side };
    let signs: Vec<T> = (0..cells)
        .map(|_| {
            if rng.random_bool(0.5) {
                T::one()
            } else {
                -T::one()
            }
        })
        .collect();
    let (c, r) = (T::lit(cell), T::lit(radius));
    let slot = move |x: T| -> usize {
        let k = (x / c).floor().to_i64().unwrap_or(0).clamp(-m, m - 1);
        (k + m) as usize
    };
    Field::steady(move |x: Point<T>| {
        if x[0].hypot(x[1]) >= r {
            return T::zero();
        }
        let i = slot(x[0]);
        let j = if dim == 1 { 0 } else { slot(x[1]) };
        signs[i + side * j]
    })
    .with_reach(r)
    .with_bound(T::one())
}

/// `Σ_{m=1}^{modes} a_m sin(m ⟨n_m, x⟩ + φ_m)` with `a_m` uniform in
/// `[−1, 1]`, random phases and, in the plane, random unit directions `n_m`.
pub fn random_sine_sum<T: Scalar, R: Rng>(rng: &mut R, dim: usize, modes: usize) -> Field<T> {
    let terms: Vec<(T, [T; 2], T)> = (1..=modes)
        .map(|m| {
            let a = rng.random_range(-1.0..1.0);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            let n = if dim == 2 {
                let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                [phi.cos(), phi.sin()]
            } else {
                [1.0, 0.0]
            };
            let k = m as f64;
            (
                T::lit(a),
                [T::lit(k * n[0]), T::lit(k * n[1])],
                T::lit(phase),
            )
        })
        .collect();
    let bound = terms.iter().map(|t| t.0.abs()).sum::<T>();
    Field::steady(move |x: Point<T>| {
        terms
            .iter()
            .map(|&(a, k, ph)| a * (k[0] * x[0] + k[1] * x[1] + ph).sin())
            .sum()
    })
    .with_bound(bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::sample_rng;

    #[test]
    fn mixtures_respect_their_support() {
        for idx in 0..20 {
            let mut rng = sample_rng(11, idx);
            for dim in [1, 2] {
                let m: Mixture<f64> = random_interior(&mut rng, dim, 1.5);
                assert!(m.reach() <= 1.5 + 1e-12);
                let e: Mixture<f64> = random_exterior(&mut rng, dim, 2.0, 6.0);
                for c in &e.components {
                    assert!(c.reach() <= 6.0 + 1e-9);
                }
                assert!(m.value([0.3, 0.1]) >= 0.0);
            }
        }
    }

    #[test]
    fn rough_signs_are_cellwise_constant() {
        let mut rng = sample_rng(2, 0);
        let f: Field<f64> = rough_signs(&mut rng, 2, 0.25, 1.0);
        assert_eq!(f.value(0.0, [0.26, 0.1]), f.value(0.0, [0.49, 0.2]));
        assert_eq!(f.value(0.0, [0.1, 1.2]), 0.0);
        assert_eq!(f.value(0.0, [-0.6, 0.3]).abs(), 1.0);
    }

    #[test]
    fn sine_sums_are_bounded_and_reproducible() {
        let f: Field<f64> = random_sine_sum(&mut sample_rng(4, 1), 2, 4);
        let g: Field<f64> = random_sine_sum(&mut sample_rng(4, 1), 2, 4);
        for x in [[0.0, 0.0], [0.3, -0.7], [1.4, 2.0]] {
            assert_eq!(f.value(0.0, x), g.value(0.0, x));
            assert!(f.value(0.0, x).abs() <= 4.0);
        }
    }

    #[test]
    fn masses_match_riemann_sums() {
        let comps = [
            Component::Bump {
                center: [0.2, -0.1],
                width: 0.5,
                height: 1.3,
            },
            Component::Plateau {
                center: [0.0, 0.3],
                radius: 0.4,
                ramp: 0.2,
                height: 0.7,
            },
            Component::AxisMass {
                axis: 1,
                position: 0.5,
                width: 0.3,
                transverse: 0.1,
                height: 2.0,
            },
        ];
        let n = 800;
        let h = 2.0 / n as f64;
        for c in comps {
            for dim in [1usize, 2] {
                let mut sum = 0.0;
                if dim == 1 {
                    for i in 0..=n {
                        sum += c.value([-1.0 + i as f64 * h, 0.0], 1) * h;
                    }
                } else {
                    for i in 0..=n {
                        for j in 0..=n {
                            sum += c.value([-1.0 + i as f64 * h, -1.0 + j as f64 * h], 2) * h * h;
                        }
                    }
                }
                let exact = c.mass(dim);
                if let Component::AxisMass { .. } = c {
                    if dim == 1 {
                        continue;
                    }
                }
                assert!(
                    (sum - exact).abs() < 2e-3 * exact,
                    "{c:?} d={dim}: {sum} vs {exact}"
                );
            }
        }
    }
}
