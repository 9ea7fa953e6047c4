//! Grid functions over a uniform time grid.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{hat_weights, Cylinder, Grid};
use crate::scalar::{near_integer, Scalar};

/// `u(t_k, x_i)` for `t_k = t0 + k dt` on every box node, with the analytic
/// exterior data used beyond the box.
#[derive(Debug, Clone)]
pub struct SpaceTimeFunction<T: Scalar> {
    grid: Arc<Grid<T>>,
    t0: T,
    dt: T,
    values: Vec<Vec<T>>,
    exterior: Field<T>,
}

impl<T: Scalar> SpaceTimeFunction<T> {
    pub fn new(
        grid: Arc<Grid<T>>,
        t0: T,
        dt: T,
        values: Vec<Vec<T>>,
        exterior: Field<T>,
    ) -> Result<Self> {
        if values.is_empty() || !(dt > T::zero()) {
            return Err(Error::RejectedInput(
                "space-time function needs a time step and at least one level".into(),
            ));
        }
        for level in &values {
            if level.len() != grid.len() {
                return Err(Error::RejectedInput(
                    "time level does not match the grid".into(),
                ));
            }
            if level.iter().any(|v| !v.is_finite()) {
                return Err(Error::RejectedInput(
                    "space-time function has non-finite values".into(),
                ));
            }
        }
        Ok(Self {
            grid,
            t0,
            dt,
            values,
            exterior,
        })
    }

    /// Samples `u(t, x)` on every node of the time grid `t0 + k dt`, `k = 0..=steps`.
    pub fn sample(
        grid: Arc<Grid<T>>,
        t0: T,
        dt: T,
        steps: usize,
        u: &Field<T>,
        exterior: Field<T>,
    ) -> Result<Self> {
        let coords = grid.coords();
        let values = (0..=steps)
            .map(|k| {
                let t = t0 + dt * T::from_usize_lossy(k);
                coords.iter().map(|&x| u.value(t, x)).collect()
            })
            .collect();
        Self::new(grid, t0, dt, values, exterior)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn shared_grid(&self) -> Arc<Grid<T>> {
        self.grid.clone()
    }

    pub fn exterior(&self) -> &Field<T> {
        &self.exterior
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    /// Number of time steps (levels minus one).
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn time(&self, k: usize) -> T {
        self.t0 + self.dt * T::from_usize_lossy(k)
    }

    pub fn final_time(&self) -> T {
        self.time(self.steps())
    }

    pub fn level(&self, k: usize) -> &[T] {
        &self.values[k]
    }

    pub fn levels(&self) -> &[Vec<T>] {
        &self.values
    }

    /// Index of the level at time `t`, if `t` lies on the time grid.
    pub fn level_index(&self, t: T) -> Option<usize> {
        let k = near_integer((t - self.t0) / self.dt, T::lit(1e-9))?;
        (k >= 0 && k as usize <= self.steps()).then_some(k as usize)
    }

    /// Applies `f` pointwise, including to the exterior data.
    pub fn map(&self, f: impl Fn(T) -> T + Send + Sync + Clone + 'static) -> Self {
        let values = self
            .values
            .iter()
            .map(|l| l.iter().map(|&v| f(v)).collect())
            .collect();
        let g = self.exterior.clone();
        let exterior = match g {
            Field::Constant(c) => Field::Constant(f(c)),
            _ => {
                let reach = if f(T::zero()) == T::zero() {
                    g.reach()
                } else {
                    None
                };
                let h = f.clone();
                let mut e = Field::new(move |t, x| h(g.value(t, x)));
                if let Some(r) = reach {
                    e = e.with_reach(r);
                }
                e
            }
        };
        Self {
            grid: self.grid.clone(),
            t0: self.t0,
            dt: self.dt,
            values,
            exterior,
        }
    }

    /// Adds `f(t_k, x_i)` to every stored value (exterior data unchanged).
    pub fn add_field(&self, f: &Field<T>) -> Self {
        let coords = self.grid.coords();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let t = self.time(k);
                l.iter()
                    .zip(&coords)
                    .map(|(&v, &x)| v + f.value(t, x))
                    .collect()
            })
            .collect();
        Self {
            values,
            ..self.clone()
        }
    }

    /// `∫_cyl F(u) dt dx` with exact hat-function weights in time and exact
    /// cell/ball intersection volumes in space.
    pub fn integrate(&self, cyl: &Cylinder<T>, f: impl Fn(T) -> T) -> T {
        let (a, b) = cyl.time_interval();
        let tw = hat_weights(self.t0, self.dt, self.steps(), a, b);
        let sw = self.grid.ball_weights(cyl.center(), cyl.radius());
        let mut total = T::zero();
        for &(k, wt) in &tw {
            let level = &self.values[k];
            let s: T = sw.iter().map(|&(i, ws)| ws * f(level[i])).sum();
            total = total + wt * s;
        }
        total
    }

    /// Levels whose time lies in the closed interval `[a, b]`.
    pub fn levels_in(&self, a: T, b: T) -> Vec<usize> {
        let tol = self.dt * T::lit(1e-9);
        (0..=self.steps())
            .filter(|&k| {
                let t = self.time(k);
                t >= a - tol && t <= b + tol
            })
            .collect()
    }

    /// Minimum over the nodes of the closed cylinder.
    pub fn min_over(&self, cyl: &Cylinder<T>) -> T {
        self.fold_over(cyl, T::infinity(), |a, b| a.min(b))
    }

    pub fn max_over(&self, cyl: &Cylinder<T>) -> T {
        self.fold_over(cyl, T::neg_infinity(), |a, b| a.max(b))
    }

    fn fold_over(&self, cyl: &Cylinder<T>, init: T, op: impl Fn(T, T) -> T) -> T {
        let (a, b) = cyl.time_interval();
        let nodes = self.grid.nodes_in_ball(cyl.center(), cyl.radius());
        let mut acc = init;
        for k in self.levels_in(a, b) {
            for &i in &nodes {
                acc = op(acc, self.values[k][i]);
            }
        }
        acc
    }

    /// Largest absolute stored value.
    pub fn sup_norm(&self) -> T {
        self.values
            .iter()
            .flat_map(|l| l.iter())
            .fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> T {
        self.values
            .iter()
            .flat_map(|l| l.iter())
            .fold(T::infinity(), |m, &v| m.min(v))
    }
}
