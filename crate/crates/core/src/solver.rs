//! θ-scheme time stepping for `∂ₜu − Lu = f` and the discrete weak
//! (super)solution test.

use std::sync::Arc;

use log::debug;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{pcg, CsrMatrix};
use crate::operator::DiscreteOperator;
use crate::scalar::{near_integer, Scalar};
use crate::spacetime::SpaceTimeFunction;

/// Initial data, either analytic or as values on every box node.
#[derive(Debug, Clone)]
pub enum InitialData<T: Scalar> {
    Field(Field<T>),
    Nodes(Vec<T>),
}

#[derive(Debug, Clone)]
pub struct IvpConfig<T: Scalar> {
    pub t0: T,
    pub t1: T,
    pub dt: T,
    /// Implicitness in `[½, 1]`; 1 is implicit Euler.
    pub theta: T,
    /// Relative residual for each conjugate-gradient solve.
    pub tolerance: T,
    pub max_iterations: usize,
    pub initial: InitialData<T>,
    pub exterior: Field<T>,
    pub source: Field<T>,
}

impl<T: Scalar> IvpConfig<T> {
    pub fn new(t0: T, t1: T, dt: T) -> Self {
        Self {
            t0,
            t1,
            dt,
            theta: T::one(),
            tolerance: T::clamp_tol(T::lit(1e-12)),
            max_iterations: 20_000,
            initial: InitialData::Field(Field::zero()),
            exterior: Field::zero(),
            source: Field::zero(),
        }
    }

    pub fn with_theta(mut self, theta: T) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_tolerance(mut self, tol: T) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_initial(mut self, u0: Field<T>) -> Self {
        self.initial = InitialData::Field(u0);
        self
    }

    pub fn with_initial_nodes(mut self, u0: Vec<T>) -> Self {
        self.initial = InitialData::Nodes(u0);
        self
    }

    pub fn with_exterior(mut self, g: Field<T>) -> Self {
        self.exterior = g;
        self
    }

    pub fn with_source(mut self, f: Field<T>) -> Self {
        self.source = f;
        self
    }

    /// Number of steps; `(t1 − t0)/dt` must be an integer.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::InvalidSpec("time step must be positive".into()));
        }
        if !(self.theta >= T::lit(0.5) && self.theta <= T::one()) {
            return Err(Error::InvalidSpec(format!(
                "theta = {} outside [1/2, 1]",
                self.theta
            )));
        }
        if !(self.tolerance > T::zero()) {
            return Err(Error::InvalidSpec(
                "solver tolerance must be positive".into(),
            ));
        }
        match near_integer((self.t1 - self.t0) / self.dt, T::lit(1e-9)) {
            Some(n) if n > 0 => Ok(n as usize),
            _ => Err(Error::InvalidSpec(format!(
                "interval [{}, {}] is not a positive multiple of dt = {}",
                self.t0, self.t1, self.dt
            ))),
        }
    }
}

/// Linear-solver statistics of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats<T> {
    pub steps: usize,
    pub max_iterations: usize,
    pub max_relative_residual: T,
}

pub fn solve<T: Scalar>(
    op: &DiscreteOperator<T>,
    cfg: &IvpConfig<T>,
) -> Result<SpaceTimeFunction<T>> {
    solve_with_stats(op, cfg).map(|(u, _)| u)
}

struct StepData<T: Scalar> {
    k: CsrMatrix<T>,
    e: Vec<T>,
}

pub fn solve_with_stats<T: Scalar>(
    op: &DiscreteOperator<T>,
    cfg: &IvpConfig<T>,
) -> Result<(SpaceTimeFunction<T>, SolveStats<T>)> {
    let n = cfg.steps()?;
    let grid = op.grid();
    let coords = grid.coords();
    let interior = grid.interior();
    let (dt, theta) = (cfg.dt, cfg.theta);
    let g = &cfg.exterior;
    let time = |k: usize| cfg.t0 + dt * T::from_usize_lossy(k);

    let mut level: Vec<T> = match &cfg.initial {
        InitialData::Field(u0) => coords.iter().map(|&x| u0.value(cfg.t0, x)).collect(),
        InitialData::Nodes(v) => {
            if v.len() != grid.len() {
                return Err(Error::RejectedInput(
                    "initial data does not match the grid".into(),
                ));
            }
            v.clone()
        }
    };
    // box nodes outside the domain carry the exterior data
    for (i, x) in coords.iter().enumerate() {
        if !grid.is_interior(i) {
            level[i] = g.value(cfg.t0, *x);
        }
    }
    if level.iter().any(|v| !v.is_finite()) {
        return Err(Error::RejectedInput(
            "initial data has non-finite values".into(),
        ));
    }

    let frozen = op.coefficient().is_steady() && g.is_steady();
    let data_at = |t: T| -> Result<StepData<T>> {
        Ok(StepData {
            k: op.system(t)?,
            e: op.forcing(t, g)?,
        })
    };
    let mut current = data_at(time(0))?;
    let one_over_dt = T::one() / dt;
    let mut a = current.k.shifted(one_over_dt, theta);

    let mut values = Vec::with_capacity(n + 1);
    values.push(level.clone());
    let mut stats = SolveStats {
        steps: n,
        max_iterations: 0,
        max_relative_residual: T::zero(),
    };
    let mut u: Vec<T> = interior.iter().map(|&i| level[i]).collect();
    for k in 0..n {
        let t_next = time(k + 1);
        let next = if frozen { None } else { Some(data_at(t_next)?) };
        let nd = next.as_ref().unwrap_or(&current);
        if next.is_some() && !op.coefficient().is_steady() {
            a = nd.k.shifted(one_over_dt, theta);
        }
        let ku = current.k.matvec(&u);
        let t_src = time(k) + theta * dt;
        let rhs: Vec<T> = interior
            .iter()
            .enumerate()
            .map(|(s, &i)| {
                u[s] * one_over_dt - (T::one() - theta) * (ku[s] - current.e[s])
                    + theta * nd.e[s]
                    + cfg.source.value(t_src, coords[i])
            })
            .collect();
        let out = pcg(&a, &rhs, &mut u, cfg.tolerance, cfg.max_iterations)?;
        stats.max_iterations = stats.max_iterations.max(out.iterations);
        stats.max_relative_residual = stats.max_relative_residual.max(out.relative_residual);
        let mut next_level: Vec<T> = coords.iter().map(|&x| g.value(t_next, x)).collect();
        for (s, &i) in interior.iter().enumerate() {
            next_level[i] = u[s];
        }
        values.push(next_level);
        if let Some(nd) = next {
            current = nd;
        }
    }
    debug!(
        "solved {} steps, max cg iterations {}, max residual {:e}",
        n,
        stats.max_iterations,
        stats.max_relative_residual.as_f64()
    );
    let grid = Arc::new(grid.clone());
    let u = SpaceTimeFunction::new(grid, cfg.t0, dt, values, g.clone())?;
    Ok((u, stats))
}

/// A nonnegative test function vanishing outside `B_support(0)`.
#[derive(Debug, Clone)]
pub struct TestFunction<T: Scalar> {
    pub field: Field<T>,
    pub support: T,
}

impl<T: Scalar> TestFunction<T> {
    pub fn new(field: Field<T>, support: T) -> Self {
        Self { field, support }
    }

    /// `ψ(t)·(1 − |x − c|/ρ)_+` for a time profile `ψ ≥ 0`.
    pub fn hat(center: [T; 2], rho: T, profile: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        let c = center;
        let field = Field::new(move |t, x| {
            let (dx, dy): (T, T) = (x[0] - c[0], x[1] - c[1]);
            let r = (dx * dx + dy * dy).sqrt();
            profile(t) * (T::one() - r / rho).max(T::zero())
        });
        let support = (c[0] * c[0] + c[1] * c[1]).sqrt() + rho;
        Self { field, support }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakFormResidual<T> {
    pub t1: T,
    pub t2: T,
    /// Left side minus right side of the weak inequality; `≥ 0` for supersolutions.
    pub lhs_minus_rhs: T,
    /// Allowance `(dt + h)·‖φ‖_{L¹}·scale` against which the sign is judged.
    pub scheme_tolerance: T,
    /// Part of the allowance due to the linear solves.
    pub solver_tolerance: T,
    pub phi_l1: T,
    pub passes: bool,
}

/// Discrete version of
/// `∫φ(t₂)u(t₂) − ∫φ(t₁)u(t₁) − ∬u ∂ₜφ + ∫E_t(u,φ) − ∬fφ`,
/// summed consistently with the θ-scheme so that discrete solutions give 0
/// up to the linear-solver tolerance.
#[allow(clippy::too_many_arguments)]
pub fn weak_residual<T: Scalar>(
    u: &SpaceTimeFunction<T>,
    op: &DiscreteOperator<T>,
    phi: &TestFunction<T>,
    t1: T,
    t2: T,
    f: &Field<T>,
    theta: T,
    solver_tol: T,
) -> Result<WeakFormResidual<T>> {
    let grid = op.grid();
    if u.grid().len() != grid.len() || u.grid().h() != grid.h() {
        return Err(Error::RejectedInput(
            "solution and operator grids differ".into(),
        ));
    }
    let radius = grid.domain().radius();
    if !(phi.support < radius) {
        return Err(Error::RejectedInput(format!(
            "test function support {} is not compactly inside the domain of radius {}",
            phi.support, radius
        )));
    }
    let (a, b) = match (u.level_index(t1), u.level_index(t2)) {
        (Some(a), Some(b)) if a < b => (a, b),
        _ => {
            return Err(Error::RejectedInput(
                "[t1, t2] must be an interval of the time grid".into(),
            ))
        }
    };
    let coords = grid.coords();
    let dt = u.dt();
    let tol = T::lit(1e-12);
    let sample = |k: usize| -> Result<Vec<T>> {
        let t = u.time(k);
        let mut v = Vec::with_capacity(coords.len());
        for x in &coords {
            let p = phi.field.value(t, *x);
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            if p < -tol {
                return Err(Error::RejectedInput(
                    "test function takes negative values".into(),
                ));
            }
            if r > phi.support && p.abs() > tol {
                return Err(Error::RejectedInput(
                    "test function does not vanish outside its support".into(),
                ));
            }
            v.push(p);
        }
        Ok(v)
    };
    let phis: Vec<Vec<T>> = (a..=b).map(sample).collect::<Result<_>>()?;
    let at = |k: usize| &phis[k - a];
    let zero = Field::zero();
    let g = u.exterior();

    let mut total = op.inner(at(b), u.level(b)) - op.inner(at(a), u.level(a));
    let mut l1 = T::zero();
    let mut fmax = T::zero();
    for k in a..b {
        let (pk, pn) = (at(k), at(k + 1));
        let diff: Vec<T> = pn.iter().zip(pk).map(|(x, y)| *x - *y).collect();
        total = total - op.inner(u.level(k + 1), &diff);
        let e_next = op.bilinear_form(u.level(k + 1), pk, u.time(k + 1), g, &zero)?;
        let e_now = op.bilinear_form(u.level(k), pk, u.time(k), g, &zero)?;
        total = total + dt * (theta * e_next + (T::one() - theta) * e_now);
        let ts = u.time(k) + theta * dt;
        let fk: Vec<T> = coords.iter().map(|&x| f.value(ts, x)).collect();
        fmax = fk.iter().fold(fmax, |m, v| m.max(v.abs()));
        total = total - dt * op.inner(&fk, pk);
        l1 = l1 + dt * op.inner(pk, &vec![T::one(); coords.len()]);
    }
    let scale = u.sup_norm().max(fmax).max(T::one());
    let scheme = (dt + grid.h()) * l1 * scale;
    let solver = T::from_usize_lossy(b - a) * solver_tol.max(T::epsilon()) * l1 * scale / dt;
    let allowance = scheme + solver;
    Ok(WeakFormResidual {
        t1,
        t2,
        lhs_minus_rhs: total,
        scheme_tolerance: allowance,
        solver_tolerance: solver,
        phi_l1: l1,
        passes: total >= -allowance,
    })
}
