use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{Domain, Grid};
use crate::measure::{MeasureKind, MeasureSpec, Point};
use crate::operator::DiscreteOperator;
use crate::scalar::{near_integer, Scalar};
use crate::solver::{solve, IvpConfig};

/// The map `J(x) = r x + ξ` together with the time shift `t ↦ r^α t + τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingParams<T> {
    pub r: T,
    pub xi: Point<T>,
    pub tau: T,
    pub alpha: T,
}

impl<T: Scalar> ScalingParams<T> {
    pub fn identity(alpha: T) -> Self {
        Self {
            r: T::one(),
            xi: [T::zero(); 2],
            tau: T::zero(),
            alpha,
        }
    }
}

/// Data of the problem on `Q_r(ξ, τ)`, in the original coordinates.
#[derive(Debug, Clone, Default)]
pub struct ScalingProblem<T: Scalar> {
    pub initial: Field<T>,
    pub exterior: Field<T>,
    pub source: Field<T>,
}

/// Discretisation shared by both runs; `box_radius` refers to the unit problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingSetup<T> {
    pub h: T,
    pub dt: T,
    pub box_radius: T,
    pub theta: T,
    pub tolerance: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingReport<T> {
    /// `max |ũ − ũ_direct|` over matching interior nodes and time levels.
    pub discrepancy: T,
    /// `(h_eff + dt_eff) · max(‖ũ_direct‖_∞, 1)` with the coarser of the two
    /// resolutions in unit coordinates.
    pub scheme_allowance: T,
    pub within_allowance: bool,
    pub compared_nodes: usize,
    pub compared_levels: usize,
    /// Largest relative difference between `r^α` times the cell and tail masses
    /// at spacing `r h` and the masses at spacing `h`.
    pub weight_mismatch: T,
}

/// `x ↦ factor · F(a t + b, s x + p)`.
fn pull_back<T: Scalar>(field: &Field<T>, a: T, b: T, s: T, p: Point<T>, factor: T) -> Field<T> {
    match field {
        Field::Constant(c) => Field::Constant(*c * factor),
        Field::Function {
            reach,
            steady,
            bound,
            ..
        } => {
            let inner = field.clone();
            let f: Arc<dyn Fn(T, Point<T>) -> T + Send + Sync> = Arc::new(move |t, x| {
                factor * inner.value(a * t + b, [s * x[0] + p[0], s * x[1] + p[1]])
            });
            Field::Function {
                f,
                reach: reach.map(|r| (r + p[0].hypot(p[1])) / s),
                steady: *steady,
                bound: bound.map(|v| v * factor.abs()),
            }
        }
    }
}

fn commensurate<T: Scalar>(r: T) -> bool {
    let tol = T::lit(1e-9);
    near_integer(r, tol).is_some_and(|n| n > 0)
        || near_integer(T::one() / r, tol).is_some_and(|n| n > 0)
}

/// Solves the problem on `Q_r(ξ, τ)` and, separately, the unit-cylinder problem
/// with data pulled back through `J`, then compares `u(r^α t + τ, J x)` with
/// the direct solution on the nodes and levels both runs share.
///
/// For the built-in stable and axes kinds the rescaled measure is the measure
/// itself, so the unit problem is assembled directly. The original problem
/// is solved on a grid centred at `ξ`, which is exact for translation
/// invariant kernels.
pub fn scaling_check<T: Scalar>(
    spec: &MeasureSpec<T>,
    params: &ScalingParams<T>,
    problem: &ScalingProblem<T>,
    setup: &ScalingSetup<T>,
) -> Result<ScalingReport<T>> {
    if !matches!(spec.kind(), MeasureKind::AlphaStable | MeasureKind::Axes) {
        return Err(Error::RejectedInput(format!(
            "scaling check needs a dilation invariant kind, got {}",
            spec.kind().name()
        )));
    }
    if (params.alpha - spec.alpha()).abs() > T::lit(1e-12) {
        return Err(Error::RejectedInput(format!(
            "scaling exponent {} differs from the measure order {}",
            params.alpha,
            spec.alpha()
        )));
    }
    let r = params.r;
    if !(r > T::zero()) || !commensurate(r) {
        return Err(Error::RejectedInput(format!(
            "scaling ratio {r} is not grid commensurate"
        )));
    }
    let dim = spec.dim();
    if dim == 1 && params.xi[1] != T::zero() {
        return Err(Error::RejectedInput("ξ must lie on the line".into()));
    }
    let ra = r.powf(spec.alpha());
    let (h, dt) = (setup.h, setup.dt);

    let grid_o = Grid::new(dim, r * setup.box_radius, h, Domain::Ball(r))?;
    let op_o = DiscreteOperator::assemble(spec, &grid_o)?;
    let to_xi = |f: &Field<T>| pull_back(f, T::one(), T::zero(), T::one(), params.xi, T::one());
    let cfg_o = IvpConfig::new(params.tau - ra, params.tau + ra, dt)
        .with_theta(setup.theta)
        .with_tolerance(setup.tolerance)
        .with_initial(to_xi(&problem.initial))
        .with_exterior(to_xi(&problem.exterior))
        .with_source(to_xi(&problem.source));
    let u_o = solve(&op_o, &cfg_o)?;

    let grid_u = Grid::new(dim, setup.box_radius, h, Domain::Ball(T::one()))?;
    let op_u = DiscreteOperator::assemble(spec, &grid_u)?;
    let to_unit = |f: &Field<T>, factor: T| pull_back(f, ra, params.tau, r, params.xi, factor);
    let cfg_u = IvpConfig::new(-T::one(), T::one(), dt)
        .with_theta(setup.theta)
        .with_tolerance(setup.tolerance)
        .with_initial(to_unit(&problem.initial, T::one()))
        .with_exterior(to_unit(&problem.exterior, T::one()))
        .with_source(to_unit(&problem.source, ra));
    let u_u = solve(&op_u, &cfg_u)?;

    let tol = T::lit(1e-9);
    let pairs: Vec<(usize, usize)> = grid_u
        .interior()
        .iter()
        .filter_map(|&i| {
            let k = grid_u.multi(i);
            let a = near_integer(r * T::lit(k[0] as f64), tol)?;
            let b = near_integer(r * T::lit(k[1] as f64), tol)?;
            let j = grid_o.index_of([a, b])?;
            grid_o.is_interior(j).then_some((i, j))
        })
        .collect();
    let levels: Vec<(usize, usize)> = (0..=u_u.steps())
        .filter_map(|k| {
            let j = near_integer(ra * T::from_usize_lossy(k), tol)?;
            (j >= 0 && (j as usize) <= u_o.steps()).then_some((k, j as usize))
        })
        .collect();
    if pairs.is_empty() || levels.is_empty() {
        return Err(Error::RejectedInput(
            "the two runs share no nodes or time levels".into(),
        ));
    }
    let mut discrepancy = T::zero();
    for &(k, j) in &levels {
        let (a, b) = (u_u.level(k), u_o.level(j));
        for &(i, io) in &pairs {
            discrepancy = discrepancy.max((a[i] - b[io]).abs());
        }
    }
    let scheme_allowance = (h.max(h / r) + dt.max(dt / ra)) * u_u.sup_norm().max(T::one());
    Ok(ScalingReport {
        discrepancy,
        scheme_allowance,
        within_allowance: discrepancy <= scheme_allowance,
        compared_nodes: pairs.len(),
        compared_levels: levels.len(),
        weight_mismatch: dilation_weight_mismatch(spec, h, r)?,
    })
}

/// Compares `r^α μ(J(cell))` with `μ(cell)` on small grids of spacing `r h`
/// and `h`, including the far-field tails.
pub fn dilation_weight_mismatch<T: Scalar>(spec: &MeasureSpec<T>, h: T, r: T) -> Result<T> {
    const M: usize = 6;
    let dim = spec.dim();
    let m = T::from_usize_lossy(M);
    let unit = Grid::new(dim, m * h, h, Domain::Cube(m * h))?;
    let fine = Grid::new(dim, m * h * r, h * r, Domain::Cube(m * h * r))?;
    let op_u = DiscreteOperator::assemble(spec, &unit)?;
    let op_f = DiscreteOperator::assemble(spec, &fine)?;
    let ra = r.powf(spec.alpha());
    let rel = |a: T, b: T| {
        let scale = a.abs().max(b.abs());
        if scale > T::zero() {
            (a - b).abs() / scale
        } else {
            T::zero()
        }
    };
    let reach = 2 * M as i64;
    let mut worst = T::zero();
    for k0 in -reach..=reach {
        for k1 in if dim == 1 { 0..=0 } else { -reach..=reach } {
            let k = [k0, k1];
            worst = worst.max(rel(ra * op_f.cell_mass(k), op_u.cell_mass(k)));
        }
    }
    for s in 0..unit.interior().len() {
        worst = worst.max(rel(ra * op_f.tail_mass(s), op_u.tail_mass(s)));
    }
    Ok(worst)
}
