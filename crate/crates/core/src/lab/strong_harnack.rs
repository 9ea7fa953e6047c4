use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{Domain, Grid};
use crate::measure::MeasureSpec;
use crate::operator::DiscreteOperator;
use crate::scalar::Scalar;
use crate::solver::{solve, IvpConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrongHarnackConfig<T> {
    pub h: T,
    pub box_radius: T,
    pub domain_radius: T,
    /// Centre `(offset, 0)` of the exterior mass.
    pub offset: T,
    /// Implicit Euler step used to reach equilibrium.
    pub dt: T,
    pub steps: usize,
    /// Largest accepted relative change over the last step.
    pub equilibrium_tolerance: T,
    pub solver_tolerance: T,
}

impl<T: Scalar> Default for StrongHarnackConfig<T> {
    fn default() -> Self {
        Self {
            h: T::lit(0.125),
            box_radius: T::lit(3.0),
            domain_radius: T::lit(2.0),
            offset: T::lit(2.5),
            dt: T::lit(2.0),
            steps: 16,
            equilibrium_tolerance: T::lit(1e-3),
            solver_tolerance: T::clamp_tol(T::lit(1e-10)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrongHarnackLevel<T> {
    /// Radius of the exterior bump; smaller is more concentrated.
    pub width: T,
    pub sup: T,
    pub inf: T,
    pub ratio: T,
    /// `max |u^N − u^{N−1}| / max |u^N|` on the domain.
    pub final_change: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrongHarnackReport<T> {
    pub kind: String,
    pub levels: Vec<StrongHarnackLevel<T>>,
    /// Ratio for the same mass spread uniformly over the annulus
    /// `offset ± max width`.
    pub symmetric_ratio: T,
    pub strictly_increasing: bool,
    /// Largest over smallest ratio across the levels.
    pub spread: T,
    /// Set when some run did not settle within the tolerance.
    pub equilibrium_flagged: bool,
}

/// `(1 − |x − c|²/w²)²₊` scaled to unit mass.
fn concentrated<T: Scalar>(offset: T, width: T) -> Field<T> {
    let mass = T::PI() * width * width / T::lit(3.0);
    Field::steady(move |x: [T; 2]| {
        let q = ((x[0] - offset).powi(2) + x[1].powi(2)) / (width * width);
        if q < T::one() {
            (T::one() - q).powi(2) / mass
        } else {
            T::zero()
        }
    })
    .with_reach(offset + width)
    .with_bound(T::one() / mass)
}

/// Unit mass spread evenly over `offset − w ≤ |x| ≤ offset + w`.
fn symmetric<T: Scalar>(offset: T, width: T) -> Field<T> {
    let (a, b) = (offset - width, offset + width);
    let density = T::one() / (T::PI() * (b * b - a * a));
    Field::steady(move |x: [T; 2]| {
        let r = x[0].hypot(x[1]);
        if r >= a && r <= b {
            density
        } else {
            T::zero()
        }
    })
    .with_reach(b)
    .with_bound(density)
}

/// Near-equilibrium solutions in `B_R` with `f = 0` and exterior data of unit
/// mass concentrated around `(offset, 0)`, one per width; reports
/// `sup/inf` over the nodes of `B_{1/2}`.
pub fn strong_harnack_probe<T: Scalar>(
    spec: &MeasureSpec<T>,
    widths: &[T],
    cfg: &StrongHarnackConfig<T>,
) -> Result<StrongHarnackReport<T>> {
    if spec.dim() != 2 {
        return Err(Error::RejectedInput(
            "the strong Harnack probe is planar".into(),
        ));
    }
    if widths.is_empty() {
        return Err(Error::RejectedInput("no concentration levels given".into()));
    }
    let widest = widths.iter().copied().fold(T::zero(), T::max);
    if widths.iter().any(|&w| !(w > T::zero()))
        || cfg.offset - widest < cfg.domain_radius
        || cfg.offset + widest > cfg.box_radius
    {
        return Err(Error::RejectedInput(
            "exterior bumps must lie between the domain and the box edge".into(),
        ));
    }
    let grid = Grid::new(2, cfg.box_radius, cfg.h, Domain::Ball(cfg.domain_radius))?;
    let op = DiscreteOperator::assemble(spec, &grid)?;
    let centre = grid.nodes_in_ball([T::zero(); 2], T::lit(0.5));

    let run = |g: Field<T>| -> Result<(T, T, T)> {
        let t1 = cfg.dt * T::from_usize_lossy(cfg.steps.max(2));
        let ivp = IvpConfig::new(T::zero(), t1, cfg.dt)
            .with_tolerance(cfg.solver_tolerance)
            .with_exterior(g);
        let u = solve(&op, &ivp)?;
        let (last, prev) = (u.level(u.steps()), u.level(u.steps() - 1));
        let mut change = T::zero();
        let mut size = T::zero();
        for &i in grid.interior() {
            change = change.max((last[i] - prev[i]).abs());
            size = size.max(last[i].abs());
        }
        let sup = centre
            .iter()
            .map(|&i| last[i])
            .fold(T::neg_infinity(), T::max);
        let inf = centre.iter().map(|&i| last[i]).fold(T::infinity(), T::min);
        Ok((
            sup,
            inf,
            if size > T::zero() {
                change / size
            } else {
                T::zero()
            },
        ))
    };

    let runs: Vec<Result<(T, T, T)>> = widths
        .par_iter()
        .map(|&w| run(concentrated(cfg.offset, w)))
        .collect();
    let mut levels = Vec::with_capacity(widths.len());
    for (&width, r) in widths.iter().zip(runs) {
        let (sup, inf, final_change) = r?;
        if !(inf > T::zero()) {
            return Err(Error::Degenerate(format!(
                "infimum {inf} on B_1/2 is not positive"
            )));
        }
        levels.push(StrongHarnackLevel {
            width,
            sup,
            inf,
            ratio: sup / inf,
            final_change,
        });
    }
    let (s_sup, s_inf, s_change) = run(symmetric(cfg.offset, widest))?;
    let strictly_increasing = levels.windows(2).all(|w| w[1].ratio > w[0].ratio);
    let hi = levels.iter().map(|l| l.ratio).fold(T::zero(), T::max);
    let lo = levels.iter().map(|l| l.ratio).fold(T::infinity(), T::min);
    let equilibrium_flagged = s_change > cfg.equilibrium_tolerance
        || levels
            .iter()
            .any(|l| l.final_change > cfg.equilibrium_tolerance);
    Ok(StrongHarnackReport {
        kind: spec.kind().name().to_string(),
        levels,
        symmetric_ratio: s_sup / s_inf,
        strictly_increasing,
        spread: hi / lo,
        equilibrium_flagged,
    })
}
