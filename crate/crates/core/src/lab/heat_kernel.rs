use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid};
use crate::measure::{MeasureKind, MeasureSpec};
use crate::operator::DiscreteOperator;
use crate::scalar::{near_integer, Scalar};
use crate::solver::{solve, IvpConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatKernelConfig<T> {
    pub h: T,
    pub box_radius: T,
    pub dt: T,
    pub theta: T,
    pub tolerance: T,
}

impl<T: Scalar> Default for HeatKernelConfig<T> {
    fn default() -> Self {
        Self {
            h: T::lit(1.0 / 32.0),
            box_radius: T::lit(8.0),
            dt: T::lit(1.0 / 64.0),
            theta: T::lit(0.5),
            tolerance: T::clamp_tol(T::lit(1e-12)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OnDiagonal<T> {
    pub t: T,
    pub value: T,
    /// `u(t, 0) t^{d/α}`.
    pub scaled: T,
    /// `Σ u(t) h^d`.
    pub mass: T,
}

/// Extremes of `u(t, x) / (t |x|^{−d−α})` over nodes with
/// `4 t^{1/α} ≤ |x| ≤ L/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FarFieldRatio<T> {
    pub t: T,
    pub nodes: usize,
    pub min_ratio: T,
    pub max_ratio: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatKernelReport<T> {
    pub on_diagonal: Vec<OnDiagonal<T>>,
    pub far_field: Vec<FarFieldRatio<T>>,
    /// Set when some time has no node in the far-field window or lost more
    /// than 10% of its mass through the box boundary.
    pub truncation_flagged: bool,
}

/// Evolves the discrete delta `u_0 = h^{−d} 1_{x = 0}` with `f = 0` and zero
/// data outside the box, which is taken as the equation domain.
pub fn heat_kernel_profile<T: Scalar>(
    spec: &MeasureSpec<T>,
    times: &[T],
    cfg: &HeatKernelConfig<T>,
) -> Result<HeatKernelReport<T>> {
    if !matches!(spec.kind(), MeasureKind::AlphaStable) {
        return Err(Error::RejectedInput(
            "heat kernel profile needs the stable kind".into(),
        ));
    }
    if times.is_empty() || times.iter().any(|&t| !(t > T::zero())) {
        return Err(Error::RejectedInput("times must be positive".into()));
    }
    let grid = Grid::new(
        spec.dim(),
        cfg.box_radius,
        cfg.h,
        Domain::Cube(cfg.box_radius),
    )?;
    let op = DiscreteOperator::assemble(spec, &grid)?;
    let t_max = times.iter().copied().fold(T::zero(), T::max);
    let vol = grid.cell_volume();
    let mut u0 = vec![T::zero(); grid.len()];
    u0[grid.origin()] = T::one() / vol;
    let ivp = IvpConfig::new(T::zero(), t_max, cfg.dt)
        .with_theta(cfg.theta)
        .with_tolerance(cfg.tolerance)
        .with_initial_nodes(u0);
    let u = solve(&op, &ivp)?;

    let d = T::from_usize_lossy(spec.dim());
    let alpha = spec.alpha();
    let mut report = HeatKernelReport {
        on_diagonal: Vec::with_capacity(times.len()),
        far_field: Vec::with_capacity(times.len()),
        truncation_flagged: false,
    };
    for &t in times {
        let k = near_integer(t / cfg.dt, T::lit(1e-9))
            .ok_or_else(|| Error::RejectedInput(format!("time {t} is not a multiple of dt")))?
            as usize;
        let level = u.level(k);
        let mass = level.iter().copied().sum::<T>() * vol;
        let value = level[grid.origin()];
        report.on_diagonal.push(OnDiagonal {
            t,
            value,
            scaled: value * t.powf(d / alpha),
            mass,
        });
        let inner = T::lit(4.0) * t.powf(T::one() / alpha);
        let outer = cfg.box_radius * T::lit(0.5);
        let mut ff = FarFieldRatio {
            t,
            nodes: 0,
            min_ratio: T::infinity(),
            max_ratio: T::zero(),
        };
        for (i, &v) in level.iter().enumerate() {
            let x = grid.coord(i);
            let dist = x[0].hypot(x[1]);
            if dist >= inner && dist <= outer {
                let ratio = v / (t * dist.powf(-d - alpha));
                ff.nodes += 1;
                ff.min_ratio = ff.min_ratio.min(ratio);
                ff.max_ratio = ff.max_ratio.max(ratio);
            }
        }
        if ff.nodes == 0 || mass < T::lit(0.9) {
            report.truncation_flagged = true;
        }
        report.far_field.push(ff);
    }
    Ok(report)
}
