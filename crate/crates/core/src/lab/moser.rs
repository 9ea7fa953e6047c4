use serde::Serialize;

use super::holder::least_squares;
use super::poincare::poincare_weight;
use super::{require_nonnegative, require_window};
use crate::error::{Error, Result};
use crate::grid::{Cylinder, CylinderKind};
use crate::scalar::Scalar;
use crate::spacetime::SpaceTimeFunction;

/// Shift turning `u` into `ũ = u + ‖f‖_∞ + ε`.
fn shift<T: Scalar>(source_sup: T, epsilon: T) -> Result<T> {
    if !(epsilon > T::zero()) || !(source_sup >= T::zero()) {
        return Err(Error::RejectedInput(format!(
            "need ε > 0 and ‖f‖_∞ ≥ 0, got ε = {epsilon}, ‖f‖_∞ = {source_sup}"
        )));
    }
    Ok(source_sup + epsilon)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogLevelReport<T> {
    /// `a = −Σ Ψ log ũ(0, ·) / Σ Ψ` over the nodes of `B_{3/2}`.
    pub a: T,
    pub levels: Vec<T>,
    /// `s · |Q⊕(1) ∩ {log ũ < −s − a}|` per level.
    pub lower: Vec<T>,
    /// `s · |Q⊖(1) ∩ {log ũ > s − a}|` per level.
    pub upper: Vec<T>,
    pub sup_lower: T,
    pub sup_upper: T,
}

/// Level-set products of `log ũ` on the unit cylinders around `t = 0`, for
/// `s` on `levels` geometrically spaced points in `[1/16, 16]`.
pub fn log_level_sets<T: Scalar>(
    u: &SpaceTimeFunction<T>,
    source_sup: T,
    epsilon: T,
    alpha: T,
    levels: usize,
) -> Result<LogLevelReport<T>> {
    let c = shift(source_sup, epsilon)?;
    require_window(u, -T::one(), T::one())?;
    require_nonnegative(u)?;
    let k0 = u
        .level_index(T::zero())
        .ok_or_else(|| Error::RejectedInput("t = 0 is not a time level".into()))?;
    let grid = u.grid();
    let (mut num, mut den) = (T::zero(), T::zero());
    for i in 0..grid.len() {
        let psi = poincare_weight(grid.coord(i));
        if psi > T::zero() {
            let v = u.level(k0)[i] + c;
            if !(v > T::zero()) {
                return Err(Error::RejectedInput(format!("ũ = {v} is not positive")));
            }
            num = num + psi * v.ln();
            den = den + psi;
        }
    }
    let a = -num / den;
    let plus = Cylinder::new(CylinderKind::QPlus(T::one()), alpha);
    let minus = Cylinder::new(CylinderKind::QMinus(T::one()), alpha);
    let n = levels.max(2);
    let mut report = LogLevelReport {
        a,
        levels: Vec::with_capacity(n),
        lower: Vec::with_capacity(n),
        upper: Vec::with_capacity(n),
        sup_lower: T::zero(),
        sup_upper: T::zero(),
    };
    let (s0, s1) = (T::lit(1.0 / 16.0).ln(), T::lit(16.0).ln());
    for j in 0..n {
        let s = (s0 + (s1 - s0) * T::from_usize_lossy(j) / T::from_usize_lossy(n - 1)).exp();
        let below = u.integrate(&plus, |v| {
            if (v + c).ln() < -s - a {
                T::one()
            } else {
                T::zero()
            }
        });
        let above = u.integrate(&minus, |v| {
            if (v + c).ln() > s - a {
                T::one()
            } else {
                T::zero()
            }
        });
        report.levels.push(s);
        report.lower.push(s * below);
        report.upper.push(s * above);
    }
    report.sup_lower = report.lower.iter().copied().fold(T::zero(), T::max);
    report.sup_upper = report.upper.iter().copied().fold(T::zero(), T::max);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MoserMode {
    /// One step `(∫_{Q⊖(r)} ũ^{−κp})^{1/κ} ≤ A ∫_{Q⊖(R)} ũ^{−p}`.
    NegStep,
    /// `sup_{Q⊖(r)} ũ^{−1} ≤ (C/G₁)^{1/p} (∫_{Q⊖(R)} ũ^{−p})^{1/p}`.
    NegIter,
    /// `∫_{Q⊕(r)} ũ ≤ (C/(|Q⊕(1)| G₂))^{1/p−1} (∫_{Q⊕(R)} ũ^p)^{1/p}`.
    PosIter,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoserReport<T> {
    pub mode: MoserMode,
    pub p: T,
    pub kappa: T,
    pub r: T,
    pub big_r: T,
    pub lhs: T,
    pub rhs: T,
    /// Smallest constant for which the inequality holds on this sample.
    pub constant: T,
    /// `A/C = (p+1)² ((R−r)^{−α} + (R^α−r^α)^{−1})` in `NegStep` mode.
    pub a_factor: Option<T>,
    pub g1: Option<T>,
    /// `G₂ = (R−r)^ω` with `ω` fitted over a ladder of radii.
    pub g2: Option<T>,
    pub omega: Option<T>,
}

/// `G₁(r, R)`, with the case split at `α = 1`.
pub fn g1<T: Scalar>(dim: usize, alpha: T, r: T, big_r: T) -> T {
    let d = T::from_usize_lossy(dim);
    if alpha >= T::one() {
        (big_r - r).powf(d + alpha)
    } else {
        (big_r.powf(alpha) - r.powf(alpha)).powf((d + alpha) / alpha)
    }
}

/// Radii pairs used to fit the exponent of `G₂`.
const LADDER: [(f64, f64); 6] = [
    (0.5, 1.0),
    (0.5, 0.75),
    (0.75, 1.0),
    (0.5, 0.625),
    (0.625, 0.875),
    (0.875, 1.0),
];

/// Evaluates one of the Moser inequalities on `ũ = u + ‖f‖_∞ + ε` and
/// returns the constant it implies. Requires `½ ≤ r < R ≤ 1`, `p ∈ (0, 1]`
/// for the negative modes and `p ∈ (0, 1/κ)` for `PosIter`, with
/// `κ = 1 + α/d`.
#[allow(clippy::too_many_arguments)]
pub fn moser_check<T: Scalar>(
    u: &SpaceTimeFunction<T>,
    source_sup: T,
    epsilon: T,
    alpha: T,
    mode: MoserMode,
    p: T,
    r: T,
    big_r: T,
) -> Result<MoserReport<T>> {
    let c = shift(source_sup, epsilon)?;
    if !(r >= T::lit(0.5) && r < big_r && big_r <= T::one()) {
        return Err(Error::RejectedInput(format!(
            "radii must satisfy 1/2 ≤ r < R ≤ 1, got r = {r}, R = {big_r}"
        )));
    }
    let dim = u.grid().dim();
    let kappa = T::one() + alpha / T::from_usize_lossy(dim);
    let admissible = match mode {
        MoserMode::NegStep | MoserMode::NegIter => p > T::zero() && p <= T::one(),
        MoserMode::PosIter => p > T::zero() && p < T::one() / kappa,
    };
    if !admissible {
        return Err(Error::RejectedInput(format!(
            "exponent p = {p} is not admissible in {mode:?} mode"
        )));
    }
    require_window(u, -T::one(), T::one())?;
    require_nonnegative(u)?;
    if !(u.min_value() + c > T::zero()) {
        return Err(Error::RejectedInput("ũ is not positive".into()));
    }

    let minus = |rad: T| Cylinder::new(CylinderKind::QMinus(rad), alpha);
    let plus = |rad: T| Cylinder::new(CylinderKind::QPlus(rad), alpha);
    let mut report = MoserReport {
        mode,
        p,
        kappa,
        r,
        big_r,
        lhs: T::zero(),
        rhs: T::zero(),
        constant: T::zero(),
        a_factor: None,
        g1: None,
        g2: None,
        omega: None,
    };
    match mode {
        MoserMode::NegStep => {
            let e = -kappa * p;
            report.lhs = u
                .integrate(&minus(r), |v| (v + c).powf(e))
                .powf(T::one() / kappa);
            report.rhs = u.integrate(&minus(big_r), |v| (v + c).powf(-p));
            let a = (p + T::one()).powi(2)
                * ((big_r - r).powf(-alpha) + T::one() / (big_r.powf(alpha) - r.powf(alpha)));
            report.a_factor = Some(a);
            report.constant = report.lhs / (a * report.rhs);
        }
        MoserMode::NegIter => {
            report.lhs = T::one() / (u.min_over(&minus(r)) + c);
            report.rhs = u
                .integrate(&minus(big_r), |v| (v + c).powf(-p))
                .powf(T::one() / p);
            let g = g1(dim, alpha, r, big_r);
            report.g1 = Some(g);
            report.constant = g * (report.lhs / report.rhs).powf(p);
        }
        MoserMode::PosIter => {
            let unit = plus(T::one()).volume(dim);
            let implied = |r: T, big_r: T| {
                let lhs = u.integrate(&plus(r), |v| v + c);
                let rhs = u
                    .integrate(&plus(big_r), |v| (v + c).powf(p))
                    .powf(T::one() / p);
                let k = unit * (lhs / rhs).powf(T::one() / (T::one() / p - T::one()));
                (lhs, rhs, k)
            };
            // K(r, R) ≈ C (R − r)^{−ω}
            let mut xs = Vec::with_capacity(LADDER.len());
            let mut ys = Vec::with_capacity(LADDER.len());
            for &(a, b) in &LADDER {
                let (_, _, k) = implied(T::lit(a), T::lit(b));
                xs.push((T::lit(b) - T::lit(a)).ln());
                ys.push(k.ln());
            }
            let (slope, _, _) = least_squares(&xs, &ys);
            let omega = (-slope).max(T::zero());
            let (lhs, rhs, k) = implied(r, big_r);
            let g = (big_r - r).powf(omega);
            report.lhs = lhs;
            report.rhs = rhs;
            report.omega = Some(omega);
            report.g2 = Some(g);
            report.constant = k * g;
        }
    }
    Ok(report)
}
