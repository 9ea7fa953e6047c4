use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::Point;
use crate::operator::DiscreteOperator;
use crate::scalar::Scalar;

/// `Ψ(x) = (3/2 − |x|) ∧ 1`, clipped at 0.
pub fn poincare_weight<T: Scalar>(x: Point<T>) -> T {
    (T::lit(1.5) - x[0].hypot(x[1]))
        .min(T::one())
        .max(T::zero())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoincareReport<T> {
    /// `Σ (v − v_Ψ)² Ψ h^d`.
    pub lhs: T,
    /// `Σ_{i<j} (v_i − v_j)² (Ψ_i ∧ Ψ_j) w_{ij} h^d` over nodes of `B_{3/2}`.
    pub rhs: T,
    /// `lhs/rhs`, or 0 when `v` is constant on `B_{3/2}`.
    pub ratio: T,
    pub degenerate: bool,
}

/// Weighted variance of `v` (values on every box node) against its weighted
/// energy, with the corrected stencil weights of `op` as pair weights.
pub fn weighted_poincare_ratio<T: Scalar>(
    op: &DiscreteOperator<T>,
    v: &[T],
) -> Result<PoincareReport<T>> {
    let grid = op.grid();
    if v.len() != grid.len() {
        return Err(Error::RejectedInput(format!(
            "expected {} values, got {}",
            grid.len(),
            v.len()
        )));
    }
    if grid.box_radius() < T::lit(1.5) {
        return Err(Error::RejectedInput("the grid must cover B_{3/2}".into()));
    }
    let vol = grid.cell_volume();
    let nodes: Vec<(usize, T)> = (0..grid.len())
        .filter_map(|i| {
            let psi = poincare_weight(grid.coord(i));
            (psi > T::zero()).then_some((i, psi))
        })
        .collect();
    let wsum: T = nodes.iter().map(|p| p.1).sum();
    // deviations from a node value first, so constants give exactly zero
    let v0 = v[nodes[0].0];
    let shift = nodes.iter().map(|&(i, psi)| psi * (v[i] - v0)).sum::<T>() / wsum;
    let lhs = nodes
        .iter()
        .map(|&(i, psi)| {
            let d = (v[i] - v0) - shift;
            d * d * psi
        })
        .sum::<T>()
        * vol;
    let rhs = nodes
        .par_iter()
        .enumerate()
        .map(|(a, &(i, pi))| {
            let ki = grid.multi(i);
            nodes[a + 1..]
                .iter()
                .map(|&(j, pj)| {
                    let kj = grid.multi(j);
                    let w = op.weight([kj[0] - ki[0], kj[1] - ki[1]]);
                    let d = v[i] - v[j];
                    d * d * pi.min(pj) * w
                })
                .sum::<T>()
        })
        .collect::<Vec<T>>()
        .into_iter()
        .sum::<T>()
        * vol;
    let degenerate = !(rhs > T::zero());
    Ok(PoincareReport {
        lhs,
        rhs,
        ratio: if degenerate { T::zero() } else { lhs / rhs },
        degenerate,
    })
}
