use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::measure::SetDescriptor;
use crate::operator::DiscreteOperator;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegativePartReport<T> {
    /// Extremes of `L(u⁻)` over the nodes of `B_1`.
    pub max_forcing: T,
    pub min_forcing: T,
    /// `‖u⁻‖_∞ μ(B_ρ^c)` with `ρ = 1 − h√d`, which bounds `L(u⁻)` on `B_1`
    /// when `u⁻` vanishes on `B_2`.
    pub bound: T,
    pub holds: bool,
}

/// Evaluates `f = L(u⁻)` on `B_1` for `u ≥ 0` on `B_2`. `u` is sampled on the
/// box nodes and used as exterior data beyond the box; `sup_negative` bounds
/// `u⁻` everywhere.
pub fn negative_part_forcing<T: Scalar>(
    op: &DiscreteOperator<T>,
    u: &Field<T>,
    sup_negative: T,
) -> Result<NegativePartReport<T>> {
    let grid = op.grid();
    if grid.domain().radius() < T::one() {
        return Err(Error::RejectedInput(
            "the equation domain must contain B_1".into(),
        ));
    }
    let neg = {
        let reach = u.reach();
        let u = u.clone();
        let f = Field::new(move |t, x| (-u.value(t, x)).max(T::zero()));
        match reach {
            Some(r) => f.with_reach(r),
            None => f,
        }
    };
    let values: Vec<T> = grid
        .coords()
        .iter()
        .map(|&x| neg.value(T::zero(), x))
        .collect();
    let mut observed = T::zero();
    for (i, &v) in values.iter().enumerate() {
        let x = grid.coord(i);
        if x[0].hypot(x[1]) < T::lit(2.0) && v > T::zero() {
            return Err(Error::RejectedInput("u must be nonnegative on B_2".into()));
        }
        observed = observed.max(v);
    }
    if observed > sup_negative {
        return Err(Error::RejectedInput(format!(
            "u⁻ reaches {observed}, above the stated bound {sup_negative}"
        )));
    }
    let lu = op.apply(&values, &neg, T::zero())?;
    let (mut max_forcing, mut min_forcing) = (T::neg_infinity(), T::infinity());
    for (s, &i) in grid.interior().iter().enumerate() {
        let x = grid.coord(i);
        if x[0].hypot(x[1]) < T::one() {
            max_forcing = max_forcing.max(lu[s]);
            min_forcing = min_forcing.min(lu[s]);
        }
    }
    let dim = grid.dim();
    let rho = T::one() - grid.h() * T::from_usize_lossy(dim).sqrt();
    let origin = [T::zero(); 2];
    let tail = op
        .spec()
        .measure_of_set(
            &origin[..dim],
            &SetDescriptor::complement(&origin[..dim], rho),
        )?
        .value;
    let bound = sup_negative * tail * op.coefficient().as_constant().unwrap_or(T::lit(2.0));
    Ok(NegativePartReport {
        max_forcing,
        min_forcing,
        bound,
        holds: min_forcing >= -bound * T::lit(1e-12) && max_forcing <= bound,
    })
}
