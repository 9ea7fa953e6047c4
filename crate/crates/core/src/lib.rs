//! Numerical laboratory for nonlocal parabolic equations `∂ₜu − Lu = f`
//! driven by singular jump measures.

// Negated comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod measure;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub mod conditions;
pub mod field;
pub mod grid;
pub mod lab;
pub mod linalg;
pub mod operator;
pub mod random_data;
pub mod rng;
pub mod samples;
pub mod solver;
pub mod spacetime;

pub type MeasureSpecF64 = measure::MeasureSpec<f64>;
pub type GridF64 = grid::Grid<f64>;
pub type OperatorF64 = operator::DiscreteOperator<f64>;
pub type SolutionF64 = spacetime::SpaceTimeFunction<f64>;
pub type IvpConfigF64 = solver::IvpConfig<f64>;

pub type MeasureSpecF32 = measure::MeasureSpec<f32>;
pub type GridF32 = grid::Grid<f32>;
pub type OperatorF32 = operator::DiscreteOperator<f32>;
pub type SolutionF32 = spacetime::SpaceTimeFunction<f32>;
pub type IvpConfigF32 = solver::IvpConfig<f32>;
