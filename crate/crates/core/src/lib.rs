//! Stein's method for discrete Gibbs measures on `{0, …, N}`.

pub mod bounds;
pub mod cli;
pub mod compare;
pub mod error;
pub mod gibbs;
pub mod lattice;
pub mod numeric;
pub mod size_bias;
pub mod stein;
pub mod verify;

pub use error::{Error, Result};
pub use gibbs::{GibbsMeasure, MeasureKind};
pub use numeric::TailRule;
pub use stein::{SteinSolution, TestFunction};
