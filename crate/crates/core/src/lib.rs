//! Polynomial chaos expansions for arbitrary probability measures.
//!
//! Measures, recurrence coefficients of their orthogonal polynomials,
//! Gauss-type and interpolatory quadrature, orthogonal bases and their
//! Galerkin tensors, PCE vectors with Galerkin arithmetic, and two worked
//! applications (uncertainty propagation through a reactor model and a
//! chance-constrained optimal control problem).

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod applications;
pub mod basis;
pub mod error;
pub mod measures;
pub mod pce;
pub mod quadrature;
pub mod recurrence;
pub mod tensor;

pub use basis::{MultiOrthoBasis, OrthoBasis};
pub use error::{Error, Result};
pub use measures::{CanonicalKind, CustomOptions, Measure, MeasureSpec, ProductMeasure};
pub use quadrature::{QuadratureKind, QuadratureRule};
pub use pce::PceVector;
pub use recurrence::{Procedure, RecurrenceCoefficients};
pub use tensor::{GalerkinNu, Tensor};
