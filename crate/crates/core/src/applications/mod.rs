//! Worked applications: uncertainty propagation through the Van de Vusse
//! reactor and a chance-constrained optimal control problem on its
//! linearization.

pub mod ocp;
pub mod socp;
pub mod vdv;
