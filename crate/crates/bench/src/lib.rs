//! The three example configurations (Beta mixture, propagation, optimization)
//! and a plain wall-clock timer for basis and tensor construction.
//!
//! The criterion benches and the `pce bench` subcommand both build on this.

use std::hint::black_box;
use std::time::Instant;

use pce_core::applications::ocp::beta_mixture;
use pce_core::tensor::compute_tensor;
use pce_core::{Measure, MultiOrthoBasis, Result};

/// Maximum total degree used by every example.
pub const DEGREE: usize = 4;

#[derive(Clone)]
pub struct Example {
    pub name: &'static str,
    pub measures: Vec<Measure>,
}

impl Example {
    pub fn uncertainties(&self) -> usize {
        self.measures.len()
    }

    pub fn basis(&self) -> Result<MultiOrthoBasis> {
        MultiOrthoBasis::from_measures(self.measures.clone(), DEGREE)
    }
}

pub fn examples() -> Result<Vec<Example>> {
    Ok(vec![
        Example { name: "beta_mixture", measures: vec![beta_mixture()?] },
        Example { name: "propagation", measures: vec![Measure::uniform01(), Measure::uniform01()] },
        Example {
            name: "optimization",
            measures: vec![beta_mixture()?, Measure::gaussian(), Measure::gaussian()],
        },
    ])
}

/// Mean wall time per repetition, in microseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub basis_us: f64,
    pub order2_us: f64,
    pub order3_us: f64,
}

fn mean_us<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<f64> {
    let start = Instant::now();
    for _ in 0..reps {
        black_box(f()?);
    }
    Ok(start.elapsed().as_secs_f64() * 1e6 / reps as f64)
}

/// Times `reps` consecutive runs of each step. The first run is included,
/// so one-off setup costs are part of the mean.
pub fn time_example(example: &Example, reps: usize) -> Result<Timing> {
    let reps = reps.max(1);
    let basis_us = mean_us(reps, || example.basis())?;
    let basis = example.basis()?;
    let order2_us = mean_us(reps, || compute_tensor(&basis, 2))?;
    let order3_us = mean_us(reps, || compute_tensor(&basis, 3))?;
    Ok(Timing { basis_us, order2_us, order3_us })
}
