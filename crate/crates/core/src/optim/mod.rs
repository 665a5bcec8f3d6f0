//! Local minimizers used by the variational driver.
//!
//! [`cobyla`] is a derivative-free linear-model trust-region method for the
//! exploratory stage; [`lbfgs`] refines with limited-memory quasi-Newton
//! steps on central finite-difference gradients.

pub mod cobyla;
pub mod finite_diff;
pub mod lbfgs;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Trust radius reached its floor or the gradient vanished.
    Converged,
    /// Iteration or evaluation budget spent.
    MaxIterations,
    /// No acceptable step along the search direction; best point returned.
    LineSearchFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub status: Status,
    /// Best objective value after each iteration.
    pub history: Vec<f64>,
}
