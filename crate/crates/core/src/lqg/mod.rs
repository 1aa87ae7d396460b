//! Estimation and control of the extended-state system under intermittent
//! measurement delivery.

mod bounds;
mod cost;
mod kalman;
mod riccati;

pub use bounds::{correction_op, covariance_bounds, mare_op, prediction_op, CovarianceBounds, MARE_DIVERGENCE_TRACE, MARE_MAX_ITER};
pub use cost::{cost_bounds, filtered_covariances, finite_horizon_cost, CostBounds};
pub use kalman::{correct, initial_estimate, kalman_step, predict, EstimatorState};
pub use riccati::{riccati_control, riccati_finite, riccati_step, ControllerGains, RICCATI_MAX_ITER};
