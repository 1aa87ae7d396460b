use nalgebra::{DMatrix, DVector};

use super::bounds::{correction_op, CovarianceBounds};
use super::kalman::{correct, initial_estimate, predict};
use super::riccati::ControllerGains;
use crate::discretize::DiscretePlant;
use crate::error::{Error, Result};

/// Per-step infinite-horizon bounds on the expected stage cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBounds {
    pub j_min: f64,
    pub j_max: f64,
}

fn delta_matrix(dp: &DiscretePlant, s: &DMatrix<f64>, s_next: &DMatrix<f64>) -> DMatrix<f64> {
    dp.phi.transpose() * s_next * &dp.phi + &dp.xi_xx - s
}

/// Infinite-horizon cost bounds; a diverged covariance bound yields an
/// infinite cost bound.
pub fn cost_bounds(dp: &DiscretePlant, gains: &ControllerGains, bounds: &CovarianceBounds, rho: f64) -> CostBounds {
    let s = &gains.s_inf;
    let noise = (s * dp.rv_ext()).trace();
    let delta = delta_matrix(dp, s, s);
    let j_min = if bounds.lower_converged {
        noise + (1.0 - rho) * (&delta * &bounds.p_lower).trace()
    } else {
        f64::INFINITY
    };
    let j_max = if bounds.converged {
        noise + (&delta * correction_op(dp, &bounds.p_upper, rho)).trace()
    } else {
        f64::INFINITY
    };
    CostBounds { j_min, j_max }
}

/// Filtered covariances `P_{0|0} ..= P_{N-1|N-1}` produced by a realized
/// delivery sequence, starting from `blockdiag(sigma0, 0)`.
pub fn filtered_covariances(dp: &DiscretePlant, sigma0: &DMatrix<f64>, delivered: &[bool]) -> Result<Vec<DMatrix<f64>>> {
    let mut state = initial_estimate(dp, sigma0)?;
    let zero_u = DVector::zeros(dp.n_inputs());
    // Only the covariance matters here, so every innovation is zero.
    let y = DVector::zeros(dp.n_outputs());
    let mut out = Vec::with_capacity(delivered.len());
    for (k, &d) in delivered.iter().enumerate() {
        if k > 0 {
            state = predict(&state, dp, &zero_u);
        }
        state.xi_hat.fill(0.0);
        state = correct(&state, dp, d, d.then_some(&y))?;
        out.push(state.p_cov.clone());
    }
    Ok(out)
}

/// Optimal expected cost over `N` steps for one realized delivery
/// sequence, with the filtered covariances that sequence produces.
///
/// `x0` is the prior mean of the plant state and `sigma0` its covariance.
pub fn finite_horizon_cost(
    dp: &DiscretePlant,
    gains: &ControllerGains,
    delivered: &[bool],
    x0: &DVector<f64>,
    sigma0: &DMatrix<f64>,
) -> Result<f64> {
    let s_seq = gains
        .s_seq
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("controller gains lack the finite-horizon sequence".into()))?;
    let n = s_seq.len() - 1;
    if delivered.len() != n {
        return Err(Error::Dimension(format!(
            "delivery sequence has {} entries, horizon has {n} steps",
            delivered.len()
        )));
    }
    if x0.len() != dp.n_plant() {
        return Err(Error::Dimension(format!("initial state has {} entries, expected {}", x0.len(), dp.n_plant())));
    }
    let p0 = initial_estimate(dp, sigma0)?.p_cov;
    let mut xi0 = DVector::zeros(dp.n_ext());
    xi0.rows_mut(0, dp.n_plant()).copy_from(x0);

    let s0 = &s_seq[0];
    let mut cost = (xi0.transpose() * s0 * &xi0)[(0, 0)] + (s0 * &p0).trace();
    let rv = dp.rv_ext();
    for (k, p) in filtered_covariances(dp, sigma0, delivered)?.iter().enumerate() {
        cost += (&s_seq[k + 1] * &rv).trace();
        cost += (delta_matrix(dp, &s_seq[k], &s_seq[k + 1]) * p).trace();
    }
    Ok(cost)
}
