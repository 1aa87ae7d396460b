use nalgebra::{DMatrix, DVector};

use crate::discretize::DiscretePlant;
use crate::error::{Error, Result};
use crate::linalg::{block_diag, spd_solve, symmetrize_in_place};

/// Conditional mean and covariance of the extended state.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    pub xi_hat: DVector<f64>,
    pub p_cov: DMatrix<f64>,
}

/// Prior before the first measurement: zero mean, `blockdiag(sigma0, 0)`.
pub fn initial_estimate(dp: &DiscretePlant, sigma0: &DMatrix<f64>) -> Result<EstimatorState> {
    if sigma0.shape() != (dp.n_plant(), dp.n_plant()) {
        return Err(Error::Dimension(format!(
            "initial covariance is {:?}, plant has {} states",
            sigma0.shape(),
            dp.n_plant()
        )));
    }
    Ok(EstimatorState {
        xi_hat: DVector::zeros(dp.n_ext()),
        p_cov: block_diag(sigma0, &DMatrix::zeros(dp.n_inputs(), dp.n_inputs())),
    })
}

/// Time update with the applied input `u`.
pub fn predict(state: &EstimatorState, dp: &DiscretePlant, u: &DVector<f64>) -> EstimatorState {
    let mut p = &dp.phi * &state.p_cov * dp.phi.transpose() + dp.rv_ext();
    symmetrize_in_place(&mut p);
    EstimatorState {
        xi_hat: &dp.phi * &state.xi_hat + &dp.gamma * u,
        p_cov: p,
    }
}

/// Measurement update; a lost packet (`delivered == false`) leaves the
/// prediction unchanged.
pub fn correct(state: &EstimatorState, dp: &DiscretePlant, delivered: bool, y: Option<&DVector<f64>>) -> Result<EstimatorState> {
    match (delivered, y) {
        (false, None) => Ok(state.clone()),
        (true, Some(y)) => {
            if y.len() != dp.n_outputs() {
                return Err(Error::Dimension(format!(
                    "measurement has {} entries, expected {}",
                    y.len(),
                    dp.n_outputs()
                )));
            }
            let c = &dp.c_ext;
            let pct = &state.p_cov * c.transpose();
            let innovation_cov = c * &pct + &dp.rw;
            // K^T = S^{-1} C P
            let kt = spd_solve(&innovation_cov, &pct.transpose(), "innovation covariance")?;
            let resid = y - c * &state.xi_hat;
            let mut p = &state.p_cov - kt.transpose() * c * &state.p_cov;
            symmetrize_in_place(&mut p);
            Ok(EstimatorState {
                xi_hat: &state.xi_hat + kt.transpose() * resid,
                p_cov: p,
            })
        }
        _ => Err(Error::InvalidArgument(
            "a measurement must be supplied exactly when the packet is delivered".into(),
        )),
    }
}

/// Predicts with `u_prev` and corrects with `y` when `rho_k == 1`.
pub fn kalman_step(
    state: &EstimatorState,
    dp: &DiscretePlant,
    u_prev: &DVector<f64>,
    rho_k: u8,
    y: Option<&DVector<f64>>,
) -> Result<EstimatorState> {
    if rho_k > 1 {
        return Err(Error::InvalidArgument(format!("delivery indicator must be 0 or 1, got {rho_k}")));
    }
    correct(&predict(state, dp, u_prev), dp, rho_k == 1, y)
}
