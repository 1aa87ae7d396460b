use nalgebra::{DMatrix, DVector};

use crate::discretize::DiscretePlant;
use crate::error::{Error, Result};
use crate::linalg::{block_diag, max_abs, psd_solve, spectral_radius, symmetrize, symmetrize_in_place};

pub const MARE_MAX_ITER: usize = 100_000;
/// Iterates whose trace exceeds this are treated as divergent.
pub const MARE_DIVERGENCE_TRACE: f64 = 1e12;
const MARE_TOL: f64 = 1e-10;

/// Stationary bounds on the expected prediction-error covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceBounds {
    /// Fixed point of `P = (1 - rho) Phi P Phi^T + R~_v`.
    pub p_lower: DMatrix<f64>,
    /// Fixed point of the modified algebraic Riccati equation.
    pub p_upper: DMatrix<f64>,
    /// Whether the upper iteration reached a bounded fixed point.
    pub converged: bool,
    pub lower_converged: bool,
    pub iterations: usize,
    pub rho: f64,
}

impl CovarianceBounds {
    /// Lower bound on the expected filtered covariance, `(1 - rho) P_lower`.
    pub fn p_lower_filtered(&self) -> DMatrix<f64> {
        &self.p_lower * (1.0 - self.rho)
    }
}

/// `f(X) = Phi X Phi^T + R~_v`.
pub fn prediction_op(dp: &DiscretePlant, x: &DMatrix<f64>) -> DMatrix<f64> {
    symmetrize(&(&dp.phi * x * dp.phi.transpose() + dp.rv_ext()))
}

/// `h_rho(X) = X - rho X C^T (C X C^T + R_w)^{-1} C X`.
pub fn correction_op(dp: &DiscretePlant, x: &DMatrix<f64>, rho: f64) -> DMatrix<f64> {
    let c = &dp.c_ext;
    let xct = x * c.transpose();
    let s = c * &xct + &dp.rw;
    let gain_t = psd_solve(&s, &xct.transpose());
    symmetrize(&(x - (xct * gain_t) * rho))
}

/// `g_rho = h_rho o f`.
pub fn mare_op(dp: &DiscretePlant, x: &DMatrix<f64>, rho: f64) -> DMatrix<f64> {
    correction_op(dp, &prediction_op(dp, x), rho)
}

fn check_rho(rho: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("delivery probability must lie in [0, 1], got {rho}")))
    }
}

/// Solves `P = a Phi P Phi^T + W` through its Kronecker form.
fn scaled_lyapunov(phi: &DMatrix<f64>, a: f64, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = phi.nrows();
    let kron = phi.kronecker(phi) * a;
    let lhs = DMatrix::<f64>::identity(k * k, k * k) - kron;
    let rhs = DVector::from_column_slice(w.as_slice());
    let sol = lhs.lu().solve(&rhs).ok_or(Error::Singular("Lyapunov operator"))?;
    Ok(symmetrize(&DMatrix::from_column_slice(k, k, sol.as_slice())))
}

/// Iterates the upper and lower covariance recursions to their fixed
/// points, starting from `blockdiag(sigma0, 0)` (or `sigma0` itself when
/// it already has the extended dimension).
///
/// Below the critical delivery probability of an unstable plant the upper
/// recursion has no bounded fixed point; this is reported through
/// `converged == false` rather than as an error.
pub fn covariance_bounds(dp: &DiscretePlant, sigma0: &DMatrix<f64>, rho: f64) -> Result<CovarianceBounds> {
    check_rho(rho)?;
    let rv = dp.rv_ext();
    let m = dp.n_inputs();
    let p0 = if sigma0.shape() == dp.phi.shape() {
        sigma0.clone()
    } else {
        block_diag(sigma0, &DMatrix::zeros(m, m))
    };
    if p0.shape() != dp.phi.shape() {
        return Err(Error::Dimension("initial covariance does not match the extended state".into()));
    }

    let lower_converged = (1.0 - rho) * spectral_radius(&dp.phi).powi(2) < 1.0;
    let p_lower = if lower_converged {
        scaled_lyapunov(&dp.phi, 1.0 - rho, &rv)?
    } else {
        DMatrix::from_element(p0.nrows(), p0.ncols(), f64::INFINITY)
    };

    let c = &dp.c_ext;
    let mut p = p0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MARE_MAX_ITER {
        iterations += 1;
        let pct = &p * c.transpose();
        let s = c * &pct + &dp.rw;
        let gain_t = psd_solve(&s, &pct.transpose());
        let fp = &dp.phi * &pct;
        let mut next = &dp.phi * &p * dp.phi.transpose() + &rv - (&fp * (&gain_t * dp.phi.transpose())) * rho;
        symmetrize_in_place(&mut next);
        let change = max_abs(&(&next - &p));
        p = next;
        let tr = p.trace();
        if !tr.is_finite() || tr > MARE_DIVERGENCE_TRACE {
            break;
        }
        if change <= MARE_TOL * max_abs(&p).max(1.0) {
            converged = true;
            break;
        }
    }
    Ok(CovarianceBounds {
        p_lower,
        p_upper: p,
        converged,
        lower_converged,
        iterations,
        rho,
    })
}
