use nalgebra::DMatrix;

use crate::discretize::DiscretePlant;
use crate::error::{Error, Result};
use crate::linalg::{psd_solve, sym_spectral_norm, symmetrize};

pub const RICCATI_MAX_ITER: usize = 100_000;
const RICCATI_TOL: f64 = 1e-10;

/// Stationary and (optionally) time-varying LQ feedback `u = L xi_hat`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerGains {
    pub s_inf: DMatrix<f64>,
    pub l_inf: DMatrix<f64>,
    /// `S_0 ..= S_N`, present in finite-horizon mode.
    pub s_seq: Option<Vec<DMatrix<f64>>>,
    /// `L_0 .. L_{N-1}`, present in finite-horizon mode.
    pub l_seq: Option<Vec<DMatrix<f64>>>,
    pub iterations: usize,
}

impl ControllerGains {
    /// Gain applied at step `k`: the time-varying one when available.
    pub fn gain_at(&self, k: usize) -> &DMatrix<f64> {
        self.l_seq.as_ref().and_then(|l| l.get(k)).unwrap_or(&self.l_inf)
    }
}

/// One backward step: returns `(S_k, L_k)` from `S_{k+1}`.
pub fn riccati_step(dp: &DiscretePlant, s_next: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (phi, gamma) = (&dp.phi, &dp.gamma);
    let sg = s_next * gamma;
    let r = gamma.transpose() * &sg + &dp.xi_uu;
    let n = sg.transpose() * phi + dp.xi_xu.transpose();
    // Xi_uu vanishes when tau = h; the pseudo-inverse keeps the step defined.
    let k = psd_solve(&r, &n);
    let s = phi.transpose() * s_next * phi + &dp.xi_xx - n.transpose() * &k;
    (symmetrize(&s), -k)
}

/// Iterates the control Riccati recursion from `Xi_0` to its fixed point.
pub fn riccati_control(dp: &DiscretePlant) -> Result<ControllerGains> {
    let mut s = dp.xi0.clone();
    for it in 1..=RICCATI_MAX_ITER {
        let (next, _) = riccati_step(dp, &s);
        if !next.iter().all(|v| v.is_finite()) {
            break;
        }
        let change = sym_spectral_norm(&(&next - &s));
        s = next;
        if change <= RICCATI_TOL * sym_spectral_norm(&s).max(1.0) {
            let (_, l_inf) = riccati_step(dp, &s);
            return Ok(ControllerGains {
                s_inf: s,
                l_inf,
                s_seq: None,
                l_seq: None,
                iterations: it,
            });
        }
    }
    Err(Error::NotConverged {
        what: "control Riccati recursion",
        iterations: RICCATI_MAX_ITER,
    })
}

/// Stationary gains plus the full backward sequence over `n_steps`.
pub fn riccati_finite(dp: &DiscretePlant, n_steps: usize) -> Result<ControllerGains> {
    let mut gains = riccati_control(dp)?;
    let mut s_seq = vec![DMatrix::zeros(0, 0); n_steps + 1];
    let mut l_seq = vec![DMatrix::zeros(0, 0); n_steps];
    s_seq[n_steps] = dp.xi0.clone();
    for k in (0..n_steps).rev() {
        let (s, l) = riccati_step(dp, &s_seq[k + 1]);
        s_seq[k] = s;
        l_seq[k] = l;
    }
    gains.s_seq = Some(s_seq);
    gains.l_seq = Some(l_seq);
    Ok(gains)
}
