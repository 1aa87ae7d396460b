//! Sampled-data transcription of the plant and the quadratic loss.
//!
//! The extended state is `xi_k = [x_k; u_{k-1}]`. The previous input acts
//! during the first `tau` seconds of each interval and the new input for
//! the remaining `h - tau`. Every matrix integral is read off the
//! exponential of an augmented block matrix.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::linalg::{block, block2x2, block_diag, max_abs, symmetrize, to_rows};
use crate::model::ContinuousPlant;

/// Discrete-time extended-state system and loss for one `(h, tau)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePlant {
    pub phi: DMatrix<f64>,
    pub gamma: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub c_ext: DMatrix<f64>,
    pub rv: DMatrix<f64>,
    pub rw: DMatrix<f64>,
    pub xi_xx: DMatrix<f64>,
    pub xi_xu: DMatrix<f64>,
    pub xi_uu: DMatrix<f64>,
    pub xi0: DMatrix<f64>,
    pub h_s: f64,
    pub tau_s: f64,
    pub n_steps: usize,
}

impl DiscretePlant {
    /// Plant state dimension `n`.
    pub fn n_plant(&self) -> usize {
        self.g.ncols()
    }

    /// Extended state dimension `n + m`.
    pub fn n_ext(&self) -> usize {
        self.phi.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.gamma.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c_ext.nrows()
    }

    /// Process noise covariance on the extended state, `G R_v G^T`.
    pub fn rv_ext(&self) -> DMatrix<f64> {
        &self.g * &self.rv * self.g.transpose()
    }

    /// `[[Xi_xx, Xi_xu], [Xi_xu^T, Xi_uu]]`.
    pub fn xi_composite(&self) -> DMatrix<f64> {
        block2x2(&self.xi_xx, &self.xi_xu, &self.xi_xu.transpose(), &self.xi_uu)
    }

    /// One noise-free step of the extended recursion.
    pub fn step(&self, xi: &DMatrix<f64>, u: &DMatrix<f64>) -> DMatrix<f64> {
        &self.phi * xi + &self.gamma * u
    }

    /// Stage loss `[xi; u]^T Xi [xi; u]`.
    pub fn stage_cost(&self, xi: &DMatrix<f64>, u: &DMatrix<f64>) -> f64 {
        let q = xi.transpose() * &self.xi_xx * xi + (xi.transpose() * &self.xi_xu * u) * 2.0 + u.transpose() * &self.xi_uu * u;
        q[(0, 0)]
    }

    /// All matrices as nested row arrays, for inspection.
    pub fn to_json_string(&self) -> String {
        #[derive(Serialize)]
        struct Dump {
            h_s: f64,
            tau_s: f64,
            n_steps: usize,
            phi: Vec<Vec<f64>>,
            gamma: Vec<Vec<f64>>,
            g: Vec<Vec<f64>>,
            c: Vec<Vec<f64>>,
            rv: Vec<Vec<f64>>,
            rw: Vec<Vec<f64>>,
            xi_xx: Vec<Vec<f64>>,
            xi_xu: Vec<Vec<f64>>,
            xi_uu: Vec<Vec<f64>>,
            xi0: Vec<Vec<f64>>,
        }
        let d = Dump {
            h_s: self.h_s,
            tau_s: self.tau_s,
            n_steps: self.n_steps,
            phi: to_rows(&self.phi),
            gamma: to_rows(&self.gamma),
            g: to_rows(&self.g),
            c: to_rows(&self.c_ext),
            rv: to_rows(&self.rv),
            rw: to_rows(&self.rw),
            xi_xx: to_rows(&self.xi_xx),
            xi_xu: to_rows(&self.xi_xu),
            xi_uu: to_rows(&self.xi_uu),
            xi0: to_rows(&self.xi0),
        };
        serde_json::to_string_pretty(&d).expect("matrix dump")
    }
}

/// `(e^{At}, int_0^t e^{As} ds B)`.
pub fn phi_gamma(a: &DMatrix<f64>, b: &DMatrix<f64>, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, m) = (a.nrows(), b.ncols());
    let aug = block2x2(a, b, &DMatrix::zeros(m, n), &DMatrix::zeros(m, m)) * t;
    let e = expm(&aug);
    (block(&e, 0, 0, n, n), block(&e, 0, n, n, m))
}

/// `int_0^t e^{As} W e^{A^T s} ds`.
pub fn noise_integral(a: &DMatrix<f64>, w: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let aug = block2x2(&(-a), w, &DMatrix::zeros(n, n), &a.transpose()) * t;
    let e = expm(&aug);
    let f12 = block(&e, 0, n, n, n);
    let f22 = block(&e, n, n, n, n);
    symmetrize(&(f22.transpose() * f12))
}

/// Loss integrals `(Q_xx^t, Q_xu^t, Q_uu^t)` under a constant input.
pub fn loss_integrals(plant: &ContinuousPlant, t: f64) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let (n, m) = (plant.n_states(), plant.n_inputs());
    let f = block2x2(&plant.a, &plant.b, &DMatrix::zeros(m, n), &DMatrix::zeros(m, m));
    let qc = block2x2(&plant.q_xx, &plant.q_xu, &plant.q_xu.transpose(), &plant.q_uu);
    let k = n + m;
    let aug = block2x2(&(-f.transpose()), &qc, &DMatrix::zeros(k, k), &f) * t;
    let e = expm(&aug);
    let e12 = block(&e, 0, k, k, k);
    let e22 = block(&e, k, k, k, k);
    let q = symmetrize(&(e22.transpose() * e12));
    (block(&q, 0, 0, n, n), block(&q, 0, n, n, m), block(&q, n, n, m, m))
}

fn check_timing(h_s: f64, tau_s: f64) -> Result<()> {
    if !(h_s.is_finite() && h_s > 0.0) {
        return Err(Error::validation("h", format!("sampling interval must be positive, got {h_s}")));
    }
    if !(tau_s.is_finite() && tau_s > 0.0 && tau_s <= h_s) {
        return Err(Error::validation(
            "tau",
            format!("time lag must satisfy 0 < tau <= h, got tau = {tau_s}, h = {h_s}"),
        ));
    }
    Ok(())
}

/// Number of sampling intervals covering `horizon_s`.
pub fn step_count(horizon_s: f64, h_s: f64) -> usize {
    (horizon_s / h_s - 1e-9).ceil().max(0.0) as usize
}

pub fn discretize(plant: &ContinuousPlant, h_s: f64, tau_s: f64, horizon_s: f64) -> Result<DiscretePlant> {
    check_timing(h_s, tau_s)?;
    if !(horizon_s.is_finite() && horizon_s >= h_s) {
        return Err(Error::validation(
            "horizon",
            format!("horizon must be finite and at least h = {h_s}, got {horizon_s}"),
        ));
    }
    plant.validate()?;
    let (n, m) = (plant.n_states(), plant.n_inputs());
    let zmn = DMatrix::zeros(m, n);
    let zmm = DMatrix::zeros(m, m);

    let (e_h, gamma_h) = phi_gamma(&plant.a, &plant.b, h_s);
    let (phi_tau, gamma_tau) = phi_gamma(&plant.a, &plant.b, tau_s);
    let (_, gamma_rest) = phi_gamma(&plant.a, &plant.b, h_s - tau_s);

    let phi = block2x2(&e_h, &(&gamma_h - &gamma_rest), &zmn, &zmm);
    let gamma = DMatrix::from_fn(n + m, m, |r, c| {
        if r < n {
            gamma_rest[(r, c)]
        } else {
            f64::from(u8::from(r - n == c))
        }
    });
    let g = DMatrix::from_fn(n + m, n, |r, c| f64::from(u8::from(r == c)));
    let c_ext = DMatrix::from_fn(plant.n_outputs(), n + m, |r, c| if c < n { plant.c[(r, c)] } else { 0.0 });
    let rv = noise_integral(&plant.a, &plant.rv_c, h_s);

    let (qxx_a, qxu_a, quu_a) = loss_integrals(plant, tau_s);
    let (qxx_b, qxu_b, quu_b) = loss_integrals(plant, h_s - tau_s);

    let pt = phi_tau.transpose();
    let gt = gamma_tau.transpose();
    let xi_xx = block2x2(
        &(&qxx_a + &pt * &qxx_b * &phi_tau),
        &(&qxu_a + &pt * &qxx_b * &gamma_tau),
        &(qxu_a.transpose() + &gt * &qxx_b * &phi_tau),
        &(&quu_a + &gt * &qxx_b * &gamma_tau),
    );
    let mut xi_xu = DMatrix::zeros(n + m, m);
    xi_xu.view_mut((0, 0), (n, m)).copy_from(&(&pt * &qxu_b));
    xi_xu.view_mut((n, 0), (m, m)).copy_from(&(&gt * &qxu_b));

    let composite = symmetrize(&block2x2(&xi_xx, &xi_xu, &xi_xu.transpose(), &quu_b));
    let k = n + m;
    Ok(DiscretePlant {
        phi,
        gamma,
        g,
        c_ext,
        rv,
        rw: plant.rw.clone(),
        xi_xx: block(&composite, 0, 0, k, k),
        xi_xu: block(&composite, 0, k, k, m),
        xi_uu: block(&composite, k, k, m, m),
        xi0: block_diag(&plant.q0, &zmm),
        h_s,
        tau_s,
        n_steps: step_count(horizon_s, h_s),
    })
}

/// Agreement between the exponential path and direct quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityReport {
    /// Largest entrywise relative deviation over all integrals.
    pub max_rel_deviation: f64,
    /// Integral with the largest deviation.
    pub worst: &'static str,
    pub flagged: bool,
}

pub const SENSITIVITY_FLAG: f64 = 1e-8;

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite 5-point Gauss-Legendre rule on `[0, t]`.
fn quadrature(t: f64, panels: usize, f: impl Fn(f64) -> DMatrix<f64>) -> DMatrix<f64> {
    let w = t / panels as f64;
    let mut acc: Option<DMatrix<f64>> = None;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * w;
        for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let v = f(mid + 0.5 * w * x) * (0.5 * w * wt);
            acc = Some(match acc {
                Some(a) => a + v,
                None => v,
            });
        }
    }
    acc.expect("at least one panel")
}

const BASE_PANELS: usize = 16;

/// Recomputes every integral used by [`discretize`] with composite
/// Gauss-Legendre quadrature at 16 and 32 panels and reports the largest
/// relative deviation from the exponential path. Deviations above
/// [`SENSITIVITY_FLAG`] are flagged.
pub fn sensitivity_check(plant: &ContinuousPlant, h_s: f64, tau_s: f64) -> Result<SensitivityReport> {
    check_timing(h_s, tau_s)?;
    plant.validate()?;
    let (n, m) = (plant.n_states(), plant.n_inputs());
    let f = block2x2(&plant.a, &plant.b, &DMatrix::zeros(m, n), &DMatrix::zeros(m, m));
    let qc = block2x2(&plant.q_xx, &plant.q_xu, &plant.q_xu.transpose(), &plant.q_uu);
    let ef = |s: f64| expm(&(&f * s));
    let phi_b = |s: f64| block(&ef(s), 0, 0, n, n) * &plant.b;
    let rv_integrand = |s: f64| {
        let e = block(&ef(s), 0, 0, n, n);
        &e * &plant.rv_c * e.transpose()
    };
    let q_integrand = |s: f64| {
        let e = ef(s);
        e.transpose() * &qc * e
    };

    let mut report = SensitivityReport {
        max_rel_deviation: 0.0,
        worst: "none",
        flagged: false,
    };
    let mut compare = |name: &'static str, exact: DMatrix<f64>, integrand: &dyn Fn(f64) -> DMatrix<f64>, t: f64| {
        if t == 0.0 {
            return;
        }
        let floor = 1e-10 * max_abs(&exact).max(f64::MIN_POSITIVE);
        for panels in [BASE_PANELS, 2 * BASE_PANELS] {
            let approx = quadrature(t, panels, integrand);
            let dev = approx
                .iter()
                .zip(exact.iter())
                .map(|(q, e)| {
                    let d = (q - e).abs() / e.abs().max(floor);
                    if d.is_nan() {
                        f64::INFINITY
                    } else {
                        d
                    }
                })
                .fold(0.0, f64::max);
            if dev > report.max_rel_deviation {
                report.max_rel_deviation = dev;
                report.worst = name;
            }
        }
    };

    let rest = h_s - tau_s;
    compare("gamma(h)", phi_gamma(&plant.a, &plant.b, h_s).1, &phi_b, h_s);
    compare("gamma(h - tau)", phi_gamma(&plant.a, &plant.b, rest).1, &phi_b, rest);
    compare("gamma(tau)", phi_gamma(&plant.a, &plant.b, tau_s).1, &phi_b, tau_s);
    compare("R_v", noise_integral(&plant.a, &plant.rv_c, h_s), &rv_integrand, h_s);
    for (name, t) in [("Q^tau", tau_s), ("Q^(h - tau)", rest)] {
        let (xx, xu, uu) = loss_integrals(plant, t);
        compare(name, block2x2(&xx, &xu, &xu.transpose(), &uu), &q_integrand, t);
    }
    report.flagged = report.max_rel_deviation > SENSITIVITY_FLAG;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scalar_plant(a: f64, b: f64) -> ContinuousPlant {
        let s = |v: f64| DMatrix::from_element(1, 1, v);
        ContinuousPlant {
            a: s(a),
            b: s(b),
            c: s(1.0),
            rv_c: s(1.0),
            rw: s(1.0),
            sigma0: s(1.0),
            q_xx: s(1.0),
            q_xu: s(0.0),
            q_uu: s(1.0),
            q0: s(0.0),
        }
    }

    #[test]
    fn scalar_exponential_integrals() {
        let dp = discretize(&scalar_plant(1.0, 1.0), 0.1, 0.1, 1.0).unwrap();
        assert_relative_eq!(dp.phi[(0, 0)], 0.1f64.exp(), max_relative = 1e-15);
        assert_relative_eq!(dp.phi[(0, 1)], 0.1f64.exp() - 1.0, max_relative = 1e-14);
        assert_relative_eq!(dp.phi[(0, 1)], 0.105170918, epsilon = 1e-9);
        assert_eq!(dp.gamma[(0, 0)], 0.0);
        assert_eq!(dp.gamma[(1, 0)], 1.0);
        assert_eq!((dp.phi[(1, 0)], dp.phi[(1, 1)]), (0.0, 0.0));
        assert_eq!(dp.n_steps, 10);
        // R_v = (e^{2h} - 1) / 2
        assert_relative_eq!(dp.rv[(0, 0)], (0.2f64.exp() - 1.0) / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn rejects_bad_timing() {
        let p = scalar_plant(1.0, 1.0);
        assert!(discretize(&p, 0.1, 0.2, 1.0).is_err());
        assert!(discretize(&p, 0.0, 0.0, 1.0).is_err());
        assert!(discretize(&p, 0.1, 0.1, 0.05).is_err());
    }

    #[test]
    fn step_count_rounds_up() {
        assert_eq!(step_count(500.0, 0.01), 50000);
        assert_eq!(step_count(500.0, 0.03), 16667);
        assert_eq!(step_count(1.0, 0.3), 4);
    }
}
