#![allow(dead_code)]

use codesign::discretize::DiscretePlant;
use nalgebra::DMatrix;

pub fn s(v: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, v)
}

/// One-dimensional extended state with every matrix a scalar.
#[allow(clippy::too_many_arguments)]
pub fn scalar_dp(phi: f64, gamma: f64, c: f64, rv: f64, rw: f64, xi_xx: f64, xi_xu: f64, xi_uu: f64) -> DiscretePlant {
    DiscretePlant {
        phi: s(phi),
        gamma: s(gamma),
        g: s(1.0),
        c_ext: s(c),
        rv: s(rv),
        rw: s(rw),
        xi_xx: s(xi_xx),
        xi_xu: s(xi_xu),
        xi_uu: s(xi_uu),
        xi0: s(0.0),
        h_s: 1.0,
        tau_s: 1.0,
        n_steps: 10,
    }
}

pub fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

pub fn assert_mat_close(got: &DMatrix<f64>, want: &DMatrix<f64>, rel: f64) {
    assert_eq!(got.shape(), want.shape());
    let scale = want.iter().fold(1e-300_f64, |a, v| a.max(v.abs()));
    for (g, w) in got.iter().zip(want.iter()) {
        assert!((g - w).abs() <= rel * scale, "got\n{got}\nwant\n{want}");
    }
}
