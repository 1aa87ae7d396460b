//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Tolerance used for Loewner-order comparisons (minimum eigenvalue of the
/// difference must not fall below `-LOEWNER_TOL`).
pub const LOEWNER_TOL: f64 = 1e-9;

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn symmetrize_in_place(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Symmetric up to `tol` relative to the largest entry (absolute below 1).
pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = max_abs(m).max(1.0);
    let n = m.nrows();
    (0..n).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol * scale))
}

/// Eigenvalues of the symmetric part of `m`, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(symmetrize(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// `x <= y` in the Loewner order, up to `tol`.
pub fn loewner_leq(x: &DMatrix<f64>, y: &DMatrix<f64>, tol: f64) -> bool {
    min_eigenvalue(&(y - x)) >= -tol
}

/// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
pub fn sym_spectral_norm(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m).iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .complex_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Symmetric square root with negative eigenvalues clipped to zero.
pub fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 0 {
        return m.clone();
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let d = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// Solves `a x = b` for symmetric positive definite `a` via Cholesky.
pub fn spd_solve(a: &DMatrix<f64>, b: &DMatrix<f64>, context: &'static str) -> Result<DMatrix<f64>> {
    let chol = Cholesky::new(symmetrize(a)).ok_or(Error::Singular(context))?;
    Ok(chol.solve(b))
}

/// Solves `a x = b` for symmetric positive semidefinite `a`, falling back to
/// the minimum-norm least-squares solution when `a` is singular.
pub fn psd_solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let a = symmetrize(a);
    if let Some(chol) = Cholesky::new(a.clone()) {
        return chol.solve(b);
    }
    let eig = SymmetricEigen::new(a);
    let largest = eig.eigenvalues.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let cutoff = largest * 1e-12 * eig.eigenvalues.len() as f64;
    let inv = eig.eigenvalues.map(|l| if l.abs() > cutoff { 1.0 / l } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * (eig.eigenvectors.transpose() * b)
}

/// Builds a matrix from row-major nested vectors. Empty input yields 0x0.
pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Dimension("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// `blockdiag(a, b)`.
pub fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows() + b.nrows();
    let m = a.ncols() + b.ncols();
    let mut out = DMatrix::zeros(n, m);
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

/// `[[a, b], [c, d]]`.
pub fn block2x2(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> DMatrix<f64> {
    debug_assert_eq!(a.nrows(), b.nrows());
    debug_assert_eq!(c.nrows(), d.nrows());
    debug_assert_eq!(a.ncols(), c.ncols());
    debug_assert_eq!(b.ncols(), d.ncols());
    let mut out = DMatrix::zeros(a.nrows() + c.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out.view_mut((a.nrows(), 0), c.shape()).copy_from(c);
    out.view_mut((a.nrows(), a.ncols()), d.shape()).copy_from(d);
    out
}

pub fn block(m: &DMatrix<f64>, row: usize, col: usize, nrows: usize, ncols: usize) -> DMatrix<f64> {
    m.view((row, col), (nrows, ncols)).into_owned()
}
