//! Matrix exponential by scaling and squaring with a degree-13 Padé approximant.

use nalgebra::DMatrix;

const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the degree-13 approximant is accurate to unit roundoff.
const THETA13: f64 = 5.371920351148152;

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `e^M` for a square matrix.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(m.is_square(), "expm needs a square matrix");
    let n = m.nrows();
    if n == 0 {
        return m.clone();
    }
    let norm = norm1(m);
    if !norm.is_finite() {
        return DMatrix::from_element(n, n, f64::NAN);
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = m * 2f64.powi(-s);

    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;

    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .unwrap_or_else(|| DMatrix::from_element(n, n, f64::NAN));
    for _ in 0..s {
        r = &r * &r;
    }
    r
}
