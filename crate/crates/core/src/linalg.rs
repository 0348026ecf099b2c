//! Small dense helpers for 3×3 matrices stored row-major as `[f64; 9]`.

/// Eigenvalues of a symmetric 3×3 matrix in ascending order.
pub fn sym_eigenvalues(a: &[f64; 9]) -> [f64; 3] {
    let (a11, a22, a33) = (a[0], a[4], a[8]);
    let (a12, a13, a23) = (0.5 * (a[1] + a[3]), 0.5 * (a[2] + a[6]), 0.5 * (a[5] + a[7]));
    let p1 = a12 * a12 + a13 * a13 + a23 * a23;
    let q = (a11 + a22 + a33) / 3.0;
    if p1 <= 1e-300 {
        let mut e = [a11, a22, a33];
        e.sort_by(f64::total_cmp);
        return e;
    }
    let p2 = (a11 - q).powi(2) + (a22 - q).powi(2) + (a33 - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = |x: f64| x / p;
    let (b11, b22, b33) = (b(a11 - q), b(a22 - q), b(a33 - q));
    let (b12, b13, b23) = (b(a12), b(a13), b(a23));
    let det = b11 * (b22 * b33 - b23 * b23) - b12 * (b12 * b33 - b23 * b13) + b13 * (b12 * b23 - b22 * b13);
    let r = (0.5 * det).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    [e3, e2, e1]
}

/// Operator (spectral) norm of a general 3×3 matrix.
pub fn operator_norm(a: &[f64; 9]) -> f64 {
    let symmetric = (a[1] - a[3]).abs() <= 1e-15 * (a[1].abs() + 1.0)
        && (a[2] - a[6]).abs() <= 1e-15 * (a[2].abs() + 1.0)
        && (a[5] - a[7]).abs() <= 1e-15 * (a[5].abs() + 1.0);
    if symmetric {
        let e = sym_eigenvalues(a);
        return e[0].abs().max(e[2].abs());
    }
    let ata = mul(&transpose(a), a);
    sym_eigenvalues(&ata)[2].max(0.0).sqrt()
}

pub fn transpose(a: &[f64; 9]) -> [f64; 9] {
    [a[0], a[3], a[6], a[1], a[4], a[7], a[2], a[5], a[8]]
}

pub fn mul(a: &[f64; 9], b: &[f64; 9]) -> [f64; 9] {
    let mut c = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            c[3 * i + j] = (0..3).map(|k| a[3 * i + k] * b[3 * k + j]).sum();
        }
    }
    c
}

pub fn identity() -> [f64; 9] {
    [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]
}

pub fn trace(a: &[f64; 9]) -> f64 {
    a[0] + a[4] + a[8]
}

/// Symmetric coordinates `(a₁₁, a₂₂, a₃₃, √2a₁₂, √2a₁₃, √2a₂₃)`, an isometry for
/// the Frobenius inner product.
pub fn sym_vec(a: &[f64; 9]) -> [f64; 6] {
    let r = std::f64::consts::SQRT_2;
    [
        a[0],
        a[4],
        a[8],
        r * 0.5 * (a[1] + a[3]),
        r * 0.5 * (a[2] + a[6]),
        r * 0.5 * (a[5] + a[7]),
    ]
}

/// Inverse of [`sym_vec`].
pub fn sym_unvec(v: &[f64; 6]) -> [f64; 9] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (x, y, z) = (v[3] * s, v[4] * s, v[5] * s);
    [v[0], x, y, x, v[1], z, y, z, v[2]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_diagonal_and_rotated() {
        let d = [3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0];
        assert_eq!(sym_eigenvalues(&d), [-1.0, 2.0, 3.0]);
        let a = [2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 5.0];
        let e = sym_eigenvalues(&a);
        for (x, y) in e.iter().zip([1.0, 3.0, 5.0]) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((operator_norm(&a) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn nonsymmetric_norm() {
        let a = [0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!((operator_norm(&a) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sym_vec_round_trip() {
        let a = [1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0];
        let b = sym_unvec(&sym_vec(&a));
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
