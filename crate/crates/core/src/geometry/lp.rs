//! Small linear programs over the traceless part of projection matrices.
//!
//! Every `M_k = Id − k̂⊗k̂` has trace 2, so `(2/3)·Id` is the origin of the
//! 5-dimensional traceless coordinates used here and convex combinations are
//! characterized by `Σ c_k τ(M_k) = τ(target)` together with `Σ c_k = 1`.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::linalg::sym_vec;

/// Coordinates of the traceless part of a symmetric matrix in an orthonormal
/// basis of traceless symmetric matrices.
pub fn traceless_coords(m: &[f64; 9]) -> [f64; 5] {
    let v = sym_vec(m);
    [
        (v[0] - v[1]) / std::f64::consts::SQRT_2,
        (v[0] + v[1] - 2.0 * v[2]) / 6f64.sqrt(),
        v[3],
        v[4],
        v[5],
    ]
}

/// Inverse of [`traceless_coords`] for a matrix with trace `tr`.
pub fn from_traceless(x: &[f64; 5], tr: f64) -> [f64; 9] {
    let d = tr / 3.0;
    let a = x[0] / std::f64::consts::SQRT_2;
    let b = x[1] / 6f64.sqrt();
    let v = [d + a + b, d - a + b, d - 2.0 * b, x[2], x[3], x[4]];
    crate::linalg::sym_unvec(&v)
}

fn add_hull_rows(
    p: &mut Problem,
    vars: &[microlp::Variable],
    pts: &[[f64; 5]],
    extra: &[(microlp::Variable, [f64; 5])],
    target: &[f64; 5],
) {
    for a in 0..5 {
        let mut expr: Vec<(microlp::Variable, f64)> = vars.iter().zip(pts).map(|(v, x)| (*v, x[a])).collect();
        for (v, e) in extra {
            expr.push((*v, -e[a]));
        }
        p.add_constraint(expr, ComparisonOp::Eq, target[a]);
    }
    let sum: Vec<(microlp::Variable, f64)> = vars.iter().map(|v| (*v, 1.0)).collect();
    p.add_constraint(sum, ComparisonOp::Eq, 1.0);
}

/// Largest `t` such that the origin is an affine combination of `pts` with
/// every weight at least `t`.  Positive values mean the origin lies in the
/// interior of the hull (given full affine rank).  `None` when the origin is
/// not even in the affine hull.
pub fn interior_margin(pts: &[[f64; 5]]) -> Option<f64> {
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let t = p.add_var(1.0, (-1.0, 1.0));
    let vars: Vec<_> = pts.iter().map(|_| p.add_var(0.0, (-10.0, 10.0))).collect();
    for v in &vars {
        p.add_constraint([(*v, 1.0), (t, -1.0)], ComparisonOp::Ge, 0.0);
    }
    add_hull_rows(&mut p, &vars, pts, &[], &[0.0; 5]);
    p.solve().ok().map(|s| *s.var_value(t))
}

/// Largest `t ≥ 0` with `t·dir` in the convex hull of `pts`.
pub fn hull_extent(pts: &[[f64; 5]], dir: &[f64; 5]) -> Option<f64> {
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let t = p.add_var(1.0, (0.0, 100.0));
    let vars: Vec<_> = pts.iter().map(|_| p.add_var(0.0, (0.0, f64::INFINITY))).collect();
    add_hull_rows(&mut p, &vars, pts, &[(t, *dir)], &[0.0; 5]);
    p.solve().ok().map(|s| *s.var_value(t))
}

/// A basic feasible solution of `Σ c_k pts_k = target`, `Σ c_k = 1`, `c ≥ 0`.
pub fn convex_weights(pts: &[[f64; 5]], target: &[f64; 5]) -> Option<Vec<f64>> {
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = pts.iter().map(|_| p.add_var(0.0, (0.0, f64::INFINITY))).collect();
    add_hull_rows(&mut p, &vars, pts, &[], target);
    let s = p.solve().ok()?;
    Some(vars.iter().map(|v| *s.var_value(*v)).collect())
}

/// Rank of the point set's linear span (the origin is the centre).
pub fn rank(pts: &[[f64; 5]]) -> usize {
    let m = nalgebra::DMatrix::from_fn(5, pts.len(), |i, j| pts[j][i]);
    m.rank(1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coords_round_trip() {
        let m = [1.0, 0.2, -0.3, 0.2, 0.5, 0.7, -0.3, 0.7, 0.5];
        let x = traceless_coords(&m);
        let back = from_traceless(&x, 2.0);
        for (a, b) in m.iter().zip(back) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn margin_of_symmetric_cross() {
        let mut pts = Vec::new();
        for a in 0..5 {
            let mut e = [0.0; 5];
            e[a] = 1.0;
            pts.push(e);
            e[a] = -1.0;
            pts.push(e);
        }
        let m = interior_margin(&pts).unwrap();
        assert!((m - 0.1).abs() < 1e-9);
        assert_eq!(rank(&pts), 5);
        let t = hull_extent(&pts, &[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((t - 1.0).abs() < 1e-9);
    }
}
