//! Symmetric eigenvalues, small least squares and golden-section search.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::scalar::{lit, to_f64, Real};

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues<T: Real>(m: &[Vec<T>]) -> Vec<T> {
    let n = m.len();
    if n == 2 {
        let (a, b, d) = (m[0][0], m[0][1], m[1][1]);
        let half = lit::<T>(0.5);
        let mean = half * (a + d);
        let rad = (half * (a - d)).hypot(b);
        return vec![mean - rad, mean + rad];
    }
    let mat = DMatrix::from_fn(n, n, |i, j| to_f64(m[i][j]));
    let mut ev: Vec<f64> = SymmetricEigen::new(mat).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev.into_iter().map(lit).collect()
}

pub fn min_eigenvalue<T: Real>(m: &[Vec<T>]) -> T {
    symmetric_eigenvalues(m)[0]
}

pub fn trace<T: Real>(m: &[Vec<T>]) -> T {
    (0..m.len()).map(|i| m[i][i]).sum()
}

/// Determinant via LU in double precision.
pub fn determinant<T: Real>(m: &[Vec<T>]) -> T {
    let n = m.len();
    if n == 2 {
        return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    }
    let mat = DMatrix::from_fn(n, n, |i, j| to_f64(m[i][j]));
    lit(mat.determinant())
}

/// Least-squares polynomial fit of `ys` against `ts`, coefficients in ascending degree.
pub fn polyfit<T: Real>(ts: &[T], ys: &[T], degree: usize) -> Vec<T> {
    let rows = ts.len();
    let a = DMatrix::from_fn(rows, degree + 1, |i, j| to_f64(ts[i]).powi(j as i32));
    let b = DVector::from_iterator(rows, ys.iter().map(|&y| to_f64(y)));
    let svd = a.svd(true, true);
    let c = svd.solve(&b, 1e-14).expect("svd solve");
    c.iter().map(|&v| lit(v)).collect()
}

/// Minimises a unimodal `f` on `[a, b]`; returns `(argmin, min)`.
pub fn golden_min<T: Real, F: FnMut(T) -> T>(mut f: F, mut a: T, mut b: T, tol: T) -> (T, T) {
    let inv_phi = (lit::<T>(5.0).sqrt() - T::one()) / lit(2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a).abs() > tol && iter < 200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_two_and_three() {
        let m = vec![vec![2.0f64, 1.0], vec![1.0, 2.0]];
        let e = symmetric_eigenvalues(&m);
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
        let m3 = vec![vec![4.0f64, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 2.0]];
        assert!((min_eigenvalue(&m3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_min(|t: f64| (t - 0.3).powi(2), -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9 && fx < 1e-18);
    }

    #[test]
    fn polyfit_recovers_cubic() {
        let ts: Vec<f64> = (0..50).map(|k| k as f64 / 49.0).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 1.0 - 2.0 * t + 0.5 * t * t * t).collect();
        let c = polyfit(&ts, &ys, 3);
        assert!((c[1] + 2.0).abs() < 1e-9 && (c[3] - 0.5).abs() < 1e-9);
    }
}
