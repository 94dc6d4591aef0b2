//! Small dense helpers. Matrices are row-major `Vec<Vec<T>>`.

use crate::scalar::Scalar;
use crate::vector::dot;

pub(crate) type Matrix<T> = Vec<Vec<T>>;

pub(crate) fn mat_vec<T: Scalar>(m: &[Vec<T>], x: &[T]) -> Vec<T> {
    m.iter().map(|row| dot(row, x)).collect()
}

pub(crate) fn transpose<T: Scalar>(m: &[Vec<T>]) -> Matrix<T> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|row| row[j]).collect()).collect()
}

pub(crate) fn mat_mul<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Matrix<T> {
    let bt = transpose(b);
    a.iter().map(|row| bt.iter().map(|col| dot(row, col)).collect()).collect()
}

/// Lower-triangular Cholesky factor, `None` unless strictly positive definite.
pub(crate) fn cholesky<T: Scalar>(a: &[Vec<T>]) -> Option<Matrix<T>> {
    let n = a.len();
    let mut l = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: T = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > T::lit(64.0) * T::epsilon() * a[i][i].abs()) {
                    return None;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

pub(crate) fn cholesky_solve<T: Scalar>(l: &[Vec<T>], b: &[T]) -> Vec<T> {
    let n = l.len();
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let s: T = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let s: T = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    x
}

/// Gershgorin upper bound on the largest eigenvalue of a symmetric matrix.
pub(crate) fn gershgorin_max<T: Scalar>(a: &[Vec<T>]) -> T {
    a.iter()
        .enumerate()
        .map(|(i, row)| {
            row[i] + row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v.abs()).sum::<T>()
        })
        .fold(T::zero(), T::max)
}

/// Modified Gram-Schmidt on the rows of `m`; rows are assumed linearly independent.
pub(crate) fn orthonormalize<T: Scalar>(mut m: Matrix<T>) -> Matrix<T> {
    for i in 0..m.len() {
        for j in 0..i {
            let p = dot(&m[i], &m[j]);
            let (head, tail) = m.split_at_mut(i);
            for (x, &q) in tail[0].iter_mut().zip(&head[j]) {
                *x -= p * q;
            }
        }
        let n = dot(&m[i], &m[i]).sqrt();
        for x in m[i].iter_mut() {
            *x /= n;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        let a: Matrix<f64> = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let l = cholesky(&a).unwrap();
        let x = cholesky_solve(&l, &[1.0, 2.0]);
        let r = mat_vec(&a, &x);
        assert!((r[0] - 1.0).abs() < 1e-14 && (r[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        assert!(cholesky(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_none());
    }

    #[test]
    fn gram_schmidt_is_orthonormal() {
        let q = orthonormalize::<f64>(vec![vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]]);
        let g = mat_mul(&q, &transpose(&q));
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g[i][j] - e).abs() < 1e-14);
            }
        }
    }
}
