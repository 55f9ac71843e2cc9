//! Dense small-matrix helpers generic over [`Real`].
//!
//! Matrices are row-major `Vec<T>` of size `n × n`. These routines exist
//! because the geometric pipelines run at nested dual-number scalars, which
//! general-purpose linear algebra crates do not accept.

use crate::error::{Error, Result};
use crate::real::Real;

/// Singularity threshold on |det| for frame inversion.
pub const SINGULAR_DET: f64 = 1e-12;

pub fn identity<T: Real>(n: usize) -> Vec<T> {
    let mut m = vec![T::zero(); n * n];
    for i in 0..n {
        m[i * n + i] = T::one();
    }
    m
}

pub fn matmul<T: Real>(a: &[T], b: &[T], n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik.is_exact_zero() {
                continue;
            }
            for j in 0..n {
                out[i * n + j] = out[i * n + j] + aik * b[k * n + j];
            }
        }
    }
    out
}

pub fn transpose<T: Real>(a: &[T], n: usize) -> Vec<T> {
    let mut out = a.to_vec();
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j];
        }
    }
    out
}

pub fn matvec<T: Real>(a: &[T], v: &[T], n: usize) -> Vec<T> {
    (0..n)
        .map(|i| (0..n).fold(T::zero(), |acc, j| acc + a[i * n + j] * v[j]))
        .collect()
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Inverse and determinant by Gauss-Jordan elimination with partial pivoting.
pub fn inverse_det<T: Real>(a: &[T], n: usize) -> Result<(Vec<T>, T)> {
    let mut m = a.to_vec();
    let mut inv = identity::<T>(n);
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                m[i * n + col].value().abs().total_cmp(&m[j * n + col].value().abs())
            })
            .unwrap();
        let pv = m[pivot * n + col];
        if pv.value() == 0.0 || !pv.value().is_finite() {
            return Err(Error::Singular { point: vec![], det: 0.0 });
        }
        if pivot != col {
            for j in 0..n {
                m.swap(pivot * n + j, col * n + j);
                inv.swap(pivot * n + j, col * n + j);
            }
            det = -det;
        }
        det = det * pv;
        let r = T::one() / pv;
        for j in 0..n {
            m[col * n + j] = m[col * n + j] * r;
            inv[col * n + j] = inv[col * n + j] * r;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m[i * n + col];
            if f.is_exact_zero() {
                continue;
            }
            for j in 0..n {
                m[i * n + j] = m[i * n + j] - f * m[col * n + j];
                inv[i * n + j] = inv[i * n + j] - f * inv[col * n + j];
            }
        }
    }
    if det.value().abs() < SINGULAR_DET {
        return Err(Error::Singular { point: vec![], det: det.value() });
    }
    Ok((inv, det))
}

pub fn inverse<T: Real>(a: &[T], n: usize) -> Result<Vec<T>> {
    inverse_det(a, n).map(|(m, _)| m)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::Dual;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn multiply_back_gives_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=8 {
            let a: Vec<f64> = (0..n * n)
                .map(|k| rng.gen_range(-1.0..1.0) + if k % (n + 1) == 0 { 3.0 } else { 0.0 })
                .collect();
            let inv = inverse(&a, n).unwrap();
            let prod = matmul(&a, &inv, n);
            assert!(max_abs_diff(&prod, &identity(n)) < 1e-10);
        }
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let a = [2.0, -1.0, 0.5, 0.3, 1.5, -2.0, 1.0, 0.2, 0.7];
        let cof = a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
            + a[2] * (a[3] * a[7] - a[4] * a[6]);
        let (_, det) = inverse_det(&a, 3).unwrap();
        assert!((det - cof).abs() < 1e-13);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = [1.0, 2.0, 2.0, 4.0];
        assert!(matches!(inverse(&a, 2), Err(Error::Singular { .. })));
    }

    #[test]
    fn inverse_derivative_matches_formula() {
        // d(A^-1) = -A^-1 dA A^-1
        let a0 = [1.5, 0.2, -0.3, 0.9];
        let da = [0.1, -0.4, 0.7, 0.2];
        let a: Vec<Dual<f64>> = a0.iter().zip(&da).map(|(&r, &d)| Dual::new(r, d)).collect();
        let inv = inverse(&a, 2).unwrap();
        let i0 = inverse(&a0, 2).unwrap();
        let expect = matmul(&matmul(&i0, &da, 2), &i0, 2);
        for k in 0..4 {
            assert!((inv[k].du + expect[k]).abs() < 1e-13);
        }
    }
}
