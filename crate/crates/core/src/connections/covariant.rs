//! Affine covariant derivative of tensors of arbitrary variance.

use super::{idx3, ConnectionField};
use crate::error::{Error, Result};
use crate::field::{TensorFieldHandle, Variance};
use crate::manifold::Point;
use crate::real::{seed, Dual, Real};

/// Covariant derivative from components `t`, partials `dt[P]` and coefficients.
///
/// Output index is `component·D + P`. Upper slots add `Γ^a_{hP} t^{..h..}`,
/// lower slots subtract `Γ^h_{aP} t_{..h..}`.
pub fn nabla<T: Real>(t: &[T], dt: &[Vec<T>], gamma: &[T], variance: &[Variance], d: usize) -> Vec<T> {
    let rank = variance.len();
    let n = t.len();
    let strides: Vec<usize> = (0..rank).map(|s| d.pow((rank - 1 - s) as u32)).collect();
    let mut out = vec![T::zero(); n * d];
    for i in 0..n {
        for p in 0..d {
            out[i * d + p] = dt[p][i];
        }
        for (s, var) in variance.iter().enumerate() {
            let st = strides[s];
            let a = (i / st) % d;
            let base = i - a * st;
            for h in 0..d {
                let th = t[base + h * st];
                if th.is_exact_zero() {
                    continue;
                }
                for p in 0..d {
                    let g = match var {
                        Variance::Upper => gamma[idx3(d, a, h, p)],
                        Variance::Lower => -gamma[idx3(d, h, a, p)],
                    };
                    out[i * d + p] = out[i * d + p] + g * th;
                }
            }
        }
    }
    out
}

/// All covariant derivatives `t_{;P}` of a tensor field at `x`.
pub fn covariant_jet<T: Real>(t: &TensorFieldHandle, conn: &ConnectionField, x: &[T]) -> Result<Vec<T>> {
    if t.dim != conn.dim {
        return Err(Error::Dimension { expected: conn.dim, got: t.dim });
    }
    let vals = t.eval_at(x);
    let dvals: Vec<Vec<T>> = (0..t.dim)
        .map(|p| t.eval_at(&seed(x, p)).into_iter().map(|v: Dual<T>| v.du).collect())
        .collect();
    let gamma = conn.coeffs(x)?;
    Ok(nabla(&vals, &dvals, &gamma, &t.variance, t.dim))
}

/// Covariant derivative along the zero-based direction `dir`.
pub fn covariant_derivative(t: &TensorFieldHandle, conn: &ConnectionField, p: &Point, dir: usize) -> Result<Vec<f64>> {
    if dir >= t.dim {
        return Err(Error::Contract(format!("direction {dir} out of range for D = {}", t.dim)));
    }
    if p.coords.len() != t.dim {
        return Err(Error::Dimension { expected: t.dim, got: p.coords.len() });
    }
    let all = covariant_jet(t, conn, &p.coords)?;
    let d = t.dim;
    let out: Vec<f64> = (0..all.len() / d).map(|i| all[i * d + dir]).collect();
    if let Some(component) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { component, point: p.coords.clone() });
    }
    Ok(out)
}
