//! Operator-picture checks along gradient lines: vector fields dragged by the
//! unit gradient flow and scalar observables differentiated along it.

use super::line::GradientLine;
use super::{unit_gradient, Background, Charge};
use crate::error::{Error, Result};
use crate::field::{TensorFieldHandle, Variance};
use crate::linalg::inverse;
use crate::real::{seed, Dual};
use serde::{Deserialize, Serialize};

/// Residuals of the two dual evolution pictures along one line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualResiduals {
    /// Max over interior samples of `|d/dx⁰ (J⁻¹X) − J⁻¹[H,X]|`.
    pub heisenberg: f64,
    /// Max over interior samples of `|H^N ∂_N f − d f/dx⁰|`.
    pub schrodinger: f64,
    /// Largest magnitude of `[H,X]` seen, to expose vacuous runs.
    pub bracket_max: f64,
    pub samples: usize,
}

/// Unit gradient `H` and its Jacobian `∂_N H^M` at `x`, row-major in `(M, N)`.
fn field_jet(charge: &Charge, bg: &Background, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = x.len();
    let h = unit_gradient(charge, bg, x)?;
    let mut dh = vec![0.0; d * d];
    for n in 0..d {
        let v: Vec<Dual<f64>> = unit_gradient(charge, bg, &seed(x, n))?;
        for m in 0..d {
            dh[m * d + n] = v[m].du;
        }
    }
    Ok((h, dh))
}

/// Lie bracket `[A,B]^M = A^N ∂_N B^M − B^N ∂_N A^M` from values and Jacobians.
fn bracket(a: &[f64], da: &[f64], b: &[f64], db: &[f64]) -> Vec<f64> {
    let d = a.len();
    (0..d).map(|m| (0..d).map(|n| a[n] * db[m * d + n] - b[n] * da[m * d + n]).sum()).collect()
}

fn vector_jet(x_field: &TensorFieldHandle, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d = x.len();
    let v = x_field.eval_at(x);
    let mut dv = vec![0.0; d * d];
    for n in 0..d {
        let s: Vec<Dual<f64>> = x_field.eval_at(&seed(x, n));
        for m in 0..d {
            dv[m * d + n] = s[m].du;
        }
    }
    (v, dv)
}

/// Flow points and Jacobians `J = ∂x(x⁰)/∂x(0)` by RK4 on the variational system.
fn flow_with_jacobian(charge: &Charge, bg: &Background, start: &[f64], step: f64, n: usize) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let d = start.len();
    let rhs = |x: &[f64], j: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        let (h, dh) = field_jet(charge, bg, x)?;
        Ok((h, crate::linalg::matmul(&dh, j, d)))
    };
    let add = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + s * q).collect() };
    let mut x = start.to_vec();
    let mut j = crate::linalg::identity::<f64>(d);
    let mut out = vec![(x.clone(), j.clone())];
    for _ in 0..n {
        let (k1x, k1j) = rhs(&x, &j)?;
        let (k2x, k2j) = rhs(&add(&x, 0.5 * step, &k1x), &add(&j, 0.5 * step, &k1j))?;
        let (k3x, k3j) = rhs(&add(&x, 0.5 * step, &k2x), &add(&j, 0.5 * step, &k2j))?;
        let (k4x, k4j) = rhs(&add(&x, step, &k3x), &add(&j, step, &k3j))?;
        x = (0..d).map(|i| x[i] + step / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i])).collect();
        j = (0..d * d).map(|i| j[i] + step / 6.0 * (k1j[i] + 2.0 * k2j[i] + 2.0 * k3j[i] + k4j[i])).collect();
        out.push((x.clone(), j.clone()));
    }
    Ok(out)
}

fn five_point<V: Fn(usize) -> f64>(v: V, k: usize, h: f64) -> f64 {
    (-v(k + 2) + 8.0 * v(k + 1) - 8.0 * v(k - 1) + v(k - 2)) / (12.0 * h)
}

/// Heisenberg and Schrödinger residuals along `line`, which must be the gradient line of `charge`.
///
/// The vector field `x_field` is pulled back by the flow, `Y(x⁰) = J⁻¹ X(x(x⁰))`,
/// and its five-point derivative is compared with `J⁻¹[H,X]`; the scalar `f`
/// is differentiated along the samples and compared with `H^N ∂_N f`.
pub fn heisenberg_schrodinger_check(
    charge: &Charge,
    bg: &Background,
    x_field: &TensorFieldHandle,
    f: &TensorFieldHandle,
    line: &GradientLine,
) -> Result<DualResiduals> {
    let d = bg.dim();
    if x_field.dim != d || x_field.variance != [Variance::Upper] {
        return Err(Error::Contract("dragged field must be an upper vector field on the chart".into()));
    }
    if f.dim != d || f.rank != 0 {
        return Err(Error::Contract("observable must be a scalar field on the chart".into()));
    }
    if line.len() < 5 {
        return Err(Error::Contract("dual checks need at least five samples".into()));
    }
    let h = line.step;
    let flow = flow_with_jacobian(charge, bg, &line.samples[0].point, h, line.len() - 1)?;
    let jinv: Vec<Vec<f64>> = flow.iter().map(|(_, j)| inverse(j, d)).collect::<Result<_>>()?;
    let pulled: Vec<Vec<f64>> =
        flow.iter().zip(&jinv).map(|((x, _), ji)| crate::linalg::matvec(ji, &x_field.eval_at(x), d)).collect();
    let fvals: Vec<f64> = line.samples.iter().map(|s| f.eval_at(&s.point)[0]).collect();

    let mut out = DualResiduals { heisenberg: 0.0, schrodinger: 0.0, bracket_max: 0.0, samples: line.len() - 4 };
    for k in 2..line.len() - 2 {
        let x = &flow[k].0;
        let (hv, dh) = field_jet(charge, bg, x)?;
        let (xv, dx) = vector_jet(x_field, x);
        let br = bracket(&hv, &dh, &xv, &dx);
        out.bracket_max = br.iter().fold(out.bracket_max, |m, v| m.max(v.abs()));
        let expect = crate::linalg::matvec(&jinv[k], &br, d);
        for m in 0..d {
            let fd = five_point(|i| pulled[i][m], k, h);
            out.heisenberg = out.heisenberg.max((fd - expect[m]).abs());
        }
        let s = &line.samples[k];
        let hf: f64 = (0..d).map(|n| s.tangent[n] * f.eval_at(&seed(&s.point, n))[0].du).sum();
        out.schrodinger = out.schrodinger.max((hf - five_point(|i| fvals[i], k, h)).abs());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::line::integrate_gradient_line;
    use super::super::tests::{curved_background, wavy_scalar};
    use super::*;
    use crate::expr::Expr;

    fn gradient_as_field(d: usize) -> TensorFieldHandle {
        let mut es = vec![Expr::zero(); d];
        es[0] = Expr::c(1.0);
        TensorFieldHandle::vector(d, es).unwrap()
    }

    #[test]
    fn flat_axis_flow_has_trivial_residuals() {
        let c = Charge::scalar(TensorFieldHandle::scalar(3, Expr::var(0))).unwrap();
        let bg = Background::flat(3);
        let l = integrate_gradient_line(&c, &bg, &[0.0; 3], 0.01, 20).unwrap();
        let r = heisenberg_schrodinger_check(&c, &bg, &gradient_as_field(3), &TensorFieldHandle::scalar(3, Expr::var(0)), &l).unwrap();
        assert!(r.heisenberg < 1e-12 && r.schrodinger < 1e-12 && r.bracket_max == 0.0);
    }

    #[test]
    fn bracket_matches_jet_evaluator() {
        let d = 3;
        let a = TensorFieldHandle::vector(d, vec![Expr::var(1).sin(), Expr::var(0) * Expr::var(2), Expr::c(1.0)]).unwrap();
        let b = TensorFieldHandle::vector(d, vec![Expr::var(2), Expr::var(0).cos(), Expr::var(1) * Expr::var(1)]).unwrap();
        let x = [0.3, -0.4, 0.7];
        let (av, da) = vector_jet(&a, &x);
        let (bv, db) = vector_jet(&b, &x);
        let ours = bracket(&av, &da, &bv, &db);
        let p = crate::manifold::Point { coords: x.to_vec() };
        let theirs = crate::field::JetEvaluator::default().lie_bracket(&a, &b, &p).unwrap();
        assert!(crate::linalg::max_abs_diff(&ours, &theirs) < 1e-12);
    }

    #[test]
    fn curved_residuals_shrink_with_step() {
        let bg = curved_background(5);
        let c = wavy_scalar(5);
        let xf = TensorFieldHandle::vector(
            5,
            (0..5).map(|i| Expr::c(0.5) * (Expr::var((i + 1) % 5) + Expr::c(i as f64 * 0.2)).cos() + Expr::c(0.1 * i as f64)).collect(),
        )
        .unwrap();
        let f = TensorFieldHandle::scalar(5, Expr::var(0) * Expr::var(3) + Expr::var(2).sin());
        let start = [0.1, -0.2, 0.3, 0.0, 0.2];
        let l = integrate_gradient_line(&c, &bg, &start, 0.01, 40).unwrap();
        let r = heisenberg_schrodinger_check(&c, &bg, &xf, &f, &l).unwrap();
        assert!(r.bracket_max > 1e-2);
        assert!(r.heisenberg <= 1e-4 && r.schrodinger <= 1e-4, "{r:?}");
        let coarse = heisenberg_schrodinger_check(&c, &bg, &xf, &f, &integrate_gradient_line(&c, &bg, &start, 0.04, 10).unwrap()).unwrap();
        assert!(coarse.heisenberg > r.heisenberg);
    }

    #[test]
    fn gradient_field_is_invariant_under_its_flow() {
        let bg = curved_background(4);
        let c = wavy_scalar(4);
        let l = integrate_gradient_line(&c, &bg, &[0.2, 0.1, -0.1, 0.0], 0.01, 20).unwrap();
        let flow = flow_with_jacobian(&c, &bg, &l.samples[0].point, 0.01, 20).unwrap();
        let h0 = unit_gradient(&c, &bg, &l.samples[0].point).unwrap();
        for (x, j) in &flow {
            let pulled = crate::linalg::matvec(&inverse(j, 4).unwrap(), &unit_gradient(&c, &bg, x).unwrap(), 4);
            assert!(crate::linalg::max_abs_diff(&pulled, &h0) < 1e-8);
        }
    }
}
