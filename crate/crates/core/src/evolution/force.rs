//! Lorentz-force form of `p_{P;0}` with both sides computed independently.

use super::{unit_gradient, Background, Charge};
use crate::connections::{covariant_jet, nabla, torsion_max};
use crate::curvature::{curvature_coeffs, idx4};
use crate::error::{Error, Result};
use crate::field::Variance;
use crate::real::{seed, Dual};
use serde::{Deserialize, Serialize};

/// Both sides of `p_{P;0} = E_{0;P} − p_Q ε^Q_{0;P} + [ρR_PQ] ε^Q_0` at a point.
///
/// Arrays are indexed `component·D + P` over the charge components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzForce {
    /// `ρ_{;P;Q} ε^Q`.
    pub lhs: Vec<f64>,
    pub energy_gradient: Vec<f64>,
    pub direction_term: Vec<f64>,
    pub curvature_term: Vec<f64>,
    pub residual: f64,
}

impl LorentzForce {
    pub fn rhs(&self) -> Vec<f64> {
        (0..self.lhs.len()).map(|i| self.energy_gradient[i] - self.direction_term[i] + self.curvature_term[i]).collect()
    }
}

/// Largest torsion accepted by the force identity.
pub const TORSION_TOL: f64 = 1e-10;

/// Force identity along the unit gradient direction of `charge` at `x`.
pub fn lorentz_force(charge: &Charge, bg: &Background, x: &[f64]) -> Result<LorentzForce> {
    let d = bg.dim();
    let conn = &bg.conn;
    let gamma = conn.coeffs(x)?;
    let torsion = torsion_max(&gamma, d);
    if torsion > TORSION_TOL {
        return Err(Error::Constraint(format!("force identity needs a torsion-free connection, torsion {torsion:e}")));
    }
    let rho = &charge.field;
    let var = rho.variance.clone();
    let n = rho.field.len();
    let vals = rho.eval_at(x);

    let jet = covariant_jet(rho, conn, x)?;
    let eps = unit_gradient(charge, bg, x)?;
    let mut djet = Vec::with_capacity(d);
    let mut deps = Vec::with_capacity(d);
    for q in 0..d {
        let xs = seed(x, q);
        djet.push(covariant_jet(rho, conn, &xs)?.into_iter().map(|v: Dual<f64>| v.du).collect::<Vec<_>>());
        deps.push(unit_gradient(charge, bg, &xs)?.into_iter().map(|v| v.du).collect::<Vec<_>>());
    }

    let mut var1 = var.clone();
    var1.push(Variance::Lower);
    let second = nabla(&jet, &djet, &gamma, &var1, d);
    let mut lhs = vec![0.0; n * d];
    for i in 0..n {
        for p in 0..d {
            lhs[i * d + p] = (0..d).map(|q| second[(i * d + p) * d + q] * eps[q]).sum();
        }
    }

    let e0: Vec<f64> = (0..n).map(|i| (0..d).map(|q| jet[i * d + q] * eps[q]).sum()).collect();
    let de0: Vec<Vec<f64>> = (0..d)
        .map(|p| (0..n).map(|i| (0..d).map(|q| djet[p][i * d + q] * eps[q] + jet[i * d + q] * deps[p][q]).sum()).collect())
        .collect();
    let energy_gradient = nabla(&e0, &de0, &gamma, &var, d);

    let eps_cov = nabla(&eps, &deps, &gamma, &[Variance::Upper], d);
    let mut direction_term = vec![0.0; n * d];
    for i in 0..n {
        for p in 0..d {
            direction_term[i * d + p] = (0..d).map(|q| jet[i * d + q] * eps_cov[q * d + p]).sum();
        }
    }

    let r = curvature_coeffs(conn, x)?;
    let rank = var.len();
    let strides: Vec<usize> = (0..rank).map(|s| d.pow((rank - 1 - s) as u32)).collect();
    let mut curvature_term = vec![0.0; n * d];
    for i in 0..n {
        for (s, &st) in strides.iter().enumerate() {
            let a = (i / st) % d;
            let base = i - a * st;
            for h in 0..d {
                let rh = vals[base + h * st];
                if rh == 0.0 {
                    continue;
                }
                for p in 0..d {
                    curvature_term[i * d + p] += rh * (0..d).map(|q| r[idx4(d, h, a, p, q)] * eps[q]).sum::<f64>();
                }
            }
            let _ = s;
        }
    }

    let mut out = LorentzForce { lhs, energy_gradient, direction_term, curvature_term, residual: 0.0 };
    out.residual = out.rhs().iter().zip(&out.lhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::tests::{curved_background, wavy_scalar};
    use super::*;
    use crate::expr::Expr;
    use crate::field::{Field, TensorFieldHandle};
    use crate::manifold::Sampling;

    fn tensor_charge(d: usize) -> Charge {
        let es: Vec<Expr> = (0..d * d)
            .map(|k| Expr::c(0.2 + 0.1 * (k % 7) as f64) * (Expr::var(k % d) + Expr::c(0.3) * Expr::var(k / d)).sin() + Expr::c(0.5 * (k % 3) as f64))
            .collect();
        let f = TensorFieldHandle::new(d, vec![Variance::Lower; 2], Field::Exprs(es)).unwrap();
        Charge::new(f, super::super::Functional::Component { m: 0, n: 1 }).unwrap()
    }

    #[test]
    fn flat_background_has_zero_curvature_term() {
        let c = tensor_charge(4);
        let f = lorentz_force(&c, &Background::flat(4), &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(f.curvature_term.iter().all(|v| *v == 0.0));
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn constant_direction_drops_middle_term() {
        let c = Charge::scalar(TensorFieldHandle::scalar(3, Expr::var(0) * Expr::c(2.0) + Expr::var(2))).unwrap();
        let f = lorentz_force(&c, &Background::flat(3), &[0.3, -0.2, 0.5]).unwrap();
        assert!(f.direction_term.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn curved_background_both_sides_agree() {
        let bg = curved_background(5);
        for c in [wavy_scalar(5), tensor_charge(5)] {
            for p in (Sampling { seed: 6, count: 5, lo: -0.6, hi: 0.6 }).points(5) {
                let f = lorentz_force(&c, &bg, &p.coords).unwrap();
                assert!(f.residual <= 1e-5, "{}", f.residual);
            }
        }
        let f = lorentz_force(&tensor_charge(5), &bg, &[0.1, 0.2, 0.0, -0.1, 0.3]).unwrap();
        assert!(f.curvature_term.iter().any(|v| v.abs() > 1e-3));
    }

    #[test]
    fn torsion_is_rejected() {
        let d = 3;
        let mut g = vec![Expr::zero(); 27];
        g[crate::connections::idx3(d, 0, 1, 2)] = Expr::c(0.5);
        let conn = crate::connections::ConnectionField::explicit(d, Field::Exprs(g)).unwrap();
        let bg = Background::new(conn, Background::flat(3).metric).unwrap();
        let c = Charge::scalar(TensorFieldHandle::scalar(3, Expr::var(0))).unwrap();
        assert!(matches!(lorentz_force(&c, &bg, &[0.0; 3]), Err(Error::Constraint(_))));
    }
}
