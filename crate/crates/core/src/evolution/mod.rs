//! Gradient fields of charges, gradient-line integration and the on-shell
//! evolution identities evaluated along them.

pub mod density;
pub mod dirac;
pub mod energy;
pub mod force;
pub mod heisenberg;
pub mod inversion;
pub mod line;

pub use density::{
    density_composability, estimate_density_momentum, estimate_density_position, propagator_sum, Composability, DensityEstimate, DensityKind,
    EnsembleSpec, MemberRecord, PropagatorEstimate, PropagatorWindow,
};
pub use dirac::{build_gamma_set, dirac_residual, orthogonal_action, DiracResidual, GammaSet};
pub use energy::{affine_action, energy_momentum, energy_momentum_residual, momentum_velocity_residual, path_action, EnergyMomentum};
pub use force::{lorentz_force, LorentzForce};
pub use heisenberg::{heisenberg_schrodinger_check, DualResiduals};
pub use inversion::{inverted_path_action, InvertedAction};
pub use line::{convergence_order, integrate_gradient_line, GradientLine, LineSample};

use crate::connections::{covariant_jet, ConnectionField};
use crate::error::{Error, Result};
use crate::field::{TensorFieldHandle, Variance};
use crate::frames::MetricField;
use crate::real::Real;
use serde::{Deserialize, Serialize};

/// Connection and metric of the geometry the charge evolves in.
#[derive(Clone, Debug)]
pub struct Background {
    pub conn: ConnectionField,
    pub metric: MetricField,
}

impl Background {
    pub fn new(conn: ConnectionField, metric: MetricField) -> Result<Self> {
        if conn.dim != metric.dim() {
            return Err(Error::Dimension { expected: conn.dim, got: metric.dim() });
        }
        Ok(Self { conn, metric })
    }

    pub fn dim(&self) -> usize {
        self.conn.dim
    }

    /// Zero connection with the Euclidean metric.
    pub fn flat(dim: usize) -> Self {
        let stack = crate::frames::ReferenceSystemStack::identity(dim);
        Self { conn: ConnectionField::zero(dim), metric: stack.metric() }
    }

    /// Zero connection with the metric frozen at its value at `x`.
    pub fn frozen_at(&self, x: &[f64]) -> Result<Self> {
        let d = self.dim();
        let g = nalgebra::DMatrix::from_row_slice(d, d, &self.metric.g_at(x));
        let chol = nalgebra::Cholesky::new(g)
            .ok_or_else(|| Error::Signature(format!("metric at {x:?} is not positive definite")))?;
        let b = chol.l().transpose();
        let rows: Vec<f64> = (0..d * d).map(|k| b[(k / d, k % d)]).collect();
        let stack = crate::frames::ReferenceSystemStack::trivial_inner("frozen", crate::frames::FrameField::constant(d, &rows));
        Ok(Self { conn: ConnectionField::zero(d), metric: stack.metric() })
    }
}

/// Scalar read out of a charge field to drive gradient lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Functional {
    /// The whole field when it is a scalar.
    Scalar,
    /// One zero-based component `ρ_mn` of a rank-2 field.
    Component { m: usize, n: usize },
    /// `Σ_MN ρ_MN`.
    Sum,
}

/// Charge field together with the scalar functional applied to it.
#[derive(Clone, Debug)]
pub struct Charge {
    pub field: TensorFieldHandle,
    pub functional: Functional,
}

impl Charge {
    pub fn new(field: TensorFieldHandle, functional: Functional) -> Result<Self> {
        let d = field.dim;
        match functional {
            Functional::Scalar if field.rank != 0 => Err(Error::Contract("scalar functional needs a rank-0 field".into())),
            Functional::Component { m, n } if field.rank != 2 || m >= d || n >= d => {
                Err(Error::Contract(format!("component ({m}, {n}) needs a rank-2 field with indices below {d}")))
            }
            Functional::Sum if field.rank != 2 => Err(Error::Contract("sum functional needs a rank-2 field".into())),
            _ if field.variance.contains(&Variance::Upper) => Err(Error::Contract("charge slots must be lower".into())),
            _ => Ok(Self { field, functional }),
        }
    }

    pub fn scalar(field: TensorFieldHandle) -> Result<Self> {
        Self::new(field, Functional::Scalar)
    }

    fn weights(&self) -> Vec<f64> {
        let n = self.field.field.len();
        let d = self.field.dim;
        match self.functional {
            Functional::Scalar | Functional::Sum => vec![1.0; n],
            Functional::Component { m, n: k } => (0..n).map(|i| if i == m * d + k { 1.0 } else { 0.0 }).collect(),
        }
    }

    /// Value of the functional.
    pub fn value<T: Real>(&self, x: &[T]) -> T {
        self.field.eval_at(x).into_iter().zip(self.weights()).fold(T::zero(), |acc, (v, w)| acc + v * T::cst(w))
    }

    /// Momentum `p_Q = ρ_{;Q}` of the functional.
    pub fn momentum<T: Real>(&self, conn: &ConnectionField, x: &[T]) -> Result<Vec<T>> {
        let d = self.field.dim;
        let jet = covariant_jet(&self.field, conn, x)?;
        let mut p = vec![T::zero(); d];
        for (i, w) in self.weights().into_iter().enumerate() {
            if w != 0.0 {
                for q in 0..d {
                    p[q] = p[q] + T::cst(w) * jet[i * d + q];
                }
            }
        }
        Ok(p)
    }

    /// Partial derivatives `P_Q = ∂_Q ρ` of the functional.
    pub fn partials(&self, x: &[f64]) -> Vec<f64> {
        (0..x.len()).map(|q| self.value(&crate::real::seed(x, q)).du).collect()
    }
}

/// Raises a covector with `G^{QP}`.
pub fn raise<T: Real>(ginv: &[T], p: &[T]) -> Vec<T> {
    let d = p.len();
    (0..d).map(|q| (0..d).fold(T::zero(), |acc, k| acc + ginv[q * d + k] * p[k])).collect()
}

/// Gradient `∇ρ = G^{QP} ρ_{;P} ∂_Q`.
pub fn gradient_field<T: Real>(charge: &Charge, bg: &Background, x: &[T]) -> Result<Vec<T>> {
    let p = charge.momentum(&bg.conn, x)?;
    Ok(raise(&bg.metric.g_inv_at(x)?, &p))
}

/// Smallest Euclidean gradient norm accepted as a direction.
pub const MIN_GRADIENT: f64 = 1e-12;

/// Unit gradient direction `ε^Q_0 = ∇ρ/|∇ρ|` with the Euclidean norm.
pub fn unit_gradient<T: Real>(charge: &Charge, bg: &Background, x: &[T]) -> Result<Vec<T>> {
    let v = gradient_field(charge, bg, x)?;
    let n = v.iter().fold(T::zero(), |acc, a| acc + *a * *a).sqrt();
    if !(n.value() > MIN_GRADIENT) {
        return Err(Error::Contract(format!("gradient vanishes at {:?}", x.iter().map(|a| a.value()).collect::<Vec<_>>())));
    }
    Ok(v.into_iter().map(|a| a / n).collect())
}
