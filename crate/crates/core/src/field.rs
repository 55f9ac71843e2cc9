//! Tensor fields as evaluable functions and the differentiation engine.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::manifold::Point;
use crate::real::{seed, CallbackFn, Real};
use std::fmt;
use std::sync::Arc;

/// Default finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Default identity-check tolerance on forward-mode paths.
pub const AD_TOLERANCE: f64 = 1e-8;
/// Default identity-check tolerance on finite-difference paths.
pub const FD_TOLERANCE: f64 = 1e-5;

/// Component payload of a field: closed-form expressions or an opaque callback.
#[derive(Clone)]
pub enum Field {
    Exprs(Vec<Expr>),
    Callback { len: usize, step: f64, f: Arc<CallbackFn> },
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Exprs(es) => f.debug_tuple("Exprs").field(&es.len()).finish(),
            Field::Callback { len, step, .. } => {
                f.debug_struct("Callback").field("len", len).field("step", step).finish()
            }
        }
    }
}

impl PartialEq for Field {
    fn eq(&self, o: &Self) -> bool {
        match (self, o) {
            (Field::Exprs(a), Field::Exprs(b)) => a == b,
            (Field::Callback { f: a, .. }, Field::Callback { f: b, .. }) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl Field {
    pub fn callback(len: usize, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Field::Callback { len, step: DEFAULT_FD_STEP, f: Arc::new(f) }
    }

    pub fn len(&self) -> usize {
        match self {
            Field::Exprs(es) => es.len(),
            Field::Callback { len, .. } => *len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether derivatives through this field are exact.
    pub fn is_closed_form(&self) -> bool {
        matches!(self, Field::Exprs(_))
    }

    pub fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        match self {
            Field::Exprs(es) => es.iter().map(|e| e.eval(x)).collect(),
            Field::Callback { step, f, .. } => T::apply_callback(f.as_ref(), x, *step),
        }
    }

    pub fn exprs(&self) -> Option<&[Expr]> {
        match self {
            Field::Exprs(es) => Some(es),
            Field::Callback { .. } => None,
        }
    }

    /// Reparameterizes by `x ↦ map(x)`; callbacks are wrapped.
    pub fn substitute(&self, map: &[Expr]) -> Field {
        match self {
            Field::Exprs(es) => Field::Exprs(es.iter().map(|e| e.substitute(map)).collect()),
            Field::Callback { len, step, f } => {
                let f = f.clone();
                let map = map.to_vec();
                Field::Callback {
                    len: *len,
                    step: *step,
                    f: Arc::new(move |x: &[f64]| {
                        let y: Vec<f64> = map.iter().map(|m| m.eval(x)).collect();
                        f(&y)
                    }),
                }
            }
        }
    }
}

/// Index position of a tensor slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Upper,
    Lower,
}

/// A tensor field of given rank and slot variances over a `dim`-dimensional chart.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorFieldHandle {
    pub dim: usize,
    pub rank: usize,
    pub variance: Vec<Variance>,
    pub field: Field,
}

impl TensorFieldHandle {
    pub fn new(dim: usize, variance: Vec<Variance>, field: Field) -> Result<Self> {
        let rank = variance.len();
        let expected = dim.pow(rank as u32);
        if field.len() != expected {
            return Err(Error::Dimension { expected, got: field.len() });
        }
        Ok(Self { dim, rank, variance, field })
    }

    pub fn scalar(dim: usize, e: Expr) -> Self {
        Self { dim, rank: 0, variance: vec![], field: Field::Exprs(vec![e]) }
    }

    pub fn vector(dim: usize, es: Vec<Expr>) -> Result<Self> {
        Self::new(dim, vec![Variance::Upper], Field::Exprs(es))
    }

    /// Evaluates all `D^rank` components at `p`.
    pub fn evaluate(&self, p: &Point) -> Result<Vec<f64>> {
        self.check_point(p)?;
        Ok(self.field.eval(&p.coords))
    }

    pub fn eval_at<T: Real>(&self, x: &[T]) -> Vec<T> {
        self.field.eval(x)
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        if p.coords.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: p.coords.len() });
        }
        Ok(())
    }
}

/// Differentiation mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JetMode {
    Ad,
    Fd,
}

/// Derivative engine: forward-mode dual numbers or central differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JetEvaluator {
    pub mode: JetMode,
    pub fd_step: f64,
}

impl Default for JetEvaluator {
    fn default() -> Self {
        Self { mode: JetMode::Ad, fd_step: DEFAULT_FD_STEP }
    }
}

impl JetEvaluator {
    pub fn fd(step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::Contract(format!("fd_step must be positive, got {step}")));
        }
        Ok(Self { mode: JetMode::Fd, fd_step: step })
    }

    /// Tolerance appropriate for identity checks in this mode.
    pub fn tolerance(&self) -> f64 {
        match self.mode {
            JetMode::Ad => AD_TOLERANCE,
            JetMode::Fd => FD_TOLERANCE,
        }
    }

    /// ∂(components)/∂x^dir at `p`; `dir` is zero-based.
    pub fn partial_derivative(&self, t: &TensorFieldHandle, p: &Point, dir: usize) -> Result<Vec<f64>> {
        t.check_point(p)?;
        if dir >= t.dim {
            return Err(Error::Contract(format!("direction {dir} out of range for D = {}", t.dim)));
        }
        let out: Vec<f64> = match self.mode {
            JetMode::Ad => t.field.eval(&seed(&p.coords, dir)).into_iter().map(|d| d.du).collect(),
            JetMode::Fd => {
                let mut xp = p.coords.clone();
                let mut xm = p.coords.clone();
                xp[dir] += self.fd_step;
                xm[dir] -= self.fd_step;
                let fp = t.field.eval(&xp);
                let fm = t.field.eval(&xm);
                fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * self.fd_step)).collect()
            }
        };
        if let Some(component) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { component, point: p.coords.clone() });
        }
        Ok(out)
    }

    /// [X,Y]^M = X^P ∂_P Y^M − Y^P ∂_P X^M.
    pub fn lie_bracket(&self, x: &TensorFieldHandle, y: &TensorFieldHandle, p: &Point) -> Result<Vec<f64>> {
        for f in [x, y] {
            if f.rank != 1 || f.variance[0] != Variance::Upper {
                return Err(Error::Contract("lie bracket needs upper vector fields".into()));
            }
        }
        let d = x.dim;
        let xv = x.evaluate(p)?;
        let yv = y.evaluate(p)?;
        let mut out = vec![0.0; d];
        for q in 0..d {
            let dy = self.partial_derivative(y, p, q)?;
            let dx = self.partial_derivative(x, p, q)?;
            for m in 0..d {
                out[m] += xv[q] * dy[m] - yv[q] * dx[m];
            }
        }
        Ok(out)
    }
}
