//! Frame fields, metrics, time metrics, reference-system stacks and
//! transformation classification.
//!
//! A frame `B^A_M(x)` is stored row-major with the frame index `A` as row and
//! the coordinate index `M` as column; its inverse `C^M_A` is stored with `M`
//! as row.

pub mod cpt;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::Field;
use crate::linalg::{identity, inverse, inverse_det, matmul, max_abs_diff, transpose};
use crate::manifold::Point;
use crate::real::{seed, values, Dual, Real};
use std::sync::Arc;

/// Matrix-valued field `B^A_M(x)` with optional closed-form inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameField {
    pub dim: usize,
    pub b: Field,
    pub c: Option<Field>,
}

impl FrameField {
    pub fn new(dim: usize, b: Field) -> Result<Self> {
        if b.len() != dim * dim {
            return Err(Error::Dimension { expected: dim * dim, got: b.len() });
        }
        Ok(Self { dim, b, c: None })
    }

    /// Frame with a closed-form inverse supplied by the caller.
    pub fn with_inverse(dim: usize, b: Field, c: Field) -> Result<Self> {
        let mut f = Self::new(dim, b)?;
        if c.len() != dim * dim {
            return Err(Error::Dimension { expected: dim * dim, got: c.len() });
        }
        f.c = Some(c);
        Ok(f)
    }

    pub fn from_exprs(dim: usize, es: Vec<Expr>) -> Result<Self> {
        Self::new(dim, Field::Exprs(es))
    }

    pub fn identity(dim: usize) -> Self {
        Self::constant(dim, &identity::<f64>(dim))
    }

    pub fn constant(dim: usize, m: &[f64]) -> Self {
        Self { dim, b: Field::Exprs(m.iter().map(|&v| Expr::c(v)).collect()), c: None }
    }

    pub fn diag(entries: Vec<Expr>) -> Self {
        let d = entries.len();
        let mut es = vec![Expr::zero(); d * d];
        for (i, e) in entries.into_iter().enumerate() {
            es[i * d + i] = e;
        }
        Self { dim: d, b: Field::Exprs(es), c: None }
    }

    pub fn b_at<T: Real>(&self, x: &[T]) -> Vec<T> {
        self.b.eval(x)
    }

    /// Inverse frame at `x`; singularity errors carry the point.
    pub fn c_at<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        match &self.c {
            Some(c) => Ok(c.eval(x)),
            None => inverse(&self.b_at(x), self.dim).map_err(|e| with_point(e, x)),
        }
    }

    /// `B` and its partial derivatives `∂_P B` for every direction.
    pub fn b_jet<T: Real>(&self, x: &[T]) -> (Vec<T>, Vec<Vec<T>>) {
        let b = self.b_at(x);
        if self.is_constant() {
            return (b, vec![vec![T::zero(); self.dim * self.dim]; self.dim]);
        }
        let db = (0..self.dim)
            .map(|p| self.b.eval(&seed(x, p)).into_iter().map(|d: Dual<T>| d.du).collect())
            .collect();
        (b, db)
    }

    /// True when every component is a constant expression.
    pub fn is_constant(&self) -> bool {
        match &self.b {
            Field::Exprs(es) => es.iter().all(|e| e.as_const().is_some()),
            Field::Callback { .. } => false,
        }
    }

    /// Frame product `(B·k)^A_{M'} = B^A_M k^M_{M'}`.
    pub fn compose(&self, k: &FrameField) -> Result<FrameField> {
        if k.dim != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: k.dim });
        }
        let d = self.dim;
        match (&self.b, &k.b) {
            (Field::Exprs(a), Field::Exprs(b)) => {
                let mut out = Vec::with_capacity(d * d);
                for i in 0..d {
                    for j in 0..d {
                        out.push((0..d).fold(Expr::zero(), |acc, m| acc + &a[i * d + m] * &b[m * d + j]));
                    }
                }
                Ok(FrameField { dim: d, b: Field::Exprs(out), c: None })
            }
            _ => {
                let (a, b) = (self.clone(), k.clone());
                Ok(FrameField {
                    dim: d,
                    b: Field::callback(d * d, move |x| matmul(&a.b_at(x), &b.b_at(x), d)),
                    c: None,
                })
            }
        }
    }

    pub fn substitute(&self, map: &[Expr]) -> FrameField {
        FrameField { dim: self.dim, b: self.b.substitute(map), c: self.c.as_ref().map(|c| c.substitute(map)) }
    }

    /// Max |C·B − I| over the given points; used to validate supplied inverses.
    pub fn inverse_residual(&self, pts: &[Point]) -> Result<f64> {
        let mut worst = 0.0f64;
        for p in pts {
            let b = self.b_at(&p.coords);
            let c = self.c_at(&p.coords)?;
            let cb = matmul(&c, &b, self.dim);
            let bc = matmul(&b, &c, self.dim);
            let id = identity::<f64>(self.dim);
            worst = worst.max(max_abs_diff(&cb, &id)).max(max_abs_diff(&bc, &id));
        }
        Ok(worst)
    }

    /// Checks invertibility at every point, reporting the first failure.
    pub fn check_invertible(&self, pts: &[Point]) -> Result<()> {
        for p in pts {
            inverse_det(&self.b_at(&p.coords), self.dim).map_err(|e| with_point(e, &p.coords))?;
        }
        Ok(())
    }
}

/// Pointwise matrix inverse of a rank-2 field.
pub fn invert_frame(b: &FrameField) -> FrameField {
    let d = b.dim;
    let src = b.clone();
    let c = Field::callback(d * d, move |x| {
        inverse(&src.b_at(x), d).unwrap_or_else(|_| vec![f64::NAN; d * d])
    });
    FrameField { dim: d, b: c, c: None }
}

pub(crate) fn with_point<T: Real>(e: Error, x: &[T]) -> Error {
    match e {
        Error::Singular { det, .. } => Error::Singular { point: values(x), det },
        other => other,
    }
}

/// Metric data derived from a frame.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    pub frame: FrameField,
}

/// `G_MN = Σ_A B^A_M B^A_N`.
pub fn metric_lower<T: Real>(b: &[T], d: usize) -> Vec<T> {
    matmul(&transpose(b, d), b, d)
}

impl MetricField {
    pub fn dim(&self) -> usize {
        self.frame.dim
    }

    pub fn g_at<T: Real>(&self, x: &[T]) -> Vec<T> {
        metric_lower(&self.frame.b_at(x), self.dim())
    }

    /// `G^MN = Σ_A C^M_A C^N_A`.
    pub fn g_inv_at<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        let c = self.frame.c_at(x)?;
        Ok(matmul(&c, &transpose(&c, self.dim()), self.dim()))
    }

    /// `H_AB = Σ_M C^M_A C^M_B`.
    pub fn h_at<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        let c = self.frame.c_at(x)?;
        Ok(matmul(&transpose(&c, self.dim()), &c, self.dim()))
    }

    /// `G` and `∂_P G` for every direction.
    pub fn g_jet<T: Real>(&self, x: &[T]) -> (Vec<T>, Vec<Vec<T>>) {
        let d = self.dim();
        let (b, db) = self.frame.b_jet(x);
        let bt = transpose(&b, d);
        let g = matmul(&bt, &b, d);
        let dg = db
            .iter()
            .map(|dbp| {
                let a = matmul(&transpose(dbp, d), &b, d);
                let c = matmul(&bt, dbp, d);
                a.iter().zip(&c).map(|(&u, &v)| u + v).collect()
            })
            .collect();
        (g, dg)
    }
}

/// Metric tensors of a frame.
pub fn metric_from_frame(f: &FrameField) -> MetricField {
    MetricField { frame: f.clone() }
}

/// Quadratic forms of a displacement under the frame metric and the time metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeMetric {
    pub dxi0_sq: f64,
    pub dx0_sq: f64,
    pub dxi_external_sq: f64,
    pub dxi_internal_sq: f64,
    pub dx_external_sq: f64,
    pub dx_internal_sq: f64,
}

/// Splits of `G dx dx` and `Σ dx²` into external and internal parts.
pub fn time_metric(f: &FrameField, p: &Point, dx: &[f64], external_dim: usize) -> Result<TimeMetric> {
    let d = f.dim;
    if dx.len() != d || p.coords.len() != d {
        return Err(Error::Dimension { expected: d, got: dx.len().min(p.coords.len()) });
    }
    let b = f.b_at(&p.coords);
    let dxi: Vec<f64> = (0..d).map(|a| (0..d).map(|m| b[a * d + m] * dx[m]).sum()).collect();
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let r = external_dim.min(d);
    Ok(TimeMetric {
        dxi0_sq: sq(&dxi),
        dx0_sq: sq(dx),
        dxi_external_sq: sq(&dxi[..r]),
        dxi_internal_sq: sq(&dxi[r..]),
        dx_external_sq: sq(&dx[..r]),
        dx_internal_sq: sq(&dx[r..]),
    })
}

/// Flags describing a frame transformation over a sample set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub is_identity: bool,
    pub is_flat: bool,
    pub is_orthogonal: bool,
    pub samples: usize,
}

/// Identity, flatness (constant `B`) and orthogonality (`G = δ`) over samples.
pub fn classify_transformation(f: &FrameField, pts: &[Point], tol: f64) -> Result<Classification> {
    if pts.is_empty() {
        return Err(Error::Contract("classification needs at least one sample".into()));
    }
    let d = f.dim;
    let id = identity::<f64>(d);
    let b0 = f.b_at(&pts[0].coords);
    let (mut ident, mut flat, mut orth) = (true, true, true);
    for p in pts {
        let b = f.b_at(&p.coords);
        ident &= max_abs_diff(&b, &id) <= tol;
        flat &= max_abs_diff(&b, &b0) <= tol;
        orth &= max_abs_diff(&metric_lower(&b, d), &id) <= tol;
    }
    Ok(Classification { is_identity: ident, is_flat: flat, is_orthogonal: orth, samples: pts.len() })
}

/// Two-layer reference system: outer frame `f` over `x`, inner frame `𝔣`
/// expressed over `x`, and the frame supplying the chain-rule pullback.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSystemStack {
    pub label: String,
    pub outer: FrameField,
    pub inner: FrameField,
    pub pullback: Option<FrameField>,
}

impl ReferenceSystemStack {
    pub fn new(label: impl Into<String>, outer: FrameField, inner: FrameField) -> Result<Self> {
        if outer.dim != inner.dim {
            return Err(Error::Dimension { expected: outer.dim, got: inner.dim });
        }
        Ok(Self { label: label.into(), outer, inner, pullback: None })
    }

    /// Stack with trivial inner layer.
    pub fn trivial_inner(label: impl Into<String>, outer: FrameField) -> Self {
        let d = outer.dim;
        Self { label: label.into(), outer, inner: FrameField::identity(d), pullback: None }
    }

    pub fn identity(dim: usize) -> Self {
        Self::trivial_inner("identity", FrameField::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.outer.dim
    }

    /// Frame supplying `b^C_P` and `c^M_C` in the chain rule (outer by default).
    pub fn pullback_frame(&self) -> &FrameField {
        self.pullback.as_ref().unwrap_or(&self.outer)
    }

    pub fn metric(&self) -> MetricField {
        metric_from_frame(&self.outer)
    }

    /// Reparameterizes every layer by `x ↦ map(x)` without Jacobian factors.
    pub fn substitute(&self, map: &[Expr]) -> Self {
        Self {
            label: self.label.clone(),
            outer: self.outer.substitute(map),
            inner: self.inner.substitute(map),
            pullback: self.pullback.as_ref().map(|p| p.substitute(map)),
        }
    }

    /// Frame transformation `B ↦ B·k`; the pullback stays on the original outer frame.
    pub fn frame_transformed(&self, k: &FrameField) -> Result<Self> {
        Ok(Self {
            label: format!("{}·k", self.label),
            outer: self.outer.compose(k)?,
            inner: self.inner.clone(),
            pullback: Some(self.pullback_frame().clone()),
        })
    }

    /// Coordinate change `x = ψ(x')`: `B'(x') = B(ψ(x'))·∂ψ/∂x'`, inner layer reparameterized.
    pub fn coordinate_transformed(&self, psi: &[Expr]) -> Result<Self> {
        let jac = jacobian_frame(psi, self.dim());
        let pull = |f: &FrameField| f.substitute(psi).compose(&jac);
        Ok(Self {
            label: format!("{}∘ψ", self.label),
            outer: pull(&self.outer)?,
            inner: self.inner.substitute(psi),
            pullback: match &self.pullback {
                Some(p) => Some(pull(p)?),
                None => None,
            },
        })
    }
}

/// Jacobian `∂ψ^M/∂x'^N` of a coordinate map as a frame field.
pub fn jacobian_frame(psi: &[Expr], d: usize) -> FrameField {
    let mut es = Vec::with_capacity(d * d);
    for m in 0..d {
        for n in 0..d {
            es.push(psi[m].diff(n));
        }
    }
    FrameField { dim: d, b: Field::Exprs(es), c: None }
}

/// Shared handle used when stacks are referenced by several connections.
pub type StackRef = Arc<ReferenceSystemStack>;
