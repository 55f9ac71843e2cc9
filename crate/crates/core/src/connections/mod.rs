//! Simple, gauge, Christoffel and holonomic connections built from
//! reference-system stacks, plus covariant differentiation.
//!
//! Coefficients `Γ^M_NP` are stored flat at index `(M·D + N)·D + P`.

pub mod covariant;
pub mod laws;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::frames::{FrameField, MetricField, ReferenceSystemStack};
use crate::linalg::{inverse, matmul};
use crate::manifold::Point;
use crate::real::{values, Real};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub use covariant::{covariant_derivative, covariant_jet, nabla};

/// Flat index of `Γ^M_NP`.
#[inline]
pub fn idx3(d: usize, m: usize, n: usize, p: usize) -> usize {
    (m * d + n) * d + p
}

/// Connection kind tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConnectionKind {
    Simple,
    Gauge,
    Christoffel,
    Holonomic,
    Explicit,
    Constrained,
    Zero,
}

/// Reassigns one `(upper, lower)` family `Γ^a_{b·}` as a constant linear
/// combination of current families, for every derivative index.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub target: (usize, usize),
    pub terms: Vec<((usize, usize), f64)>,
}

#[derive(Clone, Debug, PartialEq)]
enum Source {
    Zero,
    Simple(Arc<ReferenceSystemStack>),
    Gauge(Arc<ReferenceSystemStack>),
    Christoffel(MetricField),
    Holonomic(Arc<ReferenceSystemStack>),
    Explicit(Field),
    Constrained { base: Box<ConnectionField>, assignments: Arc<Vec<Assignment>> },
    FrameLaw { base: Box<ConnectionField>, k: FrameField },
    CoordinateLaw { base: Box<ConnectionField>, psi: Vec<crate::expr::Expr> },
}

/// Connection coefficients `Γ^M_NP(x)` with provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionField {
    pub kind: ConnectionKind,
    pub dim: usize,
    pub provenance: String,
    source: Source,
}

impl ConnectionField {
    pub fn zero(dim: usize) -> Self {
        Self { kind: ConnectionKind::Zero, dim, provenance: "zero".into(), source: Source::Zero }
    }

    /// Torsion-free simple connection `(^A_BC)` of the inner layer, in frame indices.
    pub fn simple(stack: &ReferenceSystemStack) -> Self {
        Self {
            kind: ConnectionKind::Simple,
            dim: stack.dim(),
            provenance: format!("simple({})", stack.label),
            source: Source::Simple(Arc::new(stack.clone())),
        }
    }

    pub fn gauge(stack: &ReferenceSystemStack) -> Self {
        Self {
            kind: ConnectionKind::Gauge,
            dim: stack.dim(),
            provenance: format!("gauge({})", stack.label),
            source: Source::Gauge(Arc::new(stack.clone())),
        }
    }

    pub fn christoffel(metric: &MetricField) -> Self {
        Self {
            kind: ConnectionKind::Christoffel,
            dim: metric.dim(),
            provenance: "christoffel".into(),
            source: Source::Christoffel(metric.clone()),
        }
    }

    /// `Γ = ½([ ] + { })` with the metric of the stack's outer frame.
    pub fn holonomic(stack: &ReferenceSystemStack) -> Self {
        Self {
            kind: ConnectionKind::Holonomic,
            dim: stack.dim(),
            provenance: format!("holonomic({})", stack.label),
            source: Source::Holonomic(Arc::new(stack.clone())),
        }
    }

    /// Coefficients given directly as a `D³` field.
    pub fn explicit(dim: usize, field: Field) -> Result<Self> {
        if field.len() != dim * dim * dim {
            return Err(Error::Dimension { expected: dim * dim * dim, got: field.len() });
        }
        Ok(Self { kind: ConnectionKind::Explicit, dim, provenance: "explicit".into(), source: Source::Explicit(field) })
    }

    /// Base connection with families overwritten by constant linear combinations, in order.
    pub fn constrained(base: ConnectionField, assignments: Vec<Assignment>) -> Result<Self> {
        let d = base.dim;
        for a in &assignments {
            let ok = |(u, l): (usize, usize)| u < d && l < d;
            if !ok(a.target) || !a.terms.iter().all(|(s, _)| ok(*s)) {
                return Err(Error::Contract("assignment index out of range".into()));
            }
        }
        Ok(Self {
            kind: ConnectionKind::Constrained,
            dim: d,
            provenance: format!("constrained({})", base.provenance),
            source: Source::Constrained { base: Box::new(base), assignments: Arc::new(assignments) },
        })
    }

    /// The stack this connection was built from, if any.
    pub fn stack(&self) -> Option<&ReferenceSystemStack> {
        match &self.source {
            Source::Simple(s) | Source::Gauge(s) | Source::Holonomic(s) => Some(s),
            Source::Constrained { base, .. } => base.stack(),
            _ => None,
        }
    }

    /// The connection before any imposed assignments.
    pub fn unconstrained(&self) -> &ConnectionField {
        match &self.source {
            Source::Constrained { base, .. } => base.unconstrained(),
            _ => self,
        }
    }

    /// True when `Γ^M_NP = Γ^M_PN` holds by construction.
    pub fn is_symmetric_by_construction(&self) -> bool {
        matches!(self.kind, ConnectionKind::Christoffel | ConnectionKind::Simple | ConnectionKind::Zero)
    }

    /// All `D³` coefficients at `x`.
    pub fn coeffs<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        let d = self.dim;
        if x.len() != d {
            return Err(Error::Dimension { expected: d, got: x.len() });
        }
        let out = match &self.source {
            Source::Zero => vec![T::zero(); d * d * d],
            Source::Simple(s) => simple_coeffs(s, x)?,
            Source::Gauge(s) => gauge_coeffs(s, x)?,
            Source::Christoffel(m) => christoffel_coeffs(m, x)?,
            Source::Holonomic(s) => {
                let g = gauge_coeffs(s, x)?;
                let c = christoffel_coeffs(&s.metric(), x)?;
                let half = T::cst(0.5);
                g.into_iter().zip(c).map(|(a, b)| half * (a + b)).collect()
            }
            Source::Explicit(f) => f.eval(x),
            Source::Constrained { base, assignments } => {
                let mut g = base.coeffs(x)?;
                apply_assignments(&mut g, assignments, d);
                g
            }
            Source::FrameLaw { base, k } => laws::frame_law(base, k, x)?,
            Source::CoordinateLaw { base, psi } => laws::coordinate_law(base, psi, x)?,
        };
        Ok(out)
    }

    /// Coefficients at a point as plain floats.
    pub fn at(&self, p: &Point) -> Result<Vec<f64>> {
        let v = self.coeffs(&p.coords)?;
        if let Some(component) = v.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { component, point: p.coords.clone() });
        }
        Ok(v)
    }

    /// Lowered coefficients `Γ_MNP = G_MH Γ^H_NP`.
    pub fn lowered_at(&self, g: &[f64], p: &Point) -> Result<Vec<f64>> {
        Ok(lower_first(&self.at(p)?, g, self.dim, 3))
    }

    /// Primed connection under the frame transformation `k`, evaluated from the
    /// transformation law with derivative slots contracted by `k`.
    pub fn frame_transformed(&self, k: &FrameField) -> Result<Self> {
        if k.dim != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: k.dim });
        }
        Ok(Self {
            kind: self.kind,
            dim: self.dim,
            provenance: format!("{}·k", self.provenance),
            source: Source::FrameLaw { base: Box::new(self.clone()), k: k.clone() },
        })
    }

    /// Primed connection under `x = ψ(x')`, evaluated from the coordinate law.
    pub fn coordinate_transformed(&self, psi: &[crate::expr::Expr]) -> Result<Self> {
        if psi.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: psi.len() });
        }
        Ok(Self {
            kind: self.kind,
            dim: self.dim,
            provenance: format!("{}∘ψ", self.provenance),
            source: Source::CoordinateLaw { base: Box::new(self.clone()), psi: psi.to_vec() },
        })
    }

    /// Same construction applied to the transformed underlying objects.
    pub fn rebuilt_under_coordinates(&self, psi: &[crate::expr::Expr]) -> Result<Self> {
        match &self.source {
            Source::Zero => Ok(self.clone()),
            Source::Gauge(s) => Ok(Self::gauge(&s.coordinate_transformed(psi)?)),
            Source::Holonomic(s) => Ok(Self::holonomic(&s.coordinate_transformed(psi)?)),
            Source::Christoffel(m) => {
                let jac = crate::frames::jacobian_frame(psi, self.dim);
                Ok(Self::christoffel(&MetricField { frame: m.frame.substitute(psi).compose(&jac)? }))
            }
            _ => Err(Error::Contract(format!("{:?} connections cannot be rebuilt from objects", self.kind))),
        }
    }
}

pub(crate) fn apply_assignments<T: Real>(g: &mut [T], assignments: &[Assignment], d: usize) {
    for a in assignments {
        for p in 0..d {
            let v = a
                .terms
                .iter()
                .fold(T::zero(), |acc, &((u, l), c)| acc + T::cst(c) * g[idx3(d, u, l, p)]);
            g[idx3(d, a.target.0, a.target.1, p)] = v;
        }
    }
}

/// Lowers the first slot of a rank-`rank` array with `g`.
pub fn lower_first<T: Real>(t: &[T], g: &[T], d: usize, rank: usize) -> Vec<T> {
    let stride = d.pow(rank as u32 - 1);
    let mut out = vec![T::zero(); t.len()];
    for m in 0..d {
        for h in 0..d {
            let gmh = g[m * d + h];
            if gmh.is_exact_zero() {
                continue;
            }
            for r in 0..stride {
                out[m * stride + r] = out[m * stride + r] + gmh * t[h * stride + r];
            }
        }
    }
    out
}

fn singular_at<T: Real>(x: &[T]) -> impl Fn(Error) -> Error + '_ {
    move |e| crate::frames::with_point(e, x)
}

/// `(^A_BC)` with chart-ξ derivatives taken through the pullback frame.
pub fn simple_coeffs<T: Real>(stack: &ReferenceSystemStack, x: &[T]) -> Result<Vec<T>> {
    let d = stack.dim();
    let mut out = vec![T::zero(); d * d * d];
    if stack.inner.is_constant() {
        return Ok(out);
    }
    let (_, dbf) = stack.inner.b_jet(x);
    let cf = stack.inner.c_at(x)?;
    let cp = stack.pullback_frame().c_at(x)?;
    // dxi[c][a*d+b] = ∂B𝔣^a_b/∂ξ^c
    let dxi: Vec<Vec<T>> = (0..d)
        .map(|c| {
            (0..d * d)
                .map(|ab| (0..d).fold(T::zero(), |acc, m| acc + cp[m * d + c] * dbf[m][ab]))
                .collect()
        })
        .collect();
    let half = T::cst(0.5);
    for a in 0..d {
        for b in 0..d {
            for c in b..d {
                let mut s = T::zero();
                for a2 in 0..d {
                    let cfa = cf[a * d + a2];
                    if cfa.is_exact_zero() {
                        continue;
                    }
                    s = s + cfa * (dxi[c][a2 * d + b] + dxi[b][a2 * d + c]);
                }
                out[idx3(d, a, b, c)] = half * s;
                out[idx3(d, a, c, b)] = half * s;
            }
        }
    }
    Ok(out)
}

/// `[^M_NP] = C^M_A ∂_P B^A_N + C^M_A (^A_BC) b^C_P B^B_N`.
pub fn gauge_coeffs<T: Real>(stack: &ReferenceSystemStack, x: &[T]) -> Result<Vec<T>> {
    let d = stack.dim();
    let (b, db) = stack.outer.b_jet(x);
    let c = match &stack.outer.c {
        Some(cf) => cf.eval(x),
        None => inverse(&b, d).map_err(singular_at(x))?,
    };
    let mut out = vec![T::zero(); d * d * d];
    for (p, dbp) in db.iter().enumerate() {
        let cdb = matmul(&c, dbp, d);
        for m in 0..d {
            for n in 0..d {
                out[idx3(d, m, n, p)] = cdb[m * d + n];
            }
        }
    }
    if !stack.inner.is_constant() {
        let s = simple_coeffs(stack, x)?;
        let bp = stack.pullback_frame().b_at(x);
        for p in 0..d {
            // S_p[a][b] = (^a_bC) b^C_p
            let mut sp = vec![T::zero(); d * d];
            for a in 0..d {
                for bb in 0..d {
                    sp[a * d + bb] = (0..d).fold(T::zero(), |acc, cc| acc + s[idx3(d, a, bb, cc)] * bp[cc * d + p]);
                }
            }
            let term = matmul(&matmul(&c, &sp, d), &b, d);
            for m in 0..d {
                for n in 0..d {
                    let i = idx3(d, m, n, p);
                    out[i] = out[i] + term[m * d + n];
                }
            }
        }
    }
    Ok(out)
}

/// `{^M_NP} = ½ G^MQ (∂_P G_NQ + ∂_N G_PQ − ∂_Q G_NP)`.
pub fn christoffel_coeffs<T: Real>(metric: &MetricField, x: &[T]) -> Result<Vec<T>> {
    let d = metric.dim();
    let mut out = vec![T::zero(); d * d * d];
    if metric.frame.is_constant() {
        return Ok(out);
    }
    let (g, dg) = metric.g_jet(x);
    let ginv = inverse(&g, d).map_err(singular_at(x))?;
    let half = T::cst(0.5);
    for n in 0..d {
        for p in n..d {
            // lowered Γ_{Q N P}
            let low: Vec<T> = (0..d)
                .map(|q| dg[p][n * d + q] + dg[n][p * d + q] - dg[q][n * d + p])
                .collect();
            for m in 0..d {
                let v = half * (0..d).fold(T::zero(), |acc, q| acc + ginv[m * d + q] * low[q]);
                out[idx3(d, m, n, p)] = v;
                out[idx3(d, m, p, n)] = v;
            }
        }
    }
    Ok(out)
}

/// Maximum `|Γ^M_NP − Γ^M_PN|` at a point.
pub fn torsion_max(g: &[f64], d: usize) -> f64 {
    let mut w = 0.0f64;
    for m in 0..d {
        for n in 0..d {
            for p in 0..d {
                w = w.max((g[idx3(d, m, n, p)] - g[idx3(d, m, p, n)]).abs());
            }
        }
    }
    w
}

/// Frame-valued helper used by tests and sectors: the point of a dual vector.
pub fn primal_point<T: Real>(x: &[T]) -> Point {
    Point { coords: values(x) }
}
