//! Construction and validation of sector reference systems.
//!
//! The outer frame is block diagonal: identity on the external coordinates
//! and `O(x)·diag(c)` on the internal ones, with `O` a product of plane
//! rotations and `c` constant. A raw internal matrix may be supplied instead;
//! it is accepted only if the resulting metric passes validation.

use super::{Sector, EXTERNAL_DIM};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::frames::{FrameField, ReferenceSystemStack};
use crate::manifold::Point;
use serde::{Deserialize, Serialize};

/// Rotation by `angle(x)` in the plane of internal coordinates `(i, j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneRotation {
    pub i: usize,
    pub j: usize,
    pub angle: Expr,
}

/// Generator of the internal block of a sector frame.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InternalGenerator {
    /// Constant column scales, one per internal coordinate; empty means all ones.
    pub scales: Vec<f64>,
    pub rotations: Vec<PlaneRotation>,
    /// Raw internal block (row-major, `(D−3)²` entries), replacing the rotations.
    pub matrix: Option<Vec<Expr>>,
    /// Inner frame; identity when absent.
    pub inner: Option<FrameField>,
}

fn matmul_expr(a: &[Expr], b: &[Expr], n: usize) -> Vec<Expr> {
    let mut out = vec![Expr::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Expr::zero();
            for k in 0..n {
                acc = acc + &a[i * n + k] * &b[k * n + j];
            }
            out[i * n + j] = acc;
        }
    }
    out
}

fn identity_expr(n: usize) -> Vec<Expr> {
    (0..n * n).map(|k| if k % (n + 1) == 0 { Expr::one() } else { Expr::zero() }).collect()
}

impl InternalGenerator {
    /// Internal block `O(x)·diag(c)` or the raw matrix.
    pub fn internal_block(&self, n: usize) -> Result<Vec<Expr>> {
        let scales = if self.scales.is_empty() { vec![1.0; n] } else { self.scales.clone() };
        if scales.len() != n {
            return Err(Error::Dimension { expected: n, got: scales.len() });
        }
        let mut o = match &self.matrix {
            Some(m) if m.len() != n * n => return Err(Error::Dimension { expected: n * n, got: m.len() }),
            Some(m) => m.clone(),
            None => {
                let mut o = identity_expr(n);
                for r in &self.rotations {
                    if r.i >= n || r.j >= n || r.i == r.j {
                        return Err(Error::Config(format!("rotation plane ({}, {}) invalid for {n} internal coordinates", r.i, r.j)));
                    }
                    let mut rm = identity_expr(n);
                    rm[r.i * n + r.i] = r.angle.cos();
                    rm[r.i * n + r.j] = -r.angle.sin();
                    rm[r.j * n + r.i] = r.angle.sin();
                    rm[r.j * n + r.j] = r.angle.cos();
                    o = matmul_expr(&o, &rm, n);
                }
                o
            }
        };
        for i in 0..n {
            for j in 0..n {
                o[i * n + j] = &o[i * n + j] * &Expr::c(scales[j]);
            }
        }
        Ok(o)
    }
}

/// Embeds an internal block into a `D × D` frame with identity external block.
pub fn embed_internal(d: usize, block: &[Expr]) -> FrameField {
    let n = d - EXTERNAL_DIM;
    let mut es = identity_expr(d);
    for i in 0..n {
        for j in 0..n {
            es[(i + EXTERNAL_DIM) * d + j + EXTERNAL_DIM] = block[i * n + j].clone();
        }
    }
    FrameField::from_exprs(d, es).expect("square block")
}

/// Builds the sector stack and validates it at `samples`.
pub fn build_sector_frame(sector: Sector, gen: &InternalGenerator, samples: &[Point], tol: f64) -> Result<ReferenceSystemStack> {
    let d = sector.dim();
    let outer = embed_internal(d, &gen.internal_block(d - EXTERNAL_DIM)?);
    let inner = gen.inner.clone().unwrap_or_else(|| FrameField::identity(d));
    let stack = ReferenceSystemStack::new(format!("{sector:?}"), outer, inner)?;
    validate_sector_stack(sector, &stack, samples, tol)?;
    Ok(stack)
}

fn fmt_point(x: &[f64]) -> String {
    format!("{x:.4?}")
}

/// Checks the block structure of both layers, constancy and diagonality of
/// the internal metric, and the sector's inverse-metric equalities.
pub fn validate_sector_stack(sector: Sector, stack: &ReferenceSystemStack, samples: &[Point], tol: f64) -> Result<()> {
    let d = sector.dim();
    sector.check_dim(stack.dim())?;
    let r = EXTERNAL_DIM;
    let reference = samples.first().map(|p| stack.metric().g_at(&p.coords));
    for p in samples {
        let x = &p.coords;
        for (layer, f) in [("outer", &stack.outer), ("inner", &stack.inner)] {
            let b = f.b_at(x);
            for m in 0..d {
                for a in 0..d {
                    let external = m < r || a < r;
                    let expect = if m == a && m < r { 1.0 } else { 0.0 };
                    if external && (b[a * d + m] - expect).abs() > tol {
                        return Err(Error::Constraint(format!(
                            "{layer} frame block structure violated at x = {}: B[{}][{}] = {}",
                            fmt_point(x),
                            a + 1,
                            m + 1,
                            b[a * d + m]
                        )));
                    }
                }
            }
        }
        let g = stack.metric().g_at(x);
        let g0 = reference.as_ref().expect("nonempty samples");
        for m in r..d {
            for n in r..d {
                let v = g[m * d + n];
                if m != n && v.abs() > tol {
                    return Err(Error::Constraint(format!(
                        "condition (ii) G_mn = 0 for m != n violated at x = {}: G_{}{} = {v}",
                        fmt_point(x),
                        m + 1,
                        n + 1
                    )));
                }
                if (v - g0[m * d + n]).abs() > tol {
                    return Err(Error::Constraint(format!(
                        "condition (i) G_mn constant violated at x = {}: G_{}{} = {v}",
                        fmt_point(x),
                        m + 1,
                        n + 1
                    )));
                }
            }
        }
        let ginv = stack.metric().g_inv_at(x)?;
        for group in sector.metric_groups() {
            let first = ginv[group[0] * d + group[0]];
            for &k in &group[1..] {
                if (ginv[k * d + k] - first).abs() > tol {
                    return Err(Error::Constraint(format!(
                        "sector metric equality G^{}{} = G^{}{} violated at x = {}",
                        group[0] + 1,
                        group[0] + 1,
                        k + 1,
                        k + 1,
                        fmt_point(x)
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::ConnectionField;
    use crate::manifold::Sampling;
    use crate::sectors::{decompose_weak_em, LEPTON_BASE};

    fn pts() -> Vec<Point> {
        Sampling { count: 20, ..Sampling::default() }.points(5)
    }

    #[test]
    fn trivial_generator_gives_identity_stack() {
        let s = build_sector_frame(Sector::WeakEm, &InternalGenerator::default(), &pts(), 1e-12).unwrap();
        assert_eq!(s.outer.b_at(&[0.3; 5]), crate::linalg::identity::<f64>(5));
        let dec = decompose_weak_em(&ConnectionField::holonomic(&s), &s.metric(), &pts()[0]).unwrap();
        assert!(dec.potentials.values().all(|v| v.iter().all(|x| *x == 0.0)));
    }

    #[test]
    fn rotation_generator_has_scaled_metric() {
        let gen = InternalGenerator {
            scales: vec![1.5, 1.5],
            rotations: vec![PlaneRotation { i: 0, j: 1, angle: Expr::parse("(* 0.7 x1)").unwrap() }],
            ..Default::default()
        };
        let s = build_sector_frame(Sector::WeakEm, &gen, &pts(), 1e-12).unwrap();
        let g = s.metric().g_at(&[0.4, 0.1, -0.2, 0.3, 0.9]);
        let b = LEPTON_BASE;
        assert!((g[b * 5 + b] - 2.25).abs() < 1e-14 && g[b * 5 + b + 1].abs() < 1e-14);
    }

    #[test]
    fn shear_generator_is_rejected() {
        let gen = InternalGenerator {
            matrix: Some(vec![Expr::one(), Expr::c(0.5), Expr::zero(), Expr::one()]),
            ..Default::default()
        };
        let e = build_sector_frame(Sector::WeakEm, &gen, &pts(), 1e-12).unwrap_err();
        assert!(e.to_string().contains("condition (ii)"), "{e}");
    }

    #[test]
    fn unequal_scales_violate_sector_equality() {
        let gen = InternalGenerator { scales: vec![1.0, 2.0], ..Default::default() };
        let e = build_sector_frame(Sector::WeakEm, &gen, &pts(), 1e-12).unwrap_err();
        assert!(e.to_string().contains("G^44 = G^55"), "{e}");
    }

    #[test]
    fn position_dependent_scale_violates_constancy() {
        let gen = InternalGenerator {
            matrix: Some(vec![Expr::parse("(+ 1.0 (* 0.2 x1))").unwrap(), Expr::zero(), Expr::zero(), Expr::parse("(+ 1.0 (* 0.2 x1))").unwrap()]),
            ..Default::default()
        };
        let e = build_sector_frame(Sector::WeakEm, &gen, &pts(), 1e-12).unwrap_err();
        assert!(e.to_string().contains("condition (i)"), "{e}");
    }
}
