//! Coordinate and frame transformation laws of connections, with both-sides
//! verification against connections rebuilt from transformed objects.

use super::{idx3, ConnectionField, ConnectionKind};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::frames::{jacobian_frame, with_point, FrameField};
use crate::linalg::{inverse, max_abs_diff};
use crate::manifold::Point;
use crate::real::Real;

/// Contracts the last `slots` indices of `t` with `b^P_{P'}`.
pub fn contract_trailing<T: Real>(t: &[T], b: &[T], d: usize, slots: usize) -> Vec<T> {
    let mut cur = t.to_vec();
    for s in 0..slots {
        let stride = d.pow(s as u32);
        let mut next = vec![T::zero(); cur.len()];
        for i in 0..cur.len() {
            let p = (i / stride) % d;
            let base = i - p * stride;
            let v = cur[i];
            if v.is_exact_zero() {
                continue;
            }
            for p2 in 0..d {
                let j = base + p2 * stride;
                next[j] = next[j] + v * b[p * d + p2];
            }
        }
        cur = next;
    }
    cur
}

/// Right side of the frame law: `(C_k Γ_P B_k + C_k ∂_P B_k) b^P_{P'}` with `b = B_k`.
pub fn frame_law<T: Real>(base: &ConnectionField, k: &FrameField, x: &[T]) -> Result<Vec<T>> {
    let d = base.dim;
    let g = base.coeffs(x)?;
    let (kb, dkb) = k.b_jet(x);
    let kc = k.c_at(x)?;
    let mut inner = vec![T::zero(); d * d * d];
    for m2 in 0..d {
        for m in 0..d {
            let c = kc[m2 * d + m];
            if c.is_exact_zero() {
                continue;
            }
            for n2 in 0..d {
                for p in 0..d {
                    let mut v = dkb[p][m * d + n2];
                    for n in 0..d {
                        v = v + g[idx3(d, m, n, p)] * kb[n * d + n2];
                    }
                    let i = idx3(d, m2, n2, p);
                    inner[i] = inner[i] + c * v;
                }
            }
        }
    }
    Ok(contract_trailing(&inner, &kb, d, 1))
}

/// Right side of the coordinate law at `x'`: `c Γ(ψ(x')) b b + c ∂b`.
pub fn coordinate_law<T: Real>(base: &ConnectionField, psi: &[Expr], xp: &[T]) -> Result<Vec<T>> {
    let d = base.dim;
    let y: Vec<T> = psi.iter().map(|e| e.eval(xp)).collect();
    let g = base.coeffs(&y)?;
    let (b, db) = jacobian_frame(psi, d).b_jet(xp);
    let c = inverse(&b, d).map_err(|e| with_point(e, xp))?;
    let mut gb = vec![T::zero(); d * d * d];
    for m in 0..d {
        for n2 in 0..d {
            for p in 0..d {
                gb[idx3(d, m, n2, p)] = (0..d).fold(T::zero(), |acc, n| acc + g[idx3(d, m, n, p)] * b[n * d + n2]);
            }
        }
    }
    let gbb = contract_trailing(&gb, &b, d, 1);
    let mut out = vec![T::zero(); d * d * d];
    for m2 in 0..d {
        for m in 0..d {
            let cm = c[m2 * d + m];
            if cm.is_exact_zero() {
                continue;
            }
            for n2 in 0..d {
                for p2 in 0..d {
                    let i = idx3(d, m2, n2, p2);
                    out[i] = out[i] + cm * (gbb[idx3(d, m, n2, p2)] + db[p2][m * d + n2]);
                }
            }
        }
    }
    Ok(out)
}

/// Max residual between the coordinate law and the connection rebuilt from
/// transformed objects, over points of the primed chart.
pub fn verify_coordinate_transformation_law(conn: &ConnectionField, psi: &[Expr], samples: &[Point]) -> Result<f64> {
    let rebuilt = conn.rebuilt_under_coordinates(psi)?;
    let law = conn.coordinate_transformed(psi)?;
    let mut worst = 0.0f64;
    for p in samples {
        worst = worst.max(max_abs_diff(&rebuilt.at(p)?, &law.at(p)?));
    }
    Ok(worst)
}

/// Gauge connection of the frame-transformed stack with its derivative slot
/// contracted by `k`.
pub fn frame_direct(conn: &ConnectionField, k: &FrameField, p: &Point) -> Result<Vec<f64>> {
    if conn.kind != ConnectionKind::Gauge {
        return Err(Error::Contract("the frame law applies to gauge connections".into()));
    }
    let stack = conn.stack().ok_or_else(|| Error::Contract("connection has no stack".into()))?;
    let primed = ConnectionField::gauge(&stack.frame_transformed(k)?);
    Ok(contract_trailing(&primed.at(p)?, &k.b_at(&p.coords), conn.dim, 1))
}

/// Max residual of the frame law over samples.
pub fn verify_frame_transformation_law(conn: &ConnectionField, k: &FrameField, samples: &[Point]) -> Result<f64> {
    let law = conn.frame_transformed(k)?;
    let mut worst = 0.0f64;
    for p in samples {
        worst = worst.max(max_abs_diff(&frame_direct(conn, k, p)?, &law.at(p)?));
    }
    Ok(worst)
}

/// Componentwise map `x ↦ x + a·sin(x)` used for randomized coordinate changes.
pub fn sine_warp(d: usize, amp: &[f64]) -> Vec<Expr> {
    (0..d).map(|i| Expr::var(i) + Expr::c(amp[i]) * Expr::var(i).sin()).collect()
}
