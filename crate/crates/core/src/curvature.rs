//! Curvature tensors, covariant divergence, the affine Yang-Mills residual and
//! charge extraction.
//!
//! `K^M_NPQ` is stored flat at index `((M·D + N)·D + P)·D + Q`.

use crate::connections::laws::contract_trailing;
use crate::connections::{idx3, lower_first, nabla, ConnectionField, ConnectionKind};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::Variance;
use crate::frames::{FrameField, MetricField};
use crate::linalg::{dot, matvec, max_abs, max_abs_diff};
use crate::manifold::Point;
use crate::real::{seed, Dual, Real};

#[inline]
pub fn idx4(d: usize, m: usize, n: usize, p: usize, q: usize) -> usize {
    ((m * d + n) * d + p) * d + q
}

/// Partial derivatives `∂_P Γ` for every direction.
pub fn connection_jet<T: Real>(conn: &ConnectionField, x: &[T]) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let g = conn.coeffs(x)?;
    let dg = (0..conn.dim)
        .map(|p| Ok(conn.coeffs(&seed(x, p))?.into_iter().map(|v: Dual<T>| v.du).collect()))
        .collect::<Result<Vec<Vec<T>>>>()?;
    Ok((g, dg))
}

/// `K^M_NPQ = ∂_P Γ^M_NQ − ∂_Q Γ^M_NP + Γ^M_HP Γ^H_NQ − Γ^H_NP Γ^M_HQ`.
pub fn curvature_from_jet<T: Real>(g: &[T], dg: &[Vec<T>], d: usize) -> Vec<T> {
    let mut k = vec![T::zero(); d * d * d * d];
    for m in 0..d {
        for n in 0..d {
            for p in 0..d {
                for q in (p + 1)..d {
                    let mut v = dg[p][idx3(d, m, n, q)] - dg[q][idx3(d, m, n, p)];
                    for h in 0..d {
                        v = v + g[idx3(d, m, h, p)] * g[idx3(d, h, n, q)] - g[idx3(d, h, n, p)] * g[idx3(d, m, h, q)];
                    }
                    k[idx4(d, m, n, p, q)] = v;
                    k[idx4(d, m, n, q, p)] = -v;
                }
            }
        }
    }
    k
}

pub fn curvature_coeffs<T: Real>(conn: &ConnectionField, x: &[T]) -> Result<Vec<T>> {
    let (g, dg) = connection_jet(conn, x)?;
    Ok(curvature_from_jet(&g, &dg, conn.dim))
}

/// Curvature tensor of a connection.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTensor {
    pub conn: ConnectionField,
}

impl CurvatureTensor {
    pub fn of(conn: &ConnectionField) -> Self {
        Self { conn: conn.clone() }
    }

    pub fn kind(&self) -> ConnectionKind {
        self.conn.kind
    }

    pub fn at(&self, p: &Point) -> Result<Vec<f64>> {
        let k = curvature_coeffs(&self.conn, &p.coords)?;
        if let Some(component) = k.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { component, point: p.coords.clone() });
        }
        Ok(k)
    }
}

/// `K_MNPQ = G_MH K^H_NPQ`.
pub fn lower_curvature<T: Real>(k: &[T], g: &[T], d: usize) -> Vec<T> {
    lower_first(k, g, d, 4)
}

/// Covariant divergence `K^M_NPQ^{:P} = G^{PP'} K^M_NPQ:P'`, index `(M·D + N)·D + Q`.
pub fn curvature_divergence<T: Real>(conn: &ConnectionField, metric: &MetricField, x: &[T]) -> Result<Vec<T>> {
    let d = conn.dim;
    let (g, dg) = connection_jet(conn, x)?;
    let k = curvature_from_jet(&g, &dg, d);
    let dk = (0..d)
        .map(|p| Ok(curvature_coeffs(conn, &seed(x, p))?.into_iter().map(|v: Dual<T>| v.du).collect()))
        .collect::<Result<Vec<Vec<T>>>>()?;
    let var = [Variance::Upper, Variance::Lower, Variance::Lower, Variance::Lower];
    let nk = nabla(&k, &dk, &g, &var, d);
    let ginv = metric.g_inv_at(x)?;
    let mut out = vec![T::zero(); d * d * d];
    for m in 0..d {
        for n in 0..d {
            for q in 0..d {
                let mut v = T::zero();
                for p in 0..d {
                    for p2 in 0..d {
                        let gi = ginv[p * d + p2];
                        if gi.is_exact_zero() {
                            continue;
                        }
                        v = v + gi * nk[idx4(d, m, n, p, q) * d + p2];
                    }
                }
                out[idx3(d, m, n, q)] = v;
            }
        }
    }
    Ok(out)
}

/// Unit evolution direction `ε^Q = v^Q/|v|` (Euclidean norm).
pub fn unit_direction(v: &[f64]) -> Result<Vec<f64>> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Contract("evolution direction must be nonzero".into()));
    }
    Ok(v.iter().map(|a| a / n).collect())
}

/// `ε̄_Q = G_QH ε^H / G_00` and `G_00 = G_MN ε^M ε^N`.
pub fn dual_direction(g: &[f64], eps: &[f64]) -> (Vec<f64>, f64) {
    let d = eps.len();
    let ge = matvec(g, eps, d);
    let g00 = dot(&ge, eps);
    (ge.iter().map(|v| v / g00).collect(), g00)
}

/// Charge and current on an evolution path through a point.
#[derive(Clone, Debug, PartialEq)]
pub struct ChargeCurrent {
    /// `ρ^M_N0` at index `M·D + N`.
    pub rho_mixed: Vec<f64>,
    /// `ρ_MN0 = G_MH ρ^H_N0`.
    pub rho_lower: Vec<f64>,
    /// `j^M_NQ = ρ^M_N0 ε̄_Q`.
    pub current: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub epsilon_bar: Vec<f64>,
}

/// Charge `ρ^M_N0 = K^M_NPQ^{:P} ε^Q` along the direction `v`.
pub fn extract_charge(conn: &ConnectionField, metric: &MetricField, p: &Point, v: &[f64]) -> Result<ChargeCurrent> {
    let div = curvature_divergence(conn, metric, &p.coords)?;
    charge_from_divergence(&div, &metric.g_at(&p.coords), v)
}

pub fn charge_from_divergence(div: &[f64], g: &[f64], v: &[f64]) -> Result<ChargeCurrent> {
    let d = v.len();
    let eps = unit_direction(v)?;
    let (eb, _) = dual_direction(g, &eps);
    let mut rho = vec![0.0; d * d];
    for mn in 0..d * d {
        rho[mn] = (0..d).map(|q| div[mn * d + q] * eps[q]).sum();
    }
    let mut j = vec![0.0; d * d * d];
    for mn in 0..d * d {
        for q in 0..d {
            j[mn * d + q] = rho[mn] * eb[q];
        }
    }
    Ok(ChargeCurrent { rho_lower: lower_first(&rho, g, d, 2), rho_mixed: rho, current: j, epsilon: eps, epsilon_bar: eb })
}

/// Yang-Mills residual report at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct YangMillsResidual {
    /// Max over all `(M, N, Q)` of `|K^{:P} − j|`.
    pub full: f64,
    /// Max over `Q` for the component that defines the direction.
    pub declared: f64,
    /// `|ε^Q ε̄_Q − 1|`.
    pub closure: f64,
    pub divergence_max: f64,
}

/// Gradient direction `G^{QH} K^m_{nPH}^{:P}` of one divergence component.
pub fn gradient_of_divergence(div: &[f64], ginv: &[f64], m: usize, n: usize) -> Vec<f64> {
    let d = (ginv.len() as f64).sqrt() as usize;
    let w: Vec<f64> = (0..d).map(|q| div[idx3(d, m, n, q)]).collect();
    matvec(ginv, &w, d)
}

/// Residual of `K^M_NPQ^{:P} = ρ^M_N0 ε̄_Q` for direction `v`, declared component `(m, n)`.
pub fn yang_mills_residual(conn: &ConnectionField, metric: &MetricField, p: &Point, v: &[f64], component: (usize, usize)) -> Result<YangMillsResidual> {
    let d = conn.dim;
    let div = curvature_divergence(conn, metric, &p.coords)?;
    let g = metric.g_at(&p.coords);
    let cc = charge_from_divergence(&div, &g, v)?;
    let diff: Vec<f64> = div.iter().zip(&cc.current).map(|(a, b)| a - b).collect();
    let (m, n) = component;
    let declared = (0..d).map(|q| diff[idx3(d, m, n, q)].abs()).fold(0.0, f64::max);
    Ok(YangMillsResidual {
        full: max_abs(&diff),
        declared,
        closure: (dot(&cc.epsilon, &cc.epsilon_bar) - 1.0).abs(),
        divergence_max: max_abs(&div),
    })
}

/// Max `|K^M_NPQ + K^M_PQN + K^M_QNP|`.
pub fn cyclic_sum_max(k: &[f64], d: usize) -> f64 {
    let mut w = 0.0f64;
    for m in 0..d {
        for n in 0..d {
            for p in 0..d {
                for q in 0..d {
                    let s = k[idx4(d, m, n, p, q)] + k[idx4(d, m, p, q, n)] + k[idx4(d, m, q, n, p)];
                    w = w.max(s.abs());
                }
            }
        }
    }
    w
}

/// Max `|K^M_NPQ + K^M_NQP|`.
pub fn antisymmetry_max(k: &[f64], d: usize) -> f64 {
    let mut w = 0.0f64;
    for m in 0..d {
        for n in 0..d {
            for p in 0..d {
                for q in 0..d {
                    w = w.max((k[idx4(d, m, n, p, q)] + k[idx4(d, m, n, q, p)]).abs());
                }
            }
        }
    }
    w
}

/// `(C_k K B_k)` on the first two slots, then the derivative slots contracted with `B_k`.
pub fn frame_transform_curvature(k_vals: &[f64], kb: &[f64], kc: &[f64], d: usize) -> Vec<f64> {
    let d2 = d * d;
    let mut t = vec![0.0; k_vals.len()];
    for m2 in 0..d {
        for n2 in 0..d {
            for pq in 0..d2 {
                let mut v = 0.0;
                for m in 0..d {
                    let c = kc[m2 * d + m];
                    if c == 0.0 {
                        continue;
                    }
                    for n in 0..d {
                        v += c * k_vals[(m * d + n) * d2 + pq] * kb[n * d + n2];
                    }
                }
                t[(m2 * d + n2) * d2 + pq] = v;
            }
        }
    }
    contract_trailing(&t, kb, d, 2)
}

/// Frame covariance of the gauge curvature: both sides of the frame law.
pub fn verify_curvature_frame_covariance(conn: &ConnectionField, k: &FrameField, samples: &[Point]) -> Result<f64> {
    if conn.kind != ConnectionKind::Gauge {
        return Err(Error::Contract("frame covariance applies to gauge curvature".into()));
    }
    let stack = conn.stack().ok_or_else(|| Error::Contract("connection has no stack".into()))?;
    let primed = CurvatureTensor::of(&ConnectionField::gauge(&stack.frame_transformed(k)?));
    let orig = CurvatureTensor::of(conn);
    let d = conn.dim;
    let mut worst = 0.0f64;
    for p in samples {
        let kb = k.b_at(&p.coords);
        let kc = k.c_at(&p.coords)?;
        let direct = contract_trailing(&primed.at(p)?, &kb, d, 2);
        let law = frame_transform_curvature(&orig.at(p)?, &kb, &kc, d);
        worst = worst.max(max_abs_diff(&direct, &law));
    }
    Ok(worst)
}

/// Coordinate covariance: curvature rebuilt in `x'` against `c K(ψ) b b b`.
pub fn verify_curvature_coordinate_covariance(conn: &ConnectionField, psi: &[Expr], samples: &[Point]) -> Result<f64> {
    let d = conn.dim;
    let primed = CurvatureTensor::of(&conn.rebuilt_under_coordinates(psi)?);
    let orig = CurvatureTensor::of(conn);
    let jac = crate::frames::jacobian_frame(psi, d);
    let mut worst = 0.0f64;
    for p in samples {
        let y: Vec<f64> = psi.iter().map(|e| e.eval(&p.coords)).collect();
        let b = jac.b_at(&p.coords);
        let c = jac.c_at(&p.coords)?;
        let law = frame_transform_curvature(&orig.at(&Point { coords: y })?, &b, &c, d);
        worst = worst.max(max_abs_diff(&primed.at(p)?, &law));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::laws::sine_warp;
    use crate::field::Field;
    use crate::frames::ReferenceSystemStack;
    use crate::linalg::identity;
    use crate::manifold::Sampling;

    fn rotation_outer(k: f64) -> FrameField {
        let th = Expr::c(k) * Expr::var(0);
        let mut es = vec![Expr::zero(); 25];
        for i in 0..3 {
            es[i * 6] = Expr::one();
        }
        es[18] = th.cos();
        es[19] = -th.sin();
        es[23] = th.sin();
        es[24] = th.cos();
        FrameField::from_exprs(5, es).unwrap()
    }

    pub(crate) fn curved_inner() -> FrameField {
        let mut inner = vec![Expr::zero(); 25];
        for i in 0..5 {
            inner[i * 6] = Expr::one();
        }
        inner[18] = Expr::parse("(+ 1.0 (* 0.3 (sin (+ x1 x2))))").unwrap();
        inner[19] = Expr::parse("(* 0.25 (cos (* x2 x1)))").unwrap();
        inner[23] = Expr::parse("(* 0.2 (sin x1))").unwrap();
        inner[16] = Expr::parse("(* 0.3 (sin (+ x1 x5)))").unwrap();
        inner[24] = Expr::parse("(exp (* 0.2 (* x2 x5)))").unwrap();
        FrameField::from_exprs(5, inner).unwrap()
    }

    /// FD oracle on the defining formula, differentiating the coefficients numerically.
    fn curvature_fd(conn: &ConnectionField, x: &[f64]) -> Vec<f64> {
        let d = conn.dim;
        let h = 1e-5;
        let g = conn.coeffs(x).unwrap();
        let dg: Vec<Vec<f64>> = (0..d)
            .map(|p| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[p] += h;
                xm[p] -= h;
                conn.coeffs(&xp).unwrap().iter().zip(conn.coeffs(&xm).unwrap()).map(|(a, b)| (a - b) / (2.0 * h)).collect()
            })
            .collect();
        let mut k = vec![0.0; d * d * d * d];
        for m in 0..d {
            for n in 0..d {
                for p in 0..d {
                    for q in 0..d {
                        let mut v = dg[p][idx3(d, m, n, q)] - dg[q][idx3(d, m, n, p)];
                        for hh in 0..d {
                            v += g[idx3(d, m, hh, p)] * g[idx3(d, hh, n, q)] - g[idx3(d, hh, n, p)] * g[idx3(d, m, hh, q)];
                        }
                        k[idx4(d, m, n, p, q)] = v;
                    }
                }
            }
        }
        k
    }

    fn pts(n: usize) -> Vec<Point> {
        (Sampling { count: n, seed: 11, lo: -0.8, hi: 0.8 }).points(5)
    }

    #[test]
    fn zero_and_pure_gauge_curvature_vanish() {
        let z = CurvatureTensor::of(&ConnectionField::zero(5));
        assert!(z.at(&Point::origin(5)).unwrap().iter().all(|v| *v == 0.0));
        let outer = rotation_outer(0.6).compose(&FrameField::diag(vec![Expr::parse("(+ 1.5 (sin (* x2 x4)))").unwrap(); 5])).unwrap();
        let k = CurvatureTensor::of(&ConnectionField::gauge(&ReferenceSystemStack::trivial_inner("g", outer)));
        for p in pts(20) {
            assert!(max_abs(&k.at(&p).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn curved_inner_curvature_matches_fd_oracle() {
        let s = ReferenceSystemStack::new("c", FrameField::identity(5), curved_inner()).unwrap();
        let conn = ConnectionField::gauge(&s);
        let kt = CurvatureTensor::of(&conn);
        for p in pts(5) {
            let k = kt.at(&p).unwrap();
            assert!(max_abs_diff(&k, &curvature_fd(&conn, &p.coords)) < 1e-7);
            assert!(antisymmetry_max(&k, 5) == 0.0);
        }
        let x = [0.3, 0.2, 0.0, 0.1, -0.4];
        let k = kt.at(&Point { coords: x.to_vec() }).unwrap()[idx4(5, 3, 4, 0, 1)];
        let fd = curvature_fd(&conn, &x)[idx4(5, 3, 4, 0, 1)];
        assert!((k - fd).abs() < 1e-9 && k.abs() > 1e-4);
    }

    #[test]
    fn lowering_is_a_contraction() {
        let s = ReferenceSystemStack::new("c", rotation_outer(0.3), curved_inner()).unwrap();
        let p = Point { coords: vec![0.1, -0.2, 0.3, 0.4, 0.5] };
        let k = CurvatureTensor::of(&ConnectionField::holonomic(&s)).at(&p).unwrap();
        assert_eq!(lower_curvature(&k, &identity::<f64>(5), 5), k);
        let g: Vec<f64> = (0..25).map(|i| if i % 6 == 0 { 2.0 } else { 0.1 * (i as f64).cos() }).collect();
        let low = lower_curvature(&k, &g, 5);
        for m in 0..5 {
            for r in 0..125 {
                let e: f64 = (0..5).map(|h| g[m * 5 + h] * k[h * 125 + r]).sum();
                assert!((e - low[m * 125 + r]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn christoffel_curvature_cyclic_sum_vanishes() {
        let f = FrameField::diag(vec![
            Expr::parse("(+ 1.5 (sin x2))").unwrap(),
            Expr::parse("(exp (* 0.3 x1))").unwrap(),
            Expr::one(),
            Expr::parse("(+ 2.0 (* x1 x3))").unwrap(),
            Expr::one(),
        ]);
        let conn = ConnectionField::christoffel(&MetricField { frame: f });
        for p in pts(5) {
            let k = CurvatureTensor::of(&conn).at(&p).unwrap();
            assert!(cyclic_sum_max(&k, 5) < 1e-12);
            assert!(max_abs(&k) > 1e-3);
        }
    }

    /// Term-by-term oracle for the divergence using FD on the curvature.
    fn divergence_fd(conn: &ConnectionField, metric: &MetricField, x: &[f64]) -> Vec<f64> {
        let d = conn.dim;
        let h = 1e-4;
        let k = curvature_coeffs(conn, x).unwrap();
        let g = conn.coeffs(x).unwrap();
        let gi = metric.g_inv_at(x).unwrap();
        let dk: Vec<Vec<f64>> = (0..d)
            .map(|p| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[p] += h;
                xm[p] -= h;
                let a = curvature_coeffs(conn, &xp).unwrap();
                let b = curvature_coeffs(conn, &xm).unwrap();
                a.iter().zip(&b).map(|(u, v)| (u - v) / (2.0 * h)).collect()
            })
            .collect();
        let mut out = vec![0.0; d * d * d];
        for m in 0..d {
            for n in 0..d {
                for q in 0..d {
                    let mut s = 0.0;
                    for p in 0..d {
                        for p2 in 0..d {
                            let mut v = dk[p2][idx4(d, m, n, p, q)];
                            for hh in 0..d {
                                v += g[idx3(d, m, hh, p2)] * k[idx4(d, hh, n, p, q)];
                                v -= g[idx3(d, hh, n, p2)] * k[idx4(d, m, hh, p, q)];
                                v -= g[idx3(d, hh, p, p2)] * k[idx4(d, m, n, hh, q)];
                                v -= g[idx3(d, hh, q, p2)] * k[idx4(d, m, n, p, hh)];
                            }
                            s += gi[p * d + p2] * v;
                        }
                    }
                    out[idx3(d, m, n, q)] = s;
                }
            }
        }
        out
    }

    #[test]
    fn divergence_examples() {
        let flat = ReferenceSystemStack::identity(5);
        let c = ConnectionField::holonomic(&flat);
        assert!(curvature_divergence(&c, &flat.metric(), &[0.2; 5]).unwrap().iter().all(|v| *v == 0.0));
        let pg = ReferenceSystemStack::trivial_inner("pg", rotation_outer(0.8));
        let c = ConnectionField::gauge(&pg);
        assert!(max_abs(&curvature_divergence(&c, &pg.metric(), &[0.2; 5]).unwrap()) < 1e-10);
        let s = ReferenceSystemStack::new("c", FrameField::diag(vec![Expr::parse("(+ 1.5 (* 0.2 (sin x3)))").unwrap(); 5]), curved_inner()).unwrap();
        let c = ConnectionField::holonomic(&s);
        let x = [0.1, 0.3, -0.2, 0.25, 0.4];
        let a = curvature_divergence(&c, &s.metric(), &x).unwrap();
        let b = divergence_fd(&c, &s.metric(), &x);
        assert!(max_abs_diff(&a, &b) < 1e-6, "{}", max_abs_diff(&a, &b));
        assert!(max_abs(&a) > 1e-3);
    }

    #[test]
    fn yang_mills_on_and_off_gradient() {
        let s = ReferenceSystemStack::new("c", FrameField::diag(vec![Expr::parse("(+ 1.5 (* 0.2 (sin x3)))").unwrap(); 5]), curved_inner()).unwrap();
        let conn = ConnectionField::holonomic(&s);
        let m = s.metric();
        let p = Point { coords: vec![0.1, 0.3, -0.2, 0.25, 0.4] };
        let div = curvature_divergence(&conn, &m, &p.coords).unwrap();
        let v = gradient_of_divergence(&div, &m.g_inv_at(&p.coords).unwrap(), 3, 4);
        let on = yang_mills_residual(&conn, &m, &p, &v, (3, 4)).unwrap();
        assert!(on.declared < 1e-10 && on.closure < 1e-14);
        let mut w = v.clone();
        w.rotate_left(1);
        let off = yang_mills_residual(&conn, &m, &p, &w, (3, 4)).unwrap();
        assert!(off.declared > 1e-5, "{}", off.declared);
        let flat = ReferenceSystemStack::identity(5);
        let r = yang_mills_residual(&ConnectionField::holonomic(&flat), &flat.metric(), &p, &[1.0, 0.0, 0.0, 0.0, 0.0], (3, 4)).unwrap();
        assert_eq!(r.full, 0.0);
        assert!(yang_mills_residual(&conn, &m, &p, &[0.0; 5], (3, 4)).is_err());
    }

    #[test]
    fn charge_can_be_nonzero_for_flat_outer_frame() {
        let s = ReferenceSystemStack::new("c", FrameField::identity(5), curved_inner()).unwrap();
        let conn = ConnectionField::holonomic(&s);
        let p = Point { coords: vec![0.1, 0.3, -0.2, 0.25, 0.4] };
        let cc = extract_charge(&conn, &s.metric(), &p, &[0.3, 0.1, 0.2, 0.5, 0.4]).unwrap();
        assert!(max_abs(&cc.rho_mixed) > 1e-4);
        let flat = ReferenceSystemStack::identity(5);
        let z = extract_charge(&ConnectionField::holonomic(&flat), &flat.metric(), &p, &[1.0; 5]).unwrap();
        assert!(z.rho_mixed.iter().all(|v| *v == 0.0));
        let g: Vec<f64> = (0..25).map(|i| if i % 6 == 0 { 3.0 } else { 0.0 }).collect();
        let div: Vec<f64> = (0..125).map(|i| (i as f64 * 0.37).sin()).collect();
        let cc = charge_from_divergence(&div, &g, &[1.0, 2.0, 0.0, 0.0, 1.0]).unwrap();
        for i in 0..25 {
            assert!((cc.rho_lower[i] - 3.0 * cc.rho_mixed[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_and_coordinate_covariance() {
        let s = ReferenceSystemStack::new("c", rotation_outer(0.4), curved_inner()).unwrap();
        let conn = ConnectionField::gauge(&s);
        let id = FrameField::identity(5);
        assert!(verify_curvature_frame_covariance(&conn, &id, &pts(3)).unwrap() < 1e-14);
        let k: Vec<f64> = (0..25).map(|i| if i % 6 == 0 { 1.2 } else { 0.15 * ((i * 3 % 7) as f64 - 3.0) }).collect();
        assert!(verify_curvature_frame_covariance(&conn, &FrameField::constant(5, &k), &pts(3)).unwrap() < 1e-8);
        let psi = sine_warp(5, &[0.1, -0.1, 0.05, 0.1, 0.08]);
        let h = ConnectionField::holonomic(&s);
        assert!(verify_curvature_coordinate_covariance(&h, &psi, &pts(3)).unwrap() < 1e-6);
        let _ = Field::Exprs(vec![]);
    }
}
