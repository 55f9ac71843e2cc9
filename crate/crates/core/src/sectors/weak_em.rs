//! Weak-electromagnetic sector (D = 5): potentials, field strengths, the
//! four field-strength identities and the lepton evolution lines.

use super::terms::{evaluate_lines, lepton_lines, LineInputs, LineResiduals};
use super::{
    apply_all, charge_jets, lepton_charge_defs, lepton_potential_defs, lowered_connection, weak_em_potential_defs, Couplings,
    GaugeDecomposition, PairCombo, Sector, LEPTON_BASE,
};
use crate::connections::{lower_first, ConnectionField};
use crate::curvature::{curvature_coeffs, lower_curvature};
use crate::error::{Error, Result};
use crate::field::TensorFieldHandle;
use crate::frames::MetricField;
use crate::manifold::Point;
use crate::real::{seed, Dual};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Field strengths `B_PQ, F³_PQ, F¹_PQ, F²_PQ` as combinations of `K_mnPQ`.
fn field_strength_defs() -> Vec<PairCombo> {
    weak_em_potential_defs()
        .into_iter()
        .map(|c| PairCombo {
            name: match c.name {
                "B" => "B",
                "A3" => "F3",
                "A1" => "F1",
                _ => "F2",
            },
            ..c
        })
        .collect()
}

/// All named weak-electromagnetic combinations at `p`.
pub fn decompose_weak_em(conn: &ConnectionField, metric: &MetricField, p: &Point) -> Result<GaugeDecomposition> {
    Sector::WeakEm.check_dim(conn.dim)?;
    let d = conn.dim;
    let g = metric.g_at(&p.coords);
    let gl = conn.lowered_at(&g, p)?;
    let mut potentials = apply_all(&lepton_potential_defs(), &gl, d, d);
    potentials.extend(apply_all(&weak_em_potential_defs(), &gl, d, d));
    let kl = lower_curvature(&curvature_coeffs(conn, &p.coords)?, &g, d);
    Ok(GaugeDecomposition {
        sector: Some(Sector::WeakEm),
        couplings: Couplings::from_inverse_metric(Sector::WeakEm, &metric.g_inv_at(&p.coords)?),
        potentials,
        field_strengths: apply_all(&field_strength_defs(), &kl, d, d * d),
        charges: BTreeMap::new(),
    })
}

/// Max residual of each field-strength identity over the samples.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldStrengthReport {
    pub residuals: BTreeMap<String, f64>,
    /// Largest field-strength component seen.
    pub max_field: f64,
    pub samples: usize,
}

impl FieldStrengthReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }
}

/// Potentials and their partials `∂_P A_Q` (index `P·D + Q`) from the
/// lowered connection differentiated directly.
fn potential_jets(conn: &ConnectionField, metric: &MetricField, p: &Point) -> Result<(BTreeMap<String, Vec<f64>>, BTreeMap<String, Vec<f64>>)> {
    let d = conn.dim;
    let gl = lowered_connection(conn, metric, p)?;
    let defs = weak_em_potential_defs();
    let vals = apply_all(&defs, &gl, d, d);
    let mut jets: BTreeMap<String, Vec<f64>> = defs.iter().map(|c| (c.name.to_string(), vec![0.0; d * d])).collect();
    for dir in 0..d {
        let xs = seed(&p.coords, dir);
        let gd: Vec<Dual<f64>> = conn.coeffs(&xs)?;
        let dgl: Vec<f64> = lower_first(&gd, &metric.g_at(&xs), d, 3).into_iter().map(|v| v.du).collect();
        for c in &defs {
            let a = c.apply(&dgl, d, d);
            let j = jets.get_mut(c.name).expect("declared");
            for q in 0..d {
                j[dir * d + q] = a[q];
            }
        }
    }
    Ok((vals, jets))
}

/// Residuals of `B = dB`, `F³ = dA³ + g A¹∧A²`, `F¹ = dA¹ + g A²∧A³`,
/// `F² = dA² + g A¹∧A³`, each side computed independently.
pub fn weak_em_identity_residuals(conn: &ConnectionField, metric: &MetricField, p: &Point) -> Result<(BTreeMap<String, f64>, f64)> {
    let d = conn.dim;
    let dec = decompose_weak_em(conn, metric, p)?;
    let g = dec.couplings.g;
    let (a, da) = potential_jets(conn, metric, p)?;
    let curl = |name: &str, pp: usize, q: usize| da[name][pp * d + q] - da[name][q * d + pp];
    let wedge = |x: &str, y: &str, pp: usize, q: usize| a[x][pp] * a[y][q] - a[y][pp] * a[x][q];
    let mut res = BTreeMap::new();
    let mut fmax = 0.0f64;
    for (name, quad) in [("B", None), ("F3", Some(("A1", "A2"))), ("F1", Some(("A2", "A3"))), ("F2", Some(("A1", "A3")))] {
        let pot = match name {
            "B" => "B",
            "F3" => "A3",
            "F1" => "A1",
            _ => "A2",
        };
        let lhs = &dec.field_strengths[name];
        let mut worst = 0.0f64;
        for pp in 0..d {
            for q in 0..d {
                let mut rhs = curl(pot, pp, q);
                if let Some((x, y)) = quad {
                    rhs += g * wedge(x, y, pp, q);
                }
                worst = worst.max((lhs[pp * d + q] - rhs).abs());
                fmax = fmax.max(lhs[pp * d + q].abs());
            }
        }
        res.insert(name.to_string(), worst);
    }
    Ok((res, fmax))
}

/// Identity residuals maximized over `samples`.
pub fn verify_weak_em_field_strengths(conn: &ConnectionField, metric: &MetricField, samples: &[Point]) -> Result<FieldStrengthReport> {
    let per: Vec<(BTreeMap<String, f64>, f64)> =
        samples.par_iter().map(|p| weak_em_identity_residuals(conn, metric, p)).collect::<Result<_>>()?;
    let mut rep = FieldStrengthReport { samples: samples.len(), ..Default::default() };
    for (r, f) in per {
        for (k, v) in r {
            let e = rep.residuals.entry(k).or_insert(0.0);
            *e = e.max(v);
        }
        rep.max_field = rep.max_field.max(f);
    }
    Ok(rep)
}

/// Max `|Γ_{45P} − Γ_{54P}|` on the lepton pair.
pub fn lepton_symmetry_residual(gl: &[f64], d: usize) -> f64 {
    let (a, b) = (LEPTON_BASE, LEPTON_BASE + 1);
    (0..d).map(|p| (gl[(a * d + b) * d + p] - gl[(b * d + a) * d + p]).abs()).fold(0.0, f64::max)
}

/// Both-sides residuals of the four lepton evolution lines at `p`.
///
/// Fails with a constraint error when `Γ_{45P} = Γ_{54P}` does not hold within `tol`.
pub fn lepton_evolution_residual(conn: &ConnectionField, metric: &MetricField, rho: &TensorFieldHandle, p: &Point, tol: f64) -> Result<LineResiduals> {
    Sector::WeakEm.check_dim(conn.dim)?;
    let d = conn.dim;
    let gl = lowered_connection(conn, metric, p)?;
    let sym = lepton_symmetry_residual(&gl, d);
    if sym > tol {
        return Err(Error::Constraint(format!("symmetry condition Γ_45P = Γ_54P violated: residual {sym:e}")));
    }
    let charges = charge_jets(rho, conn, p)?.named(&lepton_charge_defs(), d);
    let potentials = apply_all(&lepton_potential_defs(), &gl, d, d);
    let inp = LineInputs {
        covariant: &charges.covariant,
        partial: &charges.partial,
        values: &charges.values,
        potentials: &potentials,
        couplings: Couplings::from_inverse_metric(Sector::WeakEm, &metric.g_inv_at(&p.coords)?),
    };
    evaluate_lines(&lepton_lines(false), &inp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::idx3;
    use crate::frames::ReferenceSystemStack;
    use crate::manifold::Sampling;
    use crate::sectors::scenarios;

    fn pts(n: usize) -> Vec<Point> {
        Sampling { count: n, seed: 11, lo: -0.7, hi: 0.7 }.points(5)
    }

    #[test]
    fn flat_scenario_has_zero_residuals() {
        let s = ReferenceSystemStack::identity(5);
        let rep = verify_weak_em_field_strengths(&ConnectionField::holonomic(&s), &s.metric(), &pts(10)).unwrap();
        assert_eq!(rep.max_residual(), 0.0);
        assert_eq!(rep.max_field, 0.0);
    }

    #[test]
    fn equal_diagonal_families_give_zero_photon() {
        let d = 5;
        let mut gamma = vec![0.0; 125];
        for p in 0..d {
            gamma[idx3(d, 3, 3, p)] = 0.3 * p as f64;
            gamma[idx3(d, 4, 4, p)] = 0.3 * p as f64;
            gamma[idx3(d, 3, 4, p)] = 0.1;
            gamma[idx3(d, 4, 3, p)] = 0.1;
        }
        let conn = ConnectionField::explicit(5, crate::field::Field::callback(125, move |_| gamma.clone())).unwrap();
        let dec = decompose_weak_em(&conn, &ReferenceSystemStack::identity(5).metric(), &pts(1)[0]).unwrap();
        assert!(dec.potentials["A"].iter().all(|v| v.abs() < 1e-15));
        assert!(dec.potentials["W2"].iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn rotation_scenario_potentials_match_lowered_values() {
        let k = 0.8;
        let s = scenarios::weak_em_rotation(k, 1.0);
        let conn = ConnectionField::holonomic(&s);
        let p = &pts(1)[0];
        let dec = decompose_weak_em(&conn, &s.metric(), p).unwrap();
        let gl = conn.lowered_at(&s.metric().g_at(&p.coords), p).unwrap();
        let w2 = dec.potentials["W2"][0];
        assert!((w2 - 2f64.sqrt() * gl[idx3(5, 3, 4, 0)]).abs() < 1e-14);
        assert!((w2.abs() - k / 2f64.sqrt()).abs() < 1e-12, "w2 = {w2}");
        assert!(dec.potentials["Z"].iter().chain(&dec.potentials["A"]).all(|v| v.abs() < 1e-14));
        assert!(dec.potentials["W2"][1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn pure_gauge_rotation_has_vanishing_field_strengths() {
        let s = scenarios::weak_em_rotation(0.9, 1.3);
        let rep = verify_weak_em_field_strengths(&ConnectionField::holonomic(&s), &s.metric(), &pts(20)).unwrap();
        assert!(rep.max_residual() < 1e-6 && rep.max_field < 1e-6, "{rep:?}");
    }

    #[test]
    fn curved_inner_identities_hold_with_nonzero_fields() {
        let s = scenarios::weak_em_curved(3);
        let rep = verify_weak_em_field_strengths(&ConnectionField::holonomic(&s), &s.metric(), &pts(30)).unwrap();
        assert!(rep.max_residual() < 1e-6, "{rep:?}");
        assert!(rep.max_field > 1e-3, "{rep:?}");
    }

    #[test]
    fn lepton_lines_hold_on_conforming_scenarios() {
        for seed in 0..3 {
            let sc = scenarios::weak_em_conforming(seed);
            for p in pts(5) {
                let r = lepton_evolution_residual(&sc.conn, &sc.metric, &sc.rho, &p, 1e-10).unwrap();
                assert!(r.max < 1e-6 && r.lhs_max > 1e-3, "{r:?}");
            }
        }
    }

    #[test]
    fn zero_charge_gives_zero_sides() {
        let sc = scenarios::weak_em_conforming(1);
        let zero = TensorFieldHandle::new(5, sc.rho.variance.clone(), crate::field::Field::Exprs(vec![crate::expr::Expr::zero(); 25])).unwrap();
        let r = lepton_evolution_residual(&sc.conn, &sc.metric, &zero, &pts(1)[0], 1e-10).unwrap();
        assert_eq!(r.max, 0.0);
        assert_eq!(r.lhs_max, 0.0);
    }

    #[test]
    fn asymmetric_connection_is_skipped() {
        let s = scenarios::weak_em_curved(2);
        let sc = scenarios::weak_em_conforming(2);
        let e = lepton_evolution_residual(&ConnectionField::holonomic(&s), &s.metric(), &sc.rho, &pts(1)[0], 1e-10).unwrap_err();
        assert!(matches!(e, Error::Constraint(_)));
    }
}
