//! Unified sector (D = 8): condition blocks, lepton (PMNS) and quark (CKM)
//! mixing through the proportionality constants `c^m_n`.

use super::strong::{colour_potentials, RstMatrix};
use super::terms::{evaluate_lines, lepton_lines, quark_lines, LineInputs, LineResiduals};
use super::{
    apply_all, charge_jets, colour_charge_defs, lepton_charge_defs, lepton_potential_defs, lowered_connection, ChargeMaps, Couplings,
    GaugeDecomposition, Sector, LEPTON_BASE,
};
use crate::connections::{idx3, ConnectionField};
use crate::error::{Error, Result};
use crate::field::TensorFieldHandle;
use crate::frames::MetricField;
use crate::manifold::Point;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

const A: usize = LEPTON_BASE;
const B: usize = LEPTON_BASE + 1;
const COLOUR: [usize; 3] = [5, 6, 7];

/// Constants `c^upper_lower`, keyed by zero-based coordinate indices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MixingConstants {
    pub entries: BTreeMap<(usize, usize), f64>,
}

impl MixingConstants {
    pub fn get(&self, upper: usize, lower: usize) -> f64 {
        self.entries.get(&(upper, lower)).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, upper: usize, lower: usize, v: f64) {
        self.entries.insert((upper, lower), v);
    }

    /// Default constants: lepton-to-colour `1/4, 1/8, 3/8` per colour
    /// coordinate, colour-to-lepton `1/8` and `1/4`.
    pub fn default_unified() -> Self {
        let mut m = Self::default();
        for (q, c) in COLOUR.iter().zip([0.25, 0.125, 0.375]) {
            m.set(*q, A, c);
            m.set(*q, B, c);
            m.set(A, *q, 0.125);
            m.set(B, *q, 0.25);
        }
        m
    }

    /// Parses labels `"upper_lower"` with one-based coordinate numbers.
    pub fn from_labels(labels: &BTreeMap<String, f64>) -> Result<Self> {
        let mut m = Self::default();
        for (k, v) in labels {
            let parsed = k.split_once('_').and_then(|(u, l)| Some((u.parse::<usize>().ok()?, l.parse::<usize>().ok()?)));
            match parsed {
                Some((u, l)) if u >= 1 && l >= 1 => m.set(u - 1, l - 1, *v),
                _ => return Err(Error::Config(format!("mixing constant label {k:?} must look like \"6_4\""))),
            }
        }
        Ok(m)
    }

    /// Labels `"upper_lower"` with one-based coordinate numbers.
    pub fn labels(&self) -> BTreeMap<String, f64> {
        self.entries.iter().map(|((u, l), v)| (format!("{}_{}", u + 1, l + 1), *v)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|v| *v == 0.0)
    }
}

/// Residual of one condition block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionResidual {
    pub block: u8,
    pub label: String,
    pub enabled: bool,
    pub residual: f64,
    /// Proportionality constants are indeterminate or the charge field is absent.
    pub vacuous: bool,
    pub satisfied: bool,
}

/// Per-block residuals of the unified condition set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub entries: Vec<ConditionResidual>,
    pub tolerance: f64,
}

impl ConditionReport {
    pub fn block(&self, b: u8) -> Option<&ConditionResidual> {
        self.entries.iter().find(|e| e.block == b)
    }

    /// First failing block among `blocks`.
    pub fn first_failure(&self, blocks: &[u8]) -> Option<&ConditionResidual> {
        self.entries.iter().find(|e| blocks.contains(&e.block) && e.enabled && !e.satisfied)
    }
}

fn sy(rho: &[f64], d: usize, m: usize, n: usize) -> f64 {
    rho[m * d + n] + rho[n * d + m]
}

/// Evaluates condition blocks (1)–(6) at every sample and reports the maxima.
pub fn check_unified_conditions(
    conn: &ConnectionField,
    metric: &MetricField,
    rho: Option<&TensorFieldHandle>,
    mixing: &MixingConstants,
    toggles: [bool; 6],
    samples: &[Point],
    tol: f64,
) -> Result<ConditionReport> {
    Sector::Unified.check_dim(conn.dim)?;
    let d = conn.dim;
    let mut res = [0.0f64; 6];
    let mut reference = 0.0f64;
    let c_eq3 = COLOUR.iter().map(|&q| (mixing.get(q, B) - mixing.get(q, A)).abs()).fold(0.0, f64::max);
    let spread = |row: &dyn Fn(usize) -> f64| {
        let v: Vec<f64> = COLOUR.iter().map(|&q| row(q)).collect();
        v.iter().map(|x| (x - v[0]).abs()).fold(0.0, f64::max)
    };
    let c_eq5 = spread(&|q| mixing.get(A, q)).max(spread(&|q| mixing.get(B, q)));
    res[2] = c_eq3;
    res[4] = c_eq5;
    for p in samples {
        let ginv = metric.g_inv_at(&p.coords)?;
        let gi = |m: usize| ginv[m * d + m];
        res[0] = res[0].max((gi(A) - gi(B)).abs()).max((gi(5) - gi(6)).abs()).max((gi(6) - gi(7)).abs());
        let up = conn.at(p)?;
        let gl = lowered_connection(conn, metric, p)?;
        for pp in 0..d {
            let u = |m: usize, n: usize| up[idx3(d, m, n, pp)];
            let l = |m: usize, n: usize| gl[idx3(d, m, n, pp)];
            res[1] = res[1].max((l(B, A) - l(A, B)).abs()).max((l(5, 5) + l(6, 6) + l(7, 7)).abs());
            reference = reference.max(u(B, A).abs()).max(u(A, B).abs());
            for &q in &COLOUR {
                res[2] = res[2].max((u(q, A) - mixing.get(q, B) * u(B, A)).abs()).max((u(q, B) - mixing.get(q, A) * u(A, B)).abs());
                res[4] = res[4].max((u(B, q) - mixing.get(A, q) * u(B, A)).abs()).max((u(A, q) - mixing.get(B, q) * u(A, B)).abs());
            }
        }
        if let Some(rho) = rho {
            let r = rho.evaluate(p)?;
            let e = |m: usize, n: usize| r[m * d + n];
            for &q in &COLOUR {
                res[3] = res[3].max((e(q, B) - e(q, A)).abs()).max((e(B, q) - e(A, q)).abs());
                for lep in [A, B] {
                    res[5] = res[5].max((e(q, lep) - e(5, lep)).abs()).max((e(lep, q) - e(lep, 5)).abs());
                }
            }
        }
    }
    let labels = [
        "inverse-metric equalities",
        "lepton symmetry and colour trace",
        "lepton-to-colour proportionality",
        "lepton charge equalities",
        "colour-to-lepton proportionality",
        "colour charge equalities",
    ];
    let entries = (0..6)
        .map(|k| {
            let vacuous = match k {
                2 | 4 => reference <= tol,
                3 | 5 => rho.is_none(),
                _ => false,
            };
            ConditionResidual {
                block: k as u8 + 1,
                label: labels[k].into(),
                enabled: toggles[k],
                residual: res[k],
                vacuous,
                satisfied: res[k] <= tol,
            }
        })
        .collect();
    Ok(ConditionReport { entries, tolerance: tol })
}

fn require(conn: &ConnectionField, metric: &MetricField, rho: &TensorFieldHandle, mixing: &MixingConstants, p: &Point, blocks: &[u8], tol: f64) -> Result<()> {
    let mut toggles = [false; 6];
    for b in blocks {
        toggles[*b as usize - 1] = true;
    }
    let rep = check_unified_conditions(conn, metric, Some(rho), mixing, toggles, std::slice::from_ref(p), tol)?;
    if let Some(f) = rep.first_failure(blocks) {
        return Err(Error::Constraint(format!("condition ({}) {} violated: residual {:e}", f.block, f.label, f.residual)));
    }
    Ok(())
}

/// Mixed lepton fields `l′_L` and `ν′_L`.
pub fn primed_leptons(rho: &[f64], mixing: &MixingConstants) -> (f64, f64) {
    let d = 8;
    let h = 0.5;
    let mut l = [rho[A * d + A], rho[B * d + B]];
    let mut nu = [rho[B * d + A], rho[A * d + B]];
    for &q in &COLOUR {
        l[0] += h * mixing.get(q, A) * sy(rho, d, q, A);
        l[1] += h * mixing.get(q, B) * sy(rho, d, q, B);
        nu[0] += h * mixing.get(q, B) * sy(rho, d, q, A);
        nu[1] += h * mixing.get(q, A) * sy(rho, d, q, B);
    }
    ((l[0] + l[1]) * FRAC_1_SQRT_2, (nu[0] + nu[1]) * FRAC_1_SQRT_2)
}

/// Mixed quark fields `(d′_1, d′_2, d′_3, u′_1, u′_2, u′_3)`.
pub fn primed_quarks(rho: &[f64], mixing: &MixingConstants) -> [f64; 6] {
    let d = 8;
    let k = 0.5 * FRAC_1_SQRT_2;
    let mut out = [0.0; 6];
    for i in 0..3 {
        let (q, r) = (COLOUR[i], COLOUR[(i + 1) % 3]);
        out[i] = k * (mixing.get(B, r) * sy(rho, d, A, q) + mixing.get(B, q) * sy(rho, d, A, r) + mixing.get(A, r) * sy(rho, d, B, q) + mixing.get(A, q) * sy(rho, d, B, r));
        out[i + 3] = k * (mixing.get(B, q) * sy(rho, d, A, q) + mixing.get(A, q) * sy(rho, d, B, q) + mixing.get(B, r) * sy(rho, d, A, r) + mixing.get(A, r) * sy(rho, d, B, r));
    }
    out
}

fn inputs_residuals(
    lines: &[super::EvolutionLine],
    charges: &ChargeMaps,
    potentials: &BTreeMap<String, Vec<f64>>,
    couplings: Couplings,
) -> Result<LineResiduals> {
    evaluate_lines(
        lines,
        &LineInputs { covariant: &charges.covariant, partial: &charges.partial, values: &charges.values, potentials, couplings },
    )
}

/// Both-sides residuals of the mixed lepton lines; requires blocks (1)–(4).
pub fn pmns_mixing_residual(
    conn: &ConnectionField,
    metric: &MetricField,
    rho: &TensorFieldHandle,
    mixing: &MixingConstants,
    p: &Point,
    tol: f64,
) -> Result<LineResiduals> {
    Sector::Unified.check_dim(conn.dim)?;
    require(conn, metric, rho, mixing, p, &[1, 2, 3, 4], tol)?;
    let d = conn.dim;
    let jets = charge_jets(rho, conn, p)?;
    let mut charges = jets.named(&lepton_charge_defs(), d);
    let (lp, nup) = primed_leptons(&jets.values, mixing);
    charges.values.insert("l'_L".into(), lp);
    charges.values.insert("nu'_L".into(), nup);
    let gl = lowered_connection(conn, metric, p)?;
    let couplings = Couplings::from_inverse_metric(Sector::Unified, &metric.g_inv_at(&p.coords)?);
    inputs_residuals(&lepton_lines(true), &charges, &apply_all(&lepton_potential_defs(), &gl, d, d), couplings)
}

/// Both-sides residuals of the twelve quark lines; requires blocks (1), (2), (5), (6).
pub fn ckm_mixing_residual(
    conn: &ConnectionField,
    metric: &MetricField,
    rho: &TensorFieldHandle,
    mixing: &MixingConstants,
    p: &Point,
    tol: f64,
) -> Result<LineResiduals> {
    Sector::Unified.check_dim(conn.dim)?;
    require(conn, metric, rho, mixing, p, &[1, 2, 5, 6], tol)?;
    let d = conn.dim;
    let jets = charge_jets(rho, conn, p)?;
    let mut charges = jets.named(&colour_charge_defs(COLOUR[0]), d);
    for (name, v) in ["d1'", "d2'", "d3'", "u1'", "u2'", "u3'"].iter().zip(primed_quarks(&jets.values, mixing)) {
        charges.values.insert(name.to_string(), v);
    }
    let gl = lowered_connection(conn, metric, p)?;
    let mut pots = colour_potentials(&gl, d, COLOUR[0], &RstMatrix::default());
    pots.extend(apply_all(&lepton_potential_defs(), &gl, d, d));
    let couplings = Couplings::from_inverse_metric(Sector::Unified, &metric.g_inv_at(&p.coords)?);
    inputs_residuals(&quark_lines(), &charges, &pots, couplings)
}

/// Every named potential and charge of the unified sector at `p`.
pub fn decompose_unified(
    conn: &ConnectionField,
    metric: &MetricField,
    rho: Option<&TensorFieldHandle>,
    mixing: &MixingConstants,
    rst: &RstMatrix,
    p: &Point,
) -> Result<GaugeDecomposition> {
    Sector::Unified.check_dim(conn.dim)?;
    let d = conn.dim;
    let gl = lowered_connection(conn, metric, p)?;
    let mut potentials = apply_all(&lepton_potential_defs(), &gl, d, d);
    potentials.extend(colour_potentials(&gl, d, COLOUR[0], rst));
    let mut charges = BTreeMap::new();
    if let Some(rho) = rho {
        let r = rho.evaluate(p)?;
        for c in lepton_charge_defs().iter().chain(&colour_charge_defs(COLOUR[0])) {
            charges.insert(c.name.to_string(), c.apply(&r, d, 1)[0]);
        }
        let (lp, nup) = primed_leptons(&r, mixing);
        charges.insert("l'_L".into(), lp);
        charges.insert("nu'_L".into(), nup);
        for (name, v) in ["d1'", "d2'", "d3'", "u1'", "u2'", "u3'"].iter().zip(primed_quarks(&r, mixing)) {
            charges.insert(name.to_string(), v);
        }
    }
    Ok(GaugeDecomposition {
        sector: Some(Sector::Unified),
        couplings: Couplings::from_inverse_metric(Sector::Unified, &metric.g_inv_at(&p.coords)?),
        potentials,
        field_strengths: BTreeMap::new(),
        charges,
    })
}
