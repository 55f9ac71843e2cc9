//! Sector constructions for the weak-electromagnetic (D = 5), strong (D = 6)
//! and unified (D = 8) configurations: named potentials and charges,
//! field-strength and evolution-line residuals, mixing, and the lepton/hadron classifier.
//!
//! All internal indices in code are zero-based coordinate positions. The
//! lepton pair starts at coordinate 3; the colour triple starts at 3 in the
//! strong sector and at 5 in the unified sector.

pub mod build;
pub mod classify;
pub mod scenarios;
pub mod strong;
pub mod terms;
pub mod unified;
pub mod weak_em;

use crate::connections::{covariant_jet, ConnectionField};
use crate::error::{Error, Result};
use crate::field::{TensorFieldHandle, Variance};
use crate::frames::MetricField;
use crate::manifold::Point;
use crate::real::{seed, Dual};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

pub use build::{build_sector_frame, InternalGenerator, PlaneRotation};
pub use classify::{classify_field, classify_quarks, FieldClass, QuarkCharges};
pub use strong::{assemble_gluon_matrix, decompose_strong, gluon_check, GluonCheck, RstMatrix};
pub use terms::{Coupling, EvolutionLine, LineResiduals, Term};
pub use unified::{check_unified_conditions, ckm_mixing_residual, decompose_unified, pmns_mixing_residual, ConditionReport, MixingConstants};
pub use weak_em::{decompose_weak_em, lepton_evolution_residual, verify_weak_em_field_strengths, FieldStrengthReport};

/// Number of external dimensions in every sector.
pub const EXTERNAL_DIM: usize = 3;
/// First coordinate of the lepton pair.
pub const LEPTON_BASE: usize = 3;

/// Sector selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    WeakEm,
    Strong,
    Unified,
}

impl Sector {
    pub fn dim(self) -> usize {
        match self {
            Sector::WeakEm => 5,
            Sector::Strong => 6,
            Sector::Unified => 8,
        }
    }

    /// First coordinate of the colour triple, if the sector has one.
    pub fn colour_base(self) -> Option<usize> {
        match self {
            Sector::WeakEm => None,
            Sector::Strong => Some(3),
            Sector::Unified => Some(5),
        }
    }

    pub fn has_leptons(self) -> bool {
        self != Sector::Strong
    }

    pub fn check_dim(self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: d });
        }
        Ok(())
    }

    /// Groups of internal coordinates whose inverse-metric entries must agree.
    pub fn metric_groups(self) -> Vec<Vec<usize>> {
        match self {
            Sector::WeakEm => vec![vec![3, 4]],
            Sector::Strong => vec![vec![3, 4, 5]],
            Sector::Unified => vec![vec![3, 4], vec![5, 6, 7]],
        }
    }
}

/// Weak and strong couplings derived from the inverse metric.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub g: f64,
    pub gs: f64,
}

impl Couplings {
    /// `g = √((G^{44})² + (G^{55})²)` on the lepton pair and
    /// `g_s = √((G^{77})² + (G^{88})²)` on the last two colour coordinates.
    pub fn from_inverse_metric(sector: Sector, ginv: &[f64]) -> Self {
        let d = sector.dim();
        let pair = |a: usize, b: usize| (ginv[a * d + a].powi(2) + ginv[b * d + b].powi(2)).sqrt();
        Couplings {
            g: if sector.has_leptons() { pair(LEPTON_BASE, LEPTON_BASE + 1) } else { 0.0 },
            gs: sector.colour_base().map(|q| pair(q + 1, q + 2)).unwrap_or(0.0),
        }
    }
}

/// `(a + b)/√2, (a − b)/√2`.
pub fn chiral_split(a: f64, b: f64) -> (f64, f64) {
    ((a + b) * FRAC_1_SQRT_2, (a - b) * FRAC_1_SQRT_2)
}

/// Named combination `(X_first ± X_second)/√2` of two index pairs of a
/// rank-2 or rank-3 array (trailing slot kept).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairCombo {
    pub name: &'static str,
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub sign: f64,
}

impl PairCombo {
    const fn plus(name: &'static str, first: (usize, usize), second: (usize, usize)) -> Self {
        Self { name, first, second, sign: 1.0 }
    }

    const fn minus(name: &'static str, first: (usize, usize), second: (usize, usize)) -> Self {
        Self { name, first, second, sign: -1.0 }
    }

    /// Applies the combination to an array whose leading two slots are
    /// `(m, n)` and whose trailing block has length `tail`.
    pub fn apply(&self, t: &[f64], d: usize, tail: usize) -> Vec<f64> {
        let a = (self.first.0 * d + self.first.1) * tail;
        let b = (self.second.0 * d + self.second.1) * tail;
        (0..tail).map(|r| (t[a + r] + self.sign * t[b + r]) * FRAC_1_SQRT_2).collect()
    }
}

fn shift(c: PairCombo, base: usize) -> PairCombo {
    PairCombo {
        first: (c.first.0 + base, c.first.1 + base),
        second: (c.second.0 + base, c.second.1 + base),
        ..c
    }
}

/// `Z, A, W¹, W²` from `Γ_{mnP}` on the lepton pair.
pub fn lepton_potential_defs() -> Vec<PairCombo> {
    [
        PairCombo::plus("Z", (0, 0), (1, 1)),
        PairCombo::minus("A", (0, 0), (1, 1)),
        PairCombo::plus("W1", (0, 1), (1, 0)),
        PairCombo::minus("W2", (0, 1), (1, 0)),
    ]
    .into_iter()
    .map(|c| shift(c, LEPTON_BASE))
    .collect()
}

/// `B, A³, A¹, A²` of the weak-electromagnetic field-strength identities.
pub fn weak_em_potential_defs() -> Vec<PairCombo> {
    [
        PairCombo::plus("B", (1, 1), (0, 0)),
        PairCombo::minus("A3", (1, 1), (0, 0)),
        PairCombo::plus("A1", (0, 1), (1, 0)),
        PairCombo::minus("A2", (0, 1), (1, 0)),
    ]
    .into_iter()
    .map(|c| shift(c, LEPTON_BASE))
    .collect()
}

/// `Uⁱ, Vⁱ, X^{ij}, Y^{ij}` on the colour triple starting at `base`.
pub fn colour_potential_defs(base: usize) -> Vec<PairCombo> {
    [
        PairCombo::plus("U1", (0, 0), (1, 1)),
        PairCombo::minus("V1", (0, 0), (1, 1)),
        PairCombo::plus("U2", (1, 1), (2, 2)),
        PairCombo::minus("V2", (1, 1), (2, 2)),
        PairCombo::plus("U3", (2, 2), (0, 0)),
        PairCombo::minus("V3", (2, 2), (0, 0)),
        PairCombo::plus("X23", (0, 1), (1, 0)),
        PairCombo::minus("Y23", (0, 1), (1, 0)),
        PairCombo::plus("X31", (1, 2), (2, 1)),
        PairCombo::minus("Y31", (1, 2), (2, 1)),
        PairCombo::plus("X12", (2, 0), (0, 2)),
        PairCombo::minus("Y12", (2, 0), (0, 2)),
    ]
    .into_iter()
    .map(|c| shift(c, base))
    .collect()
}

/// Chiral lepton charges `l_L, l_R, ν_L, ν_R` from `ρ_{mn}`.
pub fn lepton_charge_defs() -> Vec<PairCombo> {
    [
        PairCombo::plus("l_L", (0, 0), (1, 1)),
        PairCombo::minus("l_R", (0, 0), (1, 1)),
        PairCombo::plus("nu_L", (1, 0), (0, 1)),
        PairCombo::minus("nu_R", (1, 0), (0, 1)),
    ]
    .into_iter()
    .map(|c| shift(c, LEPTON_BASE))
    .collect()
}

/// Chiral colour charges `d_{iL/R}, u_{iL/R}` on the triple starting at `base`.
pub fn colour_charge_defs(base: usize) -> Vec<PairCombo> {
    [
        PairCombo::plus("d1_L", (0, 0), (1, 1)),
        PairCombo::minus("d1_R", (0, 0), (1, 1)),
        PairCombo::plus("d2_L", (1, 1), (2, 2)),
        PairCombo::minus("d2_R", (1, 1), (2, 2)),
        PairCombo::plus("d3_L", (2, 2), (0, 0)),
        PairCombo::minus("d3_R", (2, 2), (0, 0)),
        PairCombo::plus("u1_L", (0, 1), (1, 0)),
        PairCombo::minus("u1_R", (0, 1), (1, 0)),
        PairCombo::plus("u2_L", (1, 2), (2, 1)),
        PairCombo::minus("u2_R", (1, 2), (2, 1)),
        PairCombo::plus("u3_L", (2, 0), (0, 2)),
        PairCombo::minus("u3_R", (2, 0), (0, 2)),
    ]
    .into_iter()
    .map(|c| shift(c, base))
    .collect()
}

/// Evaluates every combination, keyed by name.
pub fn apply_all(defs: &[PairCombo], t: &[f64], d: usize, tail: usize) -> BTreeMap<String, Vec<f64>> {
    defs.iter().map(|c| (c.name.to_string(), c.apply(t, d, tail))).collect()
}

/// Named potentials, field strengths and charges of one sector at one point.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GaugeDecomposition {
    pub sector: Option<Sector>,
    pub couplings: Couplings,
    /// Potentials `X_P`, one entry per derivative index.
    pub potentials: BTreeMap<String, Vec<f64>>,
    /// Field strengths `F_{PQ}` at index `P·D + Q`.
    pub field_strengths: BTreeMap<String, Vec<f64>>,
    pub charges: BTreeMap<String, f64>,
}

impl GaugeDecomposition {
    pub fn potential(&self, name: &str) -> Result<&[f64]> {
        self.potentials
            .get(name)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::Contract(format!("unknown potential {name}")))
    }
}

/// Rebuilds the two families `(X_first, X_second)` from a sum/difference pair.
pub fn unsplit(plus: f64, minus: f64) -> (f64, f64) {
    ((plus + minus) * FRAC_1_SQRT_2, (plus - minus) * FRAC_1_SQRT_2)
}

/// Values, partials and covariant derivatives of a rank-2 lower charge field.
///
/// Partials and covariant derivatives are stored at index `(m·D + n)·D + P`.
pub struct ChargeJets {
    pub values: Vec<f64>,
    pub partial: Vec<f64>,
    pub covariant: Vec<f64>,
}

pub fn charge_jets(rho: &TensorFieldHandle, conn: &ConnectionField, p: &Point) -> Result<ChargeJets> {
    let d = conn.dim;
    if rho.dim != d || rho.variance != [Variance::Lower, Variance::Lower] {
        return Err(Error::Contract("charge field must be a rank-2 lower tensor of the connection dimension".into()));
    }
    let values = rho.evaluate(p)?;
    let mut partial = vec![0.0; d * d * d];
    for q in 0..d {
        let dv: Vec<Dual<f64>> = rho.eval_at(&seed(&p.coords, q));
        for (mn, v) in dv.iter().enumerate() {
            partial[mn * d + q] = v.du;
        }
    }
    let covariant = covariant_jet(rho, conn, &p.coords)?;
    Ok(ChargeJets { values, partial, covariant })
}

/// Named charge values, partials and covariant derivatives.
#[derive(Clone, Debug, Default)]
pub struct ChargeMaps {
    pub values: BTreeMap<String, f64>,
    pub partial: BTreeMap<String, Vec<f64>>,
    pub covariant: BTreeMap<String, Vec<f64>>,
}

impl ChargeJets {
    pub fn named(&self, defs: &[PairCombo], d: usize) -> ChargeMaps {
        ChargeMaps {
            values: defs.iter().map(|c| (c.name.to_string(), c.apply(&self.values, d, 1)[0])).collect(),
            partial: apply_all(defs, &self.partial, d, d),
            covariant: apply_all(defs, &self.covariant, d, d),
        }
    }
}

/// Lowered connection `Γ_MNP` at a point.
pub fn lowered_connection(conn: &ConnectionField, metric: &MetricField, p: &Point) -> Result<Vec<f64>> {
    conn.lowered_at(&metric.g_at(&p.coords), p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_round_trip() {
        let (l, r) = chiral_split(0.3, -1.7);
        let (a, b) = unsplit(l, r);
        assert!((a - 0.3).abs() < 1e-15 && (b + 1.7).abs() < 1e-15);
    }

    #[test]
    fn combos_index_expected_entries() {
        let d = 5;
        let mut t = vec![0.0; d * d];
        t[3 * d + 3] = 1.0;
        t[4 * d + 4] = 3.0;
        let m = apply_all(&lepton_charge_defs(), &t, d, 1);
        assert!((m["l_L"][0] - 4.0 * FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((m["l_R"][0] + 2.0 * FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(m["nu_R"][0], 0.0);
    }

    #[test]
    fn couplings_from_equal_entries() {
        let d = 8;
        let mut ginv = vec![0.0; 64];
        for i in 0..d {
            ginv[i * d + i] = if i < 3 { 1.0 } else if i < 5 { 0.25 } else { 4.0 };
        }
        let c = Couplings::from_inverse_metric(Sector::Unified, &ginv);
        assert!((c.g - 0.25 * 2f64.sqrt()).abs() < 1e-15);
        assert!((c.gs - 4.0 * 2f64.sqrt()).abs() < 1e-15);
    }
}
