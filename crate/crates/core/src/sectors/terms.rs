//! Structural right-hand sides of charge evolution lines
//! `q_{;P} = ∂_P q + Σ sign·coupling·charge·potential_P`.

use super::Couplings;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Coupling constant multiplying a term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    Weak,
    Strong,
    HalfStrong,
}

impl Coupling {
    pub fn value(self, c: &Couplings) -> f64 {
        match self {
            Coupling::Weak => c.g,
            Coupling::Strong => c.gs,
            Coupling::HalfStrong => 0.5 * c.gs,
        }
    }
}

/// One product term `sign · coupling · charge · potential_P`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub sign: f64,
    pub coupling: Coupling,
    pub charge: String,
    pub potential: String,
}

/// Evolution line of one named charge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionLine {
    pub charge: String,
    pub terms: Vec<Term>,
}

impl EvolutionLine {
    /// True when some term couples through `potential`.
    pub fn couples_to(&self, potential: &str) -> bool {
        self.terms.iter().any(|t| t.potential == potential)
    }

    /// Relabels colour indices cyclically `1 → 2 → 3 → 1`; `W1` is colourless.
    pub fn cycled(&self) -> Self {
        Self {
            charge: cycle(&self.charge),
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    charge: cycle(&t.charge),
                    potential: if t.potential == "W1" { t.potential.clone() } else { cycle(&t.potential) },
                    ..t.clone()
                })
                .collect(),
        }
    }
}

fn cycle(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            '1' => '2',
            '2' => '3',
            '3' => '1',
            o => o,
        })
        .collect()
}

fn line(charge: &str, terms: &[(f64, Coupling, &str, &str)]) -> EvolutionLine {
    EvolutionLine {
        charge: charge.into(),
        terms: terms
            .iter()
            .map(|&(sign, coupling, q, p)| Term { sign, coupling, charge: q.into(), potential: p.into() })
            .collect(),
    }
}

/// Lepton lines; with `primed` the `W¹` partners are the mixed fields `l′_L, ν′_L`.
pub fn lepton_lines(primed: bool) -> Vec<EvolutionLine> {
    use Coupling::Weak as G;
    let (nu_partner, l_partner) = if primed { ("nu'_L", "l'_L") } else { ("nu_L", "l_L") };
    vec![
        line("l_L", &[(-1.0, G, "l_L", "Z"), (-1.0, G, "l_R", "A"), (-1.0, G, nu_partner, "W1")]),
        line("l_R", &[(-1.0, G, "l_R", "Z"), (-1.0, G, "l_L", "A")]),
        line("nu_L", &[(-1.0, G, "nu_L", "Z"), (-1.0, G, l_partner, "W1")]),
        line("nu_R", &[(-1.0, G, "nu_R", "Z")]),
    ]
}

/// The twelve quark lines with `W¹` mixing through `d′_i, u′_i`.
pub fn quark_lines() -> Vec<EvolutionLine> {
    use Coupling::{HalfStrong as H, Strong as S, Weak as G};
    let d1l = line(
        "d1_L",
        &[
            (-1.0, S, "d1_L", "U1"),
            (1.0, S, "d2_L", "V1"),
            (-1.0, S, "d3_L", "V1"),
            (-1.0, S, "u1_L", "X23"),
            (-1.0, H, "u2_L", "X31"),
            (1.0, H, "u2_L", "Y31"),
            (-1.0, H, "u3_L", "X12"),
            (-1.0, H, "u3_L", "Y12"),
            (-1.0, G, "d1'", "W1"),
        ],
    );
    let d1r = line(
        "d1_R",
        &[
            (-1.0, S, "d1_L", "V1"),
            (1.0, S, "d2_L", "U1"),
            (-1.0, S, "d3_L", "U1"),
            (1.0, S, "u1_L", "Y23"),
            (1.0, H, "u2_L", "X31"),
            (-1.0, H, "u2_L", "Y31"),
            (-1.0, H, "u3_L", "X12"),
            (-1.0, H, "u3_L", "Y12"),
        ],
    );
    let u1l = line(
        "u1_L",
        &[
            (-1.0, S, "u1_L", "U1"),
            (-1.0, H, "u2_L", "X12"),
            (-1.0, H, "u2_L", "Y12"),
            (-1.0, H, "u3_L", "X31"),
            (1.0, H, "u3_L", "Y31"),
            (-1.0, S, "d1_L", "X23"),
            (1.0, S, "d2_L", "Y23"),
            (-1.0, S, "d3_L", "Y23"),
            (-1.0, G, "u1'", "W1"),
        ],
    );
    let u1r = line(
        "u1_R",
        &[
            (-1.0, S, "u1_R", "U1"),
            (1.0, H, "u2_R", "X12"),
            (1.0, H, "u2_R", "Y12"),
            (1.0, H, "u3_R", "X31"),
            (-1.0, H, "u3_R", "Y31"),
        ],
    );
    let mut out = Vec::with_capacity(12);
    for first in [d1l, d1r, u1l, u1r] {
        let second = first.cycled();
        let third = second.cycled();
        out.extend([first, second, third]);
    }
    out
}

/// Residual of each line, maximized over the derivative index.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LineResiduals {
    pub lines: BTreeMap<String, f64>,
    pub max: f64,
    /// Largest magnitude among the left-hand sides.
    pub lhs_max: f64,
}

/// Inputs shared by every line at one point.
pub struct LineInputs<'a> {
    /// Covariant derivative of each charge, per derivative index.
    pub covariant: &'a BTreeMap<String, Vec<f64>>,
    /// Partial derivative of each charge, per derivative index.
    pub partial: &'a BTreeMap<String, Vec<f64>>,
    /// Charge values, including mixed fields.
    pub values: &'a BTreeMap<String, f64>,
    pub potentials: &'a BTreeMap<String, Vec<f64>>,
    pub couplings: Couplings,
}

fn lookup<'m, V>(m: &'m BTreeMap<String, V>, k: &str, what: &str) -> Result<&'m V> {
    m.get(k).ok_or_else(|| Error::Contract(format!("unknown {what} {k}")))
}

/// Right-hand side of one line for every derivative index.
pub fn line_rhs(line: &EvolutionLine, inp: &LineInputs) -> Result<Vec<f64>> {
    let mut rhs = lookup(inp.partial, &line.charge, "charge")?.clone();
    for t in &line.terms {
        let q = *lookup(inp.values, &t.charge, "charge")?;
        let a = lookup(inp.potentials, &t.potential, "potential")?;
        let c = t.sign * t.coupling.value(&inp.couplings) * q;
        for (r, ap) in rhs.iter_mut().zip(a) {
            *r += c * ap;
        }
    }
    Ok(rhs)
}

/// Both-sides residuals of every line.
pub fn evaluate_lines(lines: &[EvolutionLine], inp: &LineInputs) -> Result<LineResiduals> {
    let mut out = LineResiduals::default();
    for l in lines {
        let rhs = line_rhs(l, inp)?;
        let lhs = lookup(inp.covariant, &l.charge, "charge")?;
        let r = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        out.lhs_max = lhs.iter().fold(out.lhs_max, |m, v| m.max(v.abs()));
        out.max = out.max.max(r);
        out.lines.insert(l.charge.clone(), r);
    }
    Ok(out)
}
