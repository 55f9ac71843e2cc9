//! Lepton/hadron classification and the down-type individual-quark exclusion.

use super::{chiral_split, unsplit};
use serde::{Deserialize, Serialize};

/// Chiral quark charges `[L, R]` for `d_1..d_3` and `u_1..u_3`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuarkCharges {
    pub d: [[f64; 2]; 3],
    pub u: [[f64; 2]; 3],
}

impl QuarkCharges {
    /// Charges of the colour triple starting at `base` of a `D×D` charge matrix.
    pub fn from_rho(rho: &[f64], d: usize, base: usize) -> Self {
        let r = |i: usize, j: usize| rho[(base + i) * d + base + j];
        let mut q = Self::default();
        for i in 0..3 {
            let j = (i + 1) % 3;
            let (l, rr) = chiral_split(r(i, i), r(j, j));
            q.d[i] = [l, rr];
            let (l, rr) = chiral_split(r(i, j), r(j, i));
            q.u[i] = [l, rr];
        }
        q
    }

    fn names() -> [&'static str; 6] {
        ["d1", "d2", "d3", "u1", "u2", "u3"]
    }

    fn all(&self) -> [[f64; 2]; 6] {
        [self.d[0], self.d[1], self.d[2], self.u[0], self.u[1], self.u[2]]
    }
}

/// `d_k` implied by the diagonal entries that the other two down-type charges fix.
pub fn derive_down(q: &QuarkCharges, k: usize) -> [f64; 2] {
    let next = q.d[(k + 1) % 3];
    let prev = q.d[(k + 2) % 3];
    let (own_second, _) = unsplit(next[0], next[1]);
    let (_, own_first) = unsplit(prev[0], prev[1]);
    let (l, r) = chiral_split(own_first, own_second);
    [l, r]
}

/// Classification outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "class")]
pub enum FieldClass {
    Lepton,
    Hadron { nonzero: Vec<String> },
    IndividualQuarkCandidate {
        quark: String,
        /// The other two down-type charges force this one to vanish.
        confinement_excluded: bool,
        derived: Option<[f64; 2]>,
    },
}

fn is_zero(v: [f64; 2], tol: f64) -> bool {
    v[0].abs() <= tol && v[1].abs() <= tol
}

/// Classifies a hadron field from its quark charges.
pub fn classify_quarks(q: &QuarkCharges, tol: f64) -> FieldClass {
    let all = q.all();
    let nonzero: Vec<usize> = (0..6).filter(|&i| !is_zero(all[i], tol)).collect();
    if nonzero.len() != 1 {
        return FieldClass::Hadron { nonzero: nonzero.iter().map(|&i| QuarkCharges::names()[i].to_string()).collect() };
    }
    let k = nonzero[0];
    let quark = QuarkCharges::names()[k].to_string();
    if k < 3 {
        let derived = derive_down(q, k);
        FieldClass::IndividualQuarkCandidate { quark, confinement_excluded: is_zero(derived, tol), derived: Some(derived) }
    } else {
        FieldClass::IndividualQuarkCandidate { quark, confinement_excluded: false, derived: None }
    }
}

/// Classifies the field from the charge matrix `ρ_{mn}` and lowered connection
/// `Γ_{mnP}` at one point; the colour triple is the last three coordinates.
pub fn classify_field(rho: &[f64], gamma_lowered: &[f64], d: usize, tol: f64) -> FieldClass {
    let base = d - 3;
    let mut lepton = true;
    for i in base..d {
        for j in base..d {
            lepton &= rho[i * d + j].abs() <= tol;
            lepton &= (0..d).all(|p| gamma_lowered[(i * d + j) * d + p].abs() <= tol);
        }
    }
    if lepton {
        return FieldClass::Lepton;
    }
    classify_quarks(&QuarkCharges::from_rho(rho, d, base), tol)
}
