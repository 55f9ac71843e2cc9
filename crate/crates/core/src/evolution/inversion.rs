//! Elementary action along a fixed path before and after a discrete inversion.

use super::energy::path_action;
use super::{Background, Charge, Functional};
use crate::connections::ConnectionField;
use crate::error::{Error, Result};
use crate::frames::cpt::{apply_cpt, InversionSpec, InversionState};
use serde::{Deserialize, Serialize};

/// `∫ Dρ` along a path and along its inverted image.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvertedAction {
    pub original: f64,
    pub inverted: f64,
    pub residual: f64,
}

fn setup(state: &InversionState, functional: Functional) -> Result<(Charge, Background)> {
    let field = state.charge.clone().ok_or_else(|| Error::Contract("inversion state carries no charge".into()))?;
    let charge = Charge::new(field, functional)?;
    let bg = Background::new(ConnectionField::holonomic(&state.stack), state.stack.metric())?;
    Ok((charge, bg))
}

fn action_of(state: &InversionState, functional: Functional, path: &[Vec<f64>]) -> Result<f64> {
    let (charge, bg) = setup(state, functional)?;
    path_action(&charge, &bg, path)
}

/// Compares `∫ Dρ` on `path` in `state` with the inverted state.
///
/// The inverted momenta are read at the point images `s·x` and contracted with
/// the displacements transformed by the inversion's displacement signs.
pub fn inverted_path_action(spec: &InversionSpec, state: &InversionState, functional: Functional, path: &[Vec<f64>]) -> Result<InvertedAction> {
    let signs = spec.coordinate_signs(&state.signature);
    let disp = spec.displacement_signs(&state.signature);
    let original = action_of(state, functional, path)?;
    let (charge, bg) = setup(&apply_cpt(spec, state), functional)?;
    let momenta: Vec<Vec<f64>> = path
        .iter()
        .map(|x| charge.momentum(&bg.conn, &x.iter().zip(&signs).map(|(a, s)| a * s).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let mut inverted = 0.0;
    for k in 1..path.len() {
        for q in 0..path[k].len() {
            inverted += 0.5 * (momenta[k][q] + momenta[k - 1][q]) * disp[q] * (path[k][q] - path[k - 1][q]);
        }
    }
    Ok(InvertedAction { original, inverted, residual: (original - inverted).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::field::{Field, TensorFieldHandle, Variance};
    use crate::frames::{FrameField, ReferenceSystemStack};
    use crate::manifold::SpaceSignature;

    fn state() -> InversionState {
        let d = 5;
        let mut es = vec![Expr::zero(); d * d];
        for i in 0..d {
            es[i * (d + 1)] = Expr::parse(&format!("(+ 1.4 (* 0.25 (sin (+ x{} (* 0.6 x{})))))", i + 1, (i + 2) % d + 1)).unwrap();
        }
        es[1] = Expr::parse("(* 0.2 (cos x4))").unwrap();
        es[2 * d + 4] = Expr::parse("(* 0.15 (sin x1))").unwrap();
        let stack = ReferenceSystemStack::trivial_inner("curved", FrameField::from_exprs(d, es).unwrap());
        let rho: Vec<Expr> = (0..d * d)
            .map(|k| Expr::parse(&format!("(* {}.5 (sin (+ x{} (* 0.3 x{}))))", k % 4, k % d + 1, k / d + 1)).unwrap())
            .collect();
        let charge = TensorFieldHandle::new(d, vec![Variance::Lower; 2], Field::Exprs(rho)).unwrap();
        InversionState::new(SpaceSignature::new(d, 3).unwrap(), stack, Some(charge))
    }

    fn path() -> Vec<Vec<f64>> {
        (0..=200)
            .map(|k| {
                let t = k as f64 / 200.0;
                vec![0.2 + t, 0.1 * (3.0 * t).sin(), -0.3 + 0.5 * t * t, 0.4 * t, 0.2 - 0.3 * t]
            })
            .collect()
    }

    #[test]
    fn action_is_unchanged_by_full_inversion() {
        let s = state();
        for f in [Functional::Component { m: 3, n: 1 }, Functional::Sum] {
            let r = inverted_path_action(&InversionSpec::CPT, &s, f, &path()).unwrap();
            assert!(r.original.abs() > 1e-2);
            assert!(r.residual <= 1e-10, "{r:?}");
        }
    }

    #[test]
    fn partial_inversions_reverse_the_action() {
        let s = state();
        for spec in [InversionSpec::CPT0, InversionSpec::TM] {
            let r = inverted_path_action(&spec, &s, Functional::Sum, &path()).unwrap();
            assert!((r.original + r.inverted).abs() <= 1e-10, "{spec:?} {r:?}");
        }
    }

    #[test]
    fn mismatched_path_is_detected() {
        let s = state();
        let a = action_of(&s, Functional::Sum, &path()).unwrap();
        let b = action_of(&apply_cpt(&InversionSpec::CPT, &s), Functional::Sum, &path()).unwrap();
        assert!((a - b).abs() > 1e-3);
    }
}
