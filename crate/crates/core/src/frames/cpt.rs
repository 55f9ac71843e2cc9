//! Discrete inversions: coordinate flips of the external and internal
//! ranges, evolution-parameter reversal, and metric sign inversion.

use crate::expr::Expr;
use crate::field::TensorFieldHandle;
use crate::frames::ReferenceSystemStack;
use crate::manifold::SpaceSignature;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Composition of elementary inversions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InversionSpec {
    /// Flip of the external coordinates.
    pub parity: bool,
    /// Flip of the internal coordinates.
    pub charge: bool,
    /// Reversal of the evolution parameter.
    pub evolution: bool,
    /// Sign inversion of the metric.
    pub metric: bool,
}

impl InversionSpec {
    pub const P: Self = Self { parity: true, charge: false, evolution: false, metric: false };
    pub const C: Self = Self { parity: false, charge: true, evolution: false, metric: false };
    pub const T0: Self = Self { parity: false, charge: false, evolution: true, metric: false };
    pub const TM: Self = Self { parity: false, charge: false, evolution: false, metric: true };
    pub const CPT0: Self = Self { parity: true, charge: true, evolution: true, metric: false };
    pub const CPT: Self = Self { parity: true, charge: true, evolution: true, metric: true };

    /// Composition; each elementary inversion is an involution.
    pub fn then(self, o: Self) -> Self {
        Self {
            parity: self.parity ^ o.parity,
            charge: self.charge ^ o.charge,
            evolution: self.evolution ^ o.evolution,
            metric: self.metric ^ o.metric,
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::default()
    }

    /// Per-coordinate sign of the point map `x ↦ s·x`.
    pub fn coordinate_signs(&self, sig: &SpaceSignature) -> Vec<f64> {
        (0..sig.total_dim)
            .map(|i| {
                let flip = if i < sig.external_dim { self.parity } else { self.charge };
                if flip {
                    -1.0
                } else {
                    1.0
                }
            })
            .collect()
    }

    /// Per-component sign of an evolution displacement `dx`.
    pub fn displacement_signs(&self, sig: &SpaceSignature) -> Vec<f64> {
        let global = (if self.evolution { -1.0 } else { 1.0 }) * (if self.metric { -1.0 } else { 1.0 });
        self.coordinate_signs(sig).into_iter().map(|s| s * global).collect()
    }

    /// Sign applied to the metric sign registry.
    pub fn metric_sign(&self) -> i8 {
        if self.metric {
            -1
        } else {
            1
        }
    }
}

/// Scenario data acted on by inversions.
#[derive(Clone, Debug, PartialEq)]
pub struct InversionState {
    pub signature: SpaceSignature,
    pub stack: ReferenceSystemStack,
    pub charge: Option<TensorFieldHandle>,
    /// Sign of each metric block, keyed by block name.
    pub metric_signs: BTreeMap<String, i8>,
}

impl InversionState {
    pub fn new(signature: SpaceSignature, stack: ReferenceSystemStack, charge: Option<TensorFieldHandle>) -> Self {
        let metric_signs = [("external".to_string(), 1), ("internal".to_string(), 1)].into_iter().collect();
        Self { signature, stack, charge, metric_signs }
    }
}

/// Point map `x ↦ s·x` as coordinate expressions.
pub fn flip_map(signs: &[f64]) -> Vec<Expr> {
    signs
        .iter()
        .enumerate()
        .map(|(i, &s)| if s < 0.0 { -Expr::var(i) } else { Expr::var(i) })
        .collect()
}

/// Applies an inversion: fields are reparameterized with flipped coordinates
/// and the metric sign registry is updated.
pub fn apply_cpt(spec: &InversionSpec, state: &InversionState) -> InversionState {
    let map = flip_map(&spec.coordinate_signs(&state.signature));
    let mut metric_signs = state.metric_signs.clone();
    for v in metric_signs.values_mut() {
        *v *= spec.metric_sign();
    }
    InversionState {
        signature: state.signature,
        stack: state.stack.substitute(&map),
        charge: state.charge.as_ref().map(|c| TensorFieldHandle { field: c.field.substitute(&map), ..c.clone() }),
        metric_signs,
    }
}
