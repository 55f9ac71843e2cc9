//! Seeded constructive scenarios satisfying each sector's conditions.
//!
//! Frames are rotations with coordinate-dependent angles and constant
//! scales over a curved inner layer; symmetry and mixing conditions on the
//! connection are imposed by overwriting dependent families.

use super::build::{build_sector_frame, embed_internal, InternalGenerator, PlaneRotation};
use super::unified::MixingConstants;
use super::{Sector, EXTERNAL_DIM, LEPTON_BASE};
use crate::connections::{Assignment, ConnectionField};
use crate::expr::Expr;
use crate::field::{Field, TensorFieldHandle, Variance};
use crate::frames::{FrameField, MetricField, ReferenceSystemStack};
use crate::manifold::{Point, Sampling};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Connection, metric and charge field of one scenario.
#[derive(Clone, Debug)]
pub struct SectorScenario {
    pub sector: Sector,
    pub stack: ReferenceSystemStack,
    pub conn: ConnectionField,
    pub metric: MetricField,
    pub rho: TensorFieldHandle,
    pub mixing: MixingConstants,
}

const VALIDATION_TOL: f64 = 1e-10;

fn validation_points(d: usize) -> Vec<Point> {
    Sampling { count: 8, seed: 99, lo: -1.0, hi: 1.0 }.points(d)
}

fn sin_of(rng: &mut ChaCha8Rng, d: usize, amp: f64) -> Expr {
    let i = rng.gen_range(0..d);
    let j = rng.gen_range(0..d);
    let arg = Expr::c(rng.gen_range(0.5..1.5)) * Expr::var(i) + Expr::c(rng.gen_range(-1.0..1.0)) * Expr::var(j) + Expr::c(rng.gen_range(-1.0..1.0));
    Expr::c(amp * rng.gen_range(0.5..1.0)) * arg.sin()
}

/// Diagonally dominant position-dependent internal block of the inner layer.
pub fn random_inner(rng: &mut ChaCha8Rng, d: usize) -> FrameField {
    let n = d - EXTERNAL_DIM;
    let off = 0.25 / n as f64;
    let block: Vec<Expr> = (0..n * n)
        .map(|k| if k % (n + 1) == 0 { Expr::one() + sin_of(rng, d, 0.3) } else { sin_of(rng, d, off) })
        .collect();
    embed_internal(d, &block)
}

fn random_angle(rng: &mut ChaCha8Rng, d: usize) -> Expr {
    let mut a = Expr::c(rng.gen_range(-0.5..0.5));
    for _ in 0..2 {
        a = a + Expr::c(rng.gen_range(-0.9..0.9)) * Expr::var(rng.gen_range(0..d));
    }
    a
}

/// Random rank-2 lower charge field.
pub fn random_charge(rng: &mut ChaCha8Rng, d: usize) -> Vec<Expr> {
    (0..d * d).map(|_| sin_of(rng, d, 1.0) + Expr::c(rng.gen_range(-0.5..0.5))).collect()
}

fn charge_handle(d: usize, es: Vec<Expr>) -> TensorFieldHandle {
    TensorFieldHandle::new(d, vec![Variance::Lower; 2], Field::Exprs(es)).expect("square charge")
}

/// D = 5 stack with internal rotation angle `k·x¹` and scale `c`, trivial inner layer.
pub fn weak_em_rotation(k: f64, c: f64) -> ReferenceSystemStack {
    let gen = InternalGenerator {
        scales: vec![c; 2],
        rotations: vec![PlaneRotation { i: 0, j: 1, angle: Expr::c(k) * Expr::var(0) }],
        ..Default::default()
    };
    build_sector_frame(Sector::WeakEm, &gen, &validation_points(5), VALIDATION_TOL).expect("rotation generator conforms")
}

fn random_stack(sector: Sector, rng: &mut ChaCha8Rng) -> ReferenceSystemStack {
    let d = sector.dim();
    let n = d - EXTERNAL_DIM;
    let mut rotations = Vec::new();
    let mut scales = vec![0.0; n];
    let mut add_group = |rng: &mut ChaCha8Rng, lo: usize, hi: usize, scales: &mut Vec<f64>| {
        let c = rng.gen_range(0.7..1.4);
        for s in scales.iter_mut().take(hi).skip(lo) {
            *s = c;
        }
        for i in lo..hi {
            for j in (i + 1)..hi {
                rotations.push(PlaneRotation { i, j, angle: random_angle(rng, d) });
            }
        }
    };
    for group in sector.metric_groups() {
        let lo = group[0] - EXTERNAL_DIM;
        add_group(rng, lo, lo + group.len(), &mut scales);
    }
    let gen = InternalGenerator { scales, rotations, matrix: None, inner: Some(random_inner(rng, d)) };
    build_sector_frame(sector, &gen, &validation_points(d), VALIDATION_TOL).expect("constructed generator conforms")
}

/// D = 5 stack with random rotation angles and a curved inner layer.
pub fn weak_em_curved(seed: u64) -> ReferenceSystemStack {
    random_sector_stack(Sector::WeakEm, seed)
}

/// Seeded sector stack with random rotation angles, group scales and a curved inner layer.
pub fn random_sector_stack(sector: Sector, seed: u64) -> ReferenceSystemStack {
    random_stack(sector, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `Γ^a_{b·} := Γ^b_{a·} := ½(Γ^a_{b·} + Γ^b_{a·})`.
pub fn symmetrize(a: usize, b: usize) -> Vec<Assignment> {
    vec![
        Assignment { target: (a, b), terms: vec![((a, b), 0.5), ((b, a), 0.5)] },
        Assignment { target: (b, a), terms: vec![((a, b), 1.0)] },
    ]
}

/// `Γ^{q+2}_{q+2,·} := −Γ^q_{q·} − Γ^{q+1}_{q+1,·}`.
pub fn traceless(q: usize) -> Assignment {
    Assignment { target: (q + 2, q + 2), terms: vec![((q, q), -1.0), ((q + 1, q + 1), -1.0)] }
}

/// Weak-electromagnetic scenario with `Γ_45P = Γ_54P` imposed and a random charge.
pub fn weak_em_conforming(seed: u64) -> SectorScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stack = random_stack(Sector::WeakEm, &mut rng);
    let conn = ConnectionField::constrained(ConnectionField::holonomic(&stack), symmetrize(LEPTON_BASE, LEPTON_BASE + 1)).expect("indices in range");
    let rho = charge_handle(5, random_charge(&mut rng, 5));
    SectorScenario { sector: Sector::WeakEm, metric: stack.metric(), stack, conn, rho, mixing: MixingConstants::default() }
}

/// Strong-sector scenario with the trace condition imposed.
pub fn strong_traceless(seed: u64) -> SectorScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stack = random_stack(Sector::Strong, &mut rng);
    let conn = ConnectionField::constrained(ConnectionField::holonomic(&stack), vec![traceless(3)]).expect("indices in range");
    let rho = charge_handle(6, random_charge(&mut rng, 6));
    SectorScenario { sector: Sector::Strong, metric: stack.metric(), stack, conn, rho, mixing: MixingConstants::default() }
}

/// Assignments imposing the symmetry, trace and both proportionality blocks.
pub fn unified_assignments(mixing: &MixingConstants) -> Vec<Assignment> {
    let (a, b) = (LEPTON_BASE, LEPTON_BASE + 1);
    let mut out = symmetrize(a, b);
    out.push(traceless(5));
    for q in 5..8 {
        out.push(Assignment { target: (q, a), terms: vec![((b, a), mixing.get(q, b))] });
        out.push(Assignment { target: (q, b), terms: vec![((a, b), mixing.get(q, a))] });
        out.push(Assignment { target: (b, q), terms: vec![((b, a), mixing.get(a, q))] });
        out.push(Assignment { target: (a, q), terms: vec![((a, b), mixing.get(b, q))] });
    }
    out
}

/// Copies charge entries so the lepton–quark mixing equalities hold.
pub fn impose_charge_equalities(es: &mut [Expr], d: usize) {
    let (a, b) = (LEPTON_BASE, LEPTON_BASE + 1);
    let into = es[5 * d + a].clone();
    let out = es[a * d + 5].clone();
    for q in 5..8 {
        es[q * d + a] = into.clone();
        es[q * d + b] = into.clone();
        es[a * d + q] = out.clone();
        es[b * d + q] = out.clone();
    }
}

/// Unified scenario satisfying all six condition blocks with the given constants.
pub fn unified_conforming(seed: u64, mixing: &MixingConstants) -> SectorScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stack = random_stack(Sector::Unified, &mut rng);
    let conn = ConnectionField::constrained(ConnectionField::holonomic(&stack), unified_assignments(mixing)).expect("indices in range");
    let mut es = random_charge(&mut rng, 8);
    impose_charge_equalities(&mut es, 8);
    SectorScenario { sector: Sector::Unified, metric: stack.metric(), stack, conn, rho: charge_handle(8, es), mixing: mixing.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenarios_are_deterministic() {
        assert_eq!(weak_em_curved(4), weak_em_curved(4));
        assert_ne!(weak_em_curved(4), weak_em_curved(5));
        let a = unified_conforming(1, &MixingConstants::default_unified());
        let b = unified_conforming(1, &MixingConstants::default_unified());
        let p = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
        assert_eq!(a.conn.coeffs(&p).unwrap(), b.conn.coeffs(&p).unwrap());
    }

    #[test]
    fn random_stacks_pass_validation_everywhere() {
        for seed in 0..5 {
            let s = random_stack(Sector::Unified, &mut ChaCha8Rng::seed_from_u64(seed));
            let pts = Sampling { count: 30, seed: 1, lo: -1.0, hi: 1.0 }.points(8);
            super::super::build::validate_sector_stack(Sector::Unified, &s, &pts, 1e-10).unwrap();
            s.inner.check_invertible(&pts).unwrap();
        }
    }
}
