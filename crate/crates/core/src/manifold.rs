//! Dimensions, index ranges, points and seeded sampling.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::ops::Range;

/// Total dimension `D` and external dimension `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceSignature {
    pub total_dim: usize,
    pub external_dim: usize,
}

impl SpaceSignature {
    pub fn new(total_dim: usize, external_dim: usize) -> Result<Self> {
        if total_dim == 0 || external_dim > total_dim {
            return Err(Error::Contract(format!(
                "invalid signature D = {total_dim}, r = {external_dim}"
            )));
        }
        Ok(Self { total_dim, external_dim })
    }

    /// Signature with the default external dimension 3 (clamped to `D`).
    pub fn with_default_external(total_dim: usize) -> Result<Self> {
        Self::new(total_dim, total_dim.min(3))
    }

    /// Zero-based external index range `{0..r}`.
    pub fn external(&self) -> Range<usize> {
        0..self.external_dim
    }

    /// Zero-based internal index range `{r..D}`.
    pub fn internal(&self) -> Range<usize> {
        self.external_dim..self.total_dim
    }
}

/// A chart point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(sig: &SpaceSignature, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != sig.total_dim {
            return Err(Error::Dimension { expected: sig.total_dim, got: coords.len() });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Contract("point coordinates must be finite".into()));
        }
        Ok(Self { coords })
    }

    pub fn origin(dim: usize) -> Self {
        Self { coords: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Seeded uniform sampling over an axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub seed: u64,
    pub count: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { seed: 0, count: 100, lo: -1.0, hi: 1.0 }
    }
}

impl Sampling {
    pub fn points(&self, dim: usize) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count)
            .map(|_| Point { coords: (0..dim).map(|_| rng.gen_range(self.lo..self.hi)).collect() })
            .collect()
    }

    /// Random points plus every corner of the box.
    pub fn points_with_corners(&self, dim: usize) -> Vec<Point> {
        let mut pts = self.points(dim);
        for mask in 0..(1usize << dim) {
            pts.push(Point {
                coords: (0..dim).map(|i| if mask >> i & 1 == 1 { self.hi } else { self.lo }).collect(),
            });
        }
        pts
    }
}

/// Deterministic per-member stream derived from a master seed.
pub fn member_rng(master: u64, member: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(member);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_ranges_split_dimensions() {
        let s = SpaceSignature::new(5, 3).unwrap();
        assert_eq!(s.external(), 0..3);
        assert_eq!(s.internal(), 3..5);
        assert!(SpaceSignature::new(2, 3).is_err());
        assert_eq!(SpaceSignature::with_default_external(2).unwrap().external_dim, 2);
    }

    #[test]
    fn sampling_is_reproducible_and_bounded() {
        let s = Sampling { seed: 42, count: 50, lo: -1.0, hi: 1.0 };
        let a = s.points(5);
        assert_eq!(a, s.points(5));
        assert!(a.iter().all(|p| p.coords.iter().all(|c| (-1.0..1.0).contains(c))));
        assert_eq!(s.points_with_corners(3).len(), 58);
    }

    #[test]
    fn member_streams_differ() {
        let a: f64 = member_rng(1, 0).gen();
        let b: f64 = member_rng(1, 1).gen();
        assert_ne!(a, b);
        let a2: f64 = member_rng(1, 0).gen();
        assert_eq!(a, a2);
    }
}
