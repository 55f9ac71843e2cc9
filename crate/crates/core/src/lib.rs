//! Affine-gauge geometry: reference-system frames, gauge connections,
//! curvature, internal-sector decompositions and evolution dynamics over a
//! `D`-dimensional chart.

pub mod error;
pub mod expr;
pub mod field;
pub mod connections;
pub mod curvature;
pub mod evolution;
pub mod frames;
pub mod linalg;
pub mod manifold;
pub mod real;
pub mod sectors;

pub use error::{Error, Result};
pub use expr::Expr;
pub use field::{Field, JetEvaluator, JetMode, TensorFieldHandle, Variance};
pub use frames::{FrameField, MetricField, ReferenceSystemStack};
pub use manifold::{Point, Sampling, SpaceSignature};
