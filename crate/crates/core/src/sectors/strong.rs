//! Colour potentials, the `R, S, T` recombination of the diagonal families
//! and the Gell-Mann assembly of the gluon matrix.

use super::{apply_all, colour_potential_defs, lowered_connection, Couplings, GaugeDecomposition, Sector};
use crate::connections::ConnectionField;
use crate::error::{Error, Result};
use crate::frames::MetricField;
use crate::linalg::inverse;
use crate::manifold::Point;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

/// Rows give `R, S, T` as combinations of `U¹, U², U³`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RstMatrix {
    pub rows: [[f64; 3]; 3],
}

impl Default for RstMatrix {
    /// Choice for which the gluon diagonal equals half the diagonal families
    /// under the trace condition.
    fn default() -> Self {
        Self { rows: [[1.0, 1.0, 1.0], [0.0, -FRAC_1_SQRT_2, FRAC_1_SQRT_2], [3f64.sqrt(), 0.0, 0.0]] }
    }
}

impl RstMatrix {
    pub fn new(rows: [[f64; 3]; 3]) -> Result<Self> {
        let m = Self { rows };
        m.inverse()?;
        Ok(m)
    }

    fn flat(&self) -> Vec<f64> {
        self.rows.iter().flatten().copied().collect()
    }

    /// Inverse coefficients `(α, β, γ)` expressing `U` through `R, S, T`.
    pub fn inverse(&self) -> Result<[[f64; 3]; 3]> {
        let inv = inverse(&self.flat(), 3).map_err(|_| Error::Config("R/S/T coefficient matrix is singular".into()))?;
        Ok([[inv[0], inv[1], inv[2]], [inv[3], inv[4], inv[5]], [inv[6], inv[7], inv[8]]])
    }

    fn combine(rows: &[[f64; 3]; 3], v: [&[f64]; 3]) -> [Vec<f64>; 3] {
        let n = v[0].len();
        let row = |r: &[f64; 3]| (0..n).map(|p| r[0] * v[0][p] + r[1] * v[1][p] + r[2] * v[2][p]).collect();
        [row(&rows[0]), row(&rows[1]), row(&rows[2])]
    }

    /// `(R, S, T)` from `(U¹, U², U³)`.
    pub fn forward(&self, u: [&[f64]; 3]) -> [Vec<f64>; 3] {
        Self::combine(&self.rows, u)
    }

    /// `(U¹, U², U³)` from `(R, S, T)`.
    pub fn backward(&self, rst: [&[f64]; 3]) -> Result<[Vec<f64>; 3]> {
        Ok(Self::combine(&self.inverse()?, rst))
    }
}

/// Colour potentials on the triple starting at `base`, with `R, S, T`.
pub fn colour_potentials(gl: &[f64], d: usize, base: usize, rst: &RstMatrix) -> BTreeMap<String, Vec<f64>> {
    let mut pots = apply_all(&colour_potential_defs(base), gl, d, d);
    let [r, s, t] = rst.forward([&pots["U1"], &pots["U2"], &pots["U3"]]);
    pots.insert("R".into(), r);
    pots.insert("S".into(), s);
    pots.insert("T".into(), t);
    pots
}

/// Strong-sector decomposition at `p`.
pub fn decompose_strong(conn: &ConnectionField, metric: &MetricField, p: &Point, rst: &RstMatrix) -> Result<GaugeDecomposition> {
    Sector::Strong.check_dim(conn.dim)?;
    rst.inverse()?;
    let gl = lowered_connection(conn, metric, p)?;
    Ok(GaugeDecomposition {
        sector: Some(Sector::Strong),
        couplings: Couplings::from_inverse_metric(Sector::Strong, &metric.g_inv_at(&p.coords)?),
        potentials: colour_potentials(&gl, conn.dim, 3, rst),
        field_strengths: BTreeMap::new(),
        charges: BTreeMap::new(),
    })
}

pub type Matrix3 = [[Complex64; 3]; 3];

/// The eight Gell-Mann matrices.
pub fn gell_mann() -> [Matrix3; 8] {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let s = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    [
        [[z, o, z], [o, z, z], [z, z, z]],
        [[z, -i, z], [i, z, z], [z, z, z]],
        [[o, z, z], [z, -o, z], [z, z, z]],
        [[z, z, o], [z, z, z], [o, z, z]],
        [[z, z, -i], [z, z, z], [i, z, z]],
        [[z, z, z], [z, z, o], [z, o, z]],
        [[z, z, z], [z, z, -i], [z, i, z]],
        [[s, z, z], [z, s, z], [z, z, -2.0 * s]],
    ]
}

/// Gluon matrix `A_P` at derivative index `p` from the component table.
pub fn assemble_gluon_matrix(dec: &GaugeDecomposition, p: usize) -> Result<Matrix3> {
    let v = |n: &str| -> Result<f64> { Ok(dec.potential(n)?[p]) };
    let (s, t) = (v("S")?, v("T")?);
    let c = |re: f64, im: f64| Complex64::new(0.5 * re, 0.5 * im);
    let r6 = 6f64.sqrt();
    Ok([
        [c(s + t / r6, 0.0), c(v("X12")?, -v("Y12")?), c(v("X31")?, -v("Y31")?)],
        [c(v("X12")?, v("Y12")?), c(-s + t / r6, 0.0), c(v("X23")?, -v("Y23")?)],
        [c(v("X31")?, v("Y31")?), c(v("X23")?, v("Y23")?), c(-2.0 * t / r6, 0.0)],
    ])
}

/// `Σ_a A^a T_a` with `T_a = λ_a/2`.
pub fn from_components(a: &[f64; 8]) -> Matrix3 {
    let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (k, l) in gell_mann().iter().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += l[i][j] * (0.5 * a[k]);
            }
        }
    }
    m
}

/// Components `A^a = tr(A λ_a)` of a traceless Hermitian matrix.
pub fn to_components(m: &Matrix3) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (k, l) in gell_mann().iter().enumerate() {
        let mut tr = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                tr += m[i][j] * l[j][i];
            }
        }
        out[k] = tr.re;
    }
    out
}

fn max_diff(a: &Matrix3, b: &Matrix3) -> f64 {
    let mut w = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            w = w.max((a[i][j] - b[i][j]).norm());
        }
    }
    w
}

/// Assignment of `(A¹, …, A⁸)` to named potentials; `eighth_scale`
/// multiplies `T` in the eighth slot.
pub fn named_components(dec: &GaugeDecomposition, p: usize, eighth_scale: f64) -> Result<[f64; 8]> {
    let v = |n: &str| -> Result<f64> { Ok(dec.potential(n)?[p]) };
    Ok([v("X12")?, v("Y12")?, v("S")?, v("X31")?, v("Y31")?, v("X23")?, v("Y23")?, eighth_scale * v("T")?])
}

/// Residuals of `A_P = T_a A^a_P` over all derivative indices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GluonCheck {
    /// With the eighth component equal to `T_P`.
    pub stated: f64,
    /// With the eighth component equal to `T_P/√2`.
    pub corrected: f64,
    /// `|Γ_66P + Γ_77P + Γ_88P|` on the colour triple.
    pub trace: f64,
    /// Largest entry of the assembled matrices.
    pub matrix_max: f64,
}

/// Checks the Gell-Mann expansion; fails with a constraint error when the
/// trace condition does not hold within `tol`.
pub fn gluon_check(dec: &GaugeDecomposition, tol: f64) -> Result<GluonCheck> {
    let u: Vec<&[f64]> = ["U1", "U2", "U3"].iter().map(|n| dec.potential(n)).collect::<Result<_>>()?;
    let d = u[0].len();
    let trace = (0..d).map(|p| (u[0][p] + u[1][p] + u[2][p]).abs() / SQRT_2).fold(0.0, f64::max);
    if trace > tol {
        return Err(Error::Constraint(format!("trace condition on the colour diagonal violated: residual {trace:e}")));
    }
    let mut out = GluonCheck { trace, ..Default::default() };
    for p in 0..d {
        let a = assemble_gluon_matrix(dec, p)?;
        out.stated = out.stated.max(max_diff(&a, &from_components(&named_components(dec, p, 1.0)?)));
        out.corrected = out.corrected.max(max_diff(&a, &from_components(&named_components(dec, p, FRAC_1_SQRT_2)?)));
        out.matrix_max = a.iter().flatten().fold(out.matrix_max, |m, z| m.max(z.norm()));
    }
    Ok(out)
}
