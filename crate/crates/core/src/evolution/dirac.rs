//! Clifford generators for a metric, the affine Dirac residual and the
//! orthogonal action.

use super::energy::affine_action;
use super::line::GradientLine;
use super::{Background, Charge};
use crate::error::{Error, Result};
use crate::linalg::max_abs_diff;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type CMat = DMatrix<Complex64>;

/// Matrices `γ^M` with `γ^Mγ^N + γ^Nγ^M = 2G^{MN}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaSet {
    pub dim: usize,
    pub matrices: Vec<CMat>,
}

impl GammaSet {
    pub fn size(&self) -> usize {
        self.matrices.first().map_or(0, |m| m.nrows())
    }

    /// `γ^P v_P`.
    pub fn contract(&self, v: &[f64]) -> CMat {
        let n = self.size();
        self.matrices.iter().zip(v).fold(CMat::zeros(n, n), |acc, (g, c)| acc + g * Complex64::new(*c, 0.0))
    }

    /// Max entry of `γ^Mγ^N + γ^Nγ^M − 2G^{MN} I` over all index pairs.
    pub fn anticommutator_residual(&self, ginv: &[f64]) -> f64 {
        let n = self.size();
        let mut worst = 0.0f64;
        for m in 0..self.dim {
            for k in 0..self.dim {
                let a = &self.matrices[m] * &self.matrices[k] + &self.matrices[k] * &self.matrices[m];
                let r = a - CMat::identity(n, n) * Complex64::new(2.0 * ginv[m * self.dim + k], 0.0);
                worst = worst.max(r.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }
}

fn kron_all(factors: &[CMat]) -> CMat {
    factors.iter().skip(1).fold(factors[0].clone(), |acc, f| acc.kronecker(f))
}

/// Euclidean generators for `δ^{AB}`, size `2^⌈D/2⌉`.
pub fn euclidean_generators(d: usize) -> Vec<CMat> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let x = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let y = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
    let z = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    let i2 = CMat::identity(2, 2);
    let m = d.div_ceil(2).max(1);
    let mut out = Vec::with_capacity(2 * m);
    for k in 0..m {
        for middle in [&x, &y] {
            let factors: Vec<CMat> = (0..m)
                .map(|j| match j.cmp(&k) {
                    std::cmp::Ordering::Less => z.clone(),
                    std::cmp::Ordering::Equal => middle.clone(),
                    std::cmp::Ordering::Greater => i2.clone(),
                })
                .collect();
            out.push(kron_all(&factors));
        }
    }
    out.truncate(d);
    out
}

/// `γ^M = C^M_A γ^A` with `C` the Cholesky factor of `G^{-1}`; `g` is `G_MN`.
pub fn build_gamma_set(g: &[f64], d: usize) -> Result<GammaSet> {
    let gm = DMatrix::from_row_slice(d, d, g);
    let ginv = gm.clone().try_inverse().ok_or_else(|| Error::Signature("metric is singular".into()))?;
    let chol = nalgebra::Cholesky::new(ginv).ok_or_else(|| Error::Signature("metric is not positive-definite".into()))?;
    let l = chol.l();
    let base = euclidean_generators(d);
    let n = base[0].nrows();
    let matrices = (0..d)
        .map(|m| (0..d).fold(CMat::zeros(n, n), |acc, a| acc + &base[a] * Complex64::new(l[(m, a)], 0.0)))
        .collect();
    Ok(GammaSet { dim: d, matrices })
}

fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    m.clone().symmetric_eigenvalues().iter().copied().collect()
}

/// Largest deviation of `G` from the Euclidean metric over the line.
fn orthogonality_defect(bg: &Background, line: &GradientLine) -> f64 {
    let d = bg.dim();
    let id = crate::linalg::identity::<f64>(d);
    line.samples.iter().map(|s| max_abs_diff(&bg.metric.g_at(&s.point), &id)).fold(0.0, f64::max)
}

/// Metric deviation from `δ_MN` above which a background is not orthogonal.
pub const ORTHOGONAL_TOL: f64 = 1e-10;

/// Affine Dirac residuals along a line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracResidual {
    /// Max operator norm of `(γ^P ρ_{;P})² − (ρ_{;0})² I`.
    pub squared: f64,
    /// Max distance of `ρ_{;0}` from the spectrum of `±γ^P ρ_{;P}`.
    pub branch: f64,
    pub samples: usize,
}

/// `γ^P ρ_{;P} = ρ_{;0}` along a line of an orthogonal background.
pub fn dirac_residual(charge: &Charge, bg: &Background, line: &GradientLine) -> Result<DiracResidual> {
    let defect = orthogonality_defect(bg, line);
    if defect > ORTHOGONAL_TOL {
        return Err(Error::Constraint(format!("background is not orthogonal: max |G − δ| = {defect:e}")));
    }
    let d = bg.dim();
    let mut out = DiracResidual { squared: 0.0, branch: 0.0, samples: line.len() };
    for s in &line.samples {
        let gam = build_gamma_set(&bg.metric.g_at(&s.point), d)?;
        let p = charge.momentum(&bg.conn, &s.point)?;
        let e0: f64 = p.iter().zip(&s.tangent).map(|(a, b)| a * b).sum();
        let m = gam.contract(&p);
        let n = m.nrows();
        let sq = &m * &m - CMat::identity(n, n) * Complex64::new(e0 * e0, 0.0);
        out.squared = out.squared.max(hermitian_eigenvalues(&sq).iter().map(|v| v.abs()).fold(0.0, f64::max));
        let nearest = hermitian_eigenvalues(&m).iter().map(|l| (l.abs() - e0.abs()).abs()).fold(f64::INFINITY, f64::min);
        out.branch = out.branch.max(nearest);
    }
    Ok(out)
}

/// Orthogonal action against twice the elementary action.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalAction {
    /// `s(L) = ∫ (γ^P ρ_{;P} + E₀) dx⁰` on the branch `γ^P ρ_{;P} = ρ_{;0}`.
    pub orthogonal: f64,
    /// `𝔰(L) = ∫ p_Q dx^Q`.
    pub elementary: f64,
}

impl OrthogonalAction {
    pub fn residual(&self) -> f64 {
        (self.orthogonal - 2.0 * self.elementary).abs()
    }
}

/// `s(L)` and `𝔰(L)` along a line of an orthogonal background.
pub fn orthogonal_action(charge: &Charge, bg: &Background, line: &GradientLine) -> Result<OrthogonalAction> {
    let defect = orthogonality_defect(bg, line);
    if defect > ORTHOGONAL_TOL {
        return Err(Error::Constraint(format!("background is not orthogonal: max |G − δ| = {defect:e}")));
    }
    let d = bg.dim();
    let mut integrand = Vec::with_capacity(line.len());
    for s in &line.samples {
        let gam = build_gamma_set(&bg.metric.g_at(&s.point), d)?;
        let p = charge.momentum(&bg.conn, &s.point)?;
        let e0: f64 = p.iter().zip(&s.tangent).map(|(a, b)| a * b).sum();
        let branch = hermitian_eigenvalues(&gam.contract(&p))
            .into_iter()
            .min_by(|a, b| (a - e0).abs().total_cmp(&(b - e0).abs()))
            .unwrap_or(0.0);
        integrand.push((s.x0, branch + e0));
    }
    let orthogonal = integrand.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
    Ok(OrthogonalAction { orthogonal, elementary: affine_action(charge, bg, line)?.momentum_form })
}
