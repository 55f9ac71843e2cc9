//! Energy, momentum and elementary action of a charge along evolution directions.

use super::line::{trapezoid_action, GradientLine, LineSample};
use super::{raise, Background, Charge};
use crate::error::{Error, Result};
use crate::linalg::{dot, matvec};
use serde::{Deserialize, Serialize};

/// Energy and momentum of a charge for one evolution direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyMomentum {
    /// `E₀ = ρ_{;Q} ε^Q_0`.
    pub e0: f64,
    /// `E⁰ = G^{00} E₀`.
    pub e_up0: f64,
    /// `p_Q = ρ_{;Q}`.
    pub p: Vec<f64>,
    /// `p^Q = G^{QP} p_P`.
    pub p_up: Vec<f64>,
    /// `H₀ = dρ/dx⁰ = ∂_Q ρ ε^Q_0`.
    pub h0: f64,
    /// `H⁰ = G^{00} H₀`.
    pub h_up0: f64,
    /// `P_Q = ∂_Q ρ`.
    pub partial: Vec<f64>,
    /// `P^Q = G^{QP} P_P`.
    pub partial_up: Vec<f64>,
    /// `G_00 = G_MN ε^M ε^N`.
    pub g00: f64,
}

fn check_unit(direction: &[f64]) -> Result<()> {
    let n = direction.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::Contract(format!("direction must have unit Euclidean norm, got {n}")));
    }
    Ok(())
}

/// All energy-momentum quantities at `x` for the unit direction `ε^Q_0`.
pub fn energy_momentum(charge: &Charge, bg: &Background, x: &[f64], direction: &[f64]) -> Result<EnergyMomentum> {
    check_unit(direction)?;
    let d = bg.dim();
    if direction.len() != d || x.len() != d {
        return Err(Error::Dimension { expected: d, got: direction.len().min(x.len()) });
    }
    let g = bg.metric.g_at(x);
    let ginv = bg.metric.g_inv_at(x)?;
    let p = charge.momentum(&bg.conn, x)?;
    let partial = charge.partials(x);
    let g00 = dot(&matvec(&g, direction, d), direction);
    let e0 = dot(&p, direction);
    let h0 = dot(&partial, direction);
    Ok(EnergyMomentum {
        e0,
        e_up0: e0 / g00,
        p_up: raise(&ginv, &p),
        p,
        h0,
        h_up0: h0 / g00,
        partial_up: raise(&ginv, &partial),
        partial,
        g00,
    })
}

/// `|E₀E⁰ − p_Q p^Q|`; vanishes exactly in the gradient direction.
pub fn energy_momentum_residual(charge: &Charge, bg: &Background, x: &[f64], direction: &[f64]) -> Result<f64> {
    let em = energy_momentum(charge, bg, x, direction)?;
    Ok((em.e0 * em.e_up0 - dot(&em.p, &em.p_up)).abs())
}

/// Velocity `dx/dx⁰` at interior sample `k` by five-point central differences.
fn velocity(samples: &[LineSample], k: usize, h: f64) -> Vec<f64> {
    let x = |j: usize| &samples[j].point;
    (0..x(k).len()).map(|i| (-x(k + 2)[i] + 8.0 * x(k + 1)[i] - 8.0 * x(k - 1)[i] + x(k - 2)[i]) / (12.0 * h)).collect()
}

/// Max over interior samples of `|p^Q − E⁰ dx^Q/dx⁰|`, with the velocity
/// differentiated from the integrated positions.
pub fn momentum_velocity_residual(charge: &Charge, bg: &Background, line: &GradientLine) -> Result<f64> {
    if line.len() < 5 {
        return Err(Error::Contract("momentum-velocity check needs at least five samples".into()));
    }
    let d = bg.dim();
    let mut worst = 0.0f64;
    for k in 2..line.len() - 2 {
        let x = &line.samples[k].point;
        let v = velocity(&line.samples, k, line.step);
        let g = bg.metric.g_at(x);
        let p = charge.momentum(&bg.conn, x)?;
        let p_up = raise(&bg.metric.g_inv_at(x)?, &p);
        let e_up0 = dot(&p, &v) / dot(&matvec(&g, &v, d), &v);
        for q in 0..d {
            worst = worst.max((p_up[q] - e_up0 * v[q]).abs());
        }
    }
    Ok(worst)
}

/// Elementary action computed two ways along a line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionReport {
    /// Trapezoidal `∫ p_Q dx^Q`.
    pub momentum_form: f64,
    /// Trapezoidal `∫ E₀ dx⁰` with the stored tangents.
    pub energy_form: f64,
}

/// `𝔰(L) = ∫_L Dρ` along an integrated line.
pub fn affine_action(charge: &Charge, bg: &Background, line: &GradientLine) -> Result<ActionReport> {
    let momentum_form = trapezoid_action(charge, bg, &line.samples)?;
    let mut energy_form = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for s in &line.samples {
        let e0 = dot(&charge.momentum(&bg.conn, &s.point)?, &s.tangent);
        if let Some((pe, px0)) = prev {
            energy_form += 0.5 * (e0 + pe) * (s.x0 - px0);
        }
        prev = Some((e0, s.x0));
    }
    Ok(ActionReport { momentum_form, energy_form })
}

/// Trapezoidal `∫ p_Q dx^Q` along an arbitrary polyline.
pub fn path_action(charge: &Charge, bg: &Background, path: &[Vec<f64>]) -> Result<f64> {
    let samples: Vec<LineSample> = path.iter().map(|p| LineSample { x0: 0.0, point: p.clone(), tangent: vec![] }).collect();
    trapezoid_action(charge, bg, &samples)
}
