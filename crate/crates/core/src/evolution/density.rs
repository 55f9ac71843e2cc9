//! Monte-Carlo estimates of gradient-line distribution densities and of the
//! propagator built from them.
//!
//! Position densities compare endpoint clouds of a transformed-charge ensemble
//! under the background against the same ensemble under the background frozen
//! at the start point. Momentum densities compare a disc on the normal section
//! of the centre line with its image under the flow. Volumes are measured by
//! the product of the leading `D − 1` singular values of the centred cloud.

use super::line::{integrate_field, trapezoid_action};
use super::{unit_gradient, Background, Charge};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::TensorFieldHandle;
use crate::linalg::inverse_det;
use crate::manifold::member_rng;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Ensemble of constant transformations around a centre matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    /// Row-major `D × D` centre transformation `T`.
    pub center: Vec<f64>,
    pub radius: f64,
    pub sample_count: usize,
    pub seed: u64,
    /// Rescale members to `det N = det T`.
    pub det_constraint: bool,
}

/// Number of bootstrap resamples behind every standard error.
pub const BOOTSTRAP_RESAMPLES: usize = 256;

/// Smallest cloud volume treated as non-degenerate.
pub const MIN_VOLUME: f64 = 1e-12;

impl EnsembleSpec {
    /// Ensemble around the identity.
    pub fn around_identity(dim: usize, radius: f64, sample_count: usize, seed: u64) -> Self {
        Self { center: crate::linalg::identity(dim), radius, sample_count, seed, det_constraint: false }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.center.len() != dim * dim {
            return Err(Error::Dimension { expected: dim * dim, got: self.center.len() });
        }
        if self.sample_count < 2 {
            return Err(Error::Config(format!("ensemble needs at least 2 samples, got {}", self.sample_count)));
        }
        if !(self.radius > 0.0) {
            return Err(Error::Config(format!("ensemble radius must be positive, got {}", self.radius)));
        }
        Ok(())
    }

    /// Member transformation `i`, or `None` when the determinant constraint cannot be met.
    pub fn member(&self, dim: usize, i: usize) -> Result<Option<Vec<f64>>> {
        let mut rng = member_rng(self.seed, i as u64);
        let mut n: Vec<f64> = self.center.iter().map(|t| t + self.radius * rng.gen_range(-1.0..1.0)).collect();
        if self.det_constraint {
            let (_, dt) = inverse_det(&self.center, dim)?;
            let dn = match inverse_det(&n, dim) {
                Ok((_, v)) => v,
                Err(_) => return Ok(None),
            };
            let ratio = dt / dn;
            if !(ratio > 0.0) {
                return Ok(None);
            }
            let s = ratio.powf(1.0 / dim as f64);
            n.iter_mut().for_each(|v| *v *= s);
        }
        Ok(Some(n))
    }
}

/// Charge pulled back by `x ↦ a + N(x − a)`.
pub fn transformed_charge(charge: &Charge, n: &[f64], a: &[f64]) -> Charge {
    let d = a.len();
    let map: Vec<Expr> = (0..d)
        .map(|i| {
            (0..d).fold(Expr::c(a[i]), |acc, j| {
                if n[i * d + j] == 0.0 {
                    acc
                } else {
                    acc + Expr::c(n[i * d + j]) * (Expr::var(j) - Expr::c(a[j]))
                }
            })
        })
        .collect();
    let f = &charge.field;
    let field = TensorFieldHandle { dim: f.dim, rank: f.rank, variance: f.variance.clone(), field: f.field.substitute(&map) };
    Charge { field, functional: charge.functional }
}

/// One ensemble member as persisted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberRecord {
    pub member: usize,
    pub endpoint: Vec<f64>,
    pub action: f64,
    pub accepted: bool,
}

/// Density estimate with its bootstrap error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    /// `None` when a cloud is degenerate.
    pub estimate: Option<f64>,
    pub stderr: f64,
    /// Evolution parameter actually reached, a whole number of steps.
    pub t: f64,
    pub step: f64,
    pub seed: u64,
    pub sample_count: usize,
    pub accepted: usize,
    /// Endpoint of the line of the centre charge.
    pub center_endpoint: Vec<f64>,
    pub diagnostic: Option<String>,
    #[serde(skip)]
    pub members: Vec<MemberRecord>,
}

/// Representation a density is taken in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    Position,
    Momentum,
}

/// Product of the leading `D − 1` singular values of the centred cloud.
pub fn cloud_volume(points: &[&[f64]]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let d = points[0].len();
    let mean: Vec<f64> = (0..d).map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
    let m = nalgebra::DMatrix::from_fn(n, d, |i, j| (points[i][j] - mean[j]) / (n as f64).sqrt());
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv.iter().take(d.saturating_sub(1).max(1)).product()
}

fn steps_for(t: f64, step: f64) -> Result<usize> {
    if !(step > 0.0) || !(t >= 0.0) {
        return Err(Error::Config(format!("need t ≥ 0 and step > 0, got t = {t}, step = {step}")));
    }
    Ok((t / step).round() as usize)
}

/// Points of every member at steps `0`, `mid` and `end`, for a reference and an evolved flow.
struct Clouds {
    /// `[reference, evolved]` each indexed by member then by `[0, mid, end]`.
    tracks: [Vec<Option<[Vec<f64>; 3]>>; 2],
    members: Vec<MemberRecord>,
    center_endpoint: Vec<f64>,
}

fn track(charge: &Charge, bg: &Background, start: &[f64], step: f64, n: usize) -> Result<Option<([Vec<f64>; 3], f64)>> {
    let (samples, truncated) = integrate_field(|x| unit_gradient(charge, bg, x), start, step, n)?;
    if truncated.is_some() {
        return Ok(None);
    }
    let action = trapezoid_action(charge, bg, &samples)?;
    Ok(Some(([samples[0].point.clone(), samples[n / 2].point.clone(), samples[n].point.clone()], action)))
}

fn position_clouds(charge: &Charge, bg: &Background, spec: &EnsembleSpec, a: &[f64], step: f64, n: usize) -> Result<Clouds> {
    let d = bg.dim();
    let frozen = bg.frozen_at(a)?;
    let rows: Vec<Result<(Option<[Vec<f64>; 3]>, Option<[Vec<f64>; 3]>, MemberRecord)>> = (0..spec.sample_count)
        .into_par_iter()
        .map(|i| {
            let Some(nm) = spec.member(d, i)? else {
                return Ok((None, None, MemberRecord { member: i, endpoint: vec![], action: f64::NAN, accepted: false }));
            };
            let c = transformed_charge(charge, &nm, a);
            let evolved = track(&c, bg, a, step, n)?;
            let reference = track(&c, &frozen, a, step, n)?;
            Ok(match (reference, evolved) {
                (Some((r, _)), Some((e, s))) => {
                    let rec = MemberRecord { member: i, endpoint: e[2].clone(), action: s, accepted: true };
                    (Some(r), Some(e), rec)
                }
                _ => (None, None, MemberRecord { member: i, endpoint: vec![], action: f64::NAN, accepted: false }),
            })
        })
        .collect();
    let mut out = Clouds { tracks: [vec![], vec![]], members: vec![], center_endpoint: vec![] };
    for r in rows {
        let (a0, a1, rec) = r?;
        out.tracks[0].push(a0);
        out.tracks[1].push(a1);
        out.members.push(rec);
    }
    let center = transformed_charge(charge, &spec.center, a);
    out.center_endpoint = track(&center, bg, a, step, n)?.map(|(p, _)| p[2].clone()).unwrap_or_default();
    Ok(out)
}

/// Orthonormal basis of the Euclidean complement of the unit vector `e`.
fn normal_basis(e: &[f64]) -> Vec<Vec<f64>> {
    let d = e.len();
    let mut basis: Vec<Vec<f64>> = vec![e.to_vec()];
    for k in 0..d {
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        for b in &basis {
            let c: f64 = v.iter().zip(b).map(|(p, q)| p * q).sum();
            v.iter_mut().zip(b).for_each(|(p, q)| *p -= c * q);
        }
        let n = v.iter().map(|p| p * p).sum::<f64>().sqrt();
        if n > 1e-8 {
            basis.push(v.into_iter().map(|p| p / n).collect());
        }
        if basis.len() == d {
            break;
        }
    }
    basis.remove(0);
    basis
}

fn momentum_clouds(charge: &Charge, bg: &Background, spec: &EnsembleSpec, a: &[f64], step: f64, n: usize) -> Result<Clouds> {
    let d = bg.dim();
    let center = transformed_charge(charge, &spec.center, a);
    let basis = normal_basis(&unit_gradient(&center, bg, a)?);
    let rows: Vec<Result<(Option<[Vec<f64>; 3]>, MemberRecord)>> = (0..spec.sample_count)
        .into_par_iter()
        .map(|i| {
            let mut rng = member_rng(spec.seed, i as u64);
            let dir: Vec<f64> = (0..basis.len()).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            let r = spec.radius * rng.gen::<f64>().powf(1.0 / basis.len().max(1) as f64);
            let start: Vec<f64> = (0..d).map(|j| a[j] + r * basis.iter().zip(&dir).map(|(b, c)| b[j] * c / norm).sum::<f64>()).collect();
            Ok(match track(&center, bg, &start, step, n)? {
                Some((p, s)) => (Some(p.clone()), MemberRecord { member: i, endpoint: p[2].clone(), action: s, accepted: true }),
                None => (None, MemberRecord { member: i, endpoint: vec![], action: f64::NAN, accepted: false }),
            })
        })
        .collect();
    let mut out = Clouds { tracks: [vec![], vec![]], members: vec![], center_endpoint: vec![] };
    for r in rows {
        let (t, rec) = r?;
        out.tracks[0].push(t.clone());
        out.tracks[1].push(t);
        out.members.push(rec);
    }
    out.center_endpoint = track(&center, bg, a, step, n)?.map(|(p, _)| p[2].clone()).unwrap_or_default();
    Ok(out)
}

/// Densities `(whole, first half, second half)` on the members listed in `idx`.
fn ratios(kind: DensityKind, c: &Clouds, idx: &[usize]) -> Option<[f64; 3]> {
    let vol = |which: usize, slot: usize| -> f64 {
        let pts: Vec<&[f64]> = idx.iter().filter_map(|&i| c.tracks[which][i].as_ref().map(|t| t[slot].as_slice())).collect();
        cloud_volume(&pts)
    };
    match kind {
        DensityKind::Position => {
            let (rm, re, em, ee) = (vol(0, 1), vol(0, 2), vol(1, 1), vol(1, 2));
            if [rm, re, em, ee].iter().any(|v| !(*v > MIN_VOLUME)) {
                return None;
            }
            Some([re / ee, (re / rm) / (ee / em), rm / em])
        }
        DensityKind::Momentum => {
            let (s, m, e) = (vol(1, 0), vol(1, 1), vol(1, 2));
            if [s, m, e].iter().any(|v| !(*v > MIN_VOLUME)) {
                return None;
            }
            Some([s / e, m / e, s / m])
        }
    }
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Bootstrap draws of `(whole, first, second)` over accepted members.
fn bootstrap(kind: DensityKind, c: &Clouds, seed: u64) -> Vec<[f64; 3]> {
    let acc: Vec<usize> = (0..c.members.len()).filter(|&i| c.members[i].accepted).collect();
    let mut rng = member_rng(seed, u64::MAX);
    (0..BOOTSTRAP_RESAMPLES)
        .filter_map(|_| {
            let idx: Vec<usize> = (0..acc.len()).map(|_| acc[rng.gen_range(0..acc.len())]).collect();
            ratios(kind, c, &idx)
        })
        .collect()
}

fn clouds(kind: DensityKind, charge: &Charge, bg: &Background, spec: &EnsembleSpec, a: &[f64], t: f64, step: f64) -> Result<(Clouds, usize)> {
    spec.validate(bg.dim())?;
    if a.len() != bg.dim() {
        return Err(Error::Dimension { expected: bg.dim(), got: a.len() });
    }
    let n = steps_for(t, step)?;
    let c = match kind {
        DensityKind::Position => position_clouds(charge, bg, spec, a, step, n)?,
        DensityKind::Momentum => momentum_clouds(charge, bg, spec, a, step, n)?,
    };
    Ok((c, n))
}

fn estimate(kind: DensityKind, charge: &Charge, bg: &Background, spec: &EnsembleSpec, a: &[f64], t: f64, step: f64) -> Result<DensityEstimate> {
    let (c, n) = clouds(kind, charge, bg, spec, a, t, step)?;
    let all: Vec<usize> = (0..c.members.len()).filter(|&i| c.members[i].accepted).collect();
    let value = ratios(kind, &c, &all).map(|r| r[0]);
    let boots: Vec<f64> = bootstrap(kind, &c, spec.seed).into_iter().map(|r| r[0]).collect();
    Ok(DensityEstimate {
        estimate: value,
        stderr: if boots.len() > 1 { std_dev(&boots) } else { f64::NAN },
        t: n as f64 * step,
        step,
        seed: spec.seed,
        sample_count: spec.sample_count,
        accepted: all.len(),
        center_endpoint: c.center_endpoint.clone(),
        diagnostic: value.is_none().then(|| "degenerate endpoint cloud".to_string()),
        members: c.members,
    })
}

/// Position-representation density of the ensemble's lines from `a` after parameter `t`.
pub fn estimate_density_position(charge: &Charge, bg: &Background, spec: &EnsembleSpec, a: &[f64], t: f64, step: f64) -> Result<DensityEstimate> {
    estimate(DensityKind::Position, charge, bg, spec, a, t, step)
}

/// Momentum-representation density of the normal-section disc at `a` after parameter `t`.
pub fn estimate_density_momentum(charge: &Charge, bg: &Background, spec: &EnsembleSpec, a: &[f64], t: f64, step: f64) -> Result<DensityEstimate> {
    estimate(DensityKind::Momentum, charge, bg, spec, a, t, step)
}

/// Density over a whole line compared with the product over its two halves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Composability {
    pub kind: DensityKind,
    pub whole: f64,
    pub first: f64,
    pub second: f64,
    pub product: f64,
    pub whole_stderr: f64,
    pub product_stderr: f64,
    /// `√(σ_whole² + σ_product²)`.
    pub combined_stderr: f64,
    pub deviation: f64,
    /// Second-half density re-estimated from a fresh ensemble issued at the midpoint.
    pub restart_second: Option<f64>,
    pub accepted: usize,
}

impl Composability {
    pub fn holds(&self, sigmas: f64) -> bool {
        self.deviation <= sigmas * self.combined_stderr
    }
}

/// Composability of the density over `[0, t]` split at `t/2`; `t/step` must be even.
pub fn density_composability(
    kind: DensityKind,
    charge: &Charge,
    bg: &Background,
    spec: &EnsembleSpec,
    a: &[f64],
    t: f64,
    step: f64,
) -> Result<Composability> {
    let (c, n) = clouds(kind, charge, bg, spec, a, t, step)?;
    if n < 2 || n % 2 != 0 {
        return Err(Error::Config(format!("composability needs an even positive step count, got {n}")));
    }
    let all: Vec<usize> = (0..c.members.len()).filter(|&i| c.members[i].accepted).collect();
    let [whole, first, second] = ratios(kind, &c, &all).ok_or_else(|| Error::Constraint("degenerate endpoint cloud".into()))?;
    let boots = bootstrap(kind, &c, spec.seed);
    let whole_stderr = std_dev(&boots.iter().map(|r| r[0]).collect::<Vec<_>>());
    let product_stderr = std_dev(&boots.iter().map(|r| r[1] * r[2]).collect::<Vec<_>>());
    let mid = {
        let center = transformed_charge(charge, &spec.center, a);
        track(&center, bg, a, step, n)?.map(|(p, _)| p[1].clone())
    };
    let restart_second = match mid {
        Some(m) => estimate(kind, charge, bg, spec, &m, (n / 2) as f64 * step, step).ok().and_then(|e| e.estimate),
        None => None,
    };
    let product = first * second;
    Ok(Composability {
        kind,
        whole,
        first,
        second,
        product,
        whole_stderr,
        product_stderr,
        combined_stderr: (whole_stderr.powi(2) + product_stderr.powi(2)).sqrt(),
        deviation: (whole - product).abs(),
        restart_second,
        accepted: all.len(),
    })
}

/// Propagator estimate with acceptance statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorEstimate {
    /// `(re, im)`, or `None` when no line was accepted.
    pub value: Option<(f64, f64)>,
    pub density: f64,
    pub accepted: usize,
    pub total: usize,
    pub diagnostic: Option<String>,
    #[serde(skip)]
    pub members: Vec<MemberRecord>,
}

/// `√W · mean e^{is}` over the given phases.
pub fn coherent_sum(density: f64, actions: &[f64]) -> Option<Complex64> {
    if actions.is_empty() {
        return None;
    }
    let total: Complex64 = actions.iter().map(|s| Complex64::from_polar(1.0, *s)).sum();
    Some(total / actions.len() as f64 * density.sqrt())
}

/// Acceptance criteria for lines entering the propagator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorWindow {
    pub target: Vec<f64>,
    pub ball_radius: f64,
    /// Accepted range of the evolution parameter.
    pub x0_range: (f64, f64),
}

/// Propagator from `a` into the ball around `window.target`.
///
/// Each member line is accepted at its first sample inside the ball with
/// parameter in range; its phase is the orthogonal action `2𝔰` up to there.
/// The density is the position density at the middle of the parameter range.
pub fn propagator_sum(
    charge: &Charge,
    bg: &Background,
    spec: &EnsembleSpec,
    a: &[f64],
    window: &PropagatorWindow,
    step: f64,
) -> Result<PropagatorEstimate> {
    let d = bg.dim();
    spec.validate(d)?;
    let (lo, hi) = window.x0_range;
    if !(lo <= hi) || window.target.len() != d {
        return Err(Error::Config("propagator window needs lo ≤ hi and a target on the chart".into()));
    }
    let n = (hi / step).ceil() as usize;
    let members: Vec<Result<MemberRecord>> = (0..spec.sample_count)
        .into_par_iter()
        .map(|i| {
            let reject = MemberRecord { member: i, endpoint: vec![], action: f64::NAN, accepted: false };
            let Some(nm) = spec.member(d, i)? else { return Ok(reject) };
            let c = transformed_charge(charge, &nm, a);
            let (samples, _) = integrate_field(|x| unit_gradient(&c, bg, x), a, step, n)?;
            let hit = samples.iter().position(|s| {
                s.x0 >= lo - 1e-12
                    && s.x0 <= hi + 1e-12
                    && s.point.iter().zip(&window.target).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt() <= window.ball_radius
            });
            Ok(match hit {
                Some(k) => MemberRecord {
                    member: i,
                    endpoint: samples[k].point.clone(),
                    action: 2.0 * trapezoid_action(&c, bg, &samples[..=k])?,
                    accepted: true,
                },
                None => MemberRecord { endpoint: samples.last().map(|s| s.point.clone()).unwrap_or_default(), ..reject },
            })
        })
        .collect();
    let members: Vec<MemberRecord> = members.into_iter().collect::<Result<_>>()?;
    let actions: Vec<f64> = members.iter().filter(|m| m.accepted).map(|m| m.action).collect();
    let w = estimate_density_position(charge, bg, spec, a, 0.5 * (lo + hi), step)?;
    let density = w.estimate.unwrap_or(f64::NAN);
    let value = coherent_sum(density, &actions);
    Ok(PropagatorEstimate {
        value: value.map(|z| (z.re, z.im)),
        density,
        accepted: actions.len(),
        total: spec.sample_count,
        diagnostic: value.is_none().then(|| "no sampled line reached the target ball".to_string()),
        members,
    })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    member: usize,
    endpoint: &'a str,
    action: f64,
    accepted: bool,
}

/// Writes member records as CSV with space-separated endpoint coordinates.
pub fn write_members_csv(path: &Path, members: &[MemberRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    for m in members {
        let ep = m.endpoint.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ");
        w.serialize(CsvRow { member: m.member, endpoint: &ep, action: m.action, accepted: m.accepted }).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes any serializable summary as pretty JSON.
pub fn write_summary_json<S: Serialize>(path: &Path, summary: &S) -> Result<()> {
    let text = serde_json::to_string_pretty(summary).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::tests::{curved_background, wavy_scalar};
    use super::*;

    fn linear(d: usize) -> Charge {
        Charge::scalar(TensorFieldHandle::scalar(d, Expr::var(0) + Expr::c(0.3) * Expr::var(1))).unwrap()
    }

    #[test]
    fn volume_proxy_scales_affinely() {
        let pts: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.91).cos(), 0.01 * i as f64]).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let scaled: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|v| 3.0 * v + 1.0).collect()).collect();
        let srefs: Vec<&[f64]> = scaled.iter().map(|p| p.as_slice()).collect();
        assert!((cloud_volume(&srefs) / cloud_volume(&refs) - 9.0).abs() < 1e-10);
    }

    #[test]
    fn members_are_seeded_and_det_constrained() {
        let mut s = EnsembleSpec::around_identity(3, 0.1, 8, 5);
        assert_eq!(s.member(3, 2).unwrap(), s.member(3, 2).unwrap());
        assert_ne!(s.member(3, 2).unwrap(), s.member(3, 3).unwrap());
        s.det_constraint = true;
        let m = s.member(3, 4).unwrap().unwrap();
        assert!((inverse_det(&m, 3).unwrap().1 - 1.0).abs() < 1e-12);
        assert!(EnsembleSpec { sample_count: 1, ..s.clone() }.validate(3).is_err());
        assert!(EnsembleSpec { radius: 0.0, ..s }.validate(3).is_err());
    }

    #[test]
    fn flat_position_density_is_one() {
        let bg = Background::flat(4);
        let c = wavy_scalar(4);
        let e = estimate_density_position(&c, &bg, &EnsembleSpec::around_identity(4, 0.3, 64, 3), &[0.1, 0.0, 0.2, -0.1], 0.4, 0.05).unwrap();
        assert!((e.estimate.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(e.accepted, 64);
    }

    #[test]
    fn short_parameter_density_tends_to_one() {
        let bg = curved_background(4);
        let c = wavy_scalar(4);
        let spec = EnsembleSpec::around_identity(4, 0.3, 64, 3);
        let a = [0.1, 0.0, 0.2, -0.1];
        let short = estimate_density_position(&c, &bg, &spec, &a, 0.02, 0.01).unwrap();
        let long = estimate_density_position(&c, &bg, &spec, &a, 0.6, 0.05).unwrap();
        assert!((short.estimate.unwrap() - 1.0).abs() < (long.estimate.unwrap() - 1.0).abs());
        assert!((short.estimate.unwrap() - 1.0).abs() < 0.05);
    }

    #[test]
    fn flat_parallel_lines_keep_section_volume() {
        let bg = Background::flat(4);
        let e = estimate_density_momentum(&linear(4), &bg, &EnsembleSpec::around_identity(4, 0.2, 64, 9), &[0.0; 4], 0.5, 0.05).unwrap();
        assert!((e.estimate.unwrap() - 1.0).abs() < 1e-10);
        let z = estimate_density_momentum(&linear(4), &bg, &EnsembleSpec::around_identity(4, 0.2, 64, 9), &[0.0; 4], 0.0, 0.05).unwrap();
        assert!((z.estimate.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn curved_densities_compose() {
        let bg = curved_background(4);
        let c = wavy_scalar(4);
        let spec = EnsembleSpec::around_identity(4, 0.3, 96, 11);
        for kind in [DensityKind::Position, DensityKind::Momentum] {
            let r = density_composability(kind, &c, &bg, &spec, &[0.1, 0.0, 0.2, -0.1], 0.6, 0.05).unwrap();
            assert!(r.holds(3.0), "{r:?}");
            assert!((r.whole - 1.0).abs() > 1e-6);
            assert!(r.restart_second.is_some());
        }
    }

    #[test]
    fn coherent_sum_single_and_equal_phases() {
        let one = coherent_sum(4.0, &[0.7]).unwrap();
        assert!((one - Complex64::from_polar(2.0, 0.7)).norm() < 1e-15);
        let two = coherent_sum(2.25, &[1.1, 1.1]).unwrap();
        assert!((two.norm() - 1.5).abs() < 1e-15);
        assert!(coherent_sum(1.0, &[]).is_none());
    }

    #[test]
    fn propagator_counts_and_persists() {
        let bg = Background::flat(3);
        let c = linear(3);
        let spec = EnsembleSpec::around_identity(3, 0.05, 16, 2);
        let dir = unit_gradient(&c, &bg, &[0.0; 3]).unwrap();
        let target: Vec<f64> = dir.iter().map(|v| 0.5 * v).collect();
        let w = PropagatorWindow { target, ball_radius: 0.05, x0_range: (0.45, 0.55) };
        let k = propagator_sum(&c, &bg, &spec, &[0.0; 3], &w, 0.05).unwrap();
        assert!(k.accepted > 0 && k.value.is_some());
        assert!((k.density - 1.0).abs() < 1e-12);
        let far = PropagatorWindow { target: vec![5.0; 3], ..w };
        let none = propagator_sum(&c, &bg, &spec, &[0.0; 3], &far, 0.05).unwrap();
        assert!(none.value.is_none() && none.diagnostic.is_some());
        let dir = std::env::temp_dir().join(format!("ensemble-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        write_members_csv(&dir.join("m.csv"), &k.members).unwrap();
        write_summary_json(&dir.join("s.json"), &k).unwrap();
        let text = std::fs::read_to_string(dir.join("m.csv")).unwrap();
        assert_eq!(text.lines().count(), 17);
        assert!(text.starts_with("member,endpoint,action,accepted"));
        std::fs::remove_dir_all(dir).unwrap();
    }
}
