//! Fixed-step RK4 integration of unit gradient directions.

use super::{unit_gradient, Background, Charge};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One sample of an integrated line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSample {
    /// Evolution parameter `x⁰`.
    pub x0: f64,
    pub point: Vec<f64>,
    /// Unit tangent `ε^M_0` at the sample.
    pub tangent: Vec<f64>,
}

/// Integrated evolution path with its elementary action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientLine {
    pub samples: Vec<LineSample>,
    pub step: f64,
    /// Trapezoidal `∫ p_Q dx^Q` along the samples.
    pub accumulated_action: f64,
    /// Reason the integration stopped early, if it did.
    pub truncated: Option<String>,
}

/// Largest accepted deviation of a tangent from unit length.
pub const TANGENT_DRIFT: f64 = 1e-6;

impl GradientLine {
    pub fn endpoint(&self) -> &[f64] {
        &self.samples.last().expect("lines hold at least the start").point
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sub-line over samples `from..=to`.
    pub fn slice(&self, from: usize, to: usize) -> GradientLine {
        GradientLine { samples: self.samples[from..=to].to_vec(), step: self.step, accumulated_action: f64::NAN, truncated: None }
    }
}

fn axpy(x: &[f64], a: f64, v: &[f64]) -> Vec<f64> {
    x.iter().zip(v).map(|(p, q)| p + a * q).collect()
}

/// RK4 flow of a direction field for `n_steps` steps; stops at the first failing evaluation.
pub fn integrate_field<F>(field: F, start: &[f64], step: f64, n_steps: usize) -> Result<(Vec<LineSample>, Option<String>)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if !(step > 0.0) {
        return Err(Error::Contract(format!("step must be positive, got {step}")));
    }
    let mut x = start.to_vec();
    let mut samples = Vec::with_capacity(n_steps + 1);
    let mut tangent = field(&x)?;
    for k in 0..=n_steps {
        let norm = tangent.iter().map(|a| a * a).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > TANGENT_DRIFT {
            return Err(Error::Contract(format!("tangent norm drifted to {norm} at step {k}")));
        }
        samples.push(LineSample { x0: k as f64 * step, point: x.clone(), tangent: tangent.clone() });
        if k == n_steps {
            break;
        }
        let next = (|| -> Result<(Vec<f64>, Vec<f64>)> {
            let k1 = &tangent;
            let k2 = field(&axpy(&x, 0.5 * step, k1))?;
            let k3 = field(&axpy(&x, 0.5 * step, &k2))?;
            let k4 = field(&axpy(&x, step, &k3))?;
            let nx: Vec<f64> = (0..x.len()).map(|i| x[i] + step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
            let nt = field(&nx)?;
            Ok((nx, nt))
        })();
        match next {
            Ok((nx, nt)) => {
                x = nx;
                tangent = nt;
            }
            Err(e) => return Ok((samples, Some(format!("stopped after {k} steps: {e}")))),
        }
    }
    Ok((samples, None))
}

/// Trapezoidal `∫ p_Q dx^Q` over consecutive samples.
pub fn trapezoid_action(charge: &Charge, bg: &Background, samples: &[LineSample]) -> Result<f64> {
    let mut total = 0.0;
    let mut prev: Option<(Vec<f64>, &[f64])> = None;
    for s in samples {
        let p = charge.momentum(&bg.conn, &s.point)?;
        if let Some((pp, px)) = prev {
            for q in 0..p.len() {
                total += 0.5 * (p[q] + pp[q]) * (s.point[q] - px[q]);
            }
        }
        prev = Some((p, &s.point));
    }
    Ok(total)
}

/// Integral curve of the unit gradient of `charge` from `start`.
pub fn integrate_gradient_line(charge: &Charge, bg: &Background, start: &[f64], step: f64, n_steps: usize) -> Result<GradientLine> {
    if start.len() != bg.dim() {
        return Err(Error::Dimension { expected: bg.dim(), got: start.len() });
    }
    let (samples, truncated) = integrate_field(|x| unit_gradient(charge, bg, x), start, step, n_steps)?;
    let accumulated_action = trapezoid_action(charge, bg, &samples)?;
    Ok(GradientLine { samples, step, accumulated_action, truncated })
}

/// Observed order `log2(|e_h − e_{h/2}| / |e_{h/2} − e_{h/4}|)` of the endpoint at fixed `x⁰` span.
pub fn convergence_order(charge: &Charge, bg: &Background, start: &[f64], step: f64, n_steps: usize) -> Result<f64> {
    let ends: Vec<Vec<f64>> = [1usize, 2, 4]
        .iter()
        .map(|&k| integrate_gradient_line(charge, bg, start, step / k as f64, n_steps * k).map(|l| l.endpoint().to_vec()))
        .collect::<Result<_>>()?;
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    Ok((dist(&ends[0], &ends[1]) / dist(&ends[1], &ends[2])).log2())
}

#[cfg(test)]
mod tests {
    use super::super::tests::{curved_background, wavy_scalar};
    use super::*;
    use crate::expr::Expr;
    use crate::field::TensorFieldHandle;

    #[test]
    fn flat_linear_scalar_gives_straight_line() {
        let c = Charge::scalar(TensorFieldHandle::scalar(5, Expr::var(0))).unwrap();
        let l = integrate_gradient_line(&c, &Background::flat(5), &[0.0; 5], 0.01, 10).unwrap();
        for (k, s) in l.samples.iter().enumerate() {
            assert!((s.point[0] - 0.01 * k as f64).abs() < 1e-15);
            assert!(s.point[1..].iter().all(|v| *v == 0.0));
        }
        assert!((l.accumulated_action - 0.1).abs() < 1e-14);
    }

    #[test]
    fn constant_direction_field_is_straight() {
        let dir = [0.6, 0.0, 0.8];
        let (s, t) = integrate_field(|_| Ok(dir.to_vec()), &[1.0, 1.0, 1.0], 0.1, 5).unwrap();
        assert!(t.is_none());
        assert!((s[5].point[2] - 1.4).abs() < 1e-14 && (s[5].point[0] - 1.3).abs() < 1e-14);
    }

    #[test]
    fn vanishing_field_truncates_with_diagnostic() {
        let (s, t) = integrate_field(
            |x| if x[0] < 0.25 { Ok(vec![1.0, 0.0]) } else { Err(Error::Contract("gradient vanishes".into())) },
            &[0.0, 0.0],
            0.1,
            10,
        )
        .unwrap();
        assert!(t.unwrap().contains("vanishes"));
        assert!(s.len() < 11);
    }

    #[test]
    fn tangents_are_unit_and_parallel_to_gradient() {
        let bg = curved_background(5);
        let c = wavy_scalar(5);
        let l = integrate_gradient_line(&c, &bg, &[0.1, -0.2, 0.3, 0.0, 0.2], 0.01, 50).unwrap();
        assert!(l.truncated.is_none());
        for s in &l.samples {
            let n: f64 = s.tangent.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn curved_line_converges_at_fourth_order() {
        let bg = curved_background(5);
        let c = wavy_scalar(5);
        let order = convergence_order(&c, &bg, &[0.1, -0.2, 0.3, 0.0, 0.2], 0.05, 20).unwrap();
        assert!(order > 3.5, "order {order}");
    }
}
