//! Check declarations and their execution against a validated scenario.

use crate::scenario::Scenario;
use affine_gauge::connections::laws::{sine_warp, verify_coordinate_transformation_law, verify_frame_transformation_law};
use affine_gauge::connections::{ConnectionField, ConnectionKind};
use affine_gauge::curvature::{curvature_coeffs, curvature_divergence, gradient_of_divergence, verify_curvature_coordinate_covariance, verify_curvature_frame_covariance, yang_mills_residual};
use affine_gauge::evolution::density::{density_composability, estimate_density_momentum, estimate_density_position, propagator_sum, DensityKind, PropagatorWindow};
use affine_gauge::evolution::{
    build_gamma_set, convergence_order, dirac_residual, energy_momentum_residual, heisenberg_schrodinger_check, integrate_gradient_line, inverted_path_action,
    lorentz_force, momentum_velocity_residual, orthogonal_action, unit_gradient,
};
use affine_gauge::frames::cpt::{apply_cpt, InversionSpec, InversionState};
use affine_gauge::frames::{FrameField, ReferenceSystemStack};
use affine_gauge::manifold::member_rng;
use affine_gauge::sectors::classify::{classify_field, classify_quarks, derive_down, FieldClass, QuarkCharges};
use affine_gauge::sectors::strong::{decompose_strong, gluon_check};
use affine_gauge::sectors::terms::lepton_lines;
use affine_gauge::sectors::weak_em::lepton_evolution_residual;
use affine_gauge::sectors::{check_unified_conditions, ckm_mixing_residual, lowered_connection, pmns_mixing_residual, verify_weak_em_field_strengths, Sector};
use affine_gauge::{Error, Expr, Point, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

fn d_transforms() -> usize {
    20
}
fn d_frames() -> usize {
    10
}
fn d_amplitude() -> f64 {
    0.1
}
fn d_min_field() -> f64 {
    1e-3
}
fn d_blocks() -> Vec<u8> {
    vec![1, 2, 3, 4, 5, 6]
}
fn d_configurations() -> usize {
    100
}
fn d_trials() -> usize {
    50
}
fn d_step() -> f64 {
    1e-2
}
fn d_steps() -> usize {
    100
}
fn d_coarse_step() -> f64 {
    0.05
}
fn d_coarse_steps() -> usize {
    20
}
fn d_min_order() -> f64 {
    3.5
}
fn d_sigmas() -> f64 {
    3.0
}
fn d_fraction() -> f64 {
    0.95
}

/// Check invocation with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckKind {
    /// Connection rebuilt under random coordinate warps against the coordinate law.
    CoordinateLaw {
        #[serde(default = "d_transforms")]
        transforms: usize,
        #[serde(default = "d_amplitude")]
        amplitude: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Gauge connection of frame-transformed stacks against the frame law.
    FrameLaw {
        #[serde(default = "d_transforms")]
        transforms: usize,
        #[serde(default = "d_amplitude")]
        amplitude: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Curvature covariance under random coordinate warps and, for gauge connections, frames.
    CurvatureCovariance {
        #[serde(default = "d_frames")]
        transforms: usize,
        #[serde(default = "d_amplitude")]
        amplitude: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Curvature of gauge connections of random frames with trivial inner layer.
    GaugeFlatness {
        #[serde(default = "d_frames")]
        frames: usize,
        #[serde(default = "d_amplitude")]
        amplitude: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Divergence of curvature against the extracted charge current; the
    /// direction defaults to the gradient of the declared divergence component.
    YangMills { direction: Option<Vec<f64>>, component: [usize; 2] },
    WeakEmFieldStrengths {
        #[serde(default = "d_min_field")]
        min_field: f64,
    },
    LeptonEvolution { charge: String },
    GluonAssembly,
    UnifiedConditions {
        charge: Option<String>,
        #[serde(default = "d_blocks")]
        blocks: Vec<u8>,
    },
    PmnsMixing { charge: String },
    CkmMixing { charge: String },
    Classify { charge: String, point: Option<Vec<f64>> },
    DownTypeExclusion {
        #[serde(default = "d_configurations")]
        configurations: usize,
        #[serde(default)]
        seed: u64,
    },
    EnergyMomentum {
        charge: String,
        #[serde(default = "d_trials")]
        trials: usize,
        #[serde(default = "d_fraction")]
        min_fraction: f64,
    },
    MomentumVelocity {
        charge: String,
        start: Option<Vec<f64>>,
        #[serde(default = "d_step")]
        step: f64,
        #[serde(default = "d_steps")]
        steps: usize,
    },
    ConvergenceOrder {
        charge: String,
        start: Option<Vec<f64>>,
        #[serde(default = "d_coarse_step")]
        step: f64,
        #[serde(default = "d_coarse_steps")]
        steps: usize,
        #[serde(default = "d_min_order")]
        min_order: f64,
    },
    GammaAlgebra,
    DiracSquared {
        charge: String,
        start: Option<Vec<f64>>,
        #[serde(default = "d_step")]
        step: f64,
        #[serde(default = "d_steps")]
        steps: usize,
    },
    OrthogonalAction {
        charge: String,
        start: Option<Vec<f64>>,
        #[serde(default = "d_step")]
        step: f64,
        #[serde(default = "d_steps")]
        steps: usize,
    },
    LorentzForce { charge: String },
    HeisenbergSchrodinger {
        charge: String,
        vector: String,
        observable: String,
        start: Option<Vec<f64>>,
        #[serde(default = "d_step")]
        step: f64,
        #[serde(default = "d_steps")]
        steps: usize,
    },
    DensityComposability {
        charge: String,
        ensemble: String,
        representation: DensityKind,
        start: Option<Vec<f64>>,
        t: f64,
        #[serde(default = "d_coarse_step")]
        step: f64,
        #[serde(default = "d_sigmas")]
        sigmas: f64,
    },
    DensityEstimate {
        charge: String,
        ensemble: String,
        representation: DensityKind,
        start: Option<Vec<f64>>,
        t: f64,
        #[serde(default = "d_coarse_step")]
        step: f64,
    },
    Propagator {
        charge: String,
        ensemble: String,
        start: Option<Vec<f64>>,
        target: Vec<f64>,
        ball_radius: f64,
        x0_range: (f64, f64),
        #[serde(default = "d_coarse_step")]
        step: f64,
    },
    CptInvariance { charge: String, path: Option<Vec<Vec<f64>>> },
}

/// One declared check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    pub id: String,
    pub tolerance: Option<f64>,
    #[serde(flatten)]
    pub kind: CheckKind,
}

/// What a check measured.
#[derive(Clone, Debug, PartialEq)]
pub enum Measure {
    Residual(f64),
    /// Value judged by a criterion other than a residual tolerance.
    Graded { value: f64, stderr: Option<f64> },
    Estimate { value: f64, stderr: Option<f64> },
    Info,
}

/// Raw result of one check before tolerance is applied.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub measure: Measure,
    pub samples: usize,
    pub diagnostics: Vec<String>,
    /// Failure independent of the residual, such as a vacuous run.
    pub failure: Option<String>,
}

impl Outcome {
    fn residual(r: f64, samples: usize) -> Self {
        Self { measure: Measure::Residual(r), samples, diagnostics: vec![], failure: None }
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.diagnostics.push(s.into());
        self
    }

    fn fail_if(mut self, cond: bool, why: impl Into<String>) -> Self {
        if cond && self.failure.is_none() {
            self.failure = Some(why.into());
        }
        self
    }
}

/// Random frame `δ + a·r·sin(b·x_i + c·x_j + e)`.
pub fn random_frame(rng: &mut impl Rng, d: usize, amp: f64) -> FrameField {
    let es = (0..d * d)
        .map(|k| {
            let (i, j) = (rng.gen_range(0..d), rng.gen_range(0..d));
            let arg = Expr::c(rng.gen_range(0.5..1.5)) * Expr::var(i) + Expr::c(rng.gen_range(-1.0..1.0)) * Expr::var(j) + Expr::c(rng.gen_range(-1.0..1.0));
            let wave = Expr::c(amp * rng.gen_range(0.5..1.0)) * arg.sin();
            if k % (d + 1) == 0 {
                Expr::one() + wave
            } else {
                wave
            }
        })
        .collect();
    FrameField::from_exprs(d, es).expect("square")
}

fn random_amps(rng: &mut impl Rng, d: usize, amp: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-amp..amp)).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Default start point: the first sample point.
fn start_point(sc: &Scenario, start: &Option<Vec<f64>>) -> Result<Vec<f64>> {
    let d = sc.dim();
    let s = start.clone().unwrap_or_else(|| sc.points()[0].coords.clone());
    if s.len() != d {
        return Err(Error::Dimension { expected: d, got: s.len() });
    }
    Ok(s)
}

fn default_path(sc: &Scenario) -> Vec<Vec<f64>> {
    let pts = sc.points();
    let a = &pts[0].coords;
    let b = &pts[pts.len().min(2) - 1].coords;
    (0..=200)
        .map(|k| {
            let t = k as f64 / 200.0;
            a.iter().zip(b).enumerate().map(|(i, (p, q))| p + t * (q - p) + 0.1 * (std::f64::consts::PI * t).sin() * ((i % 3) as f64 - 1.0)).collect()
        })
        .collect()
}

impl CheckKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::CoordinateLaw { .. } => "coordinate_law",
            Self::FrameLaw { .. } => "frame_law",
            Self::CurvatureCovariance { .. } => "curvature_covariance",
            Self::GaugeFlatness { .. } => "gauge_flatness",
            Self::YangMills { .. } => "yang_mills",
            Self::WeakEmFieldStrengths { .. } => "weak_em_field_strengths",
            Self::LeptonEvolution { .. } => "lepton_evolution",
            Self::GluonAssembly => "gluon_assembly",
            Self::UnifiedConditions { .. } => "unified_conditions",
            Self::PmnsMixing { .. } => "pmns_mixing",
            Self::CkmMixing { .. } => "ckm_mixing",
            Self::Classify { .. } => "classify",
            Self::DownTypeExclusion { .. } => "down_type_exclusion",
            Self::EnergyMomentum { .. } => "energy_momentum",
            Self::MomentumVelocity { .. } => "momentum_velocity",
            Self::ConvergenceOrder { .. } => "convergence_order",
            Self::GammaAlgebra => "gamma_algebra",
            Self::DiracSquared { .. } => "dirac_squared",
            Self::OrthogonalAction { .. } => "orthogonal_action",
            Self::LorentzForce { .. } => "lorentz_force",
            Self::HeisenbergSchrodinger { .. } => "heisenberg_schrodinger",
            Self::DensityComposability { .. } => "density_composability",
            Self::DensityEstimate { .. } => "density_estimate",
            Self::Propagator { .. } => "propagator",
            Self::CptInvariance { .. } => "cpt_invariance",
        }
    }

    /// Tolerance used when neither the scenario nor the environment sets one.
    pub fn default_tolerance(&self) -> f64 {
        match self {
            Self::GaugeFlatness { .. }
            | Self::CoordinateLaw { .. }
            | Self::FrameLaw { .. }
            | Self::CurvatureCovariance { .. }
            | Self::WeakEmFieldStrengths { .. }
            | Self::LeptonEvolution { .. }
            | Self::PmnsMixing { .. }
            | Self::CkmMixing { .. }
            | Self::MomentumVelocity { .. }
            | Self::DiracSquared { .. }
            | Self::YangMills { .. } => 1e-6,
            Self::GluonAssembly | Self::UnifiedConditions { .. } | Self::CptInvariance { .. } => 1e-10,
            Self::EnergyMomentum { .. } => 1e-8,
            Self::GammaAlgebra => 1e-12,
            Self::LorentzForce { .. } => 1e-5,
            Self::OrthogonalAction { .. } | Self::HeisenbergSchrodinger { .. } => 1e-4,
            Self::DownTypeExclusion { .. } => 0.0,
            Self::Classify { .. } => 1e-12,
            Self::ConvergenceOrder { .. } | Self::DensityComposability { .. } | Self::DensityEstimate { .. } | Self::Propagator { .. } => 0.0,
        }
    }

    fn charges(&self) -> Vec<&str> {
        match self {
            Self::LeptonEvolution { charge }
            | Self::PmnsMixing { charge }
            | Self::CkmMixing { charge }
            | Self::Classify { charge, .. }
            | Self::EnergyMomentum { charge, .. }
            | Self::MomentumVelocity { charge, .. }
            | Self::ConvergenceOrder { charge, .. }
            | Self::DiracSquared { charge, .. }
            | Self::OrthogonalAction { charge, .. }
            | Self::LorentzForce { charge }
            | Self::HeisenbergSchrodinger { charge, .. }
            | Self::DensityComposability { charge, .. }
            | Self::DensityEstimate { charge, .. }
            | Self::Propagator { charge, .. }
            | Self::CptInvariance { charge, .. } => vec![charge],
            Self::UnifiedConditions { charge: Some(c), .. } => vec![c],
            _ => vec![],
        }
    }

    fn needs_connection(&self) -> bool {
        !matches!(self, Self::GaugeFlatness { .. } | Self::DownTypeExclusion { .. } | Self::CptInvariance { .. })
    }

    /// Name resolution and structural requirements, checked at load time.
    pub fn validate(&self, sc: &Scenario) -> Result<()> {
        for c in self.charges() {
            sc.charge(c)?;
        }
        if self.needs_connection() && sc.connection.is_none() {
            return Err(Error::Config("check needs a connection".into()));
        }
        match self {
            Self::HeisenbergSchrodinger { vector, observable, .. } => {
                sc.field(vector)?;
                sc.field(observable)?;
            }
            Self::DensityComposability { ensemble, .. } | Self::DensityEstimate { ensemble, .. } | Self::Propagator { ensemble, .. } => {
                sc.ensemble(ensemble)?;
            }
            Self::CptInvariance { .. } if sc.stack().is_none() => return Err(Error::Config("check needs a connection stack".into())),
            Self::WeakEmFieldStrengths { .. } | Self::LeptonEvolution { .. } => {
                sc.sector_setup(Sector::WeakEm)?;
            }
            Self::GluonAssembly => {
                sc.sector_setup(Sector::Strong)?;
            }
            Self::UnifiedConditions { .. } | Self::PmnsMixing { .. } | Self::CkmMixing { .. } => {
                sc.sector_setup(Sector::Unified)?;
            }
            Self::YangMills { direction, component } => {
                let d = sc.dim();
                if direction.as_ref().is_some_and(|v| v.len() != d) || component.iter().any(|&i| i == 0 || i > d) {
                    return Err(Error::Config(format!("yang_mills needs a {d}-vector direction and one-based component indices")));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Runs the check; constraint errors mean a precondition is not met.
    pub fn run(&self, sc: &Scenario) -> Result<Outcome> {
        let d = sc.dim();
        let pts = sc.points();
        match self {
            Self::CoordinateLaw { transforms, amplitude, seed } => {
                let (conn, note) = law_connection(sc)?;
                let mut worst = 0.0f64;
                for i in 0..*transforms {
                    let psi = sine_warp(d, &random_amps(&mut member_rng(*seed, i as u64), d, *amplitude));
                    worst = worst.max(verify_coordinate_transformation_law(&conn, &psi, &pts)?);
                }
                Ok(note.into_iter().fold(Outcome::residual(worst, transforms * pts.len()), Outcome::note))
            }
            Self::FrameLaw { transforms, amplitude, seed } => {
                let conn = gauge_of(sc)?;
                let mut worst = 0.0f64;
                for i in 0..*transforms {
                    let k = random_frame(&mut member_rng(*seed, i as u64), d, *amplitude);
                    worst = worst.max(verify_frame_transformation_law(&conn, &k, &pts)?);
                }
                Ok(Outcome::residual(worst, transforms * pts.len()))
            }
            Self::CurvatureCovariance { transforms, amplitude, seed } => {
                let (conn, note) = law_connection(sc)?;
                let mut worst = 0.0f64;
                for i in 0..*transforms {
                    let mut rng = member_rng(*seed, i as u64);
                    let psi = sine_warp(d, &random_amps(&mut rng, d, *amplitude));
                    worst = worst.max(verify_curvature_coordinate_covariance(&conn, &psi, &pts)?);
                    if conn.kind == ConnectionKind::Gauge {
                        worst = worst.max(verify_curvature_frame_covariance(&conn, &random_frame(&mut rng, d, *amplitude), &pts)?);
                    }
                }
                Ok(note.into_iter().fold(Outcome::residual(worst, transforms * pts.len()), Outcome::note))
            }
            Self::GaugeFlatness { frames, amplitude, seed } => {
                let mut worst = 0.0f64;
                for i in 0..*frames {
                    let f = random_frame(&mut member_rng(*seed, i as u64), d, *amplitude);
                    let conn = ConnectionField::gauge(&ReferenceSystemStack::trivial_inner("random", f));
                    for p in &pts {
                        worst = worst.max(max_abs(&curvature_coeffs(&conn, &p.coords)?));
                    }
                }
                Ok(Outcome::residual(worst, frames * pts.len()))
            }
            Self::YangMills { direction, component } => {
                let bg = sc.background()?;
                let mut worst = 0.0f64;
                let mut div = 0.0f64;
                let mut full = 0.0f64;
                let (m, n) = (component[0] - 1, component[1] - 1);
                for p in &pts {
                    let v = match direction {
                        Some(v) => v.clone(),
                        None => gradient_of_divergence(&curvature_divergence(&bg.conn, &bg.metric, &p.coords)?, &bg.metric.g_inv_at(&p.coords)?, m, n),
                    };
                    let r = yang_mills_residual(&bg.conn, &bg.metric, p, &v, (m, n))?;
                    worst = worst.max(r.declared).max(r.closure);
                    div = div.max(r.divergence_max);
                    full = full.max(r.full);
                }
                Ok(Outcome::residual(worst, pts.len()).note(format!("max curvature divergence {div:e}, max residual over all components {full:e}")))
            }
            Self::WeakEmFieldStrengths { min_field } => {
                let bg = sc.background()?;
                let r = verify_weak_em_field_strengths(&bg.conn, &bg.metric, &pts)?;
                Ok(Outcome::residual(r.max_residual(), r.samples)
                    .note(format!("max field strength {:e}", r.max_field))
                    .fail_if(r.max_field < *min_field, format!("field strengths vanish: max {:e} < {min_field:e}", r.max_field)))
            }
            Self::LeptonEvolution { charge } => {
                let bg = sc.background()?;
                let rho = &sc.charge(charge)?.field;
                let tol = self.default_tolerance().max(1e-10);
                let mut worst = 0.0f64;
                let mut lhs = 0.0f64;
                for p in &pts {
                    let r = lepton_evolution_residual(&bg.conn, &bg.metric, rho, p, tol)?;
                    worst = worst.max(r.max);
                    lhs = lhs.max(r.lhs_max);
                }
                let nu_r = lepton_lines(false).into_iter().find(|l| l.charge == "nu_R");
                let coupled = nu_r.map_or(true, |l| l.couples_to("W1") || l.couples_to("A"));
                Ok(Outcome::residual(worst, pts.len())
                    .note(format!("largest covariant derivative {lhs:e}"))
                    .fail_if(coupled, "right-handed neutrino line couples to W1 or A"))
            }
            Self::GluonAssembly => {
                let bg = sc.background()?;
                let rst = &sc.sector_setup(Sector::Strong)?.rst;
                let mut worst = 0.0f64;
                let mut stated = 0.0f64;
                let mut mmax = 0.0f64;
                for p in &pts {
                    let g = gluon_check(&decompose_strong(&bg.conn, &bg.metric, p, rst)?, 1e-10)?;
                    worst = worst.max(g.corrected);
                    stated = stated.max(g.stated);
                    mmax = mmax.max(g.matrix_max);
                }
                Ok(Outcome::residual(worst, pts.len())
                    .note(format!("eighth component taken as T/√2; with T unscaled the residual is {stated:e}"))
                    .note(format!("largest gluon matrix entry {mmax:e}")))
            }
            Self::UnifiedConditions { charge, blocks } => {
                let bg = sc.background()?;
                let setup = sc.sector_setup(Sector::Unified)?;
                let rho = charge.as_ref().map(|c| sc.charge(c)).transpose()?.map(|c| &c.field);
                let mut toggles = [false; 6];
                for &b in blocks {
                    if (1..=6).contains(&b) {
                        toggles[b as usize - 1] = true;
                    }
                }
                let tol = self.default_tolerance();
                let rep = check_unified_conditions(&bg.conn, &bg.metric, rho, &setup.mixing, toggles, &pts, tol)?;
                let worst = rep.entries.iter().filter(|e| e.enabled && !e.vacuous).map(|e| e.residual).fold(0.0, f64::max);
                let mut out = Outcome::residual(worst, pts.len());
                for e in &rep.entries {
                    out = out.note(format!("block {} ({}): residual {:e}{}", e.block, e.label, e.residual, if e.enabled { "" } else { " (disabled)" }));
                }
                Ok(out)
            }
            Self::PmnsMixing { charge } | Self::CkmMixing { charge } => {
                let bg = sc.background()?;
                let setup = sc.sector_setup(Sector::Unified)?;
                let rho = &sc.charge(charge)?.field;
                let mut worst = 0.0f64;
                let mut lhs = 0.0f64;
                for p in &pts {
                    let r = match self {
                        Self::PmnsMixing { .. } => pmns_mixing_residual(&bg.conn, &bg.metric, rho, &setup.mixing, p, 1e-10)?,
                        _ => ckm_mixing_residual(&bg.conn, &bg.metric, rho, &setup.mixing, p, 1e-10)?,
                    };
                    worst = worst.max(r.max);
                    lhs = lhs.max(r.lhs_max);
                }
                Ok(Outcome::residual(worst, pts.len())
                    .note(format!("largest covariant derivative {lhs:e}"))
                    .fail_if(setup.mixing.is_zero(), "mixing constants are all zero"))
            }
            Self::Classify { charge, point } => {
                let bg = sc.background()?;
                let p = Point { coords: start_point(sc, point)? };
                let rho = sc.charge(charge)?.field.evaluate(&p)?;
                let gl = lowered_connection(&bg.conn, &bg.metric, &p)?;
                let class = classify_field(&rho, &gl, d, self.default_tolerance());
                let text = serde_json::to_string(&class).map_err(|e| Error::Io(e.to_string()))?;
                Ok(Outcome { measure: Measure::Info, samples: 1, diagnostics: vec![text], failure: None })
            }
            Self::DownTypeExclusion { configurations, seed } => {
                let mut worst = 0.0f64;
                let mut excluded = 0usize;
                for i in 0..*configurations {
                    let mut rng = member_rng(*seed, i as u64);
                    let mut r = [0.0f64; 9];
                    for (k, v) in r.iter_mut().enumerate() {
                        if k % 4 != 0 {
                            *v = rng.gen_range(-1.0..1.0);
                        }
                    }
                    let q = QuarkCharges::from_rho(&r, 3, 0);
                    let dd = derive_down(&q, 2);
                    worst = worst.max(dd[0].abs()).max(dd[1].abs());
                    let lone = QuarkCharges { d: [[0.0; 2], [0.0; 2], [rng.gen_range(0.1..1.0), rng.gen_range(-1.0..1.0)]], u: [[0.0; 2]; 3] };
                    if let FieldClass::IndividualQuarkCandidate { confinement_excluded: true, .. } = classify_quarks(&lone, 1e-12) {
                        excluded += 1;
                    }
                }
                Ok(Outcome::residual(worst, *configurations)
                    .note(format!("{excluded}/{configurations} lone third down-type charges excluded"))
                    .fail_if(excluded != *configurations, "a lone third down-type charge was not excluded"))
            }
            Self::EnergyMomentum { charge, trials, min_fraction } => {
                let bg = sc.background()?;
                let c = sc.charge(charge)?;
                let tol = self.default_tolerance();
                let mut on_max = 0.0f64;
                let mut on_at = Vec::with_capacity(pts.len());
                for p in &pts {
                    let on = energy_momentum_residual(c, &bg, &p.coords, &unit_gradient(c, &bg, &p.coords)?)?;
                    on_max = on_max.max(on);
                    on_at.push(on);
                }
                let mut rng = member_rng(sc.sampling.seed, u64::MAX - 1);
                let mut strong = 0usize;
                for k in 0..*trials {
                    let i = k % pts.len();
                    let mut v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                    v.iter_mut().for_each(|a| *a /= n);
                    let off = energy_momentum_residual(c, &bg, &pts[i].coords, &v)?;
                    if off >= 100.0 * on_at[i].max(tol) {
                        strong += 1;
                    }
                }
                let frac = strong as f64 / (*trials).max(1) as f64;
                Ok(Outcome::residual(on_max, pts.len())
                    .note(format!("off-gradient control: {strong}/{trials} trials at least 100× the larger of on-gradient residual and tolerance"))
                    .fail_if(frac < *min_fraction, format!("negative control too weak: fraction {frac}")))
            }
            Self::MomentumVelocity { charge, start, step, steps } => {
                let bg = sc.background()?;
                let c = sc.charge(charge)?;
                let line = integrate_gradient_line(c, &bg, &start_point(sc, start)?, *step, *steps)?;
                let r = momentum_velocity_residual(c, &bg, &line)?;
                let mut out = Outcome::residual(r, line.len());
                if let Some(t) = &line.truncated {
                    out = out.note(t.clone());
                }
                Ok(out)
            }
            Self::ConvergenceOrder { charge, start, step, steps, min_order } => {
                let bg = sc.background()?;
                let order = convergence_order(sc.charge(charge)?, &bg, &start_point(sc, start)?, *step, *steps)?;
                Ok(Outcome { measure: Measure::Graded { value: order, stderr: None }, samples: 3, diagnostics: vec![], failure: None }
                    .fail_if(!(order >= *min_order), format!("observed order {order:.3} below {min_order}")))
            }
            Self::GammaAlgebra => {
                let bg = sc.background()?;
                let mut worst = 0.0f64;
                for p in &pts {
                    let g = bg.metric.g_at(&p.coords);
                    let set = build_gamma_set(&g, d)?;
                    worst = worst.max(set.anticommutator_residual(&bg.metric.g_inv_at(&p.coords)?));
                }
                Ok(Outcome::residual(worst, pts.len()))
            }
            Self::DiracSquared { charge, start, step, steps } => {
                let bg = sc.background()?;
                let c = sc.charge(charge)?;
                let line = integrate_gradient_line(c, &bg, &start_point(sc, start)?, *step, *steps)?;
                let r = dirac_residual(c, &bg, &line)?;
                Ok(Outcome::residual(r.squared, r.samples).note(format!("branch residual {:e}", r.branch)))
            }
            Self::OrthogonalAction { charge, start, step, steps } => {
                let bg = sc.background()?;
                let c = sc.charge(charge)?;
                let line = integrate_gradient_line(c, &bg, &start_point(sc, start)?, *step, *steps)?;
                let a = orthogonal_action(c, &bg, &line)?;
                Ok(Outcome::residual(a.residual(), line.len()).note(format!("orthogonal action {:.12}, elementary action {:.12}", a.orthogonal, a.elementary)))
            }
            Self::LorentzForce { charge } => {
                let bg = sc.background()?;
                let c = sc.charge(charge)?;
                let mut worst = 0.0f64;
                let mut curv = 0.0f64;
                for p in &pts {
                    let f = lorentz_force(c, &bg, &p.coords)?;
                    worst = worst.max(f.residual);
                    curv = curv.max(max_abs(&f.curvature_term));
                }
                Ok(Outcome::residual(worst, pts.len()).note(format!("largest curvature term {curv:e}")))
            }
            Self::HeisenbergSchrodinger { charge, vector, observable, start, step, steps } => {
                let bg = sc.background()?;
                let c = sc.charge(charge)?;
                let line = integrate_gradient_line(c, &bg, &start_point(sc, start)?, *step, *steps)?;
                let r = heisenberg_schrodinger_check(c, &bg, sc.field(vector)?, sc.field(observable)?, &line)?;
                Ok(Outcome::residual(r.heisenberg.max(r.schrodinger), r.samples)
                    .note(format!("heisenberg {:e}, schrodinger {:e}, largest bracket {:e}", r.heisenberg, r.schrodinger, r.bracket_max)))
            }
            Self::DensityComposability { charge, ensemble, representation, start, t, step, sigmas } => {
                let bg = sc.background()?;
                let r = density_composability(*representation, sc.charge(charge)?, &bg, sc.ensemble(ensemble)?, &start_point(sc, start)?, *t, *step)?;
                let mut out = Outcome {
                    measure: Measure::Graded { value: r.whole, stderr: Some(r.combined_stderr) },
                    samples: r.accepted,
                    diagnostics: vec![format!(
                        "whole {:.6}, halves {:.6} × {:.6} = {:.6}, deviation {:e}, combined stderr {:e}",
                        r.whole, r.first, r.second, r.product, r.deviation, r.combined_stderr
                    )],
                    failure: None,
                };
                if let Some(x) = r.restart_second {
                    out = out.note(format!("second half re-estimated from the midpoint: {x:.6}"));
                }
                Ok(out.fail_if(!r.holds(*sigmas), format!("deviation exceeds {sigmas} combined stderr")))
            }
            Self::DensityEstimate { charge, ensemble, representation, start, t, step } => {
                let bg = sc.background()?;
                let (c, e, a) = (sc.charge(charge)?, sc.ensemble(ensemble)?, start_point(sc, start)?);
                let est = match representation {
                    DensityKind::Position => estimate_density_position(c, &bg, e, &a, *t, *step)?,
                    DensityKind::Momentum => estimate_density_momentum(c, &bg, e, &a, *t, *step)?,
                };
                match est.estimate {
                    Some(v) => Ok(Outcome { measure: Measure::Estimate { value: v, stderr: Some(est.stderr) }, samples: est.accepted, diagnostics: vec![], failure: None }),
                    None => Ok(Outcome { measure: Measure::Info, samples: est.accepted, diagnostics: vec![], failure: est.diagnostic }),
                }
            }
            Self::Propagator { charge, ensemble, start, target, ball_radius, x0_range, step } => {
                let bg = sc.background()?;
                let w = PropagatorWindow { target: target.clone(), ball_radius: *ball_radius, x0_range: *x0_range };
                let k = propagator_sum(sc.charge(charge)?, &bg, sc.ensemble(ensemble)?, &start_point(sc, start)?, &w, *step)?;
                let stats = format!("accepted {}/{}, density {:.6}", k.accepted, k.total, k.density);
                match k.value {
                    Some((re, im)) => Ok(Outcome {
                        measure: Measure::Estimate { value: (re * re + im * im).sqrt(), stderr: None },
                        samples: k.accepted,
                        diagnostics: vec![format!("K = {re:.9} {im:+.9}i"), stats],
                        failure: None,
                    }),
                    None => Ok(Outcome { measure: Measure::Info, samples: 0, diagnostics: vec![stats], failure: k.diagnostic }),
                }
            }
            Self::CptInvariance { charge, path } => {
                let stack = sc.stack().ok_or_else(|| Error::Config("check needs a connection stack".into()))?.clone();
                let c = sc.charge(charge)?;
                let state = InversionState::new(sc.signature, stack, Some(c.field.clone()));
                let path = path.clone().unwrap_or_else(|| default_path(sc));
                let r = inverted_path_action(&InversionSpec::CPT, &state, c.functional, &path)?;
                let twice = apply_cpt(&InversionSpec::CPT, &apply_cpt(&InversionSpec::CPT, &state));
                Ok(Outcome::residual(r.residual, path.len())
                    .note(format!("action {:.12} before, {:.12} after", r.original, r.inverted))
                    .fail_if(twice != state, "applying the inversion twice does not restore the scenario"))
            }
        }
    }
}

fn gauge_of(sc: &Scenario) -> Result<ConnectionField> {
    let stack = sc.stack().ok_or_else(|| Error::Config("check needs a connection stack".into()))?;
    Ok(ConnectionField::gauge(stack))
}


/// Connection whose transformation laws are checked; imposed assignments are dropped.
fn law_connection(sc: &Scenario) -> Result<(ConnectionField, Option<String>)> {
    let conn = sc.background()?.conn;
    let base = conn.unconstrained();
    if base.kind == conn.kind {
        Ok((conn, None))
    } else {
        let note = format!("checked on the {:?} connection without its imposed assignments", base.kind);
        Ok((base.clone(), Some(note)))
    }
}
