//! Scenario files: TOML declarations of stacks, connection, sector, charges,
//! ensembles and checks, validated eagerly into runnable geometry.

use crate::checks::CheckSpec;
use affine_gauge::connections::{Assignment, ConnectionField};
use affine_gauge::evolution::{Background, Charge, EnsembleSpec, Functional};
use affine_gauge::frames::{FrameField, MetricField, ReferenceSystemStack};
use affine_gauge::sectors::scenarios::{impose_charge_equalities, random_charge, symmetrize, traceless, random_sector_stack, unified_assignments, weak_em_rotation};
use affine_gauge::sectors::{build_sector_frame, InternalGenerator, MixingConstants, PlaneRotation, RstMatrix, Sector};
use affine_gauge::{Error, Expr, Field, Point, Result, Sampling, SpaceSignature, TensorFieldHandle, Variance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureSpec {
    pub total_dim: usize,
    #[serde(default = "default_external")]
    pub external_dim: usize,
}

fn default_external() -> usize {
    3
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_lo")]
    pub lo: f64,
    #[serde(default = "default_hi")]
    pub hi: f64,
}

fn default_count() -> usize {
    20
}
fn default_lo() -> f64 {
    -1.0
}
fn default_hi() -> f64 {
    1.0
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self { seed: 0, count: default_count(), lo: default_lo(), hi: default_hi() }
    }
}

/// Source of a reference-system stack.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum StackSpec {
    Identity,
    /// Row-major outer frame and optional inner frame as expression strings.
    Frames { outer: Vec<Expr>, inner: Option<Vec<Expr>> },
    /// Sector frame: internal rotations (zero-based internal indices) and column scales.
    Sector {
        sector: Sector,
        #[serde(default)]
        scales: Vec<f64>,
        #[serde(default)]
        rotations: Vec<PlaneRotation>,
        inner: Option<Vec<Expr>>,
    },
    /// D = 5 rotation by angle `k·x¹` with internal scale `c`.
    WeakEmRotation { k: f64, c: f64 },
    /// Seeded sector stack with random angles and a curved inner layer.
    Random { sector: Sector, seed: u64 },
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKindSpec {
    Zero,
    Simple,
    Gauge,
    Christoffel,
    Holonomic,
}

/// Named constraint families imposed on the connection.
#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `Γ^a_{b·} = Γ^b_{a·}` on the lepton pair.
    LeptonSymmetry,
    /// Trace condition on the strong-sector colour diagonal.
    StrongTrace,
    /// Every unified condition block for the sector's mixing constants.
    Unified,
}

/// One explicit assignment `Γ^t_{u·} := Σ c Γ^m_{n·}` with one-based indices.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentSpec {
    pub target: [usize; 2],
    pub terms: Vec<(usize, usize, f64)>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionSpec {
    pub kind: ConnectionKindSpec,
    pub stack: String,
    #[serde(default)]
    pub impose: Vec<Constraint>,
    #[serde(default)]
    pub assignments: Vec<AssignmentSpec>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SectorSpec {
    pub kind: Sector,
    /// Mixing constants keyed `"upper_lower"` with one-based indices.
    #[serde(default)]
    pub mixing: BTreeMap<String, f64>,
    pub rst: Option<[[f64; 3]; 3]>,
}

/// Charge field declaration.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ChargeSpec {
    pub expr: Option<Expr>,
    /// Row-major rank-2 lower components.
    pub components: Option<Vec<Expr>>,
    /// Seed of a random rank-2 charge.
    pub random_seed: Option<u64>,
    /// Copy entries so the lepton–quark mixing equalities hold.
    #[serde(default)]
    pub mixing_equalities: bool,
    pub functional: Option<Functional>,
}

/// Auxiliary scalar or upper vector field.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub expr: Option<Expr>,
    pub vector: Option<Vec<Expr>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFileSpec {
    /// Row-major centre; identity when absent.
    pub center: Option<Vec<f64>>,
    pub radius: f64,
    pub sample_count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub det_constraint: bool,
}

/// Raw scenario file contents.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: Option<String>,
    pub signature: SignatureSpec,
    #[serde(default)]
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub stacks: BTreeMap<String, StackSpec>,
    pub connection: Option<ConnectionSpec>,
    pub sector: Option<SectorSpec>,
    #[serde(default)]
    pub charges: BTreeMap<String, ChargeSpec>,
    #[serde(default)]
    pub fields: BTreeMap<String, FieldSpec>,
    #[serde(default)]
    pub ensembles: BTreeMap<String, EnsembleFileSpec>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
}

/// Sector configuration in force.
#[derive(Clone, Debug)]
pub struct SectorSetup {
    pub sector: Sector,
    pub mixing: MixingConstants,
    pub rst: RstMatrix,
}

/// Validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub signature: SpaceSignature,
    pub sampling: Sampling,
    pub stacks: BTreeMap<String, ReferenceSystemStack>,
    pub connection: Option<ConnectionField>,
    /// Name of the stack the connection and metric come from.
    pub connection_stack: Option<String>,
    pub sector: Option<SectorSetup>,
    pub charges: BTreeMap<String, Charge>,
    pub fields: BTreeMap<String, TensorFieldHandle>,
    pub ensembles: BTreeMap<String, EnsembleSpec>,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Vec<CheckSpec>,
}

/// Points at which construction-time invariants are validated.
pub const VALIDATION_POINTS: usize = 16;
const VALIDATION_TOL: f64 = 1e-10;

fn rst_identity() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

fn square(es: Vec<Expr>, d: usize, what: &str) -> Result<Vec<Expr>> {
    if es.len() != d * d {
        return Err(Error::Config(format!("{what} needs {} entries, got {}", d * d, es.len())));
    }
    Ok(es)
}

fn build_stack(name: &str, spec: &StackSpec, d: usize, pts: &[Point]) -> Result<ReferenceSystemStack> {
    let stack = match spec {
        StackSpec::Identity => ReferenceSystemStack::identity(d),
        StackSpec::Frames { outer, inner } => {
            let outer = FrameField::from_exprs(d, square(outer.clone(), d, "outer frame")?)?;
            match inner {
                Some(i) => ReferenceSystemStack::new(name, outer, FrameField::from_exprs(d, square(i.clone(), d, "inner frame")?)?)?,
                None => ReferenceSystemStack::trivial_inner(name, outer),
            }
        }
        StackSpec::Sector { sector, scales, rotations, inner } => {
            sector.check_dim(d)?;
            let inner = inner.clone().map(|i| square(i, d, "inner frame").and_then(|i| FrameField::from_exprs(d, i))).transpose()?;
            let gen = InternalGenerator { scales: scales.clone(), rotations: rotations.clone(), matrix: None, inner };
            build_sector_frame(*sector, &gen, pts, VALIDATION_TOL)?
        }
        StackSpec::WeakEmRotation { k, c } => {
            Sector::WeakEm.check_dim(d)?;
            weak_em_rotation(*k, *c)
        }
        StackSpec::Random { sector, seed } => {
            sector.check_dim(d)?;
            random_sector_stack(*sector, *seed)
        }
    };
    for (layer, f) in [("outer", &stack.outer), ("inner", &stack.inner)] {
        f.check_invertible(pts).map_err(|e| Error::Config(format!("stack {name}: {layer} frame is not invertible: {e}")))?;
    }
    Ok(stack)
}

fn build_connection(spec: &ConnectionSpec, stack: &ReferenceSystemStack, sector: Option<&SectorSetup>) -> Result<ConnectionField> {
    let d = stack.dim();
    let base = match spec.kind {
        ConnectionKindSpec::Zero => ConnectionField::zero(d),
        ConnectionKindSpec::Simple => ConnectionField::simple(stack),
        ConnectionKindSpec::Gauge => ConnectionField::gauge(stack),
        ConnectionKindSpec::Christoffel => ConnectionField::christoffel(&stack.metric()),
        ConnectionKindSpec::Holonomic => ConnectionField::holonomic(stack),
    };
    let mut assignments: Vec<Assignment> = Vec::new();
    for c in &spec.impose {
        let needs = |s: Sector| -> Result<&SectorSetup> {
            sector
                .filter(|x| x.sector == s)
                .ok_or_else(|| Error::Config(format!("constraint {c:?} needs a {s:?} sector declaration")))
        };
        match c {
            Constraint::LeptonSymmetry => {
                if d < 5 {
                    return Err(Error::Config("lepton symmetry needs D ≥ 5".into()));
                }
                assignments.extend(symmetrize(3, 4));
            }
            Constraint::StrongTrace => {
                needs(Sector::Strong)?;
                assignments.push(traceless(3));
            }
            Constraint::Unified => assignments.extend(unified_assignments(&needs(Sector::Unified)?.mixing)),
        }
    }
    let one_based = |i: usize| -> Result<usize> {
        if i == 0 || i > d {
            Err(Error::Config(format!("assignment index {i} outside 1..={d}")))
        } else {
            Ok(i - 1)
        }
    };
    for a in &spec.assignments {
        let terms = a.terms.iter().map(|(m, n, c)| Ok(((one_based(*m)?, one_based(*n)?), *c))).collect::<Result<_>>()?;
        assignments.push(Assignment { target: (one_based(a.target[0])?, one_based(a.target[1])?), terms });
    }
    if assignments.is_empty() {
        Ok(base)
    } else {
        ConnectionField::constrained(base, assignments)
    }
}

fn build_charge(name: &str, spec: &ChargeSpec, d: usize) -> Result<Charge> {
    let given = [spec.expr.is_some(), spec.components.is_some(), spec.random_seed.is_some()].iter().filter(|b| **b).count();
    if given != 1 {
        return Err(Error::Config(format!("charge {name} needs exactly one of expr, components, random_seed")));
    }
    if let Some(e) = &spec.expr {
        return Charge::new(TensorFieldHandle::scalar(d, e.clone()), spec.functional.unwrap_or(Functional::Scalar));
    }
    let mut es = match (&spec.components, spec.random_seed) {
        (Some(c), _) => square(c.clone(), d, &format!("charge {name}"))?,
        (None, Some(s)) => random_charge(&mut ChaCha8Rng::seed_from_u64(s), d),
        _ => unreachable!("exactly one source checked above"),
    };
    if spec.mixing_equalities {
        if d != 8 {
            return Err(Error::Config(format!("charge {name}: mixing equalities need D = 8")));
        }
        impose_charge_equalities(&mut es, d);
    }
    let f = TensorFieldHandle::new(d, vec![Variance::Lower; 2], Field::Exprs(es))?;
    let functional = spec.functional.ok_or_else(|| Error::Config(format!("charge {name}: rank-2 charges must declare a functional")))?;
    Charge::new(f, functional)
}

fn build_field(name: &str, spec: &FieldSpec, d: usize) -> Result<TensorFieldHandle> {
    match (&spec.expr, &spec.vector) {
        (Some(e), None) => Ok(TensorFieldHandle::scalar(d, e.clone())),
        (None, Some(v)) => TensorFieldHandle::vector(d, v.clone()),
        _ => Err(Error::Config(format!("field {name} needs exactly one of expr, vector"))),
    }
}

impl Scenario {
    /// Validates a parsed file.
    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let d = file.signature.total_dim;
        let signature = SpaceSignature::new(d, file.signature.external_dim)?;
        let s = &file.sampling;
        if s.count == 0 || !(s.lo < s.hi) {
            return Err(Error::Config("sampling needs count ≥ 1 and lo < hi".into()));
        }
        let sampling = Sampling { seed: s.seed, count: s.count, lo: s.lo, hi: s.hi };
        let probe = Sampling { count: VALIDATION_POINTS, ..sampling.clone() };
        let pts = if d <= 6 { probe.points_with_corners(d) } else { probe.points(d) };

        let sector = match &file.sector {
            Some(sp) => {
                sp.kind.check_dim(d)?;
                let mixing = if sp.mixing.is_empty() && sp.kind == Sector::Unified {
                    MixingConstants::default_unified()
                } else {
                    MixingConstants::from_labels(&sp.mixing)?
                };
                Some(SectorSetup { sector: sp.kind, mixing, rst: RstMatrix::new(sp.rst.unwrap_or_else(rst_identity))? })
            }
            None => None,
        };

        let mut stacks = BTreeMap::new();
        for (name, spec) in &file.stacks {
            let st = build_stack(name, spec, d, &pts)?;
            if st.dim() != d {
                return Err(Error::Config(format!("stack {name} has dimension {}, signature says {d}", st.dim())));
            }
            stacks.insert(name.clone(), st);
        }
        let connection = match &file.connection {
            Some(c) => {
                let st = stacks.get(&c.stack).ok_or_else(|| Error::Config(format!("connection refers to unknown stack {}", c.stack)))?;
                Some(build_connection(c, st, sector.as_ref())?)
            }
            None => None,
        };
        let charges = file.charges.iter().map(|(n, c)| Ok((n.clone(), build_charge(n, c, d)?))).collect::<Result<_>>()?;
        let fields = file.fields.iter().map(|(n, f)| Ok((n.clone(), build_field(n, f, d)?))).collect::<Result<_>>()?;
        let mut ensembles = BTreeMap::new();
        for (n, e) in &file.ensembles {
            let spec = EnsembleSpec {
                center: e.center.clone().unwrap_or_else(|| affine_gauge::linalg::identity(d)),
                radius: e.radius,
                sample_count: e.sample_count,
                seed: e.seed,
                det_constraint: e.det_constraint,
            };
            spec.validate(d).map_err(|err| Error::Config(format!("ensemble {n}: {err}")))?;
            ensembles.insert(n.clone(), spec);
        }
        let mut ids = std::collections::BTreeSet::new();
        for c in &file.checks {
            if !ids.insert(c.id.clone()) {
                return Err(Error::Config(format!("duplicate check id {}", c.id)));
            }
        }
        let scenario = Self {
            name: file.name.clone().unwrap_or_else(|| "scenario".into()),
            signature,
            sampling,
            stacks,
            connection,
            connection_stack: file.connection.as_ref().map(|c| c.stack.clone()),
            sector,
            charges,
            fields,
            ensembles,
            tolerances: file.tolerances.clone(),
            checks: file.checks.clone(),
        };
        for c in &scenario.checks {
            c.kind.validate(&scenario).map_err(|e| Error::Config(format!("check {}: {e}", c.id)))?;
        }
        Ok(scenario)
    }

    /// Parses and validates TOML text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| {
            let (line, col) = e.span().map(|s| line_col(text, s.start)).unwrap_or((0, 0));
            Error::Config(format!("parse error at line {line}, column {col}: {}", e.message()))
        })?;
        Self::from_file(file)
    }

    pub fn dim(&self) -> usize {
        self.signature.total_dim
    }

    pub fn points(&self) -> Vec<Point> {
        self.sampling.points(self.dim())
    }

    pub fn stack(&self) -> Option<&ReferenceSystemStack> {
        self.connection_stack.as_ref().and_then(|n| self.stacks.get(n))
    }

    pub fn metric(&self) -> Option<MetricField> {
        self.stack().map(|s| s.metric())
    }

    /// Connection and metric, required by most checks.
    pub fn background(&self) -> Result<Background> {
        match (&self.connection, self.metric()) {
            (Some(c), Some(m)) => Background::new(c.clone(), m),
            _ => Err(Error::Config("scenario declares no connection".into())),
        }
    }

    pub fn charge(&self, name: &str) -> Result<&Charge> {
        self.charges.get(name).ok_or_else(|| Error::Config(format!("unknown charge {name}")))
    }

    pub fn field(&self, name: &str) -> Result<&TensorFieldHandle> {
        self.fields.get(name).ok_or_else(|| Error::Config(format!("unknown field {name}")))
    }

    pub fn ensemble(&self, name: &str) -> Result<&EnsembleSpec> {
        self.ensembles.get(name).ok_or_else(|| Error::Config(format!("unknown ensemble {name}")))
    }

    pub fn sector_setup(&self, s: Sector) -> Result<&SectorSetup> {
        self.sector.as_ref().filter(|x| x.sector == s).ok_or_else(|| Error::Config(format!("scenario declares no {s:?} sector")))
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Scenario::from_toml(&text)
}
