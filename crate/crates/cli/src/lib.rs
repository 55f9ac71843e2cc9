//! Scenario-driven verification harness for affine-gauge geometry.

pub mod checks;
pub mod report;
pub mod scenario;

use checks::{CheckSpec, Measure};
use rayon::prelude::*;
use report::{CheckReport, RunReport, Status};
use scenario::Scenario;
use std::time::Instant;

pub use affine_gauge::{Error, Result};

/// Environment variable overriding default check tolerances.
pub const TOLERANCE_ENV: &str = "AFFINE_GAUGE_TOLERANCE";

/// How a scenario's checks are selected and run.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Glob over check ids.
    pub filter: Option<glob::Pattern>,
    pub parallel: bool,
    /// Tolerance used when neither the check nor the scenario sets one.
    pub tolerance: Option<f64>,
}

impl RunOptions {
    /// Reads the tolerance override from the environment.
    pub fn with_env(mut self) -> Result<Self> {
        if let Ok(v) = std::env::var(TOLERANCE_ENV) {
            let t: f64 = v.trim().parse().map_err(|_| Error::Config(format!("{TOLERANCE_ENV} is not a number: {v}")))?;
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("{TOLERANCE_ENV} must be finite and non-negative")));
            }
            self.tolerance = Some(t);
        }
        Ok(self)
    }
}

/// Tolerance precedence: check, scenario table, override, check default.
pub fn resolve_tolerance(sc: &Scenario, c: &CheckSpec, opts: &RunOptions) -> f64 {
    c.tolerance.or_else(|| sc.tolerances.get(&c.id).copied()).or(opts.tolerance).unwrap_or_else(|| c.kind.default_tolerance())
}

/// Runs one check into a report.
pub fn run_check(sc: &Scenario, c: &CheckSpec, opts: &RunOptions) -> CheckReport {
    let tol = resolve_tolerance(sc, c, opts);
    let start = Instant::now();
    let result = c.kind.run(sc);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut rep = CheckReport {
        id: c.id.clone(),
        kind: c.kind.name().to_string(),
        status: Status::Pass,
        residual: None,
        tolerance: None,
        estimate: None,
        stderr: None,
        samples: 0,
        wall_ms,
        diagnostics: vec![],
    };
    match result {
        Err(Error::Constraint(m)) => {
            rep.status = Status::Skipped;
            rep.diagnostics.push(format!("precondition not met: {m}"));
        }
        Err(e) => {
            rep.status = Status::Fail;
            rep.diagnostics.push(e.to_string());
        }
        Ok(o) => {
            rep.samples = o.samples;
            rep.diagnostics = o.diagnostics;
            rep.status = match o.measure {
                Measure::Residual(r) => {
                    rep.residual = Some(r);
                    rep.tolerance = Some(tol);
                    if r <= tol {
                        Status::Pass
                    } else {
                        rep.diagnostics.push(format!("residual {r:e} exceeds tolerance {tol:e}"));
                        Status::Fail
                    }
                }
                Measure::Graded { value, stderr } => {
                    rep.estimate = Some(value);
                    rep.stderr = stderr;
                    Status::Pass
                }
                Measure::Estimate { value, stderr } => {
                    rep.estimate = Some(value);
                    rep.stderr = stderr;
                    Status::Estimated
                }
                Measure::Info => Status::Pass,
            };
            if let Some(f) = o.failure {
                rep.status = Status::Fail;
                rep.diagnostics.push(f);
            }
        }
    }
    rep
}

/// Runs the selected checks; the report order does not depend on scheduling.
pub fn run_checks(sc: &Scenario, opts: &RunOptions) -> RunReport {
    let selected: Vec<&CheckSpec> = sc.checks.iter().filter(|c| opts.filter.as_ref().map_or(true, |p| p.matches(&c.id))).collect();
    let reports = if opts.parallel {
        selected.par_iter().map(|c| run_check(sc, c, opts)).collect()
    } else {
        selected.iter().map(|c| run_check(sc, c, opts)).collect()
    };
    RunReport::new(sc.name.clone(), reports)
}
