//! Check reports and their JSON, CSV and text renderings.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Version of the report layout.
pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    Estimated,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Skipped => "skipped",
            Self::Estimated => "estimated",
        }
    }
}

/// Result of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: String,
    pub kind: String,
    pub status: Status,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub estimate: Option<f64>,
    pub stderr: Option<f64>,
    pub samples: usize,
    pub wall_ms: f64,
    pub diagnostics: Vec<String>,
}

/// Reports of one scenario run, sorted by check id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub report_version: u32,
    pub scenario: String,
    pub checks: Vec<CheckReport>,
}

impl RunReport {
    pub fn new(scenario: impl Into<String>, mut checks: Vec<CheckReport>) -> Self {
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        Self { report_version: REPORT_VERSION, scenario: scenario.into(), checks }
    }

    pub fn any_failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(["id", "kind", "status", "residual", "tolerance", "estimate", "stderr", "samples", "wall_ms", "diagnostics"]).expect("in-memory write");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for c in &self.checks {
            w.write_record([
                c.id.clone(),
                c.kind.clone(),
                c.status.as_str().to_string(),
                opt(c.residual),
                opt(c.tolerance),
                opt(c.estimate),
                opt(c.stderr),
                c.samples.to_string(),
                format!("{:.3}", c.wall_ms),
                c.diagnostics.join("; "),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("scenario {}\n", self.scenario);
        for c in &self.checks {
            let _ = write!(s, "{:<9} {:<28} {:<24}", c.status.as_str().to_uppercase(), c.id, c.kind);
            if let (Some(r), Some(t)) = (c.residual, c.tolerance) {
                let _ = write!(s, " residual {r:.3e} (tol {t:.1e})");
            }
            if let Some(e) = c.estimate {
                let _ = write!(s, " estimate {e:.6}");
                if let Some(se) = c.stderr {
                    let _ = write!(s, " ± {se:.2e}");
                }
            }
            let _ = writeln!(s, " [{} samples, {:.1} ms]", c.samples, c.wall_ms);
            for d in &c.diagnostics {
                let _ = writeln!(s, "    {d}");
            }
        }
        let count = |st: Status| self.checks.iter().filter(|c| c.status == st).count();
        let _ = writeln!(
            s,
            "{} pass, {} fail, {} skipped, {} estimated",
            count(Status::Pass),
            count(Status::Fail),
            count(Status::Skipped),
            count(Status::Estimated)
        );
        s
    }
}
