//! Scenario loading, check orchestration and report emission.

use affine_gauge_cli::report::{RunReport, Status};
use affine_gauge_cli::scenario::{load_scenario, Scenario};
use affine_gauge_cli::{run_checks, RunOptions};
use std::path::PathBuf;

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn strip_times(mut r: RunReport) -> RunReport {
    r.checks.iter_mut().for_each(|c| c.wall_ms = 0.0);
    r
}

const MINIMAL: &str = r#"
[signature]
total_dim = 5
"#;

#[test]
fn minimal_flat_scenario_loads_with_zero_checks() {
    let sc = Scenario::from_toml(MINIMAL).unwrap();
    assert_eq!(sc.dim(), 5);
    assert!(sc.checks.is_empty());
    let r = run_checks(&sc, &RunOptions::default());
    assert!(r.checks.is_empty() && !r.any_failed());
}

#[test]
fn non_invertible_frame_is_rejected_with_its_point() {
    let text = r#"
[signature]
total_dim = 2
external_dim = 1

[stacks.bad]
source = "frames"
outer = ["(- x1 x1)", "0", "0", "1"]
"#;
    let e = Scenario::from_toml(text).unwrap_err().to_string();
    assert!(e.contains("stack bad") && e.contains("not invertible") && e.contains("point"), "{e}");
}

#[test]
fn parse_errors_report_line_and_column() {
    let text = "[signature]\ntotal_dim = \"five\"\n";
    let e = Scenario::from_toml(text).unwrap_err().to_string();
    assert!(e.contains("line 2"), "{e}");
}

#[test]
fn unknown_names_and_duplicate_ids_are_rejected() {
    let base = r#"
[signature]
total_dim = 5

[stacks.flat]
source = "identity"

[connection]
kind = "gauge"
stack = "flat"
"#;
    let unknown = format!("{base}\n[[checks]]\nid = \"a\"\nkind = \"energy_momentum\"\ncharge = \"missing\"\n");
    assert!(Scenario::from_toml(&unknown).unwrap_err().to_string().contains("unknown charge missing"));
    let dup = format!("{base}\n[[checks]]\nid = \"a\"\nkind = \"gamma_algebra\"\n[[checks]]\nid = \"a\"\nkind = \"gamma_algebra\"\n");
    assert!(Scenario::from_toml(&dup).unwrap_err().to_string().contains("duplicate check id a"));
    let sector = format!("{base}\n[sector]\nkind = \"strong\"\n");
    assert!(Scenario::from_toml(&sector).is_err());
}

#[test]
fn shipped_rotation_example_lists_six_checks() {
    let sc = load_scenario(&shipped("weak_em_rotation.toml")).unwrap();
    assert_eq!(sc.checks.len(), 6);
}

#[test]
fn flat_scenario_passes_everything_at_roundoff() {
    let r = run_checks(&load_scenario(&shipped("flat.toml")).unwrap(), &RunOptions::default());
    assert!(!r.checks.is_empty());
    for c in &r.checks {
        assert_eq!(c.status, Status::Pass, "{c:?}");
        assert!(c.residual.unwrap() <= 1e-13, "{c:?}");
    }
}

#[test]
fn perturbed_scenario_skips_dependent_checks() {
    let r = run_checks(&load_scenario(&shipped("weak_em_perturbed.toml")).unwrap(), &RunOptions::default());
    let status = |id: &str| r.checks.iter().find(|c| c.id == id).unwrap().status;
    assert_eq!(status("lepton-evolution"), Status::Skipped);
    assert_eq!(status("lorentz-force"), Status::Skipped);
    assert_eq!(status("dirac-squared"), Status::Skipped);
    assert_eq!(status("field-strengths"), Status::Pass);
    assert!(!r.any_failed());
}

#[test]
fn pass_implies_residual_within_tolerance() {
    for name in ["weak_em_curved.toml", "strong_traceless.toml", "unified_mixing.toml"] {
        for c in run_checks(&load_scenario(&shipped(name)).unwrap(), &RunOptions::default()).checks {
            if let (Status::Pass, Some(r)) = (c.status, c.residual) {
                assert!(r <= c.tolerance.unwrap(), "{c:?}");
            }
            assert_ne!(c.status, Status::Fail, "{c:?}");
        }
    }
}

#[test]
fn reports_are_deterministic_and_schedule_independent() {
    let sc = load_scenario(&shipped("weak_em_curved.toml")).unwrap();
    let a = strip_times(run_checks(&sc, &RunOptions::default()));
    let b = strip_times(run_checks(&sc, &RunOptions { parallel: true, ..Default::default() }));
    assert_eq!(a.to_json(), b.to_json());
    assert!(a.checks.windows(2).all(|w| w[0].id < w[1].id));
    assert!(a.to_json().contains("\"report_version\": 1"));
}

#[test]
fn filter_selects_by_glob() {
    let sc = load_scenario(&shipped("weak_em_curved.toml")).unwrap();
    let opts = RunOptions { filter: Some(glob::Pattern::new("*-law").unwrap()), ..Default::default() };
    let ids: Vec<String> = run_checks(&sc, &opts).checks.into_iter().map(|c| c.id).collect();
    assert_eq!(ids, ["coordinate-law", "frame-law"]);
}

#[test]
fn tolerance_precedence() {
    let text = r#"
[signature]
total_dim = 5

[stacks.flat]
source = "identity"

[connection]
kind = "gauge"
stack = "flat"

[tolerances]
b = 0.5

[[checks]]
id = "a"
kind = "gamma_algebra"
tolerance = 0.25

[[checks]]
id = "b"
kind = "gamma_algebra"

[[checks]]
id = "c"
kind = "gamma_algebra"
"#;
    let sc = Scenario::from_toml(text).unwrap();
    let tol = |r: &RunReport, id: &str| r.checks.iter().find(|c| c.id == id).unwrap().tolerance.unwrap();
    let plain = run_checks(&sc, &RunOptions::default());
    assert_eq!((tol(&plain, "a"), tol(&plain, "b"), tol(&plain, "c")), (0.25, 0.5, 1e-12));
    let env = run_checks(&sc, &RunOptions { tolerance: Some(1e-3), ..Default::default() });
    assert_eq!((tol(&env, "a"), tol(&env, "b"), tol(&env, "c")), (0.25, 0.5, 1e-3));
}

#[test]
fn empty_and_mixed_reports_render() {
    let empty = RunReport::new("none", vec![]);
    let v: serde_json::Value = serde_json::from_str(&empty.to_json()).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 0);
    assert_eq!(empty.to_csv().lines().count(), 1);
    let sc = load_scenario(&shipped("weak_em_perturbed.toml")).unwrap();
    let r = run_checks(&sc, &RunOptions::default());
    assert_eq!(r.to_csv().lines().count(), 1 + r.checks.len());
    let back: RunReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back, r);
    assert!(r.to_text().contains("SKIPPED"));
}
