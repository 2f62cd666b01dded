use std::path::PathBuf;

use symdae::cli::{dispatch, EXIT_CONVERGENCE, EXIT_PARSE};

fn kundur() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("cases/kundur.json").display().to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("symdae").chain(args.iter().copied());
    let code = dispatch(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn pf_profile_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache").display().to_string();
    let json = dir.path().join("pf.json").display().to_string();
    let (code, out, _) = run(&["pf", &kundur(), "--profile", "--cache-dir", &cache, "--out", &json]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("converged in 4 iterations"));
    for phase in ["Solve Equations", "Update Residuals", "Build Jacobians"] {
        assert!(out.contains(phase));
    }
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["converged"], true);
    assert_eq!(report["variables"]["Bus.v[2]"], 1.0);

    // warm cache gives the same file
    let first = std::fs::read(&json).unwrap();
    assert_eq!(run(&["pf", &kundur(), "--cache-dir", &cache, "--out", &json]).0, 0);
    assert_eq!(std::fs::read(&json).unwrap(), first);
    let csv = dir.path().join("pf.csv").display().to_string();
    assert_eq!(run(&["pf", &kundur(), "--no-cache", "--format", "csv", "--out", &csv]).0, 0);
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("name,value\nBus.a[1],0.570000000000\n"));
}

#[test]
fn tds_with_event_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("run.csv").display().to_string();
    let args = ["tds", &kundur(), "--no-cache", "--h", "0.033333", "--tmax", "1", "--event", "toggle:Line:Line_7:0.5", "--out", &csv];
    let (code, out, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("simulated 30 steps"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.lines().next().unwrap().contains("GENCLS.omega[4]"));
    assert_eq!(text.lines().count(), 32);
    run(&args);
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), text);
}

#[test]
fn eig_and_doc() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("eig.csv").display().to_string();
    let (code, out, _) = run(&["eig", &kundur(), "--no-cache", "--out", &csv]);
    assert_eq!(code, 0);
    assert!(out.contains("zeta"));
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("sigma,omega,zeta\n"));
    let docs = dir.path().join("docs").display().to_string();
    assert_eq!(run(&["doc", "--no-cache", "--out", &docs]).0, 0);
    assert!(dir.path().join("docs/TGOV1.md").exists());
}

#[test]
fn selftest_passes() {
    let (code, out, _) = run(&["selftest", "--no-cache"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| l.starts_with("pass")).count(), 4);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["pf", "missing.json"]).0, EXIT_PARSE);
    assert_eq!(run(&["pf", &kundur(), "--bogus"]).0, EXIT_PARSE);
    assert_eq!(run(&["pf", &kundur(), "--no-cache", "--cache-dir", "x"]).0, EXIT_PARSE);
    assert_eq!(run(&["pf"]).0, EXIT_PARSE);
    assert_eq!(run(&["tds", &kundur(), "--event", "trip:Line"]).0, EXIT_PARSE);
    assert_eq!(run(&["tds", &kundur(), "--no-cache", "--h", "-1"]).0, EXIT_PARSE);
    let (code, _, err) = run(&["pf", &kundur(), "--no-cache", "--max-iter", "1"]);
    assert_eq!(code, EXIT_CONVERGENCE);
    assert!(err.contains("did not converge"));
    assert_eq!(run(&["--help"]).0, 0);
}
