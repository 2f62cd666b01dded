use std::path::PathBuf;

use symdae::io::{self, BuildOptions, CaseFile, IoError};
use symdae::numeric::NumericError;
use symdae::routines::{initialize_dynamics, run_tds, solve_power_flow, InitConfig, PowerFlowConfig, TdsConfig};
use symdae::symbolic::ModelCache;

fn case_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("cases").join(name)
}

#[test]
fn kundur_fixture_tables() {
    let c = io::load_case(case_path("kundur.json")).unwrap();
    let count = |m: &str| c.rows(m).len();
    assert_eq!(
        [count("Bus"), count("Line"), count("PQ"), count("PV"), count("Slack"), count("GENROU"), count("TGOV1"), count("EXDC2")],
        [10, 15, 2, 3, 1, 4, 4, 4]
    );
    assert_eq!(c.rows("Line")[14]["idx"].as_idx(), "Line_14");
    // identifiers are normalized to text
    assert_eq!(c.rows("Bus")[0]["idx"], "1".into());
    assert_eq!(c.rows("PQ")[1]["bus"], "8".into());
    assert_eq!(c.rows("GENROU")[2]["M"].as_num(), Some(12.35));
}

#[test]
fn round_trip() {
    let c = io::load_case(case_path("kundur.json")).unwrap();
    let again = CaseFile::parse(&c.to_json()).unwrap();
    assert_eq!(c, again);
    assert_eq!(c.to_json(), again.to_json());
}

#[test]
fn minimal_case() {
    let c = CaseFile::parse(r#"{"baseMVA": 100, "Bus": [{"idx": 1}]}"#).unwrap();
    assert_eq!(c.freq, 60.0);
    let (sys, _) = io::build_system(&c, &ModelCache::disabled(), BuildOptions::default()).unwrap();
    assert_eq!(sys.dae.n_y(), 2);
    assert_eq!(sys.model("Bus").unwrap().param("Vn").unwrap(), [110.0]);
}

#[test]
fn case_errors() {
    match CaseFile::parse(r#"{"Bus": [{"idx": 1}, {"idx": "1"}]}"#) {
        Err(IoError::Schema { model, field, .. }) => assert_eq!((model.as_str(), field.as_str()), ("Bus", "idx")),
        other => panic!("{other:?}"),
    }
    assert!(matches!(CaseFile::parse(r#"{"Transformer": []}"#), Err(IoError::Schema { .. })));
    match CaseFile::parse("{\n  \"Bus\": [\n    {\"idx\": 1,}\n  ]\n}") {
        Err(IoError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    let c = CaseFile::parse(r#"{"Bus": [{"idx": 1, "vmax": 1.1}]}"#).unwrap();
    match io::build_system(&c, &ModelCache::disabled(), BuildOptions::default()) {
        Err(IoError::Numeric(NumericError::UnknownField { model, field })) => assert_eq!((model.as_str(), field.as_str()), ("Bus", "vmax")),
        other => panic!("{:?}", other.map(|_| ())),
    }
    assert!(matches!(io::load_case("/nonexistent/case.json"), Err(IoError::File { .. })));
}

#[test]
fn genrou_rows_become_classical_machines() {
    let c = io::load_case(case_path("kundur.json")).unwrap();
    let (sys, _) = io::build_system(&c, &ModelCache::disabled(), BuildOptions::default()).unwrap();
    let g = sys.model("GENCLS").unwrap();
    assert_eq!(g.idx, ["1", "2", "3", "4"]);
    // machine base 900 MVA on a 100 MVA system
    assert!((g.param("M").unwrap()[2] - 12.35 * 9.0).abs() < 1e-12);
    assert!((g.param("xd1").unwrap()[0] - 0.3 / 9.0).abs() < 1e-15);
    assert_eq!(sys.model("Shunt").unwrap().idx, ["PQ_0_z", "PQ_1_z"]);
}

fn pf_solution(case: &CaseFile) -> (Vec<f64>, Vec<f64>) {
    let (mut sys, _) = io::build_system(case, &ModelCache::disabled(), BuildOptions::default()).unwrap();
    let r = solve_power_flow(&mut sys, &PowerFlowConfig::default()).unwrap();
    assert!(r.converged);
    (sys.var_values("Bus", "a").unwrap(), sys.var_values("Bus", "v").unwrap())
}

#[test]
fn matpower_twin_matches_native() {
    let native = pf_solution(&io::load_case(case_path("kundur.json")).unwrap());
    let mp = pf_solution(&io::load_matpower(case_path("kundur.m")).unwrap());
    for (a, b) in native.0.iter().chain(&native.1).zip(mp.0.iter().chain(&mp.1)) {
        assert!((a - b).abs() < 1e-10, "{a} {b}");
    }
}

#[test]
fn matpower_without_branches_fails_at_power_flow() {
    let text = std::fs::read_to_string(case_path("kundur.m")).unwrap();
    let start = text.find("mpc.branch = [").unwrap();
    let stripped = format!("{}mpc.branch = [\n];\n", &text[..start]);
    let c = io::parse_matpower(&stripped).unwrap();
    let (mut sys, _) = io::build_system(&c, &ModelCache::disabled(), BuildOptions::default()).unwrap();
    assert!(solve_power_flow(&mut sys, &PowerFlowConfig::default()).is_err());
}

#[test]
fn tds_csv_layout_and_determinism() {
    let run = || {
        let c = io::load_case(case_path("kundur.json")).unwrap();
        let (mut sys, _) = io::build_system(&c, &ModelCache::disabled(), BuildOptions::default()).unwrap();
        solve_power_flow(&mut sys, &PowerFlowConfig::default()).unwrap();
        initialize_dynamics(&mut sys, &InitConfig::default()).unwrap();
        let cfg = TdsConfig { t_end: 0.1, events: vec!["toggle:Line:Line_7:0.0".parse().unwrap()], ..Default::default() };
        io::tds_csv(&run_tds(&mut sys, &cfg).unwrap())
    };
    let text = run();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "t");
    for i in 1..=4 {
        assert!(header.contains(&format!("GENCLS.omega[{i}]").as_str()));
    }
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.split(',').count() == header.len()));
    assert!(rows[1].starts_with("0.033333333333,"));
    assert_eq!(text, run());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out/run.csv");
    io::write_tds_csv(&run_tds_flat(), &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 4);
}

fn run_tds_flat() -> symdae::routines::TdsResult {
    let c = io::load_case(case_path("kundur.json")).unwrap();
    let (mut sys, _) = io::build_system(&c, &ModelCache::disabled(), BuildOptions::default()).unwrap();
    solve_power_flow(&mut sys, &PowerFlowConfig::default()).unwrap();
    initialize_dynamics(&mut sys, &InitConfig::default()).unwrap();
    run_tds(&mut sys, &TdsConfig { h: 0.1, t_end: 0.2, ..Default::default() }).unwrap()
}

#[test]
fn docs_export() {
    let dir = tempfile::tempdir().unwrap();
    io::export_model_docs(&[], dir.path()).unwrap();
    assert_eq!(std::fs::read_to_string(dir.path().join("index.md")).unwrap(), "# Model reference\n\n");

    let (sys, _) = symdae::models::builtin_system(&ModelCache::disabled(), Default::default()).unwrap();
    let models: Vec<_> = sys.models.iter().map(|m| m.model.as_ref()).collect();
    io::export_model_docs(&models, dir.path()).unwrap();
    let index = std::fs::read_to_string(dir.path().join("index.md")).unwrap();
    assert!(index.contains("- [Shunt](Shunt.md) (StaticShunt)"));
    let golden = include_str!("golden/Shunt.md");
    assert_eq!(std::fs::read_to_string(dir.path().join("Shunt.md")).unwrap(), golden);
}

#[test]
fn radial_case_solves() {
    let c = io::radial_case(200);
    assert_eq!(c.rows("Bus").len(), 200);
    assert_eq!(c.rows("Line").len(), 199);
    let (mut sys, _) = io::build_system(&c, &ModelCache::disabled(), BuildOptions::default()).unwrap();
    let r = solve_power_flow(&mut sys, &PowerFlowConfig::default()).unwrap();
    assert!(r.converged && r.iterations <= 10);
}
