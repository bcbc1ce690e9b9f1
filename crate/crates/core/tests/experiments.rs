mod common;

use std::path::Path;
use std::process::Command;

use l2mult_core::equivariant::EquivariantCWData;
use l2mult_core::rational::parse_rational;
use l2mult_core::runner::{
    emit, run, to_csv, ComplexSpec, Experiment, ExperimentConfig, ExperimentReport, LevelRecord, OutputFormat,
};

fn experiment(name: &str) -> Experiment {
    let path = common::config_path(name);
    Experiment::resolve(ExperimentConfig::from_file(&path).unwrap(), path.parent().unwrap()).unwrap()
}

fn without_timing(levels: &[LevelRecord]) -> Vec<LevelRecord> {
    levels.iter().cloned().map(|l| LevelRecord { seconds: 0.0, ..l }).collect()
}

#[test]
fn dinf_kernel_csv_matches_golden() {
    let mut exp = experiment("dinf_kernel.json");
    exp.truncate(4);
    let report = run(&exp, None).unwrap();
    let golden = include_str!("golden/dinf_kernel_levels4.csv");
    assert_eq!(to_csv(&report.levels), golden);
}

#[test]
fn emitted_json_round_trips() {
    let report = run(&experiment("free_by_finite_inversion.json"), Some(3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = emit(&report, dir.path(), OutputFormat::Both).unwrap();
    assert_eq!(written.len(), 2);
    let text = std::fs::read_to_string(dir.path().join("free_by_finite_inversion.json")).unwrap();
    assert_eq!(ExperimentReport::from_json_str(&text).unwrap(), report);
    let csv = std::fs::read_to_string(dir.path().join("free_by_finite_inversion.csv")).unwrap();
    assert_eq!(csv, to_csv(&report.levels));
}

#[test]
fn parallel_matches_sequential() {
    let exp = experiment("free_by_finite_inversion.json");
    let a = run(&exp, None).unwrap();
    let b = run(&exp, Some(4)).unwrap();
    assert_eq!(without_timing(&a.levels), without_timing(&b.levels));
    assert_eq!(a.convergence, b.convergence);
}

#[test]
fn inversion_tree_against_torus_graph() {
    let report = run(&experiment("free_by_finite_inversion.json"), None).unwrap();
    for level in report.levels.iter().take(3) {
        let m = 1usize << (level.level + 1);
        let (b1, triv, sign) = common::torus_graph_oracle(m);
        assert_eq!(level.betti, vec![1, b1]);
        assert_eq!(b1, m * m + 1);
        let trace = level.traces.iter().find(|t| t.p == 1).unwrap();
        assert_eq!(parse_rational(&trace.trace).unwrap(), parse_rational(&format!("{}", triv as i64 - sign as i64)).unwrap());
    }
    for level in &report.levels {
        let trace = level.traces.iter().find(|t| t.p == 1).unwrap();
        assert_eq!(trace.trace, "-3");
        let raw: Vec<u64> = level.rows.iter().filter(|r| r.p == 1).map(|r| r.raw).collect();
        let n = level.normalizer as u64;
        assert_eq!(raw, vec![(n - 2) / 2, (n + 4) / 2]);
    }
}

#[test]
fn rose_over_abelian_quotients() {
    let report = run(&experiment("rose_free.json"), None).unwrap();
    for (level, m) in report.levels.iter().zip([2usize, 4, 8, 16]) {
        let n = m * m;
        assert_eq!(level.betti, vec![1, n + 1]);
        let row = level.rows.iter().find(|r| r.p == 1).unwrap();
        assert_eq!(row.normalized, format!("{}/{}", n + 1, n));
        assert_eq!(row.deviation.as_deref(), Some(format!("1/{n}").as_str()));
    }
}

#[test]
fn explicit_levels_and_inline_complex() {
    let cfg = ExperimentConfig::from_json_str(&format!(
        r#"{{
            "name": "explicit",
            "group": {{"family": "dihedral_infinite"}},
            "complex": {},
            "chain": {{"levels": [
                {{"target": "dihedral:4", "images": ["a", "b"]}},
                {{"target": "dihedral:8", "images": ["a", "b"]}}
            ]}},
            "h": {{"words": ["s"], "irreducibles": [1]}}
        }}"#,
        EquivariantCWData::line_dinf().to_json()
    ))
    .unwrap();
    assert!(matches!(cfg.complex, ComplexSpec::Inline(_)));
    let report = run(&Experiment::resolve(cfg, Path::new(".")).unwrap(), None).unwrap();
    assert!(report.failures.is_empty());
    for level in &report.levels {
        let raw: Vec<u64> = level.rows.iter().map(|r| r.raw).collect();
        assert_eq!(raw, vec![0, 1]);
        assert_eq!(level.sum_rule, None);
        assert!(level.rows.iter().all(|r| r.prediction.is_none()));
    }
}

#[test]
fn complex_from_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("line.json"), EquivariantCWData::line_dinf().to_json().to_string()).unwrap();
    let mut cfg = ExperimentConfig::from_file(&common::config_path("dinf_kernel.json")).unwrap();
    cfg.complex = ComplexSpec::File { file: "line.json".into() };
    let from_file = run(&Experiment::resolve(cfg, dir.path()).unwrap(), None).unwrap();
    let builtin = run(&experiment("dinf_kernel.json"), None).unwrap();
    assert_eq!(without_timing(&from_file.levels), without_timing(&builtin.levels));
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_l2mult")).args(args).env("L2MULT_SEED", "7").output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let ok = common::config_path("dinf_kernel.json");
    assert_eq!(cli(&["run", ok.to_str().unwrap(), "--out", out, "--format", "csv", "--levels", "2"]).0, 0);
    assert!(dir.path().join("dinf_kernel.csv").exists());
    assert!(!dir.path().join("dinf_kernel.json").exists());
    let partial = common::config_path("dinf_reflection.json");
    assert_eq!(cli(&["run", partial.to_str().unwrap(), "--out", out, "--parallel", "2"]).0, 2);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"group": {"family": "free", "rank": 2}, "complex": "line_Z", "chain": {"template": "cyclic", "moduli": [2]}}"#).unwrap();
    assert_eq!(cli(&["run", bad.to_str().unwrap()]).0, 1);
    assert_eq!(cli(&["run", "/nonexistent/config.json"]).0, 1);
}

#[test]
fn cli_table_and_spectral() {
    let (code, out) = cli(&["table", "symmetric:3"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["characters"].as_array().unwrap().len(), 3);
    let (code, out) = cli(&["spectral", "1 + -1*a", "cyclic:6", "--kmax", "4"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let atoms: Vec<f64> = v["measure"]["atoms"].as_array().unwrap().iter().map(|a| a["value"].as_f64().unwrap()).collect();
    assert!(atoms.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(v["nullity"], "1/6");
    assert_eq!(v["luck"]["lowest_coefficient"], "36");
    assert_eq!(cli(&["table", "nonsense"]).0, 1);
}

#[test]
fn cli_farber() {
    let (code, out) = cli(&["farber", common::config_path("dinf_reflection.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let s_rows: Vec<&str> =
        v["farber"].as_array().unwrap().iter().filter(|r| r["word"] == "s").map(|r| r["value"].as_str().unwrap()).collect();
    assert_eq!(s_rows, vec!["1", "1/2", "1/4", "1/8", "1/16"]);
}
