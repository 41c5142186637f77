use std::path::Path;

use sgsp_core::scenario::{run_scenario, RunOptions, Scenario, Verdict};

const TEXT: &str = r#"
name = "mini"

[engine]
name = "translation"
weight = "exp_decay"
rate = 1.0

[[probe]]
kind = "laws"
seed = 4
expect = "pass"
cases = 5

[[probe]]
kind = "density"
set = "dyadic"
upper_range = [0.617, 0.717]
lower_range = [0.283, 0.383]
expect = "pass"

[[probe]]
kind = "mixing"
horizon = 10.0
step = 0.5
expect = "pass"
"#;

fn run(root: &Path) -> sgsp_core::scenario::ScenarioReport {
    let s = Scenario::parse(TEXT, None).unwrap();
    run_scenario(
        &s,
        &RunOptions {
            output_root: root.to_path_buf(),
            ..RunOptions::default()
        },
    )
    .unwrap()
}

#[test]
fn summary_numbers_trace_to_csv_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(tmp.path());
    assert_eq!(r.exit_code, 0);
    assert!(r.probes.iter().all(|p| p.verdict == Verdict::Pass));
    let dir = tmp.path().join("mini");
    let csv = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let summary = std::fs::read_to_string(dir.join("summary.txt")).unwrap();
    let mut probe = None;
    let mut checked = 0;
    for line in summary.lines() {
        if let Some(rest) = line.strip_prefix('[') {
            probe = Some(rest.split(']').next().unwrap().to_string());
        } else if let Some((k, v)) = line.trim().split_once(" = ") {
            if line.starts_with("    ") {
                let p = probe.as_deref().unwrap();
                assert!(
                    rows.iter().any(|r| r[0] == p && r[2] == k && r[3] == v),
                    "`{line}` of probe {p} has no row in summary.csv"
                );
                checked += 1;
            }
        }
    }
    assert!(checked >= 6);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["probes"].as_array().unwrap().len(), 3);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    run(&tmp.path().join("a"));
    run(&tmp.path().join("b"));
    for f in ["00_laws.csv", "01_density.csv", "02_mixing.csv", "summary.csv", "summary.txt", "report.json"] {
        let a = std::fs::read(tmp.path().join("a/mini").join(f)).unwrap();
        let b = std::fs::read(tmp.path().join("b/mini").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn weight_file_is_resolved_against_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let xs: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
    let vs: Vec<f64> = xs.iter().map(|x| (-x).exp()).collect();
    let w = sgsp_core::spaces::WeightFunction::table(xs, vs, false)
        .unwrap()
        .with_admissible(sgsp_core::spaces::Admissibility { m: 1.01, w: 1.0 })
        .unwrap();
    std::fs::write(tmp.path().join("w.txt"), sgsp_core::spaces::table_io::write_weight(&w)).unwrap();
    let cfg = tmp.path().join("s.toml");
    std::fs::write(
        &cfg,
        "name = \"tab\"\n[engine]\nname = \"translation\"\nweight_file = \"w.txt\"\n[[probe]]\nkind = \"laws\"\nseed = 1\ncases = 3\nexpect = \"pass\"\n",
    )
    .unwrap();
    let s = Scenario::load(&cfg).unwrap();
    let r = run_scenario(
        &s,
        &RunOptions {
            output_root: tmp.path().join("out"),
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert_eq!(r.exit_code, 0);
}
