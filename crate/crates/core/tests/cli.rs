use std::path::Path;
use std::process::Command;

use flowcast::evaluation::{evaluate, PercentDenominator};
use flowcast::io::{read_counts_csv, read_series_csv, ReportDocument, RunConfig};
use flowcast::pipeline;
use flowcast::synth::presets;
use flowcast::vehicle::PcuTable;

fn flowcast(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_flowcast"))
        .args(args)
        .env_remove("FLOWCAST_CONFIG")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(flowcast(&["run", p(&missing)]).status.code(), Some(2));
    assert_eq!(flowcast(&["run", "--bin-duration", "0"]).status.code(), Some(1));
    assert_eq!(
        flowcast(&["run", p(&missing), "--bin-duration", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(flowcast(&["--version"]).status.code(), Some(0));
    let help = flowcast(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("simulate"));
}

#[test]
fn every_preset_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for (name, _) in presets() {
        let counts = dir.path().join(format!("{name}.csv"));
        let out = dir.path().join(name);
        assert_eq!(
            flowcast(&["simulate", "--preset", name, "--out", p(&counts)])
                .status
                .code(),
            Some(0)
        );
        let run = flowcast(&["run", p(&counts), "--out-dir", p(&out)]);
        assert_eq!(
            run.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&run.stderr)
        );
        assert!(run.stderr.is_empty());
    }
}

#[test]
fn convert_conserves_pcu() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("counts.csv");
    let series = dir.path().join("series.csv");
    flowcast(&["simulate", "--preset", "volatile", "--seed", "11", "--out", p(&counts)]);
    assert_eq!(
        flowcast(&["convert", p(&counts), "--out", p(&series)]).status.code(),
        Some(0)
    );
    let table = PcuTable::default();
    let want: f64 = read_counts_csv(&counts).unwrap().iter().map(|r| r.pcu(&table)).sum();
    let got: f64 = read_series_csv(&series, 300).unwrap().values().iter().sum();
    assert!((got - want).abs() <= 1e-9 * want);
}

#[test]
fn report_json_matches_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("counts.csv");
    let out = dir.path().join("out");
    flowcast(&["simulate", "--out", p(&counts)]);
    assert_eq!(
        flowcast(&["run", p(&counts), "--out-dir", p(&out)]).status.code(),
        Some(0)
    );

    let config = RunConfig::default();
    let series = pipeline::series_from_counts(&read_counts_csv(&counts).unwrap(), &config).unwrap();
    let direct = pipeline::evaluate_series(&series, &config).unwrap();
    let again = evaluate(&direct.observed, &direct.predicted, PercentDenominator::Forecast).unwrap();
    let doc = ReportDocument::from_json(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(doc.evaluation, direct.report);
    assert_eq!(doc.evaluation, again);
    assert_eq!(doc.params.q, direct.params.process_noise());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("counts.csv");
    let cfg = dir.path().join("flowcast.conf");
    std::fs::write(&cfg, "q = 100\nr = 400\nhistogram_bins = 5\n").unwrap();
    flowcast(&["simulate", "--out", p(&counts)]);

    let from_env = Command::new(env!("CARGO_BIN_EXE_flowcast"))
        .args(["run", p(&counts), "--out-dir", p(&dir.path().join("a"))])
        .env("FLOWCAST_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(from_env.status.code(), Some(0));
    let a = ReportDocument::from_json(&std::fs::read_to_string(dir.path().join("a/report.json")).unwrap()).unwrap();
    assert_eq!((a.params.q, a.params.r), (100.0, 400.0));

    let flagged = flowcast(&[
        "run",
        p(&counts),
        "--config",
        p(&cfg),
        "--q",
        "9",
        "--out-dir",
        p(&dir.path().join("b")),
    ]);
    assert_eq!(flagged.status.code(), Some(0));
    let b = ReportDocument::from_json(&std::fs::read_to_string(dir.path().join("b/report.json")).unwrap()).unwrap();
    assert_eq!((b.params.q, b.params.r), (9.0, 400.0));

    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(
        flowcast(&["run", p(&counts), "--config", p(&cfg)]).status.code(),
        Some(1)
    );
}

#[test]
fn forecast_prints_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("counts.csv");
    let trace = dir.path().join("trace.csv");
    flowcast(&["simulate", "--out", p(&counts)]);
    let out = flowcast(&["forecast", p(&counts), "--out", p(&trace), "--horizon", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "bin_start,forecast");
    assert_eq!(lines.len(), 5);
    // 36 bins from the default start; the first forecast covers bin 36.
    assert!(lines[1].starts_with(&format!("{},", 1_611_100_800 + 36 * 300)));
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 37);
}

#[test]
fn rerun_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("counts.csv");
    let out = dir.path().join("out");
    flowcast(&["simulate", "--preset", "steady", "--out", p(&counts)]);
    flowcast(&["run", p(&counts), "--out-dir", p(&out)]);
    let first = std::fs::read(out.join("trend.svg")).unwrap();
    flowcast(&["run", p(&counts), "--out-dir", p(&out)]);
    assert_eq!(std::fs::read(out.join("trend.svg")).unwrap(), first);
}
