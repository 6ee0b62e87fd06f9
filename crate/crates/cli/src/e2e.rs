//! End-to-end command runs, in process, against temporary directories.

use std::path::Path;

use clap::{CommandFactory, Parser};
use serde_json::Value;
use windfreq::engine::{Metrics, Timeseries};
use windfreq::io::{parse_curve_table, parse_timeseries_csv};

use crate::commands::CliError;
use crate::{dispatch, Cli};

fn windfreq(args: &[&str]) -> Result<(), CliError> {
    let cli = Cli::try_parse_from(std::iter::once("windfreq").chain(args.iter().copied()))
        .map_err(|e| CliError::Input(e.to_string()))?;
    dispatch(&cli.command)
}

fn p(dir: &Path, rel: &str) -> String {
    dir.join(rel).to_string_lossy().into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_writes_three_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    windfreq(&["run", "--case", "1", "--controller", "proposed", "--out", &p(dir.path(), "r")]).unwrap();
    let r = dir.path().join("r");
    let csv = std::fs::read_to_string(r.join("timeseries.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), Timeseries::HEADER.join(","));
    let ts = parse_timeseries_csv(&csv).unwrap();
    assert_eq!(ts.t.last().copied(), Some(200.0));

    let m = json(&r.join("metrics.json"));
    let mut keys: Vec<&str> = m.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    let mut expected = Metrics::FIELDS.to_vec();
    expected.sort_unstable();
    assert_eq!(keys, expected);
    assert!(m["fn_hz"].as_f64().unwrap() < 50.0);
    assert!(m["secondary_fn_hz"].is_null());

    let manifest = json(&r.join("manifest.json"));
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["scenario"], "case1a");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        windfreq(&["run", "--case", "1b", "--duration", "80", "--out", &p(dir.path(), out)]).unwrap();
    }
    for f in ["timeseries.csv", "metrics.json"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert!(a == b, "{f} differs");
    }
    let da = json(&dir.path().join("a/manifest.json"))["config_sha256"].clone();
    let db = json(&dir.path().join("b/manifest.json"))["config_sha256"].clone();
    assert_eq!(da, db);
}

#[test]
fn trip_time_is_recorded_when_the_guard_fires() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "c1");
    windfreq(&["run", "--case", "1", "--controller", "traditional", "--kv", "30", "--inv-r", "24", "--out", &out])
        .unwrap();
    let m = json(&dir.path().join("c1/metrics.json"));
    assert!(m.as_object().unwrap().contains_key("guard_trip_time"));

    // Case 5's wind collapse is where the large gains reliably hit the guard.
    windfreq(&["run", "--case", "5", "--controller", "traditional", "--out", &p(dir.path(), "c5")]).unwrap();
    let m = json(&dir.path().join("c5/metrics.json"));
    let trip = m["guard_trip_time"].as_f64().expect("trip recorded");
    assert!(trip > 60.0 && trip < 200.0);
}

#[test]
fn schema_violation_reports_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "schema_version = 1\n[controller]\nmode = \"traditional\"\nk_v = \"thirty\"\n").unwrap();
    let out = p(dir.path(), "out");
    let err = windfreq(&["run", "--config", cfg.to_str().unwrap(), "--out", &out]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("controller.k_v"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn input_errors_map_to_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "o");
    let missing = p(dir.path(), "missing.toml");
    let cases: &[&[&str]] = &[
        &["run", "--case", "7"],
        &["run", "--case", "1", "--controller", "proposed", "--kv", "10"],
        &["run", "--case", "1", "--dt", "-1"],
        &["run", "--case", "1", "--duration", "30"],
        &["run", "--case", "1", "--duration", "65"],
        &["run", "--config", &missing],
        &["fit", "--reserve", "0.95"],
        &["fit", "--reserve", "0.5"],
        &["compare", "--case", "1", "--large", "30"],
    ];
    for args in cases {
        let mut full = args.to_vec();
        full.extend(["--out", out.as_str()]);
        let err = windfreq(&full).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{args:?}: {err}");
    }
}

#[test]
fn config_with_relative_trace() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("cfg")).unwrap();
    std::fs::write(dir.path().join("cfg/wind.csv"), "t_s,v_mps\n0,9\n30,9\n40,8\n100,8\n").unwrap();
    std::fs::write(
        dir.path().join("cfg/scenario.toml"),
        r#"schema_version = 1
[scenario]
name = "gusty"
duration = 100.0
load_events = [{ t = 20.0, delta_p = 0.05 }]
[scenario.wind]
kind = "trace"
path = "wind.csv"
[controller]
mode = "mppt"
"#,
    )
    .unwrap();
    windfreq(&["run", "--config", &p(dir.path(), "cfg/scenario.toml"), "--out", &p(dir.path(), "g")]).unwrap();
    let manifest = json(&dir.path().join("g/manifest.json"));
    assert_eq!(manifest["scenario"], "gusty");
    assert_eq!(manifest["controller"], "mppt");
}

#[test]
fn output_dir_falls_back_to_environment() {
    let cmd = Cli::command();
    let run = cmd.find_subcommand("run").unwrap();
    let out = run.get_arguments().find(|a| a.get_id() == "out").unwrap();
    assert_eq!(out.get_env().and_then(|e| e.to_str()), Some("WINDFREQ_OUT"));
}

#[test]
fn dt_override_changes_sampling() {
    let dir = tempfile::tempdir().unwrap();
    windfreq(&["run", "--case", "2", "--duration", "70", "--dt", "0.002", "--out", &p(dir.path(), "d")]).unwrap();
    let text = std::fs::read_to_string(dir.path().join("d/timeseries.csv")).unwrap();
    let ts = parse_timeseries_csv(&text).unwrap();
    assert!((ts.t[1] - ts.t[0] - 0.02).abs() < 1e-12);
    assert_eq!(ts.t.last().copied(), Some(70.0));
}

#[test]
fn compare_writes_four_schemes() {
    let dir = tempfile::tempdir().unwrap();
    windfreq(&["compare", "--case", "1", "--out", &p(dir.path(), "cmp")]).unwrap();
    let table = std::fs::read_to_string(dir.path().join("cmp/comparison.txt")).unwrap();
    let header = table.lines().next().unwrap();
    assert!(header.contains("K_v=30.0 1/R=24.0"), "{header}");
    assert!(header.contains("K_v=15.0 1/R=7.0"), "{header}");

    let csv = std::fs::read_to_string(dir.path().join("cmp/comparison.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    let names: Vec<&str> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(names, ["mppt", "traditional_large", "traditional_small", "proposed"]);
    assert_eq!(&rows[1][1..3], ["30", "24"]);
    assert_eq!(&rows[2][1..3], ["15", "7"]);
    let proposed_min_omega: f64 = rows[3][7].parse().unwrap();
    assert!(proposed_min_omega >= 0.7);
    for name in names {
        assert!(dir.path().join("cmp").join(name).join("timeseries.csv").is_file());
    }
}

#[test]
fn compare_honours_gain_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "cmp");
    windfreq(&["compare", "--case", "2", "--large", "20,12", "--small", "5,3", "--duration", "80", "--out", &out])
        .unwrap();
    let table = std::fs::read_to_string(dir.path().join("cmp/comparison.txt")).unwrap();
    assert!(table.starts_with("case2  large gains: K_v=20.0 1/R=12.0  small gains: K_v=5.0 1/R=3.0"));
}

#[test]
fn fit_table_feeds_run() {
    let dir = tempfile::tempdir().unwrap();
    let table_path = p(dir.path(), "curves.toml");
    windfreq(&["fit", "--reserve", "0.1", "--out", &table_path]).unwrap();
    let table = parse_curve_table(&std::fs::read_to_string(&table_path).unwrap()).unwrap();
    assert_eq!(table.reserve, 0.1);
    assert!(table.k_de80 < table.k_de && table.k_de < table.k_opt);
    assert_eq!(table.pitch_table.len(), 101);

    windfreq(&["run", "--case", "3", "--curves", &table_path, "--duration", "75", "--out", &p(dir.path(), "r")])
        .unwrap();
    let bad = p(dir.path(), "bad.toml");
    std::fs::write(&bad, "schema_version = 1\n").unwrap();
    let err = windfreq(&["run", "--case", "3", "--curves", &bad, "--out", &p(dir.path(), "x")]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn plot_overlays_runs() {
    let dir = tempfile::tempdir().unwrap();
    for (c, out) in [("mppt", "m"), ("proposed", "p")] {
        windfreq(&["run", "--case", "1", "--controller", c, "--duration", "90", "--out", &p(dir.path(), out)]).unwrap();
    }
    let m = p(dir.path(), "m/timeseries.csv");
    let pr = p(dir.path(), "p/timeseries.csv");
    let fig = p(dir.path(), "fig.svg");
    windfreq(&["plot", "--csv", &m, "--csv", &pr, "--label", "MPPT", "--label", "proposed", "--out", &fig]).unwrap();
    let svg = std::fs::read_to_string(&fig).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches(r#"<g class="panel">"#).count(), 4);
    assert!(svg.contains(">MPPT</text>") && svg.contains(">proposed</text>"));

    let one = p(dir.path(), "one.svg");
    windfreq(&["plot", "--csv", &m, "--out", &one]).unwrap();
    assert!(std::fs::read_to_string(&one).unwrap().contains(">m</text>"));

    let err = windfreq(&["plot", "--csv", &m, "--csv", &pr, "--label", "only-one", "--out", &one]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn plot_rejects_bad_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.csv"), "").unwrap();
    std::fs::write(dir.path().join("header.csv"), "t,f\n0,50\n").unwrap();
    let out = p(dir.path(), "plot.svg");
    for f in ["empty.csv", "header.csv", "absent.csv"] {
        let err = windfreq(&["plot", "--csv", &p(dir.path(), f), "--out", &out]).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{f}");
    }
    assert!(!dir.path().join("plot.svg").exists());
}
