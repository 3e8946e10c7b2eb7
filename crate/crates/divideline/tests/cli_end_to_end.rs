//! End-to-end runs of the `divideline` binary: the synth -> svm -> ann ->
//! gdhi -> compare -> render chain, exit codes, and config-file handling.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::assert_well_formed_xml;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_divideline")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn s(path: &Path) -> String {
    path.to_str().unwrap().to_string()
}

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        Self { _dir: dir, root }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn write(&self, name: &str, content: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, content).unwrap();
        p
    }
}

#[test]
fn synth_then_svm_smoke_path() {
    let fx = Fixture::new();
    let stores = fx.path("stores.csv");
    let out = run(&["synth", "--seed", "5", "--out", &s(&stores)]);
    assert!(out.status.success(), "synth failed: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("synth: wrote"));

    let line = fx.path("line.geojson");
    let report = fx.path("report.json");
    let out = run(&[
        "svm", "--stores", &s(&stores), "--seed", "5", "--resamples", "25",
        "--out", &s(&line), "--report", &s(&report),
    ]);
    assert!(out.status.success(), "svm failed: {}", String::from_utf8_lossy(&out.stderr));
    let summary = String::from_utf8_lossy(&out.stdout);
    assert!(summary.contains("accuracy_mean_resample="), "summary: {summary}");

    // outputs parse in their declared formats
    let report_json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report_json["model"], "svm");
    assert!(report_json["per_resample_accuracy"].as_array().unwrap().len() == 25);
    let lines = divideline::geodata::load_lines(&line).unwrap();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0].2, Some(0));
}

#[test]
fn missing_stores_file_exits_2_and_names_the_path() {
    let fx = Fixture::new();
    let out = run(&[
        "svm", "--stores", "/nonexistent/stores.csv", "--seed", "1",
        "--out", &s(&fx.path("l.geojson")), "--report", &s(&fx.path("r.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/nonexistent/stores.csv"), "stderr: {err}");
}

#[test]
fn missing_seed_exits_2() {
    let fx = Fixture::new();
    let stores = fx.path("stores.csv");
    assert!(run(&["synth", "--seed", "5", "--out", &s(&stores)]).status.success());
    let out = run(&[
        "svm", "--stores", &s(&stores),
        "--out", &s(&fx.path("l.geojson")), "--report", &s(&fx.path("r.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn malformed_input_during_run_exits_2_with_line_number() {
    let fx = Fixture::new();
    let stores = fx.write("bad.csv", "brand,lat,lon\nGreggs,54.9,-1.6\nGreggs,not-a-number,-1.5\n");
    let out = run(&[
        "svm", "--stores", &s(&stores), "--seed", "1",
        "--out", &s(&fx.path("l.geojson")), "--report", &s(&fx.path("r.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn full_chain_ann_gdhi_compare_render() {
    let fx = Fixture::new();
    let stores = fx.path("stores.csv");
    assert!(run(&["synth", "--seed", "11", "--n-north", "120", "--n-south", "50", "--out", &s(&stores)])
        .status
        .success());

    // a coarse boundary box around the synthetic clusters, as GeoJSON
    let boundary = fx.write(
        "boundary.geojson",
        r#"{"type":"Polygon","coordinates":[[[-2.8,51.2],[-0.2,51.2],[-0.2,53.8],[-2.8,53.8],[-2.8,51.2]]]}"#,
    );

    let ann_line = fx.path("ann.geojson");
    let ann_report = fx.path("ann.json");
    let field = fx.path("field.csv");
    let out = run(&[
        "ann", "--stores", &s(&stores), "--boundary", &s(&boundary), "--seed", "11",
        "--resamples", "5", "--epochs", "150", "--grid-nlon", "45", "--grid-nlat", "45",
        "--bbox", "-3.0,0.0,51.0,54.0",
        "--out", &s(&ann_line), "--report", &s(&ann_report), "--field", &s(&field),
    ]);
    assert!(out.status.success(), "ann failed: {}", String::from_utf8_lossy(&out.stderr));

    let income = fx.write(
        "income.csv",
        "region,lat,lon,gdhi\n\
         north-a,53.6,-2.5,15000\n\
         north-b,53.2,-1.8,16500\n\
         mid-a,52.7,-1.4,19000\n\
         mid-b,52.3,-0.9,21500\n\
         south-a,51.9,-0.6,26000\n\
         south-b,51.5,-0.3,30000\n",
    );
    let gdhi_line = fx.path("gdhi.geojson");
    let gdhi_report = fx.path("gdhi.json");
    let out = run(&[
        "gdhi", "--income", &s(&income), "--seed", "11", "--seed-ensemble", "3",
        "--epochs", "400", "--grid-nlon", "40", "--grid-nlat", "40",
        "--bbox", "-3.0,0.0,51.0,54.0", "--national-mean", "21500",
        "--out", &s(&gdhi_line), "--report", &s(&gdhi_report),
    ]);
    assert!(out.status.success(), "gdhi failed: {}", String::from_utf8_lossy(&out.stderr));
    let gdhi_json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&gdhi_report).unwrap()).unwrap();
    let level = gdhi_json["level"].as_f64().unwrap();
    assert!((level - (21_500.0 - 15_000.0) / 15_000.0).abs() < 1e-12);

    let landmarks = fx.write("landmarks.csv", "name,lat,lon\nWatford Gap,52.3030,-1.1105\n");
    let reference = fx.write(
        "reference.geojson",
        r#"{"type":"Feature","properties":{"name":"published-divide"},"geometry":{"type":"LineString","coordinates":[[-2.9,53.0],[-0.1,52.0]]}}"#,
    );
    let compare_report = fx.path("compare.json");
    let out = run(&[
        "compare", "--lines", &s(&ann_line), &s(&gdhi_line), "--landmarks", &s(&landmarks),
        "--reference", &s(&reference), "--accuracy", "ann=0.81", "--accuracy", "gdhi=0.95",
        "--out", &s(&compare_report),
    ]);
    assert!(out.status.success(), "compare failed: {}", String::from_utf8_lossy(&out.stderr));
    let report: divideline::evaluate::ComparisonReport =
        serde_json::from_str(&std::fs::read_to_string(&compare_report).unwrap()).unwrap();
    assert_eq!(report.accuracies["ann"], 0.81);
    assert_eq!(report.landmark_distances.len(), 2);
    assert!(report.line_discrepancy.values().all(|d| d.hausdorff_km >= d.max_km));

    let figure = fx.path("figure.svg");
    let out = run(&[
        "render", "--field", &s(&field), "--report", &s(&ann_report), "--stores", &s(&stores),
        "--boundary", &s(&boundary), "--lines", &s(&ann_line), "--reference", &s(&reference),
        "--landmarks", &s(&landmarks), "--bbox", "-3.0,0.0,51.0,54.0",
        "--out", &s(&figure),
    ]);
    assert!(out.status.success(), "render failed: {}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(&figure).unwrap();
    assert_well_formed_xml(&svg);
    assert!(svg.contains("<circle"));
    assert!(svg.contains("<rect"));
    assert!(svg.contains("Watford Gap"));
}

#[test]
fn config_file_supplies_flags_and_flags_override() {
    let fx = Fixture::new();
    let stores = fx.path("stores.csv");
    assert!(run(&["synth", "--seed", "3", "--out", &s(&stores)]).status.success());

    let line = fx.path("line.geojson");
    let report = fx.path("report.json");
    let config = fx.write(
        "run.conf",
        &format!(
            "# reproducible run\nstores = {}\nseed = 3\nresamples = 10\nout = {}\nreport = {}\n",
            s(&stores),
            s(&line),
            s(&report)
        ),
    );
    let out = run(&["svm", "--config", &s(&config)]);
    assert!(out.status.success(), "config run failed: {}", String::from_utf8_lossy(&out.stderr));
    let report_a: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report_a["resamples"], 10);

    // flag overrides the file
    let out = run(&["svm", "--config", &s(&config), "--resamples", "4"]);
    assert!(out.status.success());
    let report_b: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report_b["resamples"], 4);
}

#[test]
fn threads_env_var_is_honored() {
    let fx = Fixture::new();
    let stores = fx.path("stores.csv");
    assert!(run(&["synth", "--seed", "8", "--out", &s(&stores)]).status.success());
    let line = fx.path("line.geojson");
    let report = fx.path("report.json");
    let out = Command::new(bin())
        .env("DIVIDELINE_THREADS", "2")
        .args(["svm", "--stores", &s(&stores), "--seed", "8", "--resamples", "8",
               "--out", &s(&line), "--report", &s(&report)])
        .output()
        .unwrap();
    assert!(out.status.success());
    let bad = Command::new(bin())
        .env("DIVIDELINE_THREADS", "many")
        .args(["svm", "--stores", &s(&stores), "--seed", "8", "--resamples", "8",
               "--out", &s(&line), "--report", &s(&report)])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn gdhi_rejects_threshold_outside_income_range() {
    let fx = Fixture::new();
    let income = fx.write(
        "income.csv",
        "region,lat,lon,gdhi\na,53.6,-2.5,15000\nb,53.2,-1.8,18000\nc,52.3,-0.9,21000\nd,51.9,-0.6,26000\ne,51.5,-0.3,30000\n",
    );
    let out = run(&[
        "gdhi", "--income", &s(&income), "--seed", "2", "--national-mean", "40000",
        "--out", &s(&fx.path("l.geojson")), "--report", &s(&fx.path("r.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside income range"));
}
