use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use aoe_core::grid::read_csv_map;

const FACTORY: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/factory.json");

fn aoe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aoe"))
        .args(args)
        .env_remove("AOE_THREADS")
        .output()
        .unwrap()
}

fn aoe_in(out: &Path, args: &[&str]) -> Output {
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--scenario", FACTORY, "--out", out.to_str().unwrap()]);
    aoe(&full)
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn file_names(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

#[test]
fn maps_for_all_policies() {
    let tmp = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let out = aoe_in(tmp.path(), &["maps", "--policy", "all"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(start.elapsed() < Duration::from_secs(10));
    let names = file_names(tmp.path());
    let rasters: Vec<_> = names.iter().filter(|n| n.ends_with(".csv")).collect();
    assert_eq!(rasters.len(), 9, "{names:?}");
    for policy in ["rss", "best_model", "genie"] {
        for layer in ["effectiveness", "compute_load", "activity"] {
            assert!(names.contains(&format!("{policy}_{layer}.csv")));
        }
    }
    assert!(names.contains(&"summary.json".to_string()));
}

#[test]
fn summary_means_match_exported_grids() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(aoe_in(tmp.path(), &["maps"]).status.success());
    let s = summary(tmp.path());
    for p in s["policies"].as_array().unwrap() {
        let name = p["policy"].as_str().unwrap();
        for (layer, key) in [
            ("effectiveness", "mean_effectiveness"),
            ("compute_load", "mean_compute_load_flops"),
            ("activity", "mean_activity_s"),
        ] {
            let text = fs::read(tmp.path().join(format!("{name}_{layer}.csv"))).unwrap();
            let map = read_csv_map(text.as_slice(), 2.0, "").unwrap();
            let values: Vec<f64> = map.valid_values().collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let reported = p[key].as_f64().unwrap();
            assert!((reported - mean).abs() <= 1e-9 * mean.abs().max(1e-300), "{name} {layer}");
        }
    }
}

#[test]
fn aoe_writes_binary_raster_and_fraction() {
    let tmp = tempfile::tempdir().unwrap();
    let out = aoe_in(tmp.path(), &["aoe", "--q-th", "0.99", "--policy", "genie", "--format", "both"]);
    assert!(out.status.success());
    assert_eq!(file_names(tmp.path()), ["genie_aoe.csv", "genie_aoe.pgm", "summary.json"]);
    let pgm = fs::read(tmp.path().join("genie_aoe.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n40 25\n255\n"));
    let levels: std::collections::BTreeSet<u8> = pgm[13..].iter().copied().collect();
    assert!(levels.iter().all(|l| [0, 255].contains(l)));
    let s = summary(tmp.path());
    assert_eq!(s["threshold"], 0.99);
    let fraction = s["policies"][0]["aoe_fraction"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&fraction));
}

#[test]
fn cdf_tables_end_at_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(aoe_in(tmp.path(), &["cdf", "--policy", "best_model", "--exclude-zero-cost"]).status.success());
    for layer in ["compute_load", "activity"] {
        let text = fs::read_to_string(tmp.path().join(format!("best_model_{layer}_cdf.csv"))).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,F"));
        let rows: Vec<(f64, f64)> = lines
            .map(|l| {
                let (x, f) = l.split_once(',').unwrap();
                (x.parse().unwrap(), f.parse().unwrap())
            })
            .collect();
        assert!(rows.iter().all(|&(x, _)| x > 0.0));
        assert!(rows.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
        assert_eq!(rows.last().unwrap().1, 1.0);
    }
}

#[test]
fn monte_carlo_cross_check_in_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = aoe_in(tmp.path(), &["maps", "--policy", "genie", "--mc", "--samples", "20000", "--seed", "3"]);
    assert!(out.status.success());
    let mc = &summary(tmp.path())["monte_carlo"];
    assert_eq!(mc["n_samples"], 20000);
    assert!(mc["fraction_all"].as_f64().unwrap() >= 0.95);
}

#[test]
fn plan_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = aoe_in(tmp.path(), &["plan", "--mode", "greedy", "--candidates", "1=mobilenet_v3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let plan: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("plan.json")).unwrap()).unwrap();
    assert_eq!(plan["mode"], "greedy");
    assert_eq!(plan["assignment"][0], serde_json::json!([1, "mobilenet_v3"]));
    assert_eq!(plan["assignment"].as_array().unwrap().len(), 8);
}

#[test]
fn validate_malformed_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, r#"{"schema_version": 1, "world": {"width_m": -3}}"#).unwrap();
    let out = aoe(&["validate", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(file_names(tmp.path()), ["bad.json"]);

    let ok = aoe(&["validate", "--scenario", FACTORY]);
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("40x25"));
}

#[test]
fn scenario_errors_write_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(FACTORY).unwrap()).unwrap();
    doc["access_points"][2]["position"] = serde_json::json!([500.0, 1.0]);
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, doc.to_string()).unwrap();
    let out_dir = tmp.path().join("out");
    let out = aoe(&["maps", "--scenario", bad.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("AP 3"));
    assert!(!out_dir.exists());
}

#[test]
fn exit_codes_by_category() {
    let tmp = tempfile::tempdir().unwrap();
    let code = |out: Output| out.status.code();

    // config
    assert_eq!(code(aoe_in(tmp.path(), &["maps", "--q-th", "1.5"])), Some(2));
    assert_eq!(code(aoe_in(tmp.path(), &["maps", "--policy", "nearest"])), Some(2));
    assert_eq!(code(aoe_in(tmp.path(), &["maps", "--mc", "--samples", "0"])), Some(2));
    let threads = Command::new(env!("CARGO_BIN_EXE_aoe"))
        .args(["validate", "--scenario", FACTORY])
        .env("AOE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));

    // scenario: imported raster of the wrong shape
    let small = tmp.path().join("small.csv");
    fs::write(&small, "-60,-60\n-60,-60\n").unwrap();
    let rss = format!("1={}", small.display());
    assert_eq!(code(aoe_in(tmp.path(), &["maps", "--rss", &rss])), Some(3));

    // I/O: output directory below a regular file
    let file = tmp.path().join("file");
    fs::write(&file, "").unwrap();
    let out = aoe_in(&file.join("out"), &["maps"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("file"));
}

#[test]
fn imported_rss_drives_the_maps() {
    let tmp = tempfile::tempdir().unwrap();
    // a uniform strong signal from AP 1 makes its vit model reachable everywhere
    let rows = "-60,".repeat(39) + "-60\n";
    let uniform = tmp.path().join("uniform.csv");
    fs::write(&uniform, rows.repeat(25)).unwrap();
    let imported = tmp.path().join("imported");
    let arg = format!("1={}", uniform.display());
    assert!(aoe_in(&imported, &["maps", "--policy", "best_model", "--rss", &arg]).status.success());
    let s = summary(&imported);
    assert_eq!(s["policies"][0]["aoe_fraction"], 1.0);
}
