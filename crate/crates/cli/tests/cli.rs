use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kpzlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kpzlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn checksums(dir: &Path) -> Vec<(String, String)> {
    manifest(dir)["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["path"].as_str().unwrap().to_string(), e["sha256"].as_str().unwrap().to_string()))
        .collect()
}

fn png(dir: &Path, name: &str) -> image::GrayImage {
    image::open(dir.join(name)).unwrap().to_luma8()
}

#[test]
fn sample_field_is_reproducible() {
    let t = tempfile::tempdir().unwrap();
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    let args = ["sample-field", "--resolution", "64", "--cutoff", "32", "--seed", "9"];
    assert!(kpzlab(&args, &a).status.success());
    assert!(kpzlab(&args, &b).status.success());
    let (ca, cb) = (checksums(&a), checksums(&b));
    assert_eq!(ca.len(), 3);
    assert_eq!(ca, cb);
    let c = t.path().join("c");
    assert!(kpzlab(&["sample-field", "--resolution", "64", "--cutoff", "32", "--seed", "10"], &c).status.success());
    assert_ne!(checksums(&c), ca);
}

#[test]
fn one_mode_field_is_a_single_bump() {
    let t = tempfile::tempdir().unwrap();
    assert!(kpzlab(&["sample-field", "--resolution", "32", "--cutoff", "1"], t.path()).status.success());
    let img = png(t.path(), "field.png");
    let above = img.pixels().filter(|p| p[0] > 128).count();
    let below = img.pixels().filter(|p| p[0] < 128).count();
    assert!(above == 0 || below == 0);
    // extreme at the centre
    let centre = img.get_pixel(16, 16)[0] as i32 - 128;
    assert!(img.pixels().all(|p| (p[0] as i32 - 128).abs() <= centre.abs()));
}

#[test]
fn dgff_boundary_is_mid_gray() {
    let t = tempfile::tempdir().unwrap();
    let out = kpzlab(&["sample-field", "--field", "dgff", "--resolution", "256"], t.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let img = png(t.path(), "field.png");
    assert_eq!(img.dimensions(), (257, 257));
    for i in 0..257 {
        for (x, y) in [(i, 0), (i, 256), (0, i), (256, i)] {
            assert_eq!(img.get_pixel(x, y)[0], 128);
        }
    }
    let side: Value = serde_json::from_str(&std::fs::read_to_string(t.path().join("field.json")).unwrap()).unwrap();
    assert_eq!(side["side"], 256);
    assert_eq!(std::fs::metadata(t.path().join("field.bin")).unwrap().len(), 8 * 257 * 257);
}

#[test]
fn flat_measure_at_zero_gamma() {
    let t = tempfile::tempdir().unwrap();
    let out = kpzlab(&["build-measure", "--gamma", "0", "--resolution", "32"], t.path());
    assert!(out.status.success());
    let img = png(t.path(), "measure.png");
    assert!(img.pixels().all(|p| p[0] == 128));
}

#[test]
fn larger_gamma_gives_more_uneven_squares() {
    let t = tempfile::tempdir().unwrap();
    let stat = |g: &str| {
        let dir = t.path().join(g);
        let out = kpzlab(&["build-measure", "--gamma", g, "--resolution", "128", "--seed", "3", "--overlay"], &dir);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("overlay.json")).unwrap()).unwrap();
        (doc["stats"]["log2_size_variance"].as_f64().unwrap(), manifest(&dir))
    };
    let (v1, m1) = stat("1");
    let (v18, m18) = stat("1.8");
    assert!(v18 > v1, "{v18} <= {v1}");
    assert!(m1["warnings"].as_array().unwrap().is_empty());
    let w = m18["warnings"].as_array().unwrap();
    assert!(w.iter().any(|s| s.as_str().unwrap().contains("sqrt(2)")));
}

#[test]
fn invalid_config_exits_3_with_json() {
    let t = tempfile::tempdir().unwrap();
    let out = kpzlab(&["build-measure", "--gamma", "2.5", "--resolution", "16"], t.path());
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(err["exit_code"], 3);
    assert!(!t.path().join("manifest.json").exists());

    let cfg = t.path().join("bad.json");
    std::fs::write(&cfg, r#"{"gama": 1.0}"#).unwrap();
    let out = kpzlab(&["kpz-table", "--config", cfg.to_str().unwrap()], t.path());
    assert_eq!(out.status.code(), Some(3));
    let out = kpzlab(&["verify", "--checks", "no-such-check"], t.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn failed_run_removes_stale_manifest() {
    let t = tempfile::tempdir().unwrap();
    assert!(kpzlab(&["count-quads", "--max-faces", "5"], t.path()).status.success());
    assert!(t.path().join("manifest.json").exists());
    let out = kpzlab(&["build-measure", "--resolution", "12"], t.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(!t.path().join("manifest.json").exists());
}

#[test]
fn verify_failure_exits_2_after_writing_outputs() {
    let t = tempfile::tempdir().unwrap();
    let out = kpzlab(&["verify", "--checks", "var-circle-average", "--replicates", "2"], t.path());
    assert_eq!(out.status.code(), Some(2));
    let csv = std::fs::read_to_string(t.path().join("verify.csv")).unwrap();
    assert!(csv.contains("FAIL"));
    assert_eq!(checksums(t.path()).len(), 2);
    let out = kpzlab(&["verify", "--checks", "kpz-fixed-points"], t.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn config_file_and_flag_precedence() {
    let t = tempfile::tempdir().unwrap();
    let cfg = t.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"gamma": 1.0, "scales": [0.0, 0.5, 1.0]}"#).unwrap();
    let out = kpzlab(&["kpz-table", "--config", cfg.to_str().unwrap(), "--gamma", "0.5"], t.path());
    assert!(out.status.success());
    let table = std::fs::read_to_string(t.path().join("kpz_table.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.starts_with("0.5,")));
    assert_eq!(manifest(t.path())["config"]["gamma"], 0.5);
}

#[test]
fn counts_and_exponent_outputs() {
    let t = tempfile::tempdir().unwrap();
    let out = kpzlab(&["count-quads", "--max-faces", "4"], t.path());
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(t.path().join("counts.csv")).unwrap(), "n,count\n1,2\n2,9\n3,54\n4,378\n");

    let dir = t.path().join("euclid");
    let out = kpzlab(&["euclid-exponent", "--scales", "2^-5..2^-8", "--replicates", "100000"], &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("fit.csv")).unwrap();
    assert!(csv.starts_with("scale,estimate,stderr,n_samples,n_discarded\n"));
    assert_eq!(csv.lines().count(), 5);
    let fit: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("fit.json")).unwrap()).unwrap();
    assert!((fit["slope"].as_f64().unwrap() - 0.5).abs() < 0.05);
    assert_eq!(fit["config_hash"].as_str().unwrap().len(), 64);
}
