//! Runs the `isac-sounder` binary the way a user would.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use isac_sounder::cli_io::{exit_code, CirFile, RunManifest};
use isac_sounder::extraction::ChannelEstimate;
use isac_sounder::Complex64;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isac-sounder"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_with(command: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, json: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, json).unwrap();
    p
}

const FREE_SPACE: &str = r#"{
    "schema_version": 1,
    "scene": { "tx_position": [0, 0, 1], "rx_position": [3, 0, 1] },
    "extraction": { "zoom_band": { "absolute": { "lo": 32, "hi": 64 } } },
    "interference": INTERFERENCE
}"#;

fn free_space_config(interference: &str) -> String {
    FREE_SPACE.replace("INTERFERENCE", interference)
}

/// Reads one numeric column of a CSV by header name.
fn column(path: &Path, name: &str) -> Vec<f64> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let idx = rdr.headers().unwrap().iter().position(|h| h == name).unwrap();
    rdr.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn simulate_is_byte_identical_for_equal_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("setup2_los.json");
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    for out in [&a, &b] {
        let o = run_with("simulate", &cfg, out, &["--seed", "7"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    run_with("simulate", &cfg, &c, &["--seed", "8"]);
    let fa = fs::read(a.join("frame.isacfrm")).unwrap();
    assert_eq!(fa, fs::read(b.join("frame.isacfrm")).unwrap());
    assert_ne!(fa, fs::read(c.join("frame.isacfrm")).unwrap());

    let truth = fs::read_to_string(a.join("truth.csv")).unwrap();
    let bounces: Vec<&str> = truth.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert!(bounces.contains(&""), "LOS path missing:\n{truth}");
    assert!(bounces.contains(&"floor"), "floor path missing:\n{truth}");
}

#[test]
fn occluded_empty_scene_is_a_domain_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{
            "schema_version": 1,
            "scene": {
                "tx_position": [0, 0, 1], "rx_position": [3, 0, 1],
                "reflectors": [{ "id": "wall", "center": [1.5, 0, 1], "normal": [1, 0, 0], "half_extents": [2, 2] }]
            }
        }"#,
    );
    let o = run_with("simulate", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(exit_code::DOMAIN));
    assert!(stderr(&o).contains("empty scene"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_with_config_code() {
    let tmp = tempfile::tempdir().unwrap();
    let good = write_config(tmp.path(), &free_space_config("{}"));
    let o = run_with("simulate", &good, &tmp.path().join("out"), &["--module-thresh", "1.01"]);
    assert_eq!(o.status.code(), Some(exit_code::CONFIG), "{}", stderr(&o));
    assert!(stderr(&o).contains("module_thresh"));

    let bad = write_config(tmp.path(), &free_space_config(r#"{ "fraction": "half" }"#));
    let o = run_with("simulate", &bad, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(exit_code::CONFIG));
    assert!(stderr(&o).contains("interference.fraction"), "{}", stderr(&o));
}

#[test]
fn missing_inputs_name_the_producing_command() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &free_space_config("{}"));
    let o = run_with("extract", &cfg, &tmp.path().join("empty"), &[]);
    assert_eq!(o.status.code(), Some(exit_code::IO));
    assert!(stderr(&o).contains("isac-sounder simulate"), "{}", stderr(&o));
    let o = run_with("analyze", &cfg, &tmp.path().join("empty"), &[]);
    assert!(stderr(&o).contains("isac-sounder extract"), "{}", stderr(&o));
}

#[test]
fn noise_only_frame_reports_no_interference() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &free_space_config(r#"{ "chirp_indices": [] }"#));
    let out = tmp.path().join("out");
    assert!(run_with("simulate", &cfg, &out, &[]).status.success());
    let o = run_with("extract", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(exit_code::DOMAIN), "{}", stderr(&o));
    assert!(stderr(&o).contains("no interference"), "{}", stderr(&o));
}

#[test]
fn simulate_extract_round_trip_peaks_at_direct_delay() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &free_space_config("{}"));
    let out = tmp.path().join("out");
    assert!(run_with("simulate", &cfg, &out, &[]).status.success());
    let o = run_with("extract", &cfg, &out, &["--dump-stages"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("stages/07_clusters.csv").exists());

    let cir: CirFile = serde_json::from_slice(&fs::read(out.join("cir.json")).unwrap()).unwrap();
    let est = &cir.estimate;
    let expected = 3.0 / isac_sounder::units::SPEED_OF_LIGHT;
    for rx in 0..est.n_rx() {
        let peak = (0..est.delay_grid.len())
            .max_by(|&a, &b| est.cir[rx][a].norm().total_cmp(&est.cir[rx][b].norm()))
            .unwrap();
        assert!((est.delay_grid[peak] - expected).abs() <= 0.5 * est.grid_step() + 1e-15);
    }
}

#[test]
fn analyze_delta_cir_has_zero_spread() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &free_space_config("{}"));
    let out = tmp.path().join("out");
    fs::create_dir_all(&out).unwrap();
    let n = 64;
    let mut cir = vec![Complex64::new(0.0, 0.0); n];
    cir[20] = Complex64::new(1e-3, 0.0);
    let file = CirFile {
        seed: 0,
        config_sha256: String::new(),
        estimate: ChannelEstimate {
            cir: vec![cir.clone(), cir],
            delay_grid: (0..n).map(|i| 10e-9 + i as f64 * 0.25e-9 / 16.0).collect(),
            zoom_factor: 16,
            coarse_step: 0.25e-9,
            start_bin: 40,
            n_fft: 512,
            n_clusters: 1,
            hamming: false,
        },
    };
    fs::write(out.join("cir.json"), serde_json::to_vec(&file).unwrap()).unwrap();
    let o = run_with("analyze", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(column(&out.join("rmsds.csv"), "rms_ds_ns"), vec![0.0, 0.0]);
}

#[test]
fn compare_against_own_taps_has_zero_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("setup2_los.json");
    let out = tmp.path().join("out");
    let o = run_with("pipeline", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));

    // ground truth rebuilt from rx 0's own taps
    let tx_dbm = 12.0;
    let delays = column(&out.join("taps.csv"), "delay_ns");
    let powers = column(&out.join("taps.csv"), "power_db");
    let rx = column(&out.join("taps.csv"), "rx");
    let mut truth = String::from("delay_ns,gain_db,aoa_deg,bounces\n");
    for i in (0..delays.len()).filter(|&i| rx[i] == 0.0) {
        truth.push_str(&format!("{},{},0,tap{i}\n", delays[i], powers[i] - tx_dbm));
    }
    fs::write(out.join("truth.csv"), truth).unwrap();
    let o = run_with("compare", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));

    let mut rdr = csv::Reader::from_path(out.join("match.csv")).unwrap();
    let mut matched = 0;
    for r in rdr.records() {
        let r = r.unwrap();
        if &r[0] == "0" && &r[1] == "matched" {
            matched += 1;
            assert!(r[4].parse::<f64>().unwrap().abs() < 1e-9, "{r:?}");
            assert!(r[7].parse::<f64>().unwrap().abs() < 1e-9, "{r:?}");
        }
    }
    assert!(matched >= 2, "only {matched} matches");
}

#[test]
fn pipeline_writes_manifest_and_orders_spread() {
    let tmp = tempfile::tempdir().unwrap();
    let mut spread = Vec::new();
    for name in ["setup2_los", "setup3_nlos"] {
        let out = tmp.path().join(name);
        let o = run_with("pipeline", &configs_dir().join(format!("{name}.json")), &out, &["--seed", "11"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let m: RunManifest = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m.seed, 11);
        assert_eq!(m.config_sha256.len(), 64);
        for f in &m.outputs {
            assert_eq!(fs::metadata(out.join(&f.path)).unwrap().len(), f.bytes);
        }
        for f in ["frame.isacfrm", "truth.csv", "cir.json", "pdp.csv", "rmsds.csv", "aoa.csv", "match.csv"] {
            assert!(m.outputs.iter().any(|o| o.path == f), "{f} missing from manifest");
        }
        spread.push(column(&out.join("rmsds.csv"), "rms_ds_ns"));
    }
    for (los, nlos) in spread[0].iter().zip(&spread[1]) {
        assert!(nlos > los, "NLOS {nlos} ns vs LOS {los} ns");
    }
}
