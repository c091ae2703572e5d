//! CSV writers for analysis results and stage dumps.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use super::CliError;
use crate::analysis::{AoaMap, MatchReport, Pdp, RmsDsResult, Tap};
use crate::extraction::StageTrace;
use crate::units::power_to_db;

type CsvWriter = csv::Writer<BufWriter<File>>;

fn create(path: &Path) -> Result<CsvWriter, CliError> {
    let f = File::create(path).map_err(|e| CliError::io(path, e, Some("is the output directory writable?")))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source, None),
        other => CliError::bad_file(path, format!("{other:?}")),
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let mut w = create(path)?;
    for r in rows {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e, None))
}

/// Wide table: first column `key_name`, then one column per rx.
fn write_per_rx(path: &Path, key_name: &str, keys: &[f64], columns: &[Vec<f64>], prefix: &str) -> Result<(), CliError> {
    let mut w = create(path)?;
    let mut header = vec![key_name.to_owned()];
    header.extend((0..columns.len()).map(|r| format!("{prefix}{r}")));
    w.write_record(&header).map_err(csv_err(path))?;
    for (i, k) in keys.iter().enumerate() {
        let mut rec = vec![k.to_string()];
        rec.extend(columns.iter().map(|c| c[i].to_string()));
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e, None))
}

/// `delay_ns,power_db_rx0,power_db_rx1,…`
pub fn write_pdp(path: &Path, pdps: &[Pdp]) -> Result<(), CliError> {
    let delays: Vec<f64> = pdps.first().map(|p| p.delays.iter().map(|d| d * 1e9).collect()).unwrap_or_default();
    let cols: Vec<Vec<f64>> = pdps.iter().map(|p| p.power_db.clone()).collect();
    write_per_rx(path, "delay_ns", &delays, &cols, "power_db_rx")
}

#[derive(Serialize)]
struct RmsDsRow {
    rx: usize,
    rms_ds_ns: f64,
    mean_delay_ns: f64,
    window_start_ns: f64,
    window_end_ns: f64,
}

pub fn write_rmsds(path: &Path, rows: &[(usize, RmsDsResult)]) -> Result<(), CliError> {
    write_rows(
        path,
        rows.iter().map(|(rx, r)| RmsDsRow {
            rx: *rx,
            rms_ds_ns: r.rms_ds * 1e9,
            mean_delay_ns: r.mean_delay * 1e9,
            window_start_ns: r.window.0 * 1e9,
            window_end_ns: r.window.1 * 1e9,
        }),
    )
}

#[derive(Serialize)]
struct AoaRow {
    delay_ns: f64,
    angle_deg: f64,
    power_db: f64,
}

pub fn write_aoa(path: &Path, map: &AoaMap) -> Result<(), CliError> {
    write_rows(
        path,
        map.delays.iter().zip(&map.power_db).flat_map(|(d, row)| {
            map.angles_deg.iter().zip(row).map(move |(a, p)| AoaRow {
                delay_ns: d * 1e9,
                angle_deg: *a,
                power_db: *p,
            })
        }),
    )
}

#[derive(Serialize)]
struct TapRow {
    rx: usize,
    delay_ns: f64,
    power_db: f64,
    phase_rad: f64,
}

pub fn write_taps(path: &Path, taps: &[(usize, Vec<Tap>)]) -> Result<(), CliError> {
    write_rows(
        path,
        taps.iter().flat_map(|(rx, ts)| {
            ts.iter().map(move |t| TapRow {
                rx: *rx,
                delay_ns: t.delay * 1e9,
                power_db: t.power_db,
                phase_rad: t.amplitude.arg(),
            })
        }),
    )
}

#[derive(Serialize)]
struct MatchRow {
    rx: usize,
    status: &'static str,
    truth_delay_ns: Option<f64>,
    measured_delay_ns: Option<f64>,
    delay_error_ns: Option<f64>,
    truth_gain_db: Option<f64>,
    measured_gain_db: Option<f64>,
    gain_error_db: Option<f64>,
    bounces: String,
}

pub fn write_match(path: &Path, reports: &[(usize, MatchReport)]) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for (rx, r) in reports {
        for p in &r.pairs {
            rows.push(MatchRow {
                rx: *rx,
                status: "matched",
                truth_delay_ns: Some(p.truth_delay * 1e9),
                measured_delay_ns: Some(p.measured_delay * 1e9),
                delay_error_ns: Some(p.delay_error * 1e9),
                truth_gain_db: Some(p.truth_gain_db),
                measured_gain_db: Some(p.measured_gain_db),
                gain_error_db: Some(p.gain_error_db),
                bounces: p.bounce_ids.join(";"),
            });
        }
        for p in &r.unmatched_truth {
            rows.push(MatchRow {
                rx: *rx,
                status: "missed_ray",
                truth_delay_ns: Some(p.delay * 1e9),
                measured_delay_ns: None,
                delay_error_ns: None,
                truth_gain_db: Some(p.gain_db),
                measured_gain_db: None,
                gain_error_db: None,
                bounces: p.bounce_ids.join(";"),
            });
        }
        for (d, g) in &r.unmatched_taps {
            rows.push(MatchRow {
                rx: *rx,
                status: "extra_tap",
                truth_delay_ns: None,
                measured_delay_ns: Some(d * 1e9),
                delay_error_ns: None,
                truth_gain_db: None,
                measured_gain_db: Some(*g),
                gain_error_db: None,
                bounces: String::new(),
            });
        }
    }
    write_rows(path, rows)
}

fn write_matrix(path: &Path, m: &DMatrix<f64>, labels: &[usize]) -> Result<(), CliError> {
    let mut w = create(path)?;
    let mut header = vec!["chirp".to_owned()];
    header.extend(labels.iter().map(|l| l.to_string()));
    w.write_record(&header).map_err(csv_err(path))?;
    for i in 0..m.nrows() {
        let mut rec = vec![labels[i].to_string()];
        rec.extend((0..m.ncols()).map(|j| m[(i, j)].to_string()));
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e, None))
}

#[derive(Serialize)]
struct SelectionRow {
    chirp: usize,
    power_db: f64,
    noise_floor_db: f64,
    threshold_db: f64,
    selected: bool,
}

/// One CSV per extraction stage, numbered in processing order. Returns the
/// written paths relative to `dir`.
pub fn write_stages(dir: &Path, trace: &StageTrace) -> Result<Vec<String>, CliError> {
    let stages = dir.join(super::STAGES_DIR);
    fs::create_dir_all(&stages).map_err(|e| CliError::io(&stages, e, None))?;
    let mut written = Vec::new();
    let mut put = |name: &str| {
        written.push(format!("{}/{name}", super::STAGES_DIR));
        stages.join(name)
    };
    let db = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> { rows.iter().map(|r| r.iter().map(|&p| power_to_db(p)).collect()).collect() };
    let bins = |rows: &[Vec<f64>]| -> Vec<f64> { (0..rows.first().map_or(0, Vec::len)).map(|b| b as f64).collect() };

    write_per_rx(&put("01_raw_power.csv"), "bin", &bins(&trace.raw_power), &db(&trace.raw_power), "power_db_rx")?;
    write_per_rx(
        &put("02_filtered_power.csv"),
        "bin",
        &bins(&trace.filtered_power),
        &db(&trace.filtered_power),
        "power_db_rx",
    )?;
    let sel = &trace.selection;
    write_rows(
        &put("03_selection.csv"),
        sel.chirp_power_db.iter().enumerate().map(|(c, p)| SelectionRow {
            chirp: c,
            power_db: *p,
            noise_floor_db: sel.noise_floor_db,
            threshold_db: sel.threshold_db,
            selected: sel.selected.contains(&c),
        }),
    )?;
    #[derive(Serialize)]
    struct ShiftRow {
        chirp: usize,
        shift_bins: isize,
        reference_bin: usize,
    }
    write_rows(
        &put("04_alignment.csv"),
        trace.shifts.iter().map(|&(chirp, shift_bins)| ShiftRow {
            chirp,
            shift_bins,
            reference_bin: trace.reference_bin,
        }),
    )?;
    let labels: Vec<usize> = trace.shifts.iter().map(|s| s.0).collect();
    write_matrix(&put("05_module_corr.csv"), &trace.correlation.module_corr, &labels)?;
    write_matrix(&put("06_phase_corr.csv"), &trace.correlation.phase_corr, &labels)?;
    #[derive(Serialize)]
    struct ClusterRow {
        cluster: usize,
        chirp: usize,
    }
    write_rows(
        &put("07_clusters.csv"),
        trace
            .clusters
            .iter()
            .enumerate()
            .flat_map(|(k, members)| members.iter().map(move |&chirp| ClusterRow { cluster: k, chirp })),
    )?;
    write_per_rx(
        &put("08_cluster_power.csv"),
        "bin",
        &bins(&trace.cluster_power),
        &db(&trace.cluster_power),
        "power_db_rx",
    )?;
    write_per_rx(
        &put("09_autoclutter_power.csv"),
        "bin",
        &bins(&trace.autoclutter_power),
        &db(&trace.autoclutter_power),
        "power_db_rx",
    )?;
    Ok(written)
}
