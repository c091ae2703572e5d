use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::manifest::{ManifestFile, RunManifest};
use super::output::{write_aoa, write_match, write_pdp, write_rmsds, write_stages, write_taps};
use super::{
    CliError, RunConfig, AOA_FILE, CIR_FILE, FRAME_FILE, MANIFEST_FILE, MATCH_FILE, PDP_FILE, RMSDS_FILE, TAPS_FILE,
    TRUTH_FILE,
};
use crate::analysis::{
    angle_fft, compare_to_rt, compute_pdp, default_ds_window, detect_taps, rms_delay_spread, CompareParams, MatchReport,
    Pdp, RmsDsResult, Tap, TruthSelection,
};
use crate::extraction::{extract_channel, ChannelEstimate};
use crate::frame_synth::{read_frame, synth_frame, write_frame, FrameCube};
use crate::scene_rt::{ground_truth_channel, read_truth_csv, write_truth_csv, GroundTruthChannel};

/// Everything a command needs: the effective config and where to write.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub config: RunConfig,
    /// Config file the run was loaded from, listed in the manifest.
    pub config_path: Option<PathBuf>,
    pub dump_stages: bool,
}

impl RunContext {
    pub fn new(config: RunConfig) -> Self {
        RunContext {
            config,
            config_path: None,
            dump_stages: false,
        }
    }

    pub fn dir(&self) -> &Path {
        &self.config.output_dir
    }

    fn ensure_dir(&self) -> Result<(), CliError> {
        fs::create_dir_all(self.dir()).map_err(|e| CliError::io(self.dir(), e, None))
    }

    fn config_hint(&self, command: &str) -> String {
        match &self.config_path {
            Some(p) => format!("run `isac-sounder {command} --config {}` first", p.display()),
            None => format!("run the `{command}` command first"),
        }
    }

    fn open_input(&self, name: &str, producer: &str) -> Result<(PathBuf, File), CliError> {
        let path = self.dir().join(name);
        let f = File::open(&path).map_err(|e| CliError::io(&path, e, Some(&self.config_hint(producer))))?;
        Ok((path, f))
    }
}

/// `cir.json`: the extracted channel plus the run it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CirFile {
    pub seed: u64,
    pub config_sha256: String,
    pub estimate: ChannelEstimate,
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e, Some("is the output directory writable?")))
}

/// Traces the scene and writes `frame.isacfrm` and `truth.csv`.
pub fn cmd_simulate(ctx: &RunContext) -> Result<Vec<String>, CliError> {
    let cfg = &ctx.config;
    cfg.validate()?;
    let channel = ground_truth_channel(cfg.scene(), &cfg.radio)?;
    let interf = cfg.interference.build(&cfg.victim, cfg.seed);
    let cube = synth_frame(&channel, &cfg.victim, &interf, &cfg.static_clutter, cfg.seed, cfg.noise)?;
    log::info!(
        "{} paths, {} of {} chirps interfered",
        channel.paths.len(),
        interf.interfered_chirp_indices.len(),
        cfg.victim.n_chirps_per_frame
    );
    ctx.ensure_dir()?;

    let frame_path = ctx.dir().join(FRAME_FILE);
    let mut w = create(&frame_path)?;
    write_frame(&cube, &mut w).map_err(|e| CliError::from((frame_path.clone(), e)))?;
    w.flush().map_err(|e| CliError::io(&frame_path, e, None))?;

    let truth_path = ctx.dir().join(TRUTH_FILE);
    let mut w = create(&truth_path)?;
    write_truth_csv(&channel, &mut w).map_err(|e| CliError::bad_file(&truth_path, e))?;
    w.flush().map_err(|e| CliError::io(&truth_path, e, None))?;
    Ok(vec![FRAME_FILE.into(), TRUTH_FILE.into()])
}

/// Runs the extraction chain on `frame.isacfrm` and writes `cir.json`.
pub fn cmd_extract(ctx: &RunContext) -> Result<Vec<String>, CliError> {
    let cfg = &ctx.config;
    cfg.validate()?;
    let cube = load_frame(ctx)?;
    let extraction = extract_channel(&cube, &cfg.extraction)?;
    log::info!(
        "{} chirps selected, {} clusters",
        extraction.trace.selection.selected.len(),
        extraction.estimate.n_clusters
    );
    let cir = CirFile {
        seed: cfg.seed,
        config_sha256: cfg.canonical_hash(),
        estimate: extraction.estimate,
    };
    let path = ctx.dir().join(CIR_FILE);
    let mut w = create(&path)?;
    serde_json::to_writer(&mut w, &cir).map_err(|e| CliError::bad_file(&path, e))?;
    w.flush().map_err(|e| CliError::io(&path, e, None))?;

    let mut written = vec![CIR_FILE.to_owned()];
    if ctx.dump_stages {
        written.extend(write_stages(ctx.dir(), &extraction.trace)?);
    }
    Ok(written)
}

/// PDP, RMS delay spread and taps of one antenna.
pub struct RxAnalysis {
    pub pdp: Pdp,
    pub rmsds: RmsDsResult,
    pub taps: Vec<Tap>,
}

pub fn analyze_rx(est: &ChannelEstimate, cfg: &RunConfig, rx: usize) -> Result<RxAnalysis, CliError> {
    let a = &cfg.analysis;
    let pdp = compute_pdp(est, rx);
    let window = default_ds_window(&pdp, a.ds_margin_db)?;
    let rmsds = rms_delay_spread(&pdp, window, a.ds_mode)?;
    let taps = detect_taps(est, rx, &a.taps);
    Ok(RxAnalysis { pdp, rmsds, taps })
}

/// Writes `pdp.csv`, `rmsds.csv`, `taps.csv` and, with two or more
/// antennas, `aoa.csv`.
pub fn cmd_analyze(ctx: &RunContext) -> Result<Vec<String>, CliError> {
    let cfg = &ctx.config;
    cfg.validate()?;
    let est = load_cir(ctx)?.estimate;
    let per_rx = (0..est.n_rx())
        .into_par_iter()
        .map(|rx| analyze_rx(&est, cfg, rx))
        .collect::<Result<Vec<_>, _>>()?;
    let dir = ctx.dir();
    let pdps: Vec<Pdp> = per_rx.iter().map(|r| r.pdp.clone()).collect();
    write_pdp(&dir.join(PDP_FILE), &pdps)?;
    let ds: Vec<(usize, RmsDsResult)> = per_rx.iter().enumerate().map(|(rx, r)| (rx, r.rmsds)).collect();
    write_rmsds(&dir.join(RMSDS_FILE), &ds)?;
    let taps: Vec<(usize, Vec<Tap>)> = per_rx.into_iter().enumerate().map(|(rx, r)| (rx, r.taps)).collect();
    write_taps(&dir.join(TAPS_FILE), &taps)?;
    let mut written = vec![PDP_FILE.to_owned(), RMSDS_FILE.to_owned(), TAPS_FILE.to_owned()];
    if est.n_rx() >= 2 {
        let map = angle_fft(&est, cfg.analysis.n_angle_bins, cfg.victim.rx_spacing_wavelengths)?;
        write_aoa(&dir.join(AOA_FILE), &map)?;
        written.push(AOA_FILE.to_owned());
    } else {
        log::warn!("single rx antenna: skipping the angle map");
    }
    Ok(written)
}

/// Matches the taps of every antenna against `truth.csv`; writes `match.csv`.
pub fn cmd_compare(ctx: &RunContext) -> Result<Vec<String>, CliError> {
    let cfg = &ctx.config;
    cfg.validate()?;
    let est = load_cir(ctx)?.estimate;
    let truth = load_truth(ctx)?;
    let reports = (0..est.n_rx())
        .into_par_iter()
        .map(|rx| Ok((rx, compare_rx(&est, &truth, cfg, rx)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    write_match(&ctx.dir().join(MATCH_FILE), &reports)?;
    Ok(vec![MATCH_FILE.to_owned()])
}

pub fn compare_rx(
    est: &ChannelEstimate,
    truth: &GroundTruthChannel,
    cfg: &RunConfig,
    rx: usize,
) -> Result<MatchReport, CliError> {
    let a = &cfg.analysis;
    let r = analyze_rx(est, cfg, rx)?;
    let selection = match a.gain_margin_db {
        Some(margin_db) => TruthSelection::GainMargin { margin_db },
        None => TruthSelection::DsWindow {
            k: a.ds_k,
            mean_delay: r.rmsds.mean_delay,
            rms_ds: r.rmsds.rms_ds,
        },
    };
    let params = CompareParams {
        gate: a.gate_bins * est.coarse_step,
        tx_power_dbm: cfg.interference.tx_power_dbm.unwrap_or(cfg.victim.tx_power_dbm),
        delay_offset: cfg.interference.chirp_start_offset,
        selection,
    };
    Ok(compare_to_rt(&r.taps, truth, &params)?)
}

/// simulate → extract → analyze → compare, then `manifest.json`.
pub fn cmd_pipeline(ctx: &RunContext) -> Result<RunManifest, CliError> {
    let started_at = now();
    let mut outputs = Vec::new();
    outputs.extend(cmd_simulate(ctx)?);
    outputs.extend(cmd_extract(ctx)?);
    outputs.extend(cmd_analyze(ctx)?);
    outputs.extend(cmd_compare(ctx)?);

    let cfg = &ctx.config;
    let mut inputs = Vec::new();
    if let Some(p) = &ctx.config_path {
        let data = fs::read(p).map_err(|e| CliError::io(p, e, None))?;
        inputs.push(ManifestFile {
            path: p.display().to_string(),
            bytes: data.len() as u64,
            sha256: hex::encode(<sha2::Sha256 as sha2::Digest>::digest(&data)),
        });
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        command: "pipeline".to_owned(),
        config_sha256: cfg.canonical_hash(),
        seed: cfg.seed,
        started_at,
        finished_at: now(),
        inputs,
        outputs: outputs
            .iter()
            .map(|rel| ManifestFile::describe(ctx.dir(), rel))
            .collect::<Result<_, _>>()?,
    };
    let path = ctx.dir().join(MANIFEST_FILE);
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &manifest).map_err(|e| CliError::bad_file(&path, e))?;
    w.flush().map_err(|e| CliError::io(&path, e, None))?;
    Ok(manifest)
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn load_frame(ctx: &RunContext) -> Result<FrameCube, CliError> {
    let (path, f) = ctx.open_input(FRAME_FILE, "simulate")?;
    read_frame(BufReader::new(f)).map_err(|e| CliError::from((path, e)))
}

fn load_cir(ctx: &RunContext) -> Result<CirFile, CliError> {
    let (path, f) = ctx.open_input(CIR_FILE, "extract")?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| CliError::bad_file(&path, e))
}

fn load_truth(ctx: &RunContext) -> Result<GroundTruthChannel, CliError> {
    let (path, f) = ctx.open_input(TRUTH_FILE, "simulate")?;
    read_truth_csv(BufReader::new(f), ctx.config.radio.carrier_freq).map_err(|e| CliError::bad_file(&path, e))
}
