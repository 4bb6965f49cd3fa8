//! Artifact files of a run.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{db, sector_label, ExperimentReport, IterationInputs, IterationSummary, Pipeline, PolicyIteration};
use crate::link_adaptation::{MetricsReport, PairedDifference};
use crate::scenario::{Scenario, SchedulerPolicy};
use crate::seeds;
use crate::{Error, Result};

type CsvOut = csv::Writer<BufWriter<File>>;

pub fn cell_dir_name(cluster_size: usize, density: f64, policy: SchedulerPolicy) -> String {
    format!("k{cluster_size}_rho{density}_{}", policy.name())
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

fn open_csv(dir: &Path, name: &str, header: &[&str]) -> Result<(CsvOut, PathBuf)> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(header).map_err(|e| csv_error(&path, e))?;
    Ok((w, path))
}

struct PolicyFiles {
    iterations: (CsvOut, PathBuf),
    traces: Option<[(CsvOut, PathBuf); 3]>,
}

/// Per-policy output files of one `(K, rho)` cell.
pub struct CellWriters {
    root: PathBuf,
    files: Vec<PolicyFiles>,
}

const ITERATIONS_HEADER: &[&str] = &[
    "iteration", "seed", "digest", "users", "clusters", "frames", "loss_frames", "rate_sum", "rate_count",
    "mean_spectral_efficiency", "loss_fraction",
];
const FRAMES_HEADER: &[&str] = &["iteration", "frame", "sector", "beam", "cluster", "borrowed", "min_sinr_db", "rate", "loss"];
const SINR_HEADER: &[&str] = &["iteration", "frame", "beam", "user", "precoded_db", "non_precoded_db"];
const USER_MAP_HEADER: &[&str] = &[
    "iteration", "user", "beam", "lat_deg", "lon_deg", "x_km", "y_km", "precoded_db", "non_precoded_db", "frames",
];

impl CellWriters {
    pub fn create(root: &Path, cluster_size: usize, density: f64, policies: &[SchedulerPolicy], traces: bool) -> Result<Self> {
        let mut files = Vec::new();
        for &policy in policies {
            let dir = root.join("cells").join(cell_dir_name(cluster_size, density, policy));
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let iterations = open_csv(&dir, "iterations.csv", ITERATIONS_HEADER)?;
            let traces = if traces {
                Some([
                    open_csv(&dir, "frames.csv", FRAMES_HEADER)?,
                    open_csv(&dir, "sinr.csv", SINR_HEADER)?,
                    open_csv(&dir, "user_map.csv", USER_MAP_HEADER)?,
                ])
            } else {
                None
            };
            files.push(PolicyFiles { iterations, traces });
        }
        Ok(Self { root: root.to_path_buf(), files })
    }

    pub(super) fn write_iteration(
        &mut self,
        policy_index: usize,
        pipeline: &Pipeline<'_>,
        inputs: &IterationInputs,
        run: &PolicyIteration,
        summary: &IterationSummary,
        traces: bool,
    ) -> Result<()> {
        let files = &mut self.files[policy_index];
        let m = &summary.metrics;
        let (w, path) = &mut files.iterations;
        w.write_record([
            summary.iteration.to_string(),
            summary.seed.to_string(),
            summary.digest.clone(),
            summary.users.to_string(),
            summary.clusters.to_string(),
            m.frames.to_string(),
            m.loss_frames.to_string(),
            m.rate_sum.to_string(),
            m.rate_count.to_string(),
            m.mean_spectral_efficiency().to_string(),
            m.loss_fraction().to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;

        let Some([frames, sinr, user_map]) = files.traces.as_mut().filter(|_| traces) else {
            return Ok(());
        };
        let it = inputs.iteration.to_string();
        let beams = pipeline.scenario.beams();
        for c in &run.clusters {
            frames
                .0
                .write_record([
                    it.clone(),
                    c.frame.to_string(),
                    sector_label(c.sector),
                    beams[c.beam_index].id().to_string(),
                    c.cluster.to_string(),
                    u8::from(c.borrowed).to_string(),
                    db(c.min_sinr).to_string(),
                    c.rate.to_string(),
                    u8::from(c.loss).to_string(),
                ])
                .map_err(|e| csv_error(&frames.1, e))?;
        }
        for (frame, s) in &run.sinrs {
            sinr.0
                .write_record([
                    it.clone(),
                    frame.to_string(),
                    beams[s.beam_index].id().to_string(),
                    s.user_id.to_string(),
                    db(s.precoded).to_string(),
                    db(s.non_precoded).to_string(),
                ])
                .map_err(|e| csv_error(&sinr.1, e))?;
        }
        for a in run.user_map.averages() {
            let u = &inputs.users[a.user_id];
            user_map
                .0
                .write_record([
                    it.clone(),
                    a.user_id.to_string(),
                    beams[a.beam_index].id().to_string(),
                    u.position.lat_deg.to_string(),
                    u.position.lon_deg.to_string(),
                    u.local_km[0].to_string(),
                    u.local_km[1].to_string(),
                    a.precoded_db.to_string(),
                    a.non_precoded_db.to_string(),
                    a.frames.to_string(),
                ])
                .map_err(|e| csv_error(&user_map.1, e))?;
        }
        Ok(())
    }

    /// Flush everything and return the written paths relative to the root.
    pub fn finish(self) -> Result<Vec<String>> {
        let mut written = Vec::new();
        for files in self.files {
            let mut all = vec![files.iterations];
            all.extend(files.traces.into_iter().flatten());
            for (mut w, path) in all {
                w.flush().map_err(|e| Error::io(&path, e))?;
                written.push(relative(&self.root, &path));
            }
        }
        Ok(written)
    }
}

fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Everything needed to reproduce a run. Contains no timestamps or thread
/// counts, so identical runs produce identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub layout_name: String,
    pub layout_sha256: String,
    pub modcod_sha256: String,
    pub master_seed: u64,
    pub monte_carlo_iterations: usize,
    pub iteration_seeds: Vec<u64>,
    pub cells: Vec<(usize, f64)>,
    pub artifacts: Vec<String>,
}

#[derive(Serialize)]
struct PolicySummary<'a> {
    policy: SchedulerPolicy,
    report: &'a MetricsReport,
}

#[derive(Serialize)]
struct CellSummary<'a> {
    cluster_size: usize,
    density: f64,
    status: &'static str,
    error: Option<&'a str>,
    policies: Vec<PolicySummary<'a>>,
    gsa_gain: Option<&'a PairedDifference>,
    loss_sign_test_p: Option<f64>,
}

fn write_file(root: &Path, name: &str, contents: &[u8], written: &mut Vec<String>) -> Result<()> {
    let path = root.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    written.push(name.to_owned());
    Ok(())
}

fn csv_string(rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub(super) fn write_summaries(root: &Path, scenario: &Scenario, report: &ExperimentReport, mut artifacts: Vec<String>) -> Result<RunManifest> {
    let mut summary = vec![[
        "cluster_size", "density", "policy", "status", "iterations", "frames", "mean_spectral_efficiency",
        "loss_frame_fraction", "message",
    ]
    .map(String::from)
    .to_vec()];
    let mut efficiency = vec![["density", "cluster_size", "policy", "mean_spectral_efficiency"].map(String::from).to_vec()];
    let mut gain = vec![[
        "density", "cluster_size", "gain", "ci_low", "ci_high", "pairs", "random_loss_fraction", "gsa_loss_fraction",
        "loss_sign_test_p",
    ]
    .map(String::from)
    .to_vec()];
    let mut cells_json = Vec::new();
    for cell in &report.cells {
        let (k, rho) = (cell.cluster_size.to_string(), cell.density.to_string());
        match &cell.result {
            Ok(c) => {
                for p in &c.policies {
                    let r = &p.report;
                    summary.push(vec![
                        k.clone(),
                        rho.clone(),
                        p.policy.name().into(),
                        "ok".into(),
                        r.iterations.to_string(),
                        r.frames.to_string(),
                        r.mean_spectral_efficiency.to_string(),
                        r.loss_frame_fraction.to_string(),
                        String::new(),
                    ]);
                    efficiency.push(vec![rho.clone(), k.clone(), p.policy.name().into(), r.mean_spectral_efficiency.to_string()]);
                }
                if let Some(g) = &c.gsa_gain {
                    let loss = |policy| c.policy(policy).map(|p| p.report.loss_frame_fraction);
                    gain.push(vec![
                        rho.clone(),
                        k.clone(),
                        g.mean.to_string(),
                        g.ci_low.to_string(),
                        g.ci_high.to_string(),
                        g.pairs.to_string(),
                        opt(loss(SchedulerPolicy::Random)),
                        opt(loss(SchedulerPolicy::Gsa)),
                        opt(c.loss_sign_test_p),
                    ]);
                }
                cells_json.push(CellSummary {
                    cluster_size: cell.cluster_size,
                    density: cell.density,
                    status: "ok",
                    error: None,
                    policies: c.policies.iter().map(|p| PolicySummary { policy: p.policy, report: &p.report }).collect(),
                    gsa_gain: c.gsa_gain.as_ref(),
                    loss_sign_test_p: c.loss_sign_test_p,
                });
            }
            Err(message) => {
                summary.push(vec![
                    k.clone(),
                    rho.clone(),
                    String::new(),
                    "error".into(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    message.clone(),
                ]);
                cells_json.push(CellSummary {
                    cluster_size: cell.cluster_size,
                    density: cell.density,
                    status: "error",
                    error: Some(message),
                    policies: Vec::new(),
                    gsa_gain: None,
                    loss_sign_test_p: None,
                });
            }
        }
    }
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    write_file(root, "summary.csv", &csv_string(summary), &mut artifacts)?;
    write_file(root, "spectral_efficiency.csv", &csv_string(efficiency), &mut artifacts)?;
    write_file(root, "gsa_gain.csv", &csv_string(gain), &mut artifacts)?;
    let json = serde_json::to_string_pretty(&cells_json).expect("summary serializes");
    write_file(root, "summary.json", json.as_bytes(), &mut artifacts)?;
    artifacts.sort();

    let config = &scenario.config;
    let config_json = serde_json::to_string(config).expect("config serializes");
    let modcod_json = serde_json::to_string(scenario.modcod.rows()).expect("modcod serializes");
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: sha256_hex(config_json.as_bytes()),
        layout_name: scenario.layout.name.clone(),
        layout_sha256: sha256_hex(scenario.layout.to_json_string().as_bytes()),
        modcod_sha256: sha256_hex(modcod_json.as_bytes()),
        master_seed: config.master_seed,
        monte_carlo_iterations: config.monte_carlo_iterations,
        iteration_seeds: (0..config.monte_carlo_iterations as u64)
            .map(|i| seeds::iteration_seed(config.master_seed, i))
            .collect(),
        cells: report.cells.iter().map(|c| (c.cluster_size, c.density)).collect(),
        artifacts,
    };
    let path = root.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text).map_err(|e| Error::io(path, e))?;
    Ok(manifest)
}
