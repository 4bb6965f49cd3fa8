//! Monte Carlo orchestration.
//!
//! One iteration deploys users, synthesizes channels, clusters and
//! sectorises, and then runs every requested scheduler over those shared
//! inputs, so the policies are compared on identical deployments and
//! channels. Iterations run in parallel and are merged in iteration order.

mod dump;
mod output;
mod report;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::channel::{assemble_frame_matrix, ChannelModel, ChannelVector};
use crate::clustering::{channel_features, euclidean_features, max_dist_partition, ClusterPartition};
use crate::geometry::{NormalizedPolar, SectorId, SectorLayout, Sectorisation};
use crate::link_adaptation::{
    aggregate, min_sinr, paired_difference, sign_test_less, to_db, IterationMetrics, MetricsReport,
    PairedDifference, UserSinrMap,
};
use crate::precoding::{evaluate_sinr, mmse_precoder, normalize_power, regularization, ScheduledUser, UserSinr};
use crate::scenario::{deploy_users, users_per_beam, Scenario, SchedulerPolicy, Similarity, UserTerminal};
use crate::scheduling::{gsa_schedule, min_random_frames, random_schedule, ScheduleSequence};
use crate::seeds::{self, tags};
use crate::{Error, Result};

pub use dump::{cluster_table, sector_table};
pub use output::{cell_dir_name, RunManifest};
pub use report::{parse_frames_csv, reaggregate, reaggregate_dir, FrameRow};

/// Everything both schedulers share within one iteration.
#[derive(Debug, Clone)]
pub struct IterationInputs {
    pub iteration: usize,
    pub seed: u64,
    pub cluster_size: usize,
    pub users: Vec<UserTerminal>,
    /// Indexed by user id.
    pub channels: Vec<ChannelVector>,
    /// In beam order.
    pub partitions: Vec<ClusterPartition>,
    pub barycentres: Vec<Vec<NormalizedPolar>>,
    pub sectorisations: Vec<Sectorisation>,
}

impl IterationInputs {
    /// SHA-256 over user positions and channel coefficients.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for u in &self.users {
            h.update(u.position.lat_deg.to_le_bytes());
            h.update(u.position.lon_deg.to_le_bytes());
        }
        for c in &self.channels {
            for z in &c.coefficients {
                h.update(z.re.to_le_bytes());
                h.update(z.im.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// One served cluster in one frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterFrame {
    pub frame: usize,
    pub sector: Option<SectorId>,
    pub beam_index: usize,
    pub cluster: usize,
    pub borrowed: bool,
    /// Weakest member, linear.
    pub min_sinr: f64,
    pub rate: f64,
    /// Some member's precoded SINR is below its non-precoded SINR.
    pub loss: bool,
}

/// Result of one scheduler over one iteration.
#[derive(Debug, Clone)]
pub struct PolicyIteration {
    pub metrics: IterationMetrics,
    pub schedule: ScheduleSequence,
    /// Present when traces are requested.
    pub clusters: Vec<ClusterFrame>,
    pub sinrs: Vec<(usize, UserSinr)>,
    pub user_map: UserSinrMap,
}

/// Per-scenario precomputation.
#[derive(Debug)]
pub struct Pipeline<'a> {
    pub scenario: &'a Scenario,
    pub model: ChannelModel,
    pub sectors: SectorLayout,
    pub alpha: Vec<f64>,
}

fn rho_seed(rho: f64) -> u64 {
    rho.to_bits()
}

impl<'a> Pipeline<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        let model = ChannelModel::new(&scenario.config, &scenario.layout)?;
        let alpha = regularization(model.link(), scenario.num_beams(), scenario.config.precoding.regularization);
        Ok(Self {
            sectors: scenario.config.sector_layout()?,
            scenario,
            model,
            alpha,
        })
    }

    /// Check that every beam receives at least `K` users at density `rho`.
    pub fn check_cell(&self, cluster_size: usize, rho: f64) -> Result<()> {
        if cluster_size == 0 {
            return Err(Error::validation("cluster_size", "must be at least 1"));
        }
        for beam in self.scenario.beams() {
            let n = users_per_beam(rho, beam.area_km2());
            if n < cluster_size {
                return Err(Error::validation(
                    format!("beam {}", beam.id()),
                    format!("{n} users at density {rho} cannot fill clusters of {cluster_size}"),
                ));
            }
        }
        Ok(())
    }

    /// Deployment and channels depend on the iteration and the density only,
    /// so every cluster size sees the same users.
    pub fn prepare(&self, cluster_size: usize, rho: f64, iteration: usize) -> Result<IterationInputs> {
        let config = &self.scenario.config;
        let seed = seeds::iteration_seed(config.master_seed, iteration as u64);
        let deploy_seed = seeds::derive(seeds::derive(seed, tags::DENSITY), rho_seed(rho));
        let beams = self.scenario.beams();
        let users = deploy_users(beams, rho, config.link.satellite_longitude, seeds::derive(deploy_seed, tags::DEPLOY))?;
        let phases = self.model.draw_phases(seeds::derive(deploy_seed, tags::PHASES));
        let channels: Vec<ChannelVector> = users.iter().map(|u| self.model.channel_vector(u, &phases)).collect();

        let mut partitions = Vec::with_capacity(beams.len());
        let mut barycentres = Vec::with_capacity(beams.len());
        let mut sectorisations = Vec::with_capacity(beams.len());
        let mut start = 0;
        for (b, beam) in beams.iter().enumerate() {
            let end = start + users[start..].iter().take_while(|u| u.beam_index == b).count();
            let members = &users[start..end];
            let features: Vec<_> = match config.clustering_similarity {
                Similarity::Euclidean => members.iter().map(euclidean_features).collect(),
                Similarity::Channel => members.iter().map(|u| channel_features(&channels[u.user_id])).collect(),
            };
            let partition = max_dist_partition(beam.id(), &features, cluster_size)?;
            let polar = partition
                .clusters
                .iter()
                .map(|c| {
                    let mut g = [0.0; 2];
                    for &u in c {
                        g[0] += users[u].local_km[0];
                        g[1] += users[u].local_km[1];
                    }
                    let n = c.len() as f64;
                    beam.local_polygon().polar_unchecked([g[0] / n, g[1] / n])
                })
                .collect::<Result<Vec<_>>>()?;
            sectorisations.push(Sectorisation::new(beam.id(), &self.sectors, &polar));
            barycentres.push(polar);
            partitions.push(partition);
            start = end;
        }
        Ok(IterationInputs { iteration, seed, cluster_size, users, channels, partitions, barycentres, sectorisations })
    }

    pub fn schedule(&self, inputs: &IterationInputs, policy: SchedulerPolicy) -> Result<ScheduleSequence> {
        let k = inputs.cluster_size as u64;
        match policy {
            SchedulerPolicy::Random => {
                let frames = self
                    .scenario
                    .config
                    .random_frames
                    .unwrap_or_else(|| min_random_frames(&inputs.partitions));
                random_schedule(&inputs.partitions, frames, seeds::derive(seeds::derive(inputs.seed, tags::RANDOM_SCHEDULER), k))
            }
            SchedulerPolicy::Gsa => gsa_schedule(
                &inputs.partitions,
                &inputs.sectorisations,
                seeds::derive(seeds::derive(inputs.seed, tags::GSA_SCHEDULER), k),
            ),
        }
    }

    /// Precode and evaluate every frame of `policy`'s schedule.
    pub fn simulate(&self, inputs: &IterationInputs, policy: SchedulerPolicy, traces: bool) -> Result<PolicyIteration> {
        let schedule = self.schedule(inputs, policy)?;
        let options = &self.scenario.config.precoding;
        let tx_power = self.model.link().tx_power_w;
        let mut out = PolicyIteration {
            metrics: IterationMetrics::default(),
            schedule: ScheduleSequence::default(),
            clusters: Vec::new(),
            sinrs: Vec::new(),
            user_map: UserSinrMap::default(),
        };
        let n_beams = inputs.partitions.len();
        let mut rates = vec![0.0; n_beams];
        for (n, frame) in schedule.frames.iter().enumerate() {
            let selected: Vec<&[usize]> = frame
                .selections
                .iter()
                .zip(&inputs.partitions)
                .map(|(s, p)| p.clusters[s.cluster].as_slice())
                .collect();
            let h = assemble_frame_matrix(&selected, &inputs.channels)?;
            let w = normalize_power(mmse_precoder(&h, &self.alpha)?, options.normalization, tx_power)?;
            let scheduled: Vec<ScheduledUser<'_>> = selected
                .iter()
                .enumerate()
                .flat_map(|(b, members)| {
                    members.iter().map(move |&u| ScheduledUser {
                        user_id: u,
                        beam_index: b,
                        channel: &inputs.channels[u].coefficients,
                    })
                })
                .collect();
            let sinrs = evaluate_sinr(&scheduled, &w);
            let mut frame_loss = false;
            let mut offset = 0;
            for (b, members) in selected.iter().enumerate() {
                let group = &sinrs[offset..offset + members.len()];
                offset += members.len();
                let precoded: Vec<f64> = group.iter().map(|s| s.precoded).collect();
                let weakest = min_sinr(&precoded)?;
                rates[b] = self.scenario.modcod.efficiency_linear(weakest);
                let loss = group.iter().any(UserSinr::is_precoding_loss);
                frame_loss |= loss;
                if traces {
                    out.clusters.push(ClusterFrame {
                        frame: n,
                        sector: frame.sector,
                        beam_index: b,
                        cluster: frame.selections[b].cluster,
                        borrowed: frame.selections[b].borrowed,
                        min_sinr: weakest,
                        rate: rates[b],
                        loss,
                    });
                }
            }
            out.metrics.record_frame(&rates, frame_loss);
            if traces {
                for s in &sinrs {
                    out.user_map.add(s);
                    out.sinrs.push((n, *s));
                }
            }
        }
        out.schedule = schedule;
        Ok(out)
    }
}

/// What to run and where to write it.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub policies: Vec<SchedulerPolicy>,
    /// Worker threads; `None` uses the available parallelism.
    pub threads: Option<usize>,
    /// Artifact directory; `None` keeps everything in memory.
    pub out_dir: Option<PathBuf>,
    /// Write per-frame and per-user traces (needs `out_dir`).
    pub traces: bool,
}

impl RunOptions {
    pub fn in_memory(policies: &[SchedulerPolicy]) -> Self {
        Self { policies: policies.to_vec(), threads: None, out_dir: None, traces: false }
    }
}

/// Per-iteration summary of one policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationSummary {
    pub iteration: usize,
    pub seed: u64,
    pub digest: String,
    pub users: usize,
    pub clusters: usize,
    pub metrics: IterationMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyResult {
    pub policy: SchedulerPolicy,
    pub report: MetricsReport,
    pub iterations: Vec<IterationSummary>,
}

impl PolicyResult {
    pub fn iteration_efficiencies(&self) -> Vec<f64> {
        self.iterations.iter().map(|i| i.metrics.mean_spectral_efficiency()).collect()
    }

    pub fn iteration_loss_fractions(&self) -> Vec<f64> {
        self.iterations.iter().map(|i| i.metrics.loss_fraction()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub cluster_size: usize,
    pub density: f64,
    pub policies: Vec<PolicyResult>,
    /// GSA minus random, paired over iterations, when both ran.
    pub gsa_gain: Option<PairedDifference>,
    /// One-sided sign test that GSA's per-iteration loss-frame fraction is
    /// below random's.
    pub loss_sign_test_p: Option<f64>,
}

impl CellResult {
    pub fn policy(&self, policy: SchedulerPolicy) -> Option<&PolicyResult> {
        self.policies.iter().find(|p| p.policy == policy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellOutcome {
    pub cluster_size: usize,
    pub density: f64,
    pub result: std::result::Result<CellResult, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub cells: Vec<CellOutcome>,
    pub manifest: Option<RunManifest>,
}

impl ExperimentReport {
    pub fn failures(&self) -> impl Iterator<Item = &CellOutcome> {
        self.cells.iter().filter(|c| c.result.is_err())
    }
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::validation("threads", "must be at least 1"));
        }
        builder = builder.num_threads(t);
    }
    builder.build().map_err(|e| Error::Domain(format!("thread pool: {e}")))
}

/// Iterations processed between trace flushes.
const CHUNK: usize = 32;

/// Run one `(K, rho)` cell for every requested policy.
pub fn run_cell(
    pipeline: &Pipeline<'_>,
    cluster_size: usize,
    rho: f64,
    options: &RunOptions,
    pool: &rayon::ThreadPool,
    mut sink: Option<&mut output::CellWriters>,
) -> Result<CellResult> {
    pipeline.check_cell(cluster_size, rho)?;
    let iterations = pipeline.scenario.config.monte_carlo_iterations;
    let traces = options.traces && sink.is_some();
    let mut summaries: Vec<Vec<IterationSummary>> = vec![Vec::with_capacity(iterations); options.policies.len()];
    for chunk_start in (0..iterations).step_by(CHUNK) {
        let range = chunk_start..(chunk_start + CHUNK).min(iterations);
        let results: Vec<Result<(IterationInputs, String, Vec<PolicyIteration>)>> = pool.install(|| {
            range
                .into_par_iter()
                .map(|i| {
                    let inputs = pipeline.prepare(cluster_size, rho, i)?;
                    let digest = inputs.digest();
                    let runs = options
                        .policies
                        .iter()
                        .map(|&p| pipeline.simulate(&inputs, p, traces))
                        .collect::<Result<Vec<_>>>()?;
                    Ok((inputs, digest, runs))
                })
                .collect()
        });
        for r in results {
            let (inputs, digest, runs) = r?;
            for (p, run) in runs.iter().enumerate() {
                let summary = IterationSummary {
                    iteration: inputs.iteration,
                    seed: inputs.seed,
                    digest: digest.clone(),
                    users: inputs.users.len(),
                    clusters: inputs.partitions.iter().map(ClusterPartition::num_clusters).sum(),
                    metrics: run.metrics,
                };
                if let Some(w) = sink.as_deref_mut() {
                    w.write_iteration(p, pipeline, &inputs, run, &summary, traces)?;
                }
                summaries[p].push(summary);
            }
        }
    }
    let policies = options
        .policies
        .iter()
        .zip(summaries)
        .map(|(&policy, iterations)| {
            let metrics: Vec<IterationMetrics> = iterations.iter().map(|i| i.metrics).collect();
            Ok(PolicyResult { policy, report: aggregate(&metrics)?, iterations })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cell = CellResult { cluster_size, density: rho, policies, gsa_gain: None, loss_sign_test_p: None };
    if let (Some(r), Some(g)) = (cell.policy(SchedulerPolicy::Random), cell.policy(SchedulerPolicy::Gsa)) {
        let gain = paired_difference(&g.iteration_efficiencies(), &r.iteration_efficiencies(), 0.95)?;
        let p = sign_test_less(&g.iteration_loss_fractions(), &r.iteration_loss_fractions())?;
        cell.gsa_gain = Some(gain);
        cell.loss_sign_test_p = Some(p);
    }
    Ok(cell)
}

/// Run the configured sweep. A failing cell is recorded and the others
/// proceed.
pub fn run_experiment(scenario: &Scenario, options: &RunOptions) -> Result<ExperimentReport> {
    if options.policies.is_empty() {
        return Err(Error::validation("scheduler", "no scheduling policy selected"));
    }
    let pipeline = Pipeline::new(scenario)?;
    let pool = thread_pool(options.threads)?;
    let sweep = scenario.config.sweep_or_single();
    let mut cells = Vec::new();
    let mut written = Vec::new();
    for (k, rho) in sweep.cells() {
        let result = match &options.out_dir {
            Some(dir) => output::CellWriters::create(dir, k, rho, &options.policies, options.traces).and_then(|mut w| {
                let cell = run_cell(&pipeline, k, rho, options, &pool, Some(&mut w));
                written.extend(w.finish()?);
                cell
            }),
            None => run_cell(&pipeline, k, rho, options, &pool, None),
        };
        if let Err(e) = &result {
            log::error!("cell K={k} rho={rho}: {e}");
        }
        cells.push(CellOutcome { cluster_size: k, density: rho, result: result.map_err(|e| e.to_string()) });
    }
    let mut report = ExperimentReport { cells, manifest: None };
    if let Some(dir) = &options.out_dir {
        report.manifest = Some(output::write_summaries(dir, scenario, &report, written)?);
    }
    Ok(report)
}

pub(crate) fn sector_label(sector: Option<SectorId>) -> String {
    sector.map(|s| s.to_string()).unwrap_or_default()
}

pub(crate) fn db(linear: f64) -> f64 {
    to_db(linear)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use crate::scenario::load_scenario;

    fn small() -> Scenario {
        let config = data::DEFAULT_CONFIG.replace("monte_carlo_iterations = 100", "monte_carlo_iterations = 3");
        load_scenario(&config, data::BEAMS_HEX7, data::MODCOD_DVBS2X).unwrap()
    }

    #[test]
    fn policies_share_inputs() {
        let s = small();
        let p = Pipeline::new(&s).unwrap();
        let a = p.prepare(2, 5e-4, 1).unwrap();
        let b = p.prepare(2, 5e-4, 1).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), p.prepare(2, 5e-4, 2).unwrap().digest());
        // Same users for every cluster size.
        assert_eq!(a.digest(), p.prepare(4, 5e-4, 1).unwrap().digest());
        for (part, sec) in a.partitions.iter().zip(&a.sectorisations) {
            assert_eq!(part.num_clusters(), sec.num_clusters());
        }
    }

    #[test]
    fn simulate_counts_frames() {
        let s = small();
        let p = Pipeline::new(&s).unwrap();
        let inputs = p.prepare(2, 5e-4, 0).unwrap();
        let r = p.simulate(&inputs, SchedulerPolicy::Random, true).unwrap();
        assert_eq!(r.metrics.frames, min_random_frames(&inputs.partitions));
        assert_eq!(r.metrics.rate_count, r.metrics.frames * 7);
        assert_eq!(r.clusters.len(), r.metrics.rate_count);
        let g = p.simulate(&inputs, SchedulerPolicy::Gsa, false).unwrap();
        assert!(g.metrics.frames >= r.metrics.frames);
        assert!(g.clusters.is_empty());
    }

    #[test]
    fn too_few_users_fails_the_cell_only() {
        let mut s = small();
        s.config.sweep = Some(crate::scenario::Sweep { cluster_sizes: vec![1, 100_000], densities: vec![5e-4] });
        let r = run_experiment(&s, &RunOptions::in_memory(&[SchedulerPolicy::Random])).unwrap();
        assert!(r.cells[0].result.is_ok());
        assert!(r.cells[1].result.as_ref().unwrap_err().contains("cannot fill"));
    }
}
