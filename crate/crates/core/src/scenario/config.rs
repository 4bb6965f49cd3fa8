//! Simulation configuration (TOML).
//!
//! ```toml
//! master_seed = 1
//! monte_carlo_iterations = 100
//! cluster_size = 1
//! user_density = 2.5e-3          # users/km²
//! scheduler_policy = "gsa"       # random | gsa
//! clustering_similarity = "channel"
//! beam_layout = "bundled:hex19"
//!
//! [link]
//! carrier_frequency = 19.5e9     # Hz
//! rx_antenna_diameter = 0.6      # m
//! rx_antenna_efficiency = 0.6
//! antenna_losses = 2.55          # dB
//! satellite_longitude = 30.0     # degrees
//! satellite_total_power = 90.0   # W
//! noise_temperature = 235.0      # K, every beam
//! user_bandwidth = 50e6          # Hz
//!
//! [sectors]
//! radii = [0.2, 0.6, 0.8, 1.0]
//! angles = [1.5707963267948966, 3.141592653589793, 4.71238898038469, 6.283185307179586]
//! ```

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::geometry::SectorLayout;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerPolicy {
    Random,
    Gsa,
}

impl SchedulerPolicy {
    pub fn name(self) -> &'static str {
        match self {
            SchedulerPolicy::Random => "random",
            SchedulerPolicy::Gsa => "gsa",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Similarity {
    /// Tangent-plane position, km.
    Euclidean,
    /// Real embedding of the noise-normalized channel vector.
    Channel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationMode {
    SumPower,
    PerAntenna,
    None,
}

/// Regularization factor of the MMSE precoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regularization {
    /// `α_b = P_Z,b / P_TX` with the physical noise power in W.
    NoiseOverPower,
    /// `α_b = 1 / P_TX`, consistent with unit noise after normalization.
    InversePower,
}

/// Which index the random phase term of a channel coefficient follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseModel {
    /// One phase per transmitting antenna, shared by all users.
    PerAntenna,
    /// One phase per receiving beam.
    PerBeam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternModel {
    Bessel,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkParameters {
    /// Hz.
    pub carrier_frequency: f64,
    /// m.
    pub rx_antenna_diameter: f64,
    pub rx_antenna_efficiency: f64,
    /// dB, applied as a loss.
    pub antenna_losses: f64,
    /// Degrees east.
    pub satellite_longitude: f64,
    /// W, split evenly across beams unless `per_beam_power` is given.
    pub satellite_total_power: f64,
    /// W per beam.
    #[serde(default)]
    pub per_beam_power: Option<f64>,
    /// K, applied to every beam.
    pub noise_temperature: f64,
    /// Hz.
    pub user_bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SectorSection {
    radii: Vec<f64>,
    angles: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrecodingOptions {
    pub normalization: NormalizationMode,
    pub regularization: Regularization,
}

impl Default for PrecodingOptions {
    fn default() -> Self {
        Self {
            normalization: NormalizationMode::SumPower,
            regularization: Regularization::NoiseOverPower,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelOptions {
    pub phase_model: PhaseModel,
    pub pattern: PatternModel,
}

impl Default for ChannelOptions {
    fn default() -> Self {
        Self {
            phase_model: PhaseModel::PerAntenna,
            pattern: PatternModel::Bessel,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SchedulingSection {
    random_frames: Option<usize>,
}

/// Grid of `(K, ρ)` cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub cluster_sizes: Vec<usize>,
    pub densities: Vec<f64>,
}

impl Sweep {
    pub fn single(cluster_size: usize, density: f64) -> Self {
        Self {
            cluster_sizes: vec![cluster_size],
            densities: vec![density],
        }
    }

    /// Cells in run order: density-major, then cluster size.
    pub fn cells(&self) -> Vec<(usize, f64)> {
        self.densities
            .iter()
            .flat_map(|&rho| self.cluster_sizes.iter().map(move |&k| (k, rho)))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    master_seed: u64,
    monte_carlo_iterations: usize,
    cluster_size: usize,
    user_density: f64,
    #[serde(default = "default_policy")]
    scheduler_policy: SchedulerPolicy,
    #[serde(default = "default_similarity")]
    clustering_similarity: Similarity,
    #[serde(default)]
    beam_layout: Option<String>,
    #[serde(default)]
    modcod: Option<String>,
    link: LinkParameters,
    sectors: SectorSection,
    #[serde(default)]
    precoding: PrecodingOptions,
    #[serde(default)]
    channel: ChannelOptions,
    #[serde(default)]
    scheduling: SchedulingSection,
    #[serde(default)]
    sweep: Option<Sweep>,
}

fn default_policy() -> SchedulerPolicy {
    SchedulerPolicy::Gsa
}

fn default_similarity() -> Similarity {
    Similarity::Channel
}

/// Validated simulation configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub master_seed: u64,
    pub monte_carlo_iterations: usize,
    pub cluster_size: usize,
    /// users/km².
    pub user_density: f64,
    pub scheduler_policy: SchedulerPolicy,
    pub clustering_similarity: Similarity,
    pub beam_layout: Option<String>,
    pub modcod: Option<String>,
    pub link: LinkParameters,
    /// Starts with the beam-centre radius, ends at 1.
    pub sector_radii: Vec<f64>,
    /// Radians, ascending to 2π.
    pub sector_angles: Vec<f64>,
    pub precoding: PrecodingOptions,
    pub channel: ChannelOptions,
    /// Random-scheduler frames per iteration; `None` means `max_b N_K`.
    pub random_frames: Option<usize>,
    pub sweep: Option<Sweep>,
}

/// Extract the key named in a serde message such as "missing field `x`".
fn field_from_message(message: &str) -> String {
    message
        .split('`')
        .nth(1)
        .map(str::to_owned)
        .unwrap_or_else(|| "document".to_owned())
}

fn positive(context: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(context, format!("must be a positive finite number, got {value}")))
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(source: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(source).map_err(|e| {
            let message = e.message().to_owned();
            Error::parse("scenario config", field_from_message(&message), message)
        })?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let mut angles = raw.sectors.angles;
        // A config written with a truncated decimal 2π still closes the circle.
        if let Some(last) = angles.last_mut() {
            if (*last - TAU).abs() <= 1e-9 {
                *last = TAU;
            }
        }
        let config = Self {
            master_seed: raw.master_seed,
            monte_carlo_iterations: raw.monte_carlo_iterations,
            cluster_size: raw.cluster_size,
            user_density: raw.user_density,
            scheduler_policy: raw.scheduler_policy,
            clustering_similarity: raw.clustering_similarity,
            beam_layout: raw.beam_layout,
            modcod: raw.modcod,
            link: raw.link,
            sector_radii: raw.sectors.radii,
            sector_angles: angles,
            precoding: raw.precoding,
            channel: raw.channel,
            random_frames: raw.scheduling.random_frames,
            sweep: raw.sweep,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cluster_size == 0 {
            return Err(Error::validation("cluster_size", "must be at least 1"));
        }
        if self.monte_carlo_iterations == 0 {
            return Err(Error::validation("monte_carlo_iterations", "must be at least 1"));
        }
        positive("user_density", self.user_density)?;
        let link = &self.link;
        positive("link.carrier_frequency", link.carrier_frequency)?;
        positive("link.rx_antenna_diameter", link.rx_antenna_diameter)?;
        positive("link.rx_antenna_efficiency", link.rx_antenna_efficiency)?;
        if link.rx_antenna_efficiency > 1.0 {
            return Err(Error::validation("link.rx_antenna_efficiency", "must lie in (0, 1]"));
        }
        if !link.antenna_losses.is_finite() || link.antenna_losses < 0.0 {
            return Err(Error::validation("link.antenna_losses", "must be a non-negative number of dB"));
        }
        if !link.satellite_longitude.is_finite() || link.satellite_longitude.abs() > 180.0 {
            return Err(Error::validation("link.satellite_longitude", "must lie in [-180, 180] degrees"));
        }
        positive("link.satellite_total_power", link.satellite_total_power)?;
        if let Some(p) = link.per_beam_power {
            positive("link.per_beam_power", p)?;
        }
        positive("link.noise_temperature", link.noise_temperature)?;
        positive("link.user_bandwidth", link.user_bandwidth)?;
        self.sector_layout()?;
        if let Some(sweep) = &self.sweep {
            if sweep.cluster_sizes.is_empty() || sweep.densities.is_empty() {
                return Err(Error::validation("sweep", "needs at least one cluster size and one density"));
            }
            if sweep.cluster_sizes.contains(&0) {
                return Err(Error::validation("sweep.cluster_sizes", "must be at least 1"));
            }
            for &rho in &sweep.densities {
                positive("sweep.densities", rho)?;
            }
        }
        Ok(())
    }

    pub fn sector_layout(&self) -> Result<SectorLayout> {
        SectorLayout::new(&self.sector_radii, &self.sector_angles)
    }

    /// The configured sweep, or the single `(cluster_size, user_density)` cell.
    pub fn sweep_or_single(&self) -> Sweep {
        self.sweep
            .clone()
            .unwrap_or_else(|| Sweep::single(self.cluster_size, self.user_density))
    }

    /// Per-beam transmit power `P_TX` in W.
    pub fn tx_power(&self, num_beams: usize) -> f64 {
        self.link
            .per_beam_power
            .unwrap_or(self.link.satellite_total_power / num_beams as f64)
    }
}
