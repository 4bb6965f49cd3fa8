//! Forward-link channel synthesis.
//!
//! The coefficient between user `i` of beam `b` and feed `j` is
//!
//! ```text
//! h_bj = sqrt(G_R · G_loss · G_bj) / (4π d / λ · sqrt(P_Z)) · exp(-j 2π d / λ) · exp(-j θ)
//! ```
//!
//! with `P_Z = κ T B`. Dividing by the noise amplitude makes the receiver
//! noise unit-variance, so downstream SINRs use noise power 1.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Debug;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::geodesy::{angle_between, geo_satellite_ecef_km};
use crate::scenario::{AntennaParameters, BeamLayout, PatternModel, PhaseModel, ScenarioConfig, UserTerminal};
use crate::seeds;
use crate::{Error, Result};

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Pattern floor relative to the peak (−100 dB).
const PATTERN_FLOOR: f64 = 1e-10;
const BESSEL_HALF_POWER_ARGUMENT: f64 = 2.07123;

/// Gain of one feed as a function of the off-axis angle from its boresight.
pub trait AntennaPattern: Debug + Send + Sync {
    /// Linear gain at `off_axis` radians.
    fn gain(&self, off_axis: f64) -> f64;
    fn max_gain(&self) -> f64;
}

/// Tapered circular aperture:
/// `G = G_max · [J1(u)/(2u) + 36·J3(u)/u³]²`, `u = 2.07123 · sin θ / sin θ_3dB`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselPattern {
    max_gain: f64,
    theta_3db: f64,
}

impl BesselPattern {
    pub fn new(max_gain: f64, theta_3db: f64) -> Self {
        Self { max_gain, theta_3db }
    }

    pub fn from_parameters(p: &AntennaParameters) -> Self {
        Self::new(10f64.powf(p.max_gain_dbi / 10.0), p.theta_3db_deg.to_radians())
    }

    /// Bracketed term of the pattern; tends to 1 as `u → 0`.
    pub fn shape(u: f64) -> f64 {
        if u.abs() < 1e-6 {
            // J1(u)/(2u) + 36 J3(u)/u³ = 1 - u²/8 - 3u²/64 + O(u⁴)
            return 1.0 - 11.0 * u * u / 64.0;
        }
        libm::j1(u) / (2.0 * u) + 36.0 * libm::jn(3, u) / (u * u * u)
    }
}

impl AntennaPattern for BesselPattern {
    fn gain(&self, off_axis: f64) -> f64 {
        let floor = self.max_gain * PATTERN_FLOOR;
        if off_axis.abs() >= FRAC_PI_2 {
            return floor;
        }
        let u = BESSEL_HALF_POWER_ARGUMENT * off_axis.sin() / self.theta_3db.sin();
        (self.max_gain * Self::shape(u).powi(2)).max(floor)
    }

    fn max_gain(&self) -> f64 {
        self.max_gain
    }
}

/// Gaussian main lobe `G_max · 2^-(θ/θ_3dB)²`, without sidelobes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPattern {
    max_gain: f64,
    theta_3db: f64,
}

impl GaussianPattern {
    pub fn new(max_gain: f64, theta_3db: f64) -> Self {
        Self { max_gain, theta_3db }
    }
}

impl AntennaPattern for GaussianPattern {
    fn gain(&self, off_axis: f64) -> f64 {
        let floor = self.max_gain * PATTERN_FLOOR;
        if off_axis.abs() >= FRAC_PI_2 {
            return floor;
        }
        (self.max_gain * 0.5f64.powf((off_axis / self.theta_3db).powi(2))).max(floor)
    }

    fn max_gain(&self) -> f64 {
        self.max_gain
    }
}

/// Receive-side constants of the link, all linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub wavelength_m: f64,
    /// `η (π D / λ)²`.
    pub rx_gain: f64,
    /// `10^(-losses/10)`.
    pub loss_factor: f64,
    /// `κ T B`, W.
    pub noise_power_w: f64,
    /// Per-beam transmit power `P_TX`, W.
    pub tx_power_w: f64,
}

impl LinkBudget {
    pub fn from_config(config: &ScenarioConfig, num_beams: usize) -> Result<Self> {
        let link = &config.link;
        let wavelength_m = SPEED_OF_LIGHT / link.carrier_frequency;
        let budget = Self {
            wavelength_m,
            rx_gain: link.rx_antenna_efficiency * (PI * link.rx_antenna_diameter / wavelength_m).powi(2),
            loss_factor: 10f64.powf(-link.antenna_losses / 10.0),
            noise_power_w: BOLTZMANN * link.noise_temperature * link.user_bandwidth,
            tx_power_w: config.tx_power(num_beams),
        };
        budget.validate()?;
        Ok(budget)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("wavelength", self.wavelength_m),
            ("rx gain", self.rx_gain),
            ("antenna losses", self.loss_factor),
            ("noise power", self.noise_power_w),
            ("tx power", self.tx_power_w),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation("link budget", format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// One coefficient from its parts: feed gain (linear), slant range (m)
    /// and the random phase (rad).
    pub fn coefficient(&self, feed_gain: f64, distance_m: f64, phase: f64) -> Complex64 {
        let wavelengths = distance_m / self.wavelength_m;
        let magnitude =
            (self.rx_gain * self.loss_factor * feed_gain).sqrt() / (4.0 * PI * wavelengths * self.noise_power_w.sqrt());
        // Only the fractional part of d/λ matters and keeps full precision.
        let propagation = TAU * wavelengths.fract();
        Complex64::from_polar(magnitude, -(propagation + phase))
    }
}

/// A user's noise-normalized channel towards every feed.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub user_id: usize,
    pub coefficients: Vec<Complex64>,
}

/// Channel synthesis for one layout and configuration.
#[derive(Debug)]
pub struct ChannelModel {
    satellite_ecef_km: [f64; 3],
    boresights_ecef_km: Vec<[f64; 3]>,
    pattern: Box<dyn AntennaPattern>,
    link: LinkBudget,
    phase_model: PhaseModel,
}

impl ChannelModel {
    pub fn new(config: &ScenarioConfig, layout: &BeamLayout) -> Result<Self> {
        let pattern: Box<dyn AntennaPattern> = match config.channel.pattern {
            PatternModel::Bessel => Box::new(BesselPattern::from_parameters(&layout.antenna)),
            PatternModel::Gaussian => {
                let b = BesselPattern::from_parameters(&layout.antenna);
                Box::new(GaussianPattern::new(b.max_gain, b.theta_3db))
            }
        };
        Ok(Self::with_pattern(
            geo_satellite_ecef_km(config.link.satellite_longitude),
            layout.beams.iter().map(|b| b.center().ecef_km()).collect(),
            pattern,
            LinkBudget::from_config(config, layout.beams.len())?,
            config.channel.phase_model,
        ))
    }

    pub fn with_pattern(
        satellite_ecef_km: [f64; 3],
        boresights_ecef_km: Vec<[f64; 3]>,
        pattern: Box<dyn AntennaPattern>,
        link: LinkBudget,
        phase_model: PhaseModel,
    ) -> Self {
        Self {
            satellite_ecef_km,
            boresights_ecef_km,
            pattern,
            link,
            phase_model,
        }
    }

    pub fn link(&self) -> &LinkBudget {
        &self.link
    }

    pub fn num_feeds(&self) -> usize {
        self.boresights_ecef_km.len()
    }

    /// Off-axis angle of `user` from the boresight of feed `feed`, rad.
    pub fn off_axis_angle(&self, feed: usize, user: &UserTerminal) -> f64 {
        angle_between(self.satellite_ecef_km, self.boresights_ecef_km[feed], user.position.ecef_km())
    }

    /// `G_bj` for `user` and feed `feed`, linear.
    pub fn antenna_gain(&self, feed: usize, user: &UserTerminal) -> f64 {
        self.pattern.gain(self.off_axis_angle(feed, user))
    }

    /// Draw the random phases of one Monte Carlo iteration, `U[0, 2π)`.
    pub fn draw_phases(&self, seed: u64) -> Vec<f64> {
        let mut rng = seeds::rng(seed);
        (0..self.num_feeds()).map(|_| rng.random_range(0.0..TAU)).collect()
    }

    pub fn channel_coefficient(&self, user: &UserTerminal, feed: usize, phases: &[f64]) -> Complex64 {
        let phase = match self.phase_model {
            PhaseModel::PerAntenna => phases[feed],
            PhaseModel::PerBeam => phases[user.beam_index],
        };
        self.link.coefficient(self.antenna_gain(feed, user), user.slant_range_m, phase)
    }

    pub fn channel_vector(&self, user: &UserTerminal, phases: &[f64]) -> ChannelVector {
        ChannelVector {
            user_id: user.user_id,
            coefficients: (0..self.num_feeds()).map(|j| self.channel_coefficient(user, j, phases)).collect(),
        }
    }
}

/// Element-wise mean of the members' channel vectors.
pub fn equivalent_cluster_vector(members: &[&[Complex64]]) -> Result<Vec<Complex64>> {
    let first = members.first().ok_or_else(|| Error::Domain("cluster has no members".into()))?;
    let n = first.len();
    if members.iter().any(|m| m.len() != n) {
        return Err(Error::Domain("cluster members have channel vectors of different lengths".into()));
    }
    let mut sum = vec![Complex64::new(0.0, 0.0); n];
    for m in members {
        for (s, h) in sum.iter_mut().zip(m.iter()) {
            *s += h;
        }
    }
    let k = members.len() as f64;
    Ok(sum.into_iter().map(|s| s / k).collect())
}

/// The per-frame channel matrix: row `b` is the equivalent vector of the
/// cluster scheduled in beam `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameChannelMatrix {
    pub matrix: DMatrix<Complex64>,
}

impl FrameChannelMatrix {
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Assembly(format!("need {n} rows of length {n}")));
        }
        if rows.iter().flatten().any(|h| !h.re.is_finite() || !h.im.is_finite()) {
            return Err(Error::Assembly("non-finite channel coefficient".into()));
        }
        Ok(Self {
            matrix: DMatrix::from_fn(n, n, |i, j| rows[i][j]),
        })
    }

    pub fn num_beams(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Build `H̃` from one member list per beam (in beam order) and the channel
/// vectors indexed by user id.
pub fn assemble_frame_matrix(selected: &[&[usize]], channels: &[ChannelVector]) -> Result<FrameChannelMatrix> {
    let n_beams = channels.first().map(|c| c.coefficients.len()).unwrap_or(0);
    if selected.len() != n_beams {
        return Err(Error::Assembly(format!(
            "{} clusters selected for {n_beams} beams",
            selected.len()
        )));
    }
    let mut rows = Vec::with_capacity(n_beams);
    for (b, members) in selected.iter().enumerate() {
        let vectors = members
            .iter()
            .map(|&u| {
                channels
                    .get(u)
                    .map(|c| c.coefficients.as_slice())
                    .ok_or_else(|| Error::Assembly(format!("beam {}: unknown user {u}", b + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        let row = equivalent_cluster_vector(&vectors).map_err(|_| Error::Assembly(format!("beam {}: empty cluster", b + 1)))?;
        rows.push(row);
    }
    FrameChannelMatrix::from_rows(&rows)
}
