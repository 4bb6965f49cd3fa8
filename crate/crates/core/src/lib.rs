//! Monte Carlo simulator for the forward link of a full-frequency-reuse
//! multi-beam GEO satellite.
//!
//! The pipeline for one Monte Carlo iteration is:
//!
//! 1. deploy fixed users uniformly inside each beam ([`scenario::deploy_users`]),
//! 2. synthesize noise-normalized channel vectors ([`channel`]),
//! 3. partition each beam's users into size-`K` clusters with MaxDist ([`clustering`]),
//! 4. assign cluster barycentres to scheduling sectors ([`geometry`]),
//! 5. schedule one cluster per beam per frame, randomly or geographically ([`scheduling`]),
//! 6. build the multicast MMSE precoder of each frame and evaluate SINRs ([`precoding`]),
//! 7. map SINRs to DVB-S2X spectral efficiencies and aggregate ([`link_adaptation`]).
//!
//! [`engine`] runs that pipeline over a `(K, rho)` sweep for both scheduling
//! policies and writes the tabular artifacts.

pub mod channel;
pub mod clustering;
pub mod data;
pub mod engine;
mod error;
pub mod geodesy;
pub mod geometry;
pub mod layouts;
pub mod link_adaptation;
pub mod precoding;
pub mod scenario;
pub mod scheduling;
pub mod seeds;

pub use error::{Error, Result};
pub use num_complex::Complex64;
