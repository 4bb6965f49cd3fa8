//! Scenario inputs: configuration, beam layout, ModCod table, user deployment.

mod config;
mod deploy;
mod layout;
mod modcod;

use std::path::{Path, PathBuf};

pub use config::{
    ChannelOptions, LinkParameters, NormalizationMode, PatternModel, PhaseModel, PrecodingOptions,
    Regularization, ScenarioConfig, SchedulerPolicy, Similarity, Sweep,
};
pub use deploy::{deploy_users, users_per_beam, UserTerminal};
pub use layout::{AntennaParameters, Beam, BeamLayout, BeamRecord};
pub use modcod::{ModCod, ModCodTable};

use crate::{data, Error, Result};

/// A fully validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub layout: BeamLayout,
    pub modcod: ModCodTable,
}

impl Scenario {
    pub fn beams(&self) -> &[Beam] {
        &self.layout.beams
    }

    pub fn num_beams(&self) -> usize {
        self.layout.beams.len()
    }
}

/// Parse and validate the three scenario documents. `N_B` comes from the
/// number of beams in the layout.
pub fn load_scenario(config_source: &str, beam_layout_source: &str, modcod_source: &str) -> Result<Scenario> {
    let config = ScenarioConfig::from_toml_str(config_source)?;
    let layout = BeamLayout::from_json_str(beam_layout_source)?;
    let modcod = ModCodTable::from_csv_str(modcod_source)?;
    Ok(Scenario { config, layout, modcod })
}

/// Prefix for references to data files compiled into the crate.
pub const BUNDLED_PREFIX: &str = "bundled:";

/// Read a document from disk or from the bundled data set (`bundled:<name>`).
/// Relative paths resolve against `base`.
pub fn read_document(reference: &str, base: Option<&Path>) -> Result<String> {
    if let Some(name) = reference.strip_prefix(BUNDLED_PREFIX) {
        return data::bundled(name)
            .map(str::to_owned)
            .ok_or_else(|| Error::validation("bundled data", format!("no bundled document named `{name}`")));
    }
    let mut path = PathBuf::from(reference);
    if path.is_relative() {
        if let Some(base) = base {
            path = base.join(path);
        }
    }
    std::fs::read_to_string(&path).map_err(|e| Error::io(path, e))
}

/// Load a scenario from a config file. Layout and ModCod come from the
/// overrides when given, otherwise from the config's `beam_layout` / `modcod`
/// keys (ModCod defaults to the bundled DVB-S2X table).
pub fn load_scenario_files(config_path: &Path, beams: Option<&str>, modcod: Option<&str>) -> Result<Scenario> {
    let config_text = std::fs::read_to_string(config_path).map_err(|e| Error::io(config_path, e))?;
    let config = ScenarioConfig::from_toml_str(&config_text)?;
    let base = config_path.parent();
    let beams_ref = beams
        .map(str::to_owned)
        .or_else(|| config.beam_layout.clone())
        .ok_or_else(|| Error::validation("beam_layout", "no beam layout given (use --beams or the `beam_layout` key)"))?;
    let modcod_ref = modcod
        .map(str::to_owned)
        .or_else(|| config.modcod.clone())
        .unwrap_or_else(|| format!("{BUNDLED_PREFIX}dvbs2x"));
    let layout = BeamLayout::from_json_str(&read_document(&beams_ref, base)?)?;
    let modcod = ModCodTable::from_csv_str(&read_document(&modcod_ref, base)?)?;
    Ok(Scenario { config, layout, modcod })
}
