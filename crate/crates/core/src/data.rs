//! Data files compiled into the crate.

pub const MODCOD_DVBS2X: &str = include_str!("../data/modcod_dvbs2x.csv");
pub const BEAMS_HEX7: &str = include_str!("../data/beams_hex7.json");
pub const BEAMS_HEX19: &str = include_str!("../data/beams_hex19.json");
pub const BEAMS_EUROPE71: &str = include_str!("../data/beams_europe71.json");
/// Table-driven defaults on the 19-beam layout.
pub const DEFAULT_CONFIG: &str = include_str!("../data/default.toml");

/// Look up a bundled document by short name (`dvbs2x`, `hex7`, `hex19`,
/// `europe71`, `default`).
pub fn bundled(name: &str) -> Option<&'static str> {
    Some(match name {
        "dvbs2x" => MODCOD_DVBS2X,
        "hex7" => BEAMS_HEX7,
        "hex19" => BEAMS_HEX19,
        "europe71" => BEAMS_EUROPE71,
        "default" => DEFAULT_CONFIG,
        _ => return None,
    })
}
