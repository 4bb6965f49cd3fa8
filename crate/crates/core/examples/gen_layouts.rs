//! Regenerates the bundled beam layouts under `data/`.
//!
//! cargo run -p beamsched --example gen_layouts

use std::path::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    for (file, params) in beamsched::layouts::bundled_params() {
        let layout = beamsched::layouts::hex_layout(&params)?;
        std::fs::write(dir.join(file), layout.to_json_string() + "\n")?;
        println!("{file}: {} beams, G_max {} dBi, theta_3dB {} deg", layout.beams.len(), layout.antenna.max_gain_dbi, layout.antenna.theta_3db_deg);
    }
    Ok(())
}
