//! Zero-order-hold discretization of the aircraft pitch loop.
//!
//! ```bash
//! cargo run --example aircraft_discretization
//! ```

use refgov::sim::{c2d, AircraftPreset};

fn main() -> refgov::Result<()> {
    let preset = AircraftPreset::default();
    let plant = preset.closed_loop()?;
    println!("F = {:.4}G = {:.4}", plant.f, plant.g);
    let (a, b) = c2d(&plant);
    println!("A = {a:.4}B = {b:.4}");
    Ok(())
}
