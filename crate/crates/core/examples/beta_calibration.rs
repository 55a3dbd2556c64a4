//! Set sizes of the aircraft example for several decay rates.
//!
//! ```bash
//! cargo run --release --example beta_calibration
//! ```

use refgov::pipeline::{calibrate_beta, SynthesisOptions, CALIBRATION_BETAS, NOMINAL_TARGETS};
use refgov::sim::{build_aircraft_problem, AircraftPreset};

fn main() -> refgov::Result<()> {
    let cal = calibrate_beta(&CALIBRATION_BETAS, &NOMINAL_TARGETS, &SynthesisOptions::default(), |beta| {
        build_aircraft_problem(&AircraftPreset { beta, ..AircraftPreset::default() }, false)
    })?;
    for r in &cal.rows {
        println!("beta {:.2}: {:?} (within targets: {})", r.beta, r.counts, r.matches);
    }
    println!("matching beta {:?}, nearest {}", cal.matching_beta, cal.nearest_beta);
    Ok(())
}
