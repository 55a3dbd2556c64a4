//! Elevator force along a governed run for many lift coefficients.
//!
//! ```bash
//! cargo run --release --example theta_sweep
//! ```

use refgov::governor::{init_reference, GovernorState, ReferenceSearch};
use refgov::pipeline::{synthesize, SynthesisOptions};
use refgov::sim::{build_aircraft_problem, default_theta_samples, simulate, theta_sweep, AircraftPreset, DisturbanceSource};

fn main() -> refgov::Result<()> {
    let preset = AircraftPreset {
        beta: 0.99,
        ..AircraftPreset::default()
    };
    let spec = build_aircraft_problem(&preset, false)?;
    let set = synthesize(&spec, &SynthesisOptions::default())?.robust.polytope;
    let x0 = [14f64.to_radians(), 0.0];
    let bases = spec.bases()?;
    let v0 = init_reference(&x0, &set, &bases, &ReferenceSearch::default())?;
    let mut gov = GovernorState::new(set, bases, spec.beta, 2, v0)?;
    let run = simulate(&spec, Some(&mut gov), None, &x0, 300, &mut DisturbanceSource::zero(1))?;

    // 8 vertices plus a 2 x 2 x 2 interior grid.
    let samples = default_theta_samples(&spec.theta_box, 2);
    let sweep = theta_sweep(&spec, &run, &samples)?;
    for (theta, m) in sweep.samples.iter().zip(&sweep.max_abs) {
        println!("l0 = {:9.0}, l1 = {:9.0}, l3 = {:9.0}: max |u| = {:9.1} N", theta[0], theta[1], theta[2], m[2]);
    }
    Ok(())
}
