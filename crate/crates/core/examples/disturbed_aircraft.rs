//! The aircraft with an additive disturbance on the angle of attack.
//!
//! With `|w| <= 0.05 rad` the stall band cannot be kept at all: the summed
//! impulse response of `α` to `w` is about 15, far more than the 0.2° margin
//! below zero. The run below shows that failure and then uses a 1e-4 rad bound.
//!
//! ```bash
//! cargo run --release --example disturbed_aircraft
//! ```

use refgov::governor::{init_reference, GovernorState, ReferenceSearch};
use refgov::pipeline::{synthesize, SynthesisOptions};
use refgov::sim::{build_aircraft_problem, simulate, AircraftPreset, DisturbanceKind, DisturbanceSource};

fn main() -> refgov::Result<()> {
    let wide = build_aircraft_problem(&AircraftPreset::default(), true)?;
    match synthesize(&wide, &SynthesisOptions::default()) {
        Ok(_) => println!("|w| <= 0.05: synthesized"),
        Err(e) => println!("|w| <= 0.05: {e}"),
    }

    let preset = AircraftPreset {
        beta: 0.99,
        w_bound: 1e-4,
        ..AircraftPreset::default()
    };
    let spec = build_aircraft_problem(&preset, true)?;
    let s = synthesize(&spec, &SynthesisOptions::default())?;
    println!(
        "|w| <= 1e-4: linear t* = {}, robust {} iterations, {} rows",
        s.linear.t_star, s.robust.iterations, s.robust.rows_after
    );
    let x0 = [14f64.to_radians(), 0.0];
    let bases = spec.bases()?;
    let set = s.robust.polytope;
    let v0 = init_reference(&x0, &set, &bases, &ReferenceSearch::default())?;
    for seed in 0..3 {
        let mut gov = GovernorState::new(set.clone(), bases.clone(), spec.beta, 2, v0.clone())?;
        let mut w = DisturbanceSource::new(seed, spec.w_box.clone(), DisturbanceKind::UniformRandom)?;
        let t = simulate(&spec, Some(&mut gov), Some(&set), &x0, 600, &mut w)?;
        println!(
            "seed {seed}: violation {:?}, audit all true: {}",
            t.first_violation(&spec, 1e-6),
            t.audit.iter().all(|a| *a == Some(true))
        );
    }
    Ok(())
}
