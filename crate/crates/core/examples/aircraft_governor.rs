//! Governed and ungoverned aircraft runs from a 14° angle of attack.
//!
//! The reference may decay no faster than `β` per step, so `β` has to leave
//! the loop time to bring `α` down without saturating the elevator.
//!
//! ```bash
//! cargo run --release --example aircraft_governor
//! ```

use refgov::governor::{init_reference, GovernorState, ReferenceSearch};
use refgov::pipeline::{synthesize, SynthesisOptions};
use refgov::sim::{build_aircraft_problem, simulate, AircraftPreset, DisturbanceSource};

fn main() -> refgov::Result<()> {
    let preset = AircraftPreset {
        beta: 0.99,
        ..AircraftPreset::default()
    };
    let spec = build_aircraft_problem(&preset, false)?;
    let s = synthesize(&spec, &SynthesisOptions::default())?;
    println!(
        "admissible set: {} rows after {} iterations",
        s.robust.rows_after, s.robust.iterations
    );

    let x0 = [14f64.to_radians(), 0.0];
    let bases = spec.bases()?;
    let set = s.robust.polytope;
    let v0 = init_reference(&x0, &set, &bases, &ReferenceSearch::default())?;
    let mut gov = GovernorState::new(set.clone(), bases, spec.beta, 2, v0.clone())?;
    let governed = simulate(&spec, Some(&mut gov), Some(&set), &x0, 600, &mut DisturbanceSource::zero(1))?;
    let free = simulate(&spec, None, None, &x0, 600, &mut DisturbanceSource::zero(1))?;

    let u_max = |t: &refgov::sim::Trajectory| {
        t.constraint_outputs
            .iter()
            .flat_map(|per| per.iter().map(|f| f[2].abs()))
            .fold(0.0, f64::max)
    };
    println!("v(0) = {:.5} rad", v0[0]);
    println!("governed:   max |u| = {:.1} N, violation {:?}", u_max(&governed), governed.first_violation(&spec, 1e-6));
    println!("ungoverned: max |u| = {:.1} N, violation {:?}", u_max(&free), free.first_violation(&spec, 1e-6));
    for k in (0..=100).step_by(20) {
        println!(
            "  k = {k:3}: alpha = {:7.3} deg, v = {:7.4} rad",
            governed.states[k][0].to_degrees(),
            governed.refs[k][0]
        );
    }
    Ok(())
}
