//! Loading a JSON problem, exporting a preset, and what a bad file reports.
//!
//! ```bash
//! cargo run --example problem_file
//! ```

use std::path::Path;

use refgov::problem_file::ProblemFile;
use refgov::sim::{build_aircraft_problem, AircraftPreset};

fn main() -> refgov::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/oscillator_quadratic.json");
    let spec = ProblemFile::load(&path)?.to_spec()?;
    println!(
        "loaded: n_x = {}, n_v = {}, p = {}, {} constraints, {} parameters",
        spec.n_x(),
        spec.n_v(),
        spec.p,
        spec.constraints.len(),
        spec.n_theta()
    );

    let aircraft = ProblemFile::from_spec(&build_aircraft_problem(&AircraftPreset::default(), false)?)?;
    let json = aircraft.to_json();
    println!("aircraft problem as JSON: {} bytes, {} lines", json.len(), json.lines().count());

    let bad = r#"{"A": [[0.5]], "B": [[1.0]], "beta": 0.9, "p": 1,
        "constraints": [{"h": 1.0, "terms": [{"theta_index": null, "exponents": [0, 0], "coeff": 2.0}]}]}"#;
    match ProblemFile::from_json(bad)?.to_spec() {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
