//! Initial references tabulated over a grid of initial states.
//!
//! ```bash
//! cargo run --release --example grid_init
//! ```

use std::path::Path;

use refgov::governor::{init_reference, ReferenceSearch};
use refgov::pipeline::{synthesize, SynthesisOptions};
use refgov::problem_file::ProblemFile;

fn main() -> refgov::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/scalar_cubic.json");
    let spec = ProblemFile::load(&path)?.to_spec()?;
    let set = synthesize(&spec, &SynthesisOptions::default())?.robust.polytope;
    let bases = spec.bases()?;
    for i in 0..=8 {
        let x = -0.8 + 0.2 * i as f64;
        match init_reference(&[x], &set, &bases, &ReferenceSearch::default()) {
            Ok(v) => println!("x0 = {x:5.2}: v0 = {:8.5}", v[0]),
            Err(_) => println!("x0 = {x:5.2}: no admissible reference"),
        }
    }
    Ok(())
}
