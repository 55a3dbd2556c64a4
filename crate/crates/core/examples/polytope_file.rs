//! Writing and reading the plain-text polytope format.
//!
//! ```bash
//! cargo run --example polytope_file
//! ```

use std::path::Path;

use refgov::pipeline::{synthesize, SynthesisOptions};
use refgov::polytope_io;
use refgov::problem_file::ProblemFile;

fn main() -> refgov::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/oscillator_quadratic.json");
    let spec = ProblemFile::load(&path)?.to_spec()?;
    let set = synthesize(&spec, &SynthesisOptions::default())?.robust.polytope;

    let text = polytope_io::to_string(&set);
    for line in text.lines().take(6) {
        println!("{line}");
    }
    println!("...");
    let back = polytope_io::read_polytope(text.as_bytes())?;
    println!("round trip is exact: {}", back == set);
    Ok(())
}
