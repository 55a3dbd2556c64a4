//! Uncertain polynomial constraints as linear rows on the lifted state.
//!
//! The constraint `θ x³ + 0.1 v <= 0.5` is affine in `θ`, so enforcing it at
//! both ends of `θ ∈ [0.5, 1.5]` enforces it for every `θ` in between.
//!
//! ```bash
//! cargo run --example vertex_constraints
//! ```

use std::path::Path;

use refgov::lift::{embed_powers, instantiate_vertices, lift_constraints};
use refgov::problem_file::ProblemFile;

fn main() -> refgov::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/scalar_cubic.json");
    let spec = ProblemFile::load(&path)?.to_spec()?;
    let lifted = lift_constraints(&spec)?;
    let vertices = instantiate_vertices(&lifted, &spec.theta_box);
    println!("{} constraints x {} vertices", lifted.n_c(), vertices.len());

    let bases = spec.bases()?;
    let xv = [0.7, 0.2];
    let z = embed_powers(&xv, &bases);
    for vr in &vertices {
        let lhs = &vr.c0 * nalgebra::DVector::from_column_slice(&z);
        println!("theta = {:?}: lhs {:?} <= {:?}", vr.theta, lhs.as_slice(), vr.h.as_slice());
    }
    for theta in [0.5, 0.9, 1.5] {
        let f = spec.constraints[2].eval(&xv, &[theta], &bases);
        println!("direct f_3 at theta = {theta}: {f:.4}");
    }
    Ok(())
}
