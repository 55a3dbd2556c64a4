//! Lifting a linear loop to the dynamics of its monomials.
//!
//! Propagates one state directly and through the extended system and compares
//! the stacked powers at every step.
//!
//! ```bash
//! cargo run --example lifted_dynamics
//! ```

use std::path::Path;

use refgov::lift::ExtendedSystem;
use refgov::problem_file::ProblemFile;

fn main() -> refgov::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/scalar_cubic_disturbed.json");
    let spec = ProblemFile::load(&path)?.to_spec()?;
    let ext = ExtendedSystem::from_spec(&spec)?;
    println!("x_v has {} entries; X_v has {}; D has {}", ext.n_xv(), ext.dim(), ext.disturbance_dim());
    for t in &ext.layout {
        println!("  D block x_v^{} w^{}: offset {}, {} entries", t.x_degree, t.w_degree, t.offset, t.len);
    }

    let (a, b, bw) = (spec.a[(0, 0)], spec.b[(0, 0)], spec.b_w[(0, 0)]);
    let mut x = 0.4;
    let mut v = 0.7;
    let mut lifted = ext.embed(&[x, v]);
    let ws = [0.01, -0.004, 0.0, 0.008, -0.01];
    for (k, &w) in ws.iter().enumerate() {
        let d = ext.disturbance_products(&[x, v], &[w]);
        lifted = ext.step(&lifted, &d);
        x = a * x + b * v + bw * w;
        v *= spec.beta;
        let direct = ext.embed(&[x, v]);
        let err = lifted
            .iter()
            .zip(&direct)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        println!("step {}: max |lifted - direct| = {err:.2e}", k + 1);
    }
    Ok(())
}
