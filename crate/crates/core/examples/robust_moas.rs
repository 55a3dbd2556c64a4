//! Two-stage synthesis on a small disturbed problem, followed by a check that
//! sampled members stay inside under random lifted disturbances.
//!
//! ```bash
//! cargo run --release --example robust_moas
//! ```

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refgov::moas::contains;
use refgov::pipeline::{synthesize, SynthesisOptions};
use refgov::problem_file::ProblemFile;

fn main() -> refgov::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/scalar_cubic_disturbed.json");
    let spec = ProblemFile::load(&path)?.to_spec()?;
    let s = synthesize(&spec, &SynthesisOptions::default())?;
    println!("state box {:?} .. {:?}", s.state_box.lower, s.state_box.upper);
    println!("linear stage: t* = {}, {} rows", s.linear.t_star, s.linear.rows_after);
    println!(
        "robust stage: {} iterations, {} rows ({} before pruning), eps = {}",
        s.robust.iterations, s.robust.rows_after, s.robust.rows_before, s.eps
    );

    let poly = &s.robust.polytope;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut members = 0;
    let mut escapes = 0;
    for _ in 0..2000 {
        let xv = [rng.random_range(-1.0..1.0), rng.random_range(-3.0..3.0)];
        let mut z = s.extended.embed(&xv);
        if !contains(poly, &z) {
            continue;
        }
        members += 1;
        for _ in 0..20 {
            let d: Vec<f64> = (0..s.omega.dim())
                .map(|i| rng.random_range(s.omega.lower[i]..=s.omega.upper[i]))
                .collect();
            z = s.extended.step(&z, &d);
            if !contains(poly, &z) {
                escapes += 1;
                break;
            }
        }
    }
    println!("{members} sampled members, {escapes} left the set within 20 steps");
    Ok(())
}
