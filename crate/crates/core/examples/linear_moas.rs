//! Maximal output admissible set of a linear loop with a decaying reference.
//!
//! ```bash
//! cargo run --example linear_moas
//! ```

use nalgebra::DMatrix;
use refgov::lift::build_phi11;
use refgov::moas::{compute_linear_moas, contains, BaseRow, Hyperbox, MoasOptions, RowSource};

fn main() -> refgov::Result<()> {
    let a = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, -0.2, 0.7]);
    let b = DMatrix::from_row_slice(2, 1, &[0.1, 0.2]);
    let phi11 = build_phi11(&a, &b, 0.9)?;
    let phi10 = DMatrix::zeros(3, 0);
    // |x_1| <= 1 and |x_2| <= 1
    let rows: Vec<BaseRow> = (0..4)
        .map(|i| {
            let mut coeffs = vec![0.0; 3];
            coeffs[i / 2] = if i % 2 == 0 { 1.0 } else { -1.0 };
            BaseRow {
                coeffs,
                bound: 1.0,
                source: RowSource::Constraint { index: i, vertex: 0 },
            }
        })
        .collect();
    let set = compute_linear_moas(&phi11, &phi10, &rows, &Hyperbox::new(vec![], vec![])?, &MoasOptions::default())?;
    println!(
        "t* = {}, {} rows ({} before pruning)",
        set.t_star, set.rows_after, set.rows_before
    );
    for (x1, x2, v) in [(0.5, 0.0, 0.0), (0.5, 0.0, 3.0), (0.99, 0.99, 0.0)] {
        println!("({x1}, {x2}, v = {v}) admissible: {}", contains(&set.polytope, &[x1, x2, v]));
    }
    Ok(())
}
