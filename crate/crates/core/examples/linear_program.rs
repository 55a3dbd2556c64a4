//! The dense simplex solver used for redundancy tests.
//!
//! ```bash
//! cargo run --example linear_program
//! ```

use refgov::lp::{solve_lp, LinearProgram, LpStatus};

fn main() -> refgov::Result<()> {
    // max x + 2y  s.t.  x + y <= 4,  x <= 3,  y <= 2.5,  x, y >= 0
    let lp = LinearProgram::new(
        vec![1.0, 2.0],
        vec![
            vec![1.0, 1.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![-1.0, 0.0],
            vec![0.0, -1.0],
        ],
        vec![4.0, 3.0, 2.5, 0.0, 0.0],
    )?;
    let out = solve_lp(&lp)?;
    println!("{:?}: value {} at {:?}", out.status, out.value, out.point);

    let open = LinearProgram::new(vec![1.0, 0.0], vec![vec![0.0, 1.0]], vec![1.0])?;
    assert_eq!(solve_lp(&open)?.status, LpStatus::Unbounded);
    let empty = LinearProgram::new(vec![1.0], vec![vec![1.0], vec![-1.0]], vec![-1.0, -1.0])?;
    assert_eq!(solve_lp(&empty)?.status, LpStatus::Infeasible);
    println!("unbounded and infeasible programs are reported as such");
    Ok(())
}
