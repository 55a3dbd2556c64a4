use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refgov::lp::{maximize, solve_lp, LinearProgram, LpStatus};

/// Brute-force optimum: best objective over every feasible intersection of three rows.
fn vertex_enumeration(c: &[f64], rows: &[[f64; 3]], rhs: &[f64]) -> Option<f64> {
    let m = rows.len();
    let mut best: Option<f64> = None;
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let (r, s, t) = (rows[i], rows[j], rows[k]);
                let a = Matrix3::new(r[0], r[1], r[2], s[0], s[1], s[2], t[0], t[1], t[2]);
                if a.determinant().abs() < 1e-10 {
                    continue;
                }
                let Some(z) = a.lu().solve(&Vector3::new(rhs[i], rhs[j], rhs[k])) else {
                    continue;
                };
                let feasible = rows
                    .iter()
                    .zip(rhs)
                    .all(|(r, b)| r[0] * z[0] + r[1] * z[1] + r[2] * z[2] <= b + 1e-9 * (1.0 + b.abs()));
                if feasible {
                    let v = c[0] * z[0] + c[1] * z[1] + c[2] * z[2];
                    best = Some(best.map_or(v, |b: f64| b.max(v)));
                }
            }
        }
    }
    best
}

#[test]
fn random_bounded_programs_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut infeasible = 0;
    for case in 0..200 {
        let mut rows: Vec<[f64; 3]> = Vec::new();
        let mut rhs = Vec::new();
        for i in 0..3 {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            rows.push(e);
            rhs.push(5.0);
            e[i] = -1.0;
            rows.push(e);
            rhs.push(5.0);
        }
        for _ in 0..rng.random_range(1..=10) {
            rows.push([0; 3].map(|_| rng.random_range(-1.0..1.0)));
            rhs.push(rng.random_range(-1.0..2.0));
        }
        let c: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lp = LinearProgram::new(c.clone(), rows.iter().map(|r| r.to_vec()).collect(), rhs.clone()).unwrap();
        let got = solve_lp(&lp).unwrap();
        match vertex_enumeration(&c, &rows, &rhs) {
            Some(want) => {
                assert_eq!(got.status, LpStatus::Optimal, "case {case}");
                assert!((got.value - want).abs() <= 1e-7 * (1.0 + want.abs()), "case {case}: {} vs {want}", got.value);
                let z = got.point.unwrap();
                let value: f64 = c.iter().zip(&z).map(|(a, b)| a * b).sum();
                assert!((value - want).abs() <= 1e-7 * (1.0 + want.abs()));
            }
            None => {
                infeasible += 1;
                assert_eq!(got.status, LpStatus::Infeasible, "case {case}");
            }
        }
    }
    assert!(infeasible < 200);
}

#[test]
fn detects_unbounded_and_infeasible() {
    let out = maximize(&[1.0, 0.0], &[-1.0, 0.0, 0.0, 1.0], &[0.0, 1.0]).unwrap();
    assert_eq!(out.status, LpStatus::Unbounded);
    let out = maximize(&[1.0], &[1.0, -1.0], &[-1.0, -1.0]).unwrap();
    assert_eq!(out.status, LpStatus::Infeasible);
    let out = maximize(&[0.0], &[1.0, -1.0], &[1.0, 1.0]).unwrap();
    assert_eq!((out.status, out.value), (LpStatus::Optimal, 0.0));
}

fn parse_array(line: &str) -> Vec<f64> {
    line.trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(',')
        .map(|t| t.trim().parse().unwrap())
        .collect()
}

fn regression(name: &str, expected: f64) {
    let text = std::fs::read_to_string(format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let (c, g_rows, g) = (parse_array(lines[0]), parse_array(lines[1]), parse_array(lines[2]));
    assert_eq!(g_rows.len(), c.len() * g.len());
    let out = maximize(&c, &g_rows, &g).unwrap();
    assert_eq!(out.status, LpStatus::Optimal);
    assert!((out.value - expected).abs() <= 1e-9, "{name}: {} vs {expected}", out.value);
}

#[test]
fn badly_scaled_redundancy_program() {
    regression("lp_badly_scaled.txt", 0.19126037396762);
}

#[test]
fn degenerate_redundancy_program() {
    regression("lp_stalling.txt", 0.009307562040841);
}

#[test]
fn small_worked_programs() {
    let out = maximize(&[1.0], &[1.0, -1.0], &[1.0, 0.0]).unwrap();
    assert_eq!((out.status, out.value), (LpStatus::Optimal, 1.0));
    let out = maximize(&[1.0], &[-1.0, 1.0], &[-2.0, 1.0]).unwrap();
    assert_eq!(out.status, LpStatus::Infeasible);
    assert!(out.point.is_none());
    let out = maximize(&[1.0, 1.0], &[1.0, 0.0, 0.0, 1.0], &[3.0, 4.0]).unwrap();
    assert_eq!(out.value, 7.0);
    assert_eq!(out.point.unwrap(), vec![3.0, 4.0]);
}

#[test]
fn optimum_is_feasible_dominates_samples_and_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let n = rng.random_range(2..=5usize);
        let m = rng.random_range(2 * n..4 * n);
        // Rows around a box so the program is bounded and contains the origin.
        let mut rows: Vec<Vec<f64>> = (0..n)
            .flat_map(|i| [1.0, -1.0].map(|s| (0..n).map(|j| if j == i { s } else { 0.0 }).collect()))
            .collect();
        rows.extend((0..m).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()));
        let rhs: Vec<f64> = (0..rows.len()).map(|_| rng.random_range(0.1..2.0)).collect();
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lp = LinearProgram::new(c.clone(), rows.clone(), rhs.clone()).unwrap();
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        let z = out.point.clone().unwrap();
        for (r, b) in rows.iter().zip(&rhs) {
            assert!(r.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() <= b + 1e-7);
        }
        let value: f64 = c.iter().zip(&z).map(|(a, b)| a * b).sum();
        assert!((value - out.value).abs() <= 1e-9 * (1.0 + value.abs()));
        let mut feasible = 0;
        while feasible < 100 {
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            if rows.iter().zip(&rhs).all(|(r, b)| r.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() <= *b) {
                feasible += 1;
                assert!(out.value >= c.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() - 1e-9);
            }
        }
        let again = solve_lp(&lp).unwrap();
        assert_eq!(again.value.to_bits(), out.value.to_bits());
        assert_eq!(again.point, out.point);
    }
}
