//! Dense two-phase simplex for `max c·z s.t. G z <= g` with free `z`.
//!
//! The polytopes handled here have few columns and many rows, so the solver
//! works on the dual `min g·y s.t. Gᵀy = c, y >= 0`, whose tableau has one
//! row per primal variable. The primal optimum is read off the simplex
//! multipliers of the dual. Pivoting uses the most negative reduced cost and
//! falls back to Bland's rule after a run of degenerate pivots.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const PIVOT_TOL: f64 = 1e-9;
pub const FEAS_TOL: f64 = 1e-7;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<f64>,
    rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        let n = objective.len();
        if rows.len() != rhs.len() {
            return Err(Error::DimensionMismatch {
                what: "LP rhs".into(),
                expected: rows.len(),
                found: rhs.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                what: "LP row".into(),
                expected: n,
                found: bad.len(),
            });
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        if objective.iter().chain(&flat).chain(&rhs).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("LP data must be finite".into()));
        }
        Ok(Self {
            objective,
            rows: flat,
            rhs,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub value: f64,
    pub point: Option<Vec<f64>>,
}

impl LpOutcome {
    fn infeasible() -> Self {
        Self {
            status: LpStatus::Infeasible,
            value: f64::NEG_INFINITY,
            point: None,
        }
    }

    fn unbounded() -> Self {
        Self {
            status: LpStatus::Unbounded,
            value: f64::INFINITY,
            point: None,
        }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    maximize(&lp.objective, &lp.rows, &lp.rhs)
}

/// `max c·z` subject to `G z <= g`, with `G` row-major (`g.len()` rows of `c.len()` entries).
pub fn maximize(c: &[f64], g_rows: &[f64], g: &[f64]) -> Result<LpOutcome> {
    let n = c.len();
    let m = g.len();
    assert_eq!(g_rows.len(), n * m, "row data does not match dimensions");
    match solve_dual(c, g_rows, g)? {
        DualResult::Optimal(pi) => {
            let value = c.iter().zip(&pi).map(|(a, b)| a * b).sum();
            let scale = 1.0 + g.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            for i in 0..m {
                let row = &g_rows[i * n..(i + 1) * n];
                let lhs: f64 = row.iter().zip(&pi).map(|(a, b)| a * b).sum();
                if lhs > g[i] + FEAS_TOL * scale {
                    return Err(Error::NumericallyDegenerate { iterations: 0 });
                }
            }
            Ok(LpOutcome {
                status: LpStatus::Optimal,
                value,
                point: Some(pi),
            })
        }
        DualResult::Unbounded => Ok(LpOutcome::infeasible()),
        DualResult::Infeasible => {
            // Dual infeasible: primal is unbounded if feasible at all.
            let zero = vec![0.0; n];
            match solve_dual(&zero, g_rows, g)? {
                DualResult::Unbounded => Ok(LpOutcome::infeasible()),
                _ => Ok(LpOutcome::unbounded()),
            }
        }
    }
}

enum DualResult {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

/// `min g·y s.t. Gᵀ y = c, y >= 0`; returns the multipliers (the primal point) at optimality.
///
/// Revised simplex: the `d × d` basis is refactored every iteration, so
/// pricing never accumulates rounding drift.
fn solve_dual(c: &[f64], g_rows: &[f64], g: &[f64]) -> Result<DualResult> {
    let d = c.len();
    let m = g.len();
    let signs: Vec<f64> = c.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let b = DVector::from_iterator(d, c.iter().zip(&signs).map(|(v, s)| v * s));
    let mut lp = Revised {
        d,
        m,
        g_rows,
        signs: &signs,
        basis: (m..m + d).collect(),
        in_basis: {
            let mut v = vec![false; m + d];
            v[m..].iter_mut().for_each(|x| *x = true);
            v
        },
        b,
    };
    let cap = 50 * (m + d) + 1000;

    // phase 1: minimize the artificial sum
    let phase1 = |j: usize| if j >= m { 1.0 } else { 0.0 };
    match lp.iterate(&phase1, m + d, false, cap)? {
        Step::Optimal => {}
        Step::Unbounded => unreachable!("phase 1 objective is bounded below"),
    }
    let x = lp.basic_values()?;
    let infeas: f64 = (0..d).filter(|&r| lp.basis[r] >= m).map(|r| x[r].max(0.0)).sum();
    let b_scale = 1.0 + lp.b.amax();
    if infeas > FEAS_TOL * b_scale {
        return Ok(DualResult::Infeasible);
    }
    lp.drive_out_artificials()?;

    // phase 2
    let phase2 = |j: usize| if j < m { g[j] } else { 0.0 };
    match lp.iterate(&phase2, m, true, cap)? {
        Step::Unbounded => Ok(DualResult::Unbounded),
        Step::Optimal => {
            let pi = lp.duals(&phase2)?;
            Ok(DualResult::Optimal(
                pi.iter().zip(&signs).map(|(p, s)| p * s).collect(),
            ))
        }
    }
}

enum Step {
    Optimal,
    Unbounded,
}

struct Revised<'a> {
    d: usize,
    m: usize,
    g_rows: &'a [f64],
    signs: &'a [f64],
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    b: DVector<f64>,
}

impl Revised<'_> {
    /// Column `j` of the sign-adjusted constraint matrix `[S Gᵀ | I]`.
    fn column(&self, j: usize) -> DVector<f64> {
        if j < self.m {
            let row = &self.g_rows[j * self.d..(j + 1) * self.d];
            DVector::from_iterator(self.d, row.iter().zip(self.signs).map(|(v, s)| v * s))
        } else {
            let mut e = DVector::zeros(self.d);
            e[j - self.m] = 1.0;
            e
        }
    }

    fn column_dot(&self, j: usize, y: &DVector<f64>) -> f64 {
        if j < self.m {
            let row = &self.g_rows[j * self.d..(j + 1) * self.d];
            row.iter()
                .zip(self.signs)
                .zip(y.iter())
                .map(|((v, s), yi)| v * s * yi)
                .sum()
        } else {
            y[j - self.m]
        }
    }

    fn factor(&self) -> Result<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
        let mut bm = DMatrix::zeros(self.d, self.d);
        for (r, &j) in self.basis.iter().enumerate() {
            bm.set_column(r, &self.column(j));
        }
        let lu = bm.lu();
        if !lu.is_invertible() {
            return Err(Error::NumericallyDegenerate { iterations: 0 });
        }
        Ok(lu)
    }

    fn basic_values(&self) -> Result<DVector<f64>> {
        let lu = self.factor()?;
        lu.solve(&self.b).ok_or(Error::NumericallyDegenerate { iterations: 0 })
    }

    /// Simplex multipliers `π` with `Bᵀ π = c_B`.
    fn duals(&self, cost: &dyn Fn(usize) -> f64) -> Result<DVector<f64>> {
        let lu = self.factor()?;
        let c_b = DVector::from_iterator(self.d, self.basis.iter().map(|&j| cost(j)));
        solve_transposed(&lu, &c_b)
    }

    /// Pivots zero-level artificials out of the basis where a structural column allows it.
    fn drive_out_artificials(&mut self) -> Result<()> {
        for r in 0..self.d {
            if self.basis[r] < self.m {
                continue;
            }
            let lu = self.factor()?;
            let mut e = DVector::zeros(self.d);
            e[r] = 1.0;
            let row = solve_transposed(&lu, &e)?;
            let mut best = None;
            let mut best_abs = PIVOT_TOL;
            for j in (0..self.m).filter(|&j| !self.in_basis[j]) {
                let v = self.column_dot(j, &row).abs();
                if v > best_abs {
                    best_abs = v;
                    best = Some(j);
                }
            }
            if let Some(j) = best {
                self.in_basis[self.basis[r]] = false;
                self.in_basis[j] = true;
                self.basis[r] = j;
            }
        }
        Ok(())
    }

    /// Simplex iterations with entering columns drawn from `0..allowed`.
    fn iterate(&mut self, cost: &dyn Fn(usize) -> f64, allowed: usize, pin_artificials: bool, cap: usize) -> Result<Step> {
        let scale = (0..allowed).fold(1.0f64, |acc, j| acc.max(cost(j).abs()));
        let price_tol = PIVOT_TOL * scale;
        let mut degenerate_run = 0;
        let mut bland = false;
        let mut best_obj = f64::INFINITY;
        for _ in 0..cap {
            let lu = self.factor()?;
            let x = lu.solve(&self.b).ok_or(Error::NumericallyDegenerate { iterations: 0 })?;
            let c_b = DVector::from_iterator(self.d, self.basis.iter().map(|&j| cost(j)));
            let pi = solve_transposed(&lu, &c_b)?;

            let mut entering = None;
            let mut best = -price_tol;
            for j in (0..allowed).filter(|&j| !self.in_basis[j]) {
                let dj = cost(j) - self.column_dot(j, &pi);
                if dj < best {
                    entering = Some(j);
                    best = dj;
                    if bland {
                        break;
                    }
                }
            }
            let Some(e) = entering else {
                return Ok(Step::Optimal);
            };
            let u = lu
                .solve(&self.column(e))
                .ok_or(Error::NumericallyDegenerate { iterations: 0 })?;
            let u_tol = PIVOT_TOL * (1.0 + u.amax());

            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.d {
                let stuck = pin_artificials && self.basis[r] >= self.m && u[r].abs() > u_tol;
                if !(u[r] > u_tol || stuck) {
                    continue;
                }
                let ratio = if stuck { 0.0 } else { x[r].max(0.0) / u[r] };
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        let better = if bland {
                            ratio < lratio - 1e-12 || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr])
                        } else {
                            ratio < lratio - 1e-12 || (ratio <= lratio + 1e-12 && u[r].abs() > u[lr].abs())
                        };
                        if better {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
            let Some((lr, _)) = leave else {
                return Ok(Step::Unbounded);
            };
            // Progress is judged on the observed objective: with an
            // ill-conditioned basis the predicted gain can be pure noise.
            let obj: f64 = (0..self.d).map(|r| cost(self.basis[r]) * x[r]).sum();
            if obj < best_obj - 1e-12 * (1.0 + obj.abs()) {
                best_obj = obj;
                degenerate_run = 0;
            } else {
                degenerate_run += 1;
                if degenerate_run >= DEGENERATE_RUN {
                    bland = true;
                }
            }
            self.in_basis[self.basis[lr]] = false;
            self.in_basis[e] = true;
            self.basis[lr] = e;
        }
        Err(Error::NumericallyDegenerate { iterations: cap })
    }
}

fn solve_transposed(
    lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    rhs: &DVector<f64>,
) -> Result<DVector<f64>> {
    // P B = L U, so Bᵀ = Uᵀ Lᵀ P
    let l = lu.l();
    let u = lu.u();
    let y = u
        .tr_solve_upper_triangular(rhs)
        .ok_or(Error::NumericallyDegenerate { iterations: 0 })?;
    let mut z = l
        .tr_solve_lower_triangular(&y)
        .ok_or(Error::NumericallyDegenerate { iterations: 0 })?;
    lu.p().inv_permute_rows(&mut z);
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(c: &[f64], rows: &[&[f64]], g: &[f64]) -> LpOutcome {
        let prog = LinearProgram::new(
            c.to_vec(),
            rows.iter().map(|r| r.to_vec()).collect(),
            g.to_vec(),
        )
        .unwrap();
        solve_lp(&prog).unwrap()
    }

    #[test]
    fn bounded_interval() {
        let out = lp(&[1.0], &[&[1.0], &[-1.0]], &[1.0, 0.0]);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_interval() {
        let out = lp(&[1.0], &[&[-1.0], &[1.0]], &[-2.0, 1.0]);
        assert_eq!(out.status, LpStatus::Infeasible);
        assert!(out.point.is_none());
    }

    #[test]
    fn box_corner() {
        let out = lp(&[1.0, 1.0], &[&[1.0, 0.0], &[0.0, 1.0]], &[3.0, 4.0]);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.value - 7.0).abs() < 1e-12);
        let z = out.point.unwrap();
        assert!((z[0] - 3.0).abs() < 1e-12 && (z[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_detected() {
        let out = lp(&[1.0, 0.0], &[&[0.0, 1.0], &[-1.0, 0.0]], &[1.0, 0.0]);
        assert_eq!(out.status, LpStatus::Unbounded);
        let none = lp(&[0.0, 1.0], &[], &[]);
        assert_eq!(none.status, LpStatus::Unbounded);
        let zero = lp(&[0.0, 0.0], &[], &[]);
        assert_eq!(zero.status, LpStatus::Optimal);
    }

    #[test]
    fn infeasible_even_when_objective_unbounded() {
        // x unbounded above in objective, but y-constraints contradict
        let out = lp(&[1.0, 0.0], &[&[0.0, 1.0], &[0.0, -1.0]], &[-1.0, -1.0]);
        assert_eq!(out.status, LpStatus::Infeasible);
    }

    #[test]
    fn degenerate_vertex() {
        // many constraints through the optimum
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|k| {
                let a = k as f64 / 40.0 * std::f64::consts::FRAC_PI_2;
                vec![a.cos(), a.sin()]
            })
            .chain([vec![-1.0, 0.0], vec![0.0, -1.0]])
            .collect();
        let rhs: Vec<f64> = (0..40).map(|_| 0.0).chain([1.0, 1.0]).collect();
        let prog = LinearProgram::new(vec![1.0, 1.0], rows, rhs).unwrap();
        let out = solve_lp(&prog).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!(out.value.abs() < 1e-9);
    }

    #[test]
    fn rejects_ragged_input() {
        assert!(LinearProgram::new(vec![1.0, 2.0], vec![vec![1.0]], vec![1.0]).is_err());
        assert!(LinearProgram::new(vec![1.0], vec![vec![f64::NAN]], vec![1.0]).is_err());
    }
}
