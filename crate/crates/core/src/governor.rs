//! Online reference governor.
//!
//! The reference decays as `v(k) = (1 - λ(k)) β v(k-1)`, with `λ(k)` the
//! largest value in `[0, 1]` keeping the lifted state inside the admissible set.

use crate::error::{Error, Result};
use crate::lift::embed_powers;
use crate::moas::{self, Polytope};
use crate::polykron::{PowerBasis, ORDERING_ID};

pub const DEFAULT_BISECTION_DEPTH: u32 = 30;
/// Width at which the initialization bisection stops.
pub const INIT_TOL: f64 = 1e-9;
const INIT_GRID: usize = 2000;

/// `X_v` for the state and reference.
pub fn embed(x: &[f64], v: &[f64], bases: &[PowerBasis]) -> Vec<f64> {
    let xv: Vec<f64> = x.iter().chain(v).copied().collect();
    embed_powers(&xv, bases)
}

/// Ordering label a polytope on `X_v` must carry for the given bases.
pub fn ordering_label(bases: &[PowerBasis]) -> String {
    let n = bases.first().map_or(0, |b| b.n());
    format!("{ORDERING_ID}:n={n}:p={}", bases.len())
}

#[derive(Debug, Clone)]
pub struct GovernorState {
    pub v: Vec<f64>,
    pub beta: f64,
    pub moas: Polytope,
    pub bases: Vec<PowerBasis>,
    pub bisection_depth: u32,
    n_x: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateOutcome {
    pub v: Vec<f64>,
    pub lambda: f64,
    /// Even the decayed reference left the set; it was applied anyway.
    pub margin_exhausted: bool,
}

impl GovernorState {
    /// Attaches a polytope. Its ordering label must match `bases`.
    pub fn new(moas: Polytope, bases: Vec<PowerBasis>, beta: f64, n_x: usize, v0: Vec<f64>) -> Result<Self> {
        check_ordering(&moas, &bases)?;
        let n_xv = bases.first().map_or(0, |b| b.n());
        if n_x + v0.len() != n_xv {
            return Err(Error::DimensionMismatch {
                what: "reference".into(),
                expected: n_xv.saturating_sub(n_x),
                found: v0.len(),
            });
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidArgument(format!("beta must lie in (0, 1), got {beta}")));
        }
        Ok(Self {
            v: v0,
            beta,
            moas,
            bases,
            bisection_depth: DEFAULT_BISECTION_DEPTH,
            n_x,
        })
    }

    pub fn admissible(&self, x: &[f64], v: &[f64]) -> bool {
        moas::contains(&self.moas, &embed(x, v, &self.bases))
    }

    /// One governor step from the measured state `x`.
    pub fn update(&mut self, x: &[f64]) -> Result<UpdateOutcome> {
        if x.len() != self.n_x {
            return Err(Error::DimensionMismatch {
                what: "state".into(),
                expected: self.n_x,
                found: x.len(),
            });
        }
        let decayed: Vec<f64> = self.v.iter().map(|v| self.beta * v).collect();
        let at = |lambda: f64| -> Vec<f64> { decayed.iter().map(|v| (1.0 - lambda) * v).collect() };
        let zero = vec![0.0; self.v.len()];
        let out = if self.v.iter().all(|&v| v == 0.0) || self.admissible(x, &zero) {
            UpdateOutcome { v: zero, lambda: 1.0, margin_exhausted: false }
        } else if !self.admissible(x, &decayed) {
            log::debug!("safety margin exhausted: holding the decayed reference");
            UpdateOutcome { v: decayed, lambda: 0.0, margin_exhausted: true }
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..self.bisection_depth {
                let mid = 0.5 * (lo + hi);
                if self.admissible(x, &at(mid)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            UpdateOutcome { v: at(lo), lambda: lo, margin_exhausted: false }
        };
        self.v = out.v.clone();
        Ok(out)
    }
}

fn check_ordering(moas: &Polytope, bases: &[PowerBasis]) -> Result<()> {
    let expected = ordering_label(bases);
    if moas.ordering() != expected {
        return Err(Error::OrderingMismatch {
            expected,
            found: moas.ordering().to_string(),
        });
    }
    let dim: usize = bases.iter().map(|b| b.len()).sum();
    if moas.dim() != dim {
        return Err(Error::DimensionMismatch {
            what: "admissible set".into(),
            expected: dim,
            found: moas.dim(),
        });
    }
    Ok(())
}

/// Search region for the reference: `[-r, r]` per coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSearch {
    pub radius: f64,
    pub grid: usize,
    pub rounds: usize,
}

impl Default for ReferenceSearch {
    fn default() -> Self {
        Self { radius: 1.0, grid: INIT_GRID, rounds: 8 }
    }
}

/// Radius bounding every admissible reference coordinate of the polytope.
pub fn reference_radius(moas: &Polytope, n_x: usize, n_v: usize) -> Result<f64> {
    let mut r: f64 = 0.0;
    for i in n_x..n_x + n_v {
        for sign in [1.0, -1.0] {
            let mut dir = vec![0.0; moas.dim()];
            dir[i] = sign;
            let out = moas.maximize(&dir)?;
            match out.status {
                crate::lp::LpStatus::Optimal => r = r.max(out.value.abs()),
                crate::lp::LpStatus::Unbounded => return Err(Error::UnboundedCoordinate { coord: i }),
                crate::lp::LpStatus::Infeasible => return Err(Error::TightenedInfeasible { step: 0 }),
            }
        }
    }
    Ok(r)
}

/// Smallest-norm reference making `x0` admissible.
///
/// `v = 0` is tried first. For a scalar reference the interval `[-r, r]` is
/// scanned on a grid from the origin outward and the first admissible point on
/// each side is refined by bisection toward zero. For several references the
/// best grid point is shrunk coordinate by coordinate the same way.
pub fn init_reference(x0: &[f64], moas: &Polytope, bases: &[PowerBasis], search: &ReferenceSearch) -> Result<Vec<f64>> {
    check_ordering(moas, bases)?;
    let n_xv = bases.first().map_or(0, |b| b.n());
    if x0.len() > n_xv {
        return Err(Error::DimensionMismatch {
            what: "initial state".into(),
            expected: n_xv,
            found: x0.len(),
        });
    }
    let n_v = n_xv - x0.len();
    let ok = |v: &[f64]| moas::contains(moas, &embed(x0, v, bases));
    let zero = vec![0.0; n_v];
    if ok(&zero) {
        return Ok(zero);
    }
    let inadmissible = || Error::InadmissibleInitialState {
        violated: moas.violated_rows(&embed(x0, &vec![0.0; n_v], bases)),
    };
    if n_v == 0 {
        return Err(inadmissible());
    }
    let grid = search.grid.max(1);
    let step = search.radius / grid as f64;
    if n_v == 1 {
        let mut best: Option<f64> = None;
        for sign in [1.0, -1.0] {
            for k in 1..=grid {
                let v = sign * step * k as f64;
                if best.is_some_and(|b: f64| b.abs() <= v.abs()) {
                    break;
                }
                if ok(&[v]) {
                    let refined = bisect_toward_zero(&|t| ok(&[t]), sign * step * (k - 1) as f64, v);
                    best = Some(match best {
                        Some(b) if b.abs() <= refined.abs() => b,
                        _ => refined,
                    });
                    break;
                }
            }
        }
        return best.map(|v| vec![v]).ok_or_else(inadmissible);
    }

    // Coarse grid over the box, then coordinate-wise shrinking.
    let per_axis = (grid as f64).powf(1.0 / n_v as f64).ceil().max(2.0) as usize | 1;
    let axis: Vec<f64> = (0..per_axis)
        .map(|i| -search.radius + 2.0 * search.radius * i as f64 / (per_axis - 1) as f64)
        .collect();
    let mut best: Option<Vec<f64>> = None;
    let mut idx = vec![0usize; n_v];
    'outer: loop {
        let v: Vec<f64> = idx.iter().map(|&i| axis[i]).collect();
        let norm2: f64 = v.iter().map(|a| a * a).sum();
        if best.as_ref().is_none_or(|b| norm2 < b.iter().map(|a| a * a).sum()) && ok(&v) {
            best = Some(v);
        }
        for i in idx.iter_mut() {
            *i += 1;
            if *i < per_axis {
                continue 'outer;
            }
            *i = 0;
        }
        break;
    }
    let mut v = best.ok_or_else(inadmissible)?;
    for _ in 0..search.rounds {
        let before = v.clone();
        for d in 0..n_v {
            let probe = |t: f64| {
                let mut w = v.clone();
                w[d] = t;
                ok(&w)
            };
            if probe(0.0) {
                v[d] = 0.0;
            } else {
                v[d] = bisect_toward_zero(&probe, 0.0, v[d]);
            }
        }
        if before == v {
            break;
        }
    }
    Ok(v)
}

/// Given `ok(outer)` and `!ok(inner)`, returns an admissible point within
/// `INIT_TOL` of the boundary, on the admissible side.
fn bisect_toward_zero(ok: &dyn Fn(f64) -> bool, mut inner: f64, mut outer: f64) -> f64 {
    while (outer - inner).abs() > INIT_TOL {
        let mid = 0.5 * (inner + outer);
        if mid == inner || mid == outer {
            break;
        }
        if ok(mid) {
            outer = mid;
        } else {
            inner = mid;
        }
    }
    outer
}
