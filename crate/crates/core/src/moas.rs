//! Finitely determined maximal output admissible sets.
//!
//! For dynamics `z(k+1) = Ψ z(k) + Ψ_w d(k)` with `d(k)` in a box and rows
//! `a·z <= b`, the step-`t` rows are
//!
//! ```text
//! a Ψ^t z <= b - Σ_{s<t} h_D(a Ψ^s Ψ_w) - ε_t
//! ```
//!
//! where `h_D` is the support function of the disturbance box and
//! `ε_t = 0` for `t = 0`. Rows are added for `t = 0, 1, ...` until every
//! candidate of the next step is redundant with respect to the accumulated
//! set, which certifies `O_t = O_{t+1}`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interval::{monomial_range, Interval};
use crate::lift::{DisturbanceTerm, ExtendedSystem, VertexRows};
use crate::lp::{self, LpOutcome, LpStatus};
use crate::polykron::{PowerBasis, ORDERING_ID};

/// Relative slack on redundancy and membership tests (rows are unit-normalized).
pub const ROW_TOL: f64 = 1e-7;
/// Bounds below this magnitude get the slack of this magnitude.
pub const ROW_FLOOR: f64 = 1e-3;

/// Slack allowed on a row with bound `rhs`: `ROW_TOL` relative to the bound,
/// so a row scaled by a large constraint norm is not loosened in the
/// constraint's own units.
pub fn row_slack(rhs: f64) -> f64 {
    ROW_TOL * rhs.abs().max(ROW_FLOOR)
}

/// Origin of a polytope row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowSource {
    /// Constraint `index` instantiated at parameter vertex `vertex`.
    Constraint { index: usize, vertex: usize },
    /// Bound on coordinate `coord` of the state (upper or lower).
    Bound { coord: usize, upper: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RowTag {
    pub source: RowSource,
    pub step: usize,
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.source {
            RowSource::Constraint { index, vertex } => {
                write!(f, "c{index}v{vertex}t{}", self.step)
            }
            RowSource::Bound { coord, upper } => {
                write!(f, "b{coord}{}t{}", if upper { '+' } else { '-' }, self.step)
            }
        }
    }
}

impl std::str::FromStr for RowTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = || format!("malformed row tag `{s}`");
        let (head, step) = s.rsplit_once('t').ok_or_else(bad)?;
        let step: usize = step.parse().map_err(|_| bad())?;
        let source = if let Some(rest) = head.strip_prefix('c') {
            let (i, v) = rest.split_once('v').ok_or_else(bad)?;
            RowSource::Constraint {
                index: i.parse().map_err(|_| bad())?,
                vertex: v.parse().map_err(|_| bad())?,
            }
        } else if let Some(rest) = head.strip_prefix('b') {
            let (coord, upper) = if let Some(c) = rest.strip_suffix('+') {
                (c, true)
            } else if let Some(c) = rest.strip_suffix('-') {
                (c, false)
            } else {
                return Err(bad());
            };
            RowSource::Bound {
                coord: coord.parse().map_err(|_| bad())?,
                upper,
            }
        } else {
            return Err(bad());
        };
        Ok(RowTag { source, step })
    }
}

/// H-representation `{z : G z <= g}` with per-row provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    dim: usize,
    ordering: String,
    rows: Vec<f64>,
    rhs: Vec<f64>,
    tags: Vec<RowTag>,
}

impl Polytope {
    pub fn new(dim: usize, ordering: impl Into<String>) -> Self {
        Self {
            dim,
            ordering: ordering.into(),
            rows: Vec::new(),
            rhs: Vec::new(),
            tags: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ordering(&self) -> &str {
        &self.ordering
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rhs(&self, i: usize) -> f64 {
        self.rhs[i]
    }

    pub fn tag(&self, i: usize) -> RowTag {
        self.tags[i]
    }

    pub fn rhs_slice(&self) -> &[f64] {
        &self.rhs
    }

    pub fn row_data(&self) -> &[f64] {
        &self.rows
    }

    /// Appends a row. An all-zero row with negative bound is rejected since it
    /// would silently encode an empty set.
    pub fn push_row(&mut self, row: &[f64], rhs: f64, tag: RowTag) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::DimensionMismatch {
                what: "polytope row".into(),
                expected: self.dim,
                found: row.len(),
            });
        }
        if !rhs.is_finite() || row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("polytope rows must be finite".into()));
        }
        if rhs < 0.0 && row.iter().all(|&v| v == 0.0) {
            return Err(Error::TightenedInfeasible { step: tag.step });
        }
        self.rows.extend_from_slice(row);
        self.rhs.push(rhs);
        self.tags.push(tag);
        Ok(())
    }

    /// `max dir·z` over the polytope.
    pub fn maximize(&self, dir: &[f64]) -> Result<LpOutcome> {
        lp::maximize(dir, &self.rows, &self.rhs)
    }

    fn maximize_without(&self, dir: &[f64], skip: usize, keep: &[bool]) -> Result<LpOutcome> {
        let mut rows = Vec::with_capacity(self.rows.len());
        let mut rhs = Vec::with_capacity(self.rhs.len());
        for (i, _) in keep.iter().enumerate().filter(|&(i, &k)| k && i != skip) {
            rows.extend_from_slice(self.row(i));
            rhs.push(self.rhs[i]);
        }
        lp::maximize(dir, &rows, &rhs)
    }

    pub fn violated_rows(&self, z: &[f64]) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| dot(self.row(i), z) > self.rhs[i] + row_slack(self.rhs[i]))
            .collect()
    }

    /// Largest row residual `G z - g`.
    pub fn max_violation(&self, z: &[f64]) -> f64 {
        (0..self.len())
            .map(|i| dot(self.row(i), z) - self.rhs[i])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Keeps the rows selected by `keep`, preserving order.
    pub fn retain(&self, keep: &[bool]) -> Polytope {
        let mut out = Polytope::new(self.dim, self.ordering.clone());
        for i in (0..self.len()).filter(|&i| keep[i]) {
            out.rows.extend_from_slice(self.row(i));
            out.rhs.push(self.rhs[i]);
            out.tags.push(self.tags[i]);
        }
        out
    }

    pub fn is_feasible(&self) -> Result<bool> {
        let out = self.maximize(&vec![0.0; self.dim])?;
        Ok(out.status != LpStatus::Infeasible)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `G z <= g + row_slack(g)` componentwise.
pub fn contains(polytope: &Polytope, z: &[f64]) -> bool {
    (0..polytope.len()).all(|i| dot(polytope.row(i), z) <= polytope.rhs[i] + row_slack(polytope.rhs[i]))
}

/// A row is redundant when its maximum over the polytope does not exceed its bound.
pub fn is_redundant(row: &[f64], rhs: f64, polytope: &Polytope) -> Result<bool> {
    let out = polytope.maximize(row)?;
    Ok(match out.status {
        LpStatus::Optimal => out.value <= rhs + row_slack(rhs),
        LpStatus::Unbounded => false,
        LpStatus::Infeasible => true,
    })
}

/// Drops redundant rows without changing the set.
///
/// Rows that are irredundant with respect to all other rows are kept outright;
/// the remaining candidates are re-checked one at a time against the rows
/// still present.
pub fn remove_redundant(polytope: &Polytope) -> Result<Polytope> {
    let m = polytope.len();
    let all = vec![true; m];
    let flagged: Vec<bool> = (0..m)
        .into_par_iter()
        .map(|i| -> Result<bool> {
            let out = polytope.maximize_without(polytope.row(i), i, &all)?;
            Ok(redundant_outcome(&out, polytope.rhs(i)))
        })
        .collect::<Result<_>>()?;
    let mut keep = all;
    for i in 0..m {
        if !flagged[i] {
            continue;
        }
        let out = polytope.maximize_without(polytope.row(i), i, &keep)?;
        if redundant_outcome(&out, polytope.rhs(i)) {
            keep[i] = false;
        }
    }
    Ok(polytope.retain(&keep))
}

fn redundant_outcome(out: &LpOutcome, rhs: f64) -> bool {
    match out.status {
        LpStatus::Optimal => out.value <= rhs + row_slack(rhs),
        LpStatus::Unbounded => false,
        LpStatus::Infeasible => true,
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperbox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Hyperbox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                what: "box bounds".into(),
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::InvalidArgument(format!(
                    "box coordinate {i} has invalid bounds [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn intervals(&self) -> Vec<Interval> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| Interval::new(lo, hi))
            .collect()
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        z.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// `max c·z` over the box.
    pub fn support(&self, c: &[f64]) -> f64 {
        c.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(ci, (lo, hi))| (ci * lo).max(ci * hi))
            .sum()
    }

    pub fn is_origin(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|&v| v == 0.0)
    }
}

/// Coordinate-wise bounds of a polytope via `2d` LPs.
pub fn extract_box(polytope: &Polytope) -> Result<Hyperbox> {
    let d = polytope.dim();
    let bounds: Vec<(f64, f64)> = (0..d)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let mut dir = vec![0.0; d];
            let mut ext = [0.0; 2];
            for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
                dir[i] = sign;
                let out = polytope.maximize(&dir)?;
                ext[k] = match out.status {
                    LpStatus::Optimal => sign * out.value,
                    LpStatus::Unbounded => return Err(Error::UnboundedCoordinate { coord: i }),
                    LpStatus::Infeasible => return Err(Error::TightenedInfeasible { step: 0 }),
                };
            }
            Ok((ext[1], ext[0]))
        })
        .collect::<Result<_>>()?;
    Hyperbox::from_pairs(&bounds)
}

/// Range of every monomial of `X_v = [x_v; x_v^2; ...]` over a box on `x_v`.
pub fn lift_box(state_box: &Hyperbox, bases: &[PowerBasis]) -> Hyperbox {
    let iv = state_box.intervals();
    let (lower, upper) = bases
        .iter()
        .flat_map(|b| b.monomials().iter())
        .map(|m| {
            let r = monomial_range(m.exponents(), &iv);
            (r.lo, r.hi)
        })
        .unzip();
    Hyperbox { lower, upper }
}

/// Box `Ω_w` bounding the disturbance products `x_v^i w^m` in the given layout.
pub fn omega_w(
    state_box: &Hyperbox,
    w_box: &Hyperbox,
    layout: &[DisturbanceTerm],
) -> Result<Hyperbox> {
    let xs = state_box.intervals();
    let ws = w_box.intervals();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for term in layout {
        let bx = PowerBasis::new(xs.len(), term.x_degree)?;
        let bw = PowerBasis::new(ws.len(), term.w_degree)?;
        for mx in bx.monomials() {
            let rx = monomial_range(mx.exponents(), &xs);
            for mw in bw.monomials() {
                let r = rx * monomial_range(mw.exponents(), &ws);
                lower.push(r.lo);
                upper.push(r.hi);
            }
        }
        debug_assert_eq!(lower.len(), term.offset + term.len);
    }
    Ok(Hyperbox { lower, upper })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoasOptions {
    /// Extra tightening for steps `t >= 1`, relative to each row's own bound.
    pub eps: f64,
    pub iteration_cap: usize,
}

impl Default for MoasOptions {
    fn default() -> Self {
        Self {
            eps: 0.0,
            iteration_cap: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MoasResult {
    pub polytope: Polytope,
    /// First `t` with `O_t = O_{t+1}`.
    pub t_star: usize,
    /// Finite-determination rounds performed (`t_star + 1`).
    pub iterations: usize,
    /// Rows kept by the incremental test, before the final pruning pass.
    pub rows_before: usize,
    pub rows_after: usize,
}

/// One base row `a·z <= b` of a MOAS computation.
#[derive(Debug, Clone)]
pub struct BaseRow {
    pub coeffs: Vec<f64>,
    pub bound: f64,
    pub source: RowSource,
}

struct Propagated {
    source: RowSource,
    bound: f64,
    base_norm: f64,
    current: DVector<f64>,
    spent: f64,
}

/// Runs the finite-determination recursion for `z(k+1) = Ψ z(k) + Ψ_w d(k)`.
pub fn compute_moas(
    dynamics: &DMatrix<f64>,
    disturbance: &DMatrix<f64>,
    dist_box: &Hyperbox,
    base: &[BaseRow],
    ordering: &str,
    opts: &MoasOptions,
) -> Result<MoasResult> {
    let dim = dynamics.nrows();
    if base.is_empty() {
        return Err(Error::InvalidArgument("MOAS needs at least one row".into()));
    }
    if disturbance.ncols() != dist_box.dim() {
        return Err(Error::DimensionMismatch {
            what: "disturbance box".into(),
            expected: disturbance.ncols(),
            found: dist_box.dim(),
        });
    }
    let dyn_t = dynamics.transpose();
    let dist_t = disturbance.transpose();
    let mut rows: Vec<Propagated> = base
        .iter()
        .map(|r| {
            if r.coeffs.len() != dim {
                return Err(Error::DimensionMismatch {
                    what: "MOAS base row".into(),
                    expected: dim,
                    found: r.coeffs.len(),
                });
            }
            let v = DVector::from_column_slice(&r.coeffs);
            Ok(Propagated {
                source: r.source,
                bound: r.bound,
                base_norm: v.norm(),
                current: v,
                spent: 0.0,
            })
        })
        .collect::<Result<_>>()?;

    let mut poly = Polytope::new(dim, ordering);
    let first = candidates(&rows, 0, opts.eps)?;
    for (row, rhs, tag) in first {
        poly.push_row(&row, rhs, tag)?;
    }

    let mut t = 0;
    loop {
        if t >= opts.iteration_cap {
            return Err(Error::NotFinitelyDetermined {
                cap: opts.iteration_cap,
            });
        }
        for r in rows.iter_mut() {
            if disturbance.ncols() > 0 {
                let coupling = &dist_t * &r.current;
                r.spent += dist_box.support(coupling.as_slice());
            }
            r.current = &dyn_t * &r.current;
        }
        let next = candidates(&rows, t + 1, opts.eps)?;
        let verdicts: Vec<bool> = next
            .par_iter()
            .map(|(row, rhs, _)| -> Result<bool> {
                let out = poly.maximize(row)?;
                if out.status == LpStatus::Infeasible {
                    return Err(Error::TightenedInfeasible { step: t });
                }
                Ok(redundant_outcome(&out, *rhs))
            })
            .collect::<Result<_>>()?;
        if verdicts.iter().all(|&v| v) {
            break;
        }
        for ((row, rhs, tag), redundant) in next.into_iter().zip(verdicts) {
            if !redundant {
                poly.push_row(&row, rhs, tag)?;
            }
        }
        t += 1;
    }
    if !poly.is_feasible()? {
        return Err(Error::TightenedInfeasible { step: t });
    }
    let rows_before = poly.len();
    let pruned = remove_redundant(&poly)?;
    Ok(MoasResult {
        rows_after: pruned.len(),
        polytope: pruned,
        t_star: t,
        iterations: t + 1,
        rows_before,
    })
}

/// Normalized, deduplicated rows for prediction step `t`.
fn candidates(rows: &[Propagated], t: usize, eps: f64) -> Result<Vec<(Vec<f64>, f64, RowTag)>> {
    let mut out: Vec<(Vec<f64>, f64, RowTag)> = Vec::with_capacity(rows.len());
    for r in rows {
        let tighten = if t > 0 { eps * r.bound.abs() } else { 0.0 };
        let rhs = r.bound - r.spent - tighten;
        let norm = r.current.norm();
        let tag = RowTag {
            source: r.source,
            step: t,
        };
        if norm <= 1e-14 * r.base_norm.max(f64::MIN_POSITIVE) {
            if rhs < 0.0 {
                return Err(Error::TightenedInfeasible { step: t });
            }
            continue;
        }
        let row: Vec<f64> = r.current.iter().map(|v| v / norm).collect();
        let rhs = rhs / norm;
        if let Some(dup) = out.iter_mut().find(|(c, _, _)| *c == row) {
            if rhs < dup.1 {
                dup.1 = rhs;
                dup.2 = tag;
            }
            continue;
        }
        out.push((row, rhs, tag));
    }
    Ok(out)
}

/// MOAS of `x_v(k+1) = Φ11 x_v + Φ10 w` for linear rows on `x_v`.
pub fn compute_linear_moas(
    phi11: &DMatrix<f64>,
    phi10: &DMatrix<f64>,
    rows: &[BaseRow],
    w_box: &Hyperbox,
    opts: &MoasOptions,
) -> Result<MoasResult> {
    let ordering = format!("{ORDERING_ID}:n={}:p=1", phi11.nrows());
    compute_moas(phi11, phi10, w_box, rows, &ordering, opts)
}

/// Worst-case accumulated disturbance effect `Σ_s h_D(±e_i Ψ^s Ψ_w)` per coordinate,
/// returned as `(down, up)`. The series is summed until its terms fall below
/// `1e-16` of the running total.
pub fn disturbance_reach(
    dynamics: &DMatrix<f64>,
    disturbance: &DMatrix<f64>,
    dist_box: &Hyperbox,
    cap: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = dynamics.nrows();
    let mut down = vec![0.0; d];
    let mut up = vec![0.0; d];
    if disturbance.ncols() == 0 || dist_box.is_origin() {
        return Ok((down, up));
    }
    // Row i of Ψ^s Ψ_w for every i at once.
    let mut m = disturbance.clone();
    for _ in 0..cap {
        let mut largest: f64 = 0.0;
        for i in 0..d {
            let row: Vec<f64> = m.row(i).iter().copied().collect();
            let neg: Vec<f64> = row.iter().map(|v| -v).collect();
            let u = dist_box.support(&row);
            let l = dist_box.support(&neg);
            up[i] += u;
            down[i] += l;
            largest = largest.max(u.max(l) / (1.0 + up[i].max(down[i])));
        }
        if largest < 1e-16 {
            return Ok((down, up));
        }
        m = dynamics * m;
    }
    Err(Error::NotFinitelyDetermined { cap })
}

/// Rows `lower <= z <= upper`. Bounds of coordinates from `nonlinear_from` on
/// are moved outward by `widen` (down, up) and then so that the origin sits
/// at least `padding·width` inside.
pub fn bound_rows(
    bounds: &Hyperbox,
    nonlinear_from: usize,
    padding: f64,
    widen: Option<(&[f64], &[f64])>,
) -> Vec<BaseRow> {
    let d = bounds.dim();
    let mut out = Vec::with_capacity(2 * d);
    for i in 0..d {
        let (mut lo, mut hi) = (bounds.lower[i], bounds.upper[i]);
        if i >= nonlinear_from {
            if let Some((down, up)) = widen {
                lo -= down[i];
                hi += up[i];
            }
            let margin = padding * (hi - lo).max(f64::MIN_POSITIVE);
            lo = lo.min(-margin);
            hi = hi.max(margin);
        }
        let mut upv = vec![0.0; d];
        upv[i] = 1.0;
        out.push(BaseRow {
            coeffs: upv,
            bound: hi,
            source: RowSource::Bound { coord: i, upper: true },
        });
        let mut downv = vec![0.0; d];
        downv[i] = -1.0;
        out.push(BaseRow {
            coeffs: downv,
            bound: -lo,
            source: RowSource::Bound { coord: i, upper: false },
        });
    }
    out
}

/// Rows `C_{0,k} X_v <= H_k` for every parameter vertex.
pub fn vertex_base_rows(vertices: &[VertexRows]) -> Vec<BaseRow> {
    let mut out = Vec::new();
    for (k, v) in vertices.iter().enumerate() {
        for i in 0..v.h.len() {
            out.push(BaseRow {
                coeffs: v.c0.row(i).iter().copied().collect(),
                bound: v.h[i],
                source: RowSource::Constraint { index: i, vertex: k },
            });
        }
    }
    out
}

/// Robust MOAS of `X_v(k+1) = Φ X_v + Φ_w d`, `d ∈ Ω_w`, for vertex rows plus state-bound rows.
pub fn compute_robust_moas(
    ext: &ExtendedSystem,
    vertex_rows: &[VertexRows],
    state_bound_rows: &[BaseRow],
    omega: &Hyperbox,
    opts: &MoasOptions,
) -> Result<MoasResult> {
    let mut base = vertex_base_rows(vertex_rows);
    base.extend_from_slice(state_bound_rows);
    let ordering = format!("{ORDERING_ID}:n={}:p={}", ext.n_xv(), ext.degree());
    compute_moas(&ext.phi, &ext.phi_w, omega, &base, &ordering, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval_poly() -> Polytope {
        let mut p = Polytope::new(1, "test");
        let tag = RowTag {
            source: RowSource::Bound { coord: 0, upper: true },
            step: 0,
        };
        p.push_row(&[1.0], 1.0, tag).unwrap();
        p.push_row(&[-1.0], 1.0, tag).unwrap();
        p
    }

    #[test]
    fn membership_and_redundancy() {
        let p = interval_poly();
        assert!(contains(&p, &[0.0]));
        assert!(!contains(&p, &[1.1]));
        assert!(is_redundant(&[1.0], 2.0, &p).unwrap());
        assert!(!is_redundant(&[1.0], 0.5, &p).unwrap());
        let mut half = Polytope::new(1, "test");
        half.push_row(&[1.0], 1.0, p.tag(0)).unwrap();
        assert!(!is_redundant(&[-1.0], 5.0, &half).unwrap());
    }

    #[test]
    fn zero_row_with_negative_bound_is_rejected() {
        let mut p = Polytope::new(2, "test");
        let tag = RowTag {
            source: RowSource::Bound { coord: 0, upper: true },
            step: 3,
        };
        assert!(matches!(
            p.push_row(&[0.0, 0.0], -1.0, tag),
            Err(Error::TightenedInfeasible { step: 3 })
        ));
    }

    #[test]
    fn box_of_interval_and_simplex() {
        let b = extract_box(&interval_poly()).unwrap();
        assert_eq!(b.lower, vec![-1.0]);
        assert_eq!(b.upper, vec![1.0]);

        let mut s = Polytope::new(2, "test");
        let tag = interval_poly().tag(0);
        s.push_row(&[-1.0, 0.0], 0.0, tag).unwrap();
        s.push_row(&[0.0, -1.0], 0.0, tag).unwrap();
        s.push_row(&[1.0, 1.0], 2.0, tag).unwrap();
        let b = extract_box(&s).unwrap();
        for i in 0..2 {
            assert!(b.lower[i].abs() < 1e-12);
            assert!((b.upper[i] - 2.0).abs() < 1e-12);
        }
        let mut open = Polytope::new(1, "test");
        open.push_row(&[1.0], 1.0, tag).unwrap();
        assert!(matches!(extract_box(&open), Err(Error::UnboundedCoordinate { coord: 0 })));
    }

    #[test]
    fn lifted_boxes() {
        let x = Hyperbox::new(vec![-1.0], vec![2.0]).unwrap();
        let bases = vec![PowerBasis::new(1, 1).unwrap(), PowerBasis::new(1, 2).unwrap()];
        let l = lift_box(&x, &bases);
        assert_eq!(l.lower, vec![-1.0, 0.0]);
        assert_eq!(l.upper, vec![2.0, 4.0]);

        let x = Hyperbox::new(vec![1.0], vec![2.0]).unwrap();
        let w = Hyperbox::new(vec![-1.0], vec![1.0]).unwrap();
        let layout = [DisturbanceTerm {
            x_degree: 1,
            w_degree: 1,
            offset: 0,
            len: 1,
        }];
        let om = omega_w(&x, &w, &layout).unwrap();
        assert_eq!(om.lower, vec![-2.0]);
        assert_eq!(om.upper, vec![2.0]);

        let zero = Hyperbox::new(vec![0.0], vec![0.0]).unwrap();
        let layout = [
            DisturbanceTerm { x_degree: 0, w_degree: 1, offset: 0, len: 1 },
            DisturbanceTerm { x_degree: 1, w_degree: 1, offset: 1, len: 1 },
        ];
        let om = omega_w(&x, &zero, &layout).unwrap();
        assert!(om.is_origin());
    }

    #[test]
    fn scalar_contraction_is_determined_immediately() {
        let phi = DMatrix::from_element(1, 1, 0.5);
        let none = DMatrix::zeros(1, 0);
        let rows = vec![
            BaseRow { coeffs: vec![1.0], bound: 1.0, source: RowSource::Constraint { index: 0, vertex: 0 } },
            BaseRow { coeffs: vec![-1.0], bound: 1.0, source: RowSource::Constraint { index: 1, vertex: 0 } },
        ];
        let res = compute_linear_moas(&phi, &none, &rows, &Hyperbox::new(vec![], vec![]).unwrap(), &MoasOptions::default())
            .unwrap();
        assert_eq!(res.t_star, 0);
        assert_eq!(res.rows_after, 2);
        assert_eq!(res.polytope.row(0), &[1.0]);
        assert_eq!(res.polytope.rhs(0), 1.0);
        assert_eq!(res.polytope.row(1), &[-1.0]);
    }

    #[test]
    fn disturbance_exhausting_the_margin_is_infeasible() {
        let phi = DMatrix::from_element(1, 1, 0.9);
        let dist = DMatrix::from_element(1, 1, 1.0);
        let rows = vec![
            BaseRow { coeffs: vec![1.0], bound: 1.0, source: RowSource::Constraint { index: 0, vertex: 0 } },
            BaseRow { coeffs: vec![-1.0], bound: 1.0, source: RowSource::Constraint { index: 1, vertex: 0 } },
        ];
        // sum of 0.9^s * 0.2 = 2 > 1
        let w = Hyperbox::new(vec![-0.2], vec![0.2]).unwrap();
        let err = compute_linear_moas(&phi, &dist, &rows, &w, &MoasOptions::default()).unwrap_err();
        assert!(matches!(err, Error::TightenedInfeasible { .. }));
    }

    #[test]
    fn row_tags_round_trip() {
        for tag in [
            RowTag { source: RowSource::Constraint { index: 3, vertex: 7 }, step: 12 },
            RowTag { source: RowSource::Bound { coord: 18, upper: false }, step: 0 },
            RowTag { source: RowSource::Bound { coord: 2, upper: true }, step: 41 },
        ] {
            assert_eq!(tag.to_string().parse::<RowTag>().unwrap(), tag);
        }
        assert!("x1t2".parse::<RowTag>().is_err());
    }
}
