//! Two-stage synthesis of the admissible set on the lifted state.
//!
//! 1. MOAS of the linear loop for the constraints that are linear in `x_v`,
//!    which bounds `x_v`.
//! 2. Those bounds give a box on `X_v` and the disturbance product box `Ω_w`;
//!    the robust MOAS of the lifted system is computed for the vertex rows plus
//!    the box rows.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lift::{instantiate_vertices, lift_constraints, ExtendedSystem, ProblemSpec, VertexRows};
use crate::moas::{
    bound_rows, compute_linear_moas, disturbance_reach, compute_robust_moas, extract_box, lift_box, omega_w, BaseRow,
    Hyperbox, MoasOptions, MoasResult, RowSource,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisOptions {
    /// Relative tightening for steps `t >= 1`; `None` picks `1e-6` with a
    /// disturbance and `0` without.
    pub eps: Option<f64>,
    pub iteration_cap: usize,
    /// Bounds of higher-degree coordinates are kept at least this fraction of
    /// their width away from zero.
    pub bound_padding: f64,
    /// Higher-degree bounds are also widened by this multiple of the worst-case
    /// accumulated disturbance on the coordinate.
    pub bound_widening: f64,
}

pub const DEFAULT_EPS: f64 = 1e-6;
pub const DEFAULT_PADDING: f64 = 1e-3;
pub const DEFAULT_WIDENING: f64 = 2.0;

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            eps: None,
            iteration_cap: 10_000,
            bound_padding: DEFAULT_PADDING,
            bound_widening: DEFAULT_WIDENING,
        }
    }
}

impl SynthesisOptions {
    pub fn eps_for(&self, spec: &ProblemSpec) -> f64 {
        self.eps
            .unwrap_or(if spec.has_disturbance() { DEFAULT_EPS } else { 0.0 })
    }
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub extended: ExtendedSystem,
    pub vertices: Vec<VertexRows>,
    pub linear: MoasResult,
    pub state_box: Hyperbox,
    pub lifted_box: Hyperbox,
    pub omega: Hyperbox,
    pub robust: MoasResult,
    pub eps: f64,
    pub linear_seconds: f64,
    pub robust_seconds: f64,
}

/// Rows of the vertex sets that only involve degree-1 coordinates, restricted to those.
pub fn linear_rows(vertices: &[VertexRows], n_xv: usize) -> Vec<BaseRow> {
    let mut out = Vec::new();
    for (k, v) in vertices.iter().enumerate() {
        for i in 0..v.h.len() {
            let row = v.c0.row(i);
            if row.iter().skip(n_xv).any(|&c| c != 0.0) {
                continue;
            }
            let coeffs: Vec<f64> = row.iter().take(n_xv).copied().collect();
            if coeffs.iter().all(|&c| c == 0.0) {
                continue;
            }
            out.push(BaseRow {
                coeffs,
                bound: v.h[i],
                source: RowSource::Constraint { index: i, vertex: k },
            });
        }
    }
    out
}

pub fn synthesize(spec: &ProblemSpec, opts: &SynthesisOptions) -> Result<Synthesis> {
    synthesize_stages(spec, opts, |_| {})
}

/// [`synthesize`] with a hook that sees the first-stage result.
pub fn synthesize_stages(
    spec: &ProblemSpec,
    opts: &SynthesisOptions,
    mut on_linear: impl FnMut(&MoasResult),
) -> Result<Synthesis> {
    spec.validate()?;
    let extended = ExtendedSystem::from_spec(spec)?;
    let lifted = lift_constraints(spec)?;
    let vertices = instantiate_vertices(&lifted, &spec.theta_box);
    let eps = opts.eps_for(spec);
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be finite and >= 0, got {eps}")));
    }
    let moas_opts = MoasOptions {
        eps,
        iteration_cap: opts.iteration_cap,
    };
    let w_box = Hyperbox::from_pairs(&spec.w_box)?;

    let started = Instant::now();
    let rows = linear_rows(&vertices, spec.n_xv());
    if rows.is_empty() {
        return Err(Error::InvalidArgument(
            "no constraint is linear in the state and reference; the first stage has nothing to bound".into(),
        ));
    }
    let linear = compute_linear_moas(&extended.phi11, &extended.phi10, &rows, &w_box, &moas_opts)?;
    let linear_seconds = started.elapsed().as_secs_f64();
    on_linear(&linear);
    log::info!(
        "linear stage: t* = {}, {} rows ({} before pruning)",
        linear.t_star,
        linear.rows_after,
        linear.rows_before
    );

    let started = Instant::now();
    let state_box = extract_box(&linear.polytope)?;
    let lifted_box = lift_box(&state_box, &extended.bases);
    let omega = omega_w(&state_box, &w_box, &extended.layout)?;
    let (down, up) = disturbance_reach(&extended.phi, &extended.phi_w, &omega, opts.iteration_cap)?;
    let widen = opts.bound_widening;
    let down: Vec<f64> = down.iter().map(|v| widen * v).collect();
    let up: Vec<f64> = up.iter().map(|v| widen * v).collect();
    let box_rows = bound_rows(&lifted_box, spec.n_xv(), opts.bound_padding, Some((&down, &up)));
    let robust = compute_robust_moas(&extended, &vertices, &box_rows, &omega, &moas_opts)?;
    let robust_seconds = started.elapsed().as_secs_f64();
    log::info!(
        "robust stage: {} iterations, {} rows ({} before pruning)",
        robust.iterations,
        robust.rows_after,
        robust.rows_before
    );
    Ok(Synthesis {
        extended,
        vertices,
        linear,
        state_box,
        lifted_box,
        omega,
        robust,
        eps,
        linear_seconds,
        robust_seconds,
    })
}

/// Counts reported for the aircraft example, used as calibration targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountTargets {
    pub linear_t_star: usize,
    pub linear_rows: usize,
    pub linear_rows_tol: usize,
    pub robust_iterations: usize,
    pub robust_iterations_tol: usize,
    pub robust_rows: usize,
    /// Relative band on the robust row count.
    pub robust_rows_rel: f64,
}

pub const NOMINAL_TARGETS: CountTargets = CountTargets {
    linear_t_star: 75,
    linear_rows: 105,
    linear_rows_tol: 10,
    robust_iterations: 42,
    robust_iterations_tol: 3,
    robust_rows: 2062,
    robust_rows_rel: 0.05,
};

pub const DISTURBED_TARGETS: CountTargets = CountTargets {
    linear_t_star: 47,
    linear_rows: 81,
    linear_rows_tol: 10,
    robust_iterations: 50,
    robust_iterations_tol: 3,
    robust_rows: 14067,
    robust_rows_rel: 0.05,
};

pub const CALIBRATION_BETAS: [f64; 3] = [0.90, 0.95, 0.99];

/// Counts of one synthesis run, or the error that stopped it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageCounts {
    pub linear_t_star: Option<usize>,
    pub linear_rows: Option<usize>,
    pub robust_iterations: Option<usize>,
    pub robust_rows: Option<usize>,
    pub error: Option<String>,
    pub seconds: f64,
}

impl StageCounts {
    pub fn matches(&self, t: &CountTargets) -> bool {
        let (Some(lt), Some(lr), Some(ri), Some(rr)) =
            (self.linear_t_star, self.linear_rows, self.robust_iterations, self.robust_rows)
        else {
            return false;
        };
        lt == t.linear_t_star
            && lr.abs_diff(t.linear_rows) <= t.linear_rows_tol
            && ri.abs_diff(t.robust_iterations) <= t.robust_iterations_tol
            && (rr as f64 - t.robust_rows as f64).abs() <= t.robust_rows_rel * t.robust_rows as f64
    }

    /// Sum of relative misses over the four counts; failed stages count as 1 each.
    pub fn distance(&self, t: &CountTargets) -> f64 {
        let rel = |got: Option<usize>, want: usize| match got {
            Some(g) => (g as f64 - want as f64).abs() / want as f64,
            None => 1.0,
        };
        rel(self.linear_t_star, t.linear_t_star)
            + rel(self.linear_rows, t.linear_rows)
            + rel(self.robust_iterations, t.robust_iterations)
            + rel(self.robust_rows, t.robust_rows)
    }
}

/// Runs both stages, keeping whatever counts were reached before an error.
pub fn stage_counts(spec: &ProblemSpec, opts: &SynthesisOptions) -> StageCounts {
    let started = Instant::now();
    let mut out = StageCounts {
        linear_t_star: None,
        linear_rows: None,
        robust_iterations: None,
        robust_rows: None,
        error: None,
        seconds: 0.0,
    };
    match synthesize_stages(spec, opts, |linear| {
        out.linear_t_star = Some(linear.t_star);
        out.linear_rows = Some(linear.rows_after);
    }) {
        Ok(s) => {
            out.robust_iterations = Some(s.robust.iterations);
            out.robust_rows = Some(s.robust.rows_after);
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out.seconds = started.elapsed().as_secs_f64();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub beta: f64,
    pub counts: StageCounts,
    pub matches: bool,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub targets: CountTargets,
    pub rows: Vec<CalibrationRow>,
    /// A β whose counts fall inside every band, if any.
    pub matching_beta: Option<f64>,
    /// β with the smallest total relative miss.
    pub nearest_beta: f64,
}

/// Synthesizes `make(β)` for each β and compares the counts with `targets`.
pub fn calibrate_beta(
    betas: &[f64],
    targets: &CountTargets,
    opts: &SynthesisOptions,
    make: impl Fn(f64) -> Result<ProblemSpec>,
) -> Result<Calibration> {
    if betas.is_empty() {
        return Err(Error::InvalidArgument("calibration needs at least one beta".into()));
    }
    let mut rows = Vec::with_capacity(betas.len());
    for &beta in betas {
        let counts = stage_counts(&make(beta)?, opts);
        log::info!("calibration beta = {beta}: {counts:?}");
        rows.push(CalibrationRow {
            beta,
            matches: counts.matches(targets),
            distance: counts.distance(targets),
            counts,
        });
    }
    let matching_beta = rows.iter().find(|r| r.matches).map(|r| r.beta);
    let nearest_beta = rows
        .iter()
        .min_by(|a, b| a.distance.total_cmp(&b.distance))
        .map(|r| r.beta)
        .expect("rows is non-empty");
    Ok(Calibration {
        targets: *targets,
        rows,
        matching_beta,
        nearest_beta,
    })
}
