//! Plant discretization, closed-loop simulation and the bundled aircraft model.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::governor::GovernorState;
use crate::lift::{box_vertices, PolyConstraint, ProblemSpec};
use crate::moas::{self, Polytope};
use crate::polykron::PowerBasis;

/// Name recorded in output metadata for the disturbance generator.
pub const GENERATOR_ID: &str = "chacha8";

/// `ẋ = F x + G u` sampled with zero-order hold.
#[derive(Debug, Clone)]
pub struct ContinuousPlant {
    pub f: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub ts: f64,
}

impl ContinuousPlant {
    pub fn new(f: DMatrix<f64>, g: DMatrix<f64>, ts: f64) -> Result<Self> {
        if !(ts > 0.0 && ts.is_finite()) {
            return Err(Error::InvalidArgument(format!("sampling period must be > 0, got {ts}")));
        }
        if !f.is_square() || g.nrows() != f.nrows() {
            return Err(Error::DimensionMismatch {
                what: "plant G rows".into(),
                expected: f.nrows(),
                found: g.nrows(),
            });
        }
        Ok(Self { f, g, ts })
    }
}

/// Exact zero-order-hold discretization through `exp([[F, G], [0, 0]] Ts)`.
pub fn c2d(plant: &ContinuousPlant) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = plant.f.nrows();
    let m = plant.g.ncols();
    let mut aug = DMatrix::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(&(&plant.f * plant.ts));
    aug.view_mut((0, n), (n, m)).copy_from(&(&plant.g * plant.ts));
    let e = aug.exp();
    (
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, m)).into_owned(),
    )
}

/// Angle-of-attack loop with cubic lift `L(α) = l0 + l1 α - l3 α³`.
///
/// The state is `x = [α, α̇]` in rad and rad/s; the governed reference `v` is
/// an angle offset. Uncertain lift coefficients enter only the input bound,
/// because the controller cancels the nominal lift exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AircraftPreset {
    pub d1: f64,
    pub d2: f64,
    pub inertia: f64,
    pub l0: f64,
    pub l1: f64,
    pub l3: f64,
    pub kp: f64,
    pub kd: f64,
    pub ts: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub u_max: f64,
    /// Lift coefficients range over `[lo, hi]` times nominal.
    pub theta_scale: (f64, f64),
    /// Half-width of the disturbance box on `α`, in rad.
    pub w_bound: f64,
    pub beta: f64,
    pub p: usize,
}

impl Default for AircraftPreset {
    fn default() -> Self {
        Self {
            d1: 8.0,
            d2: 40.0,
            inertia: 4.5e6,
            l0: 2.5e5,
            l1: 8.6e6,
            l3: 4.35e7,
            kp: 5.2e7,
            kd: 7.6e6,
            ts: 0.01,
            alpha_min: -0.2 * PI / 180.0,
            alpha_max: 14.7 * PI / 180.0,
            u_max: 4e5,
            theta_scale: (0.8, 1.2),
            w_bound: 0.05,
            beta: 0.95,
            p: 3,
        }
    }
}

impl AircraftPreset {
    pub fn theta_nominal(&self) -> [f64; 3] {
        [self.l0, self.l1, self.l3]
    }

    pub fn theta_box(&self) -> Vec<(f64, f64)> {
        let (lo, hi) = self.theta_scale;
        self.theta_nominal().iter().map(|t| (lo * t, hi * t)).collect()
    }

    pub fn lift(&self, alpha: f64, theta: &[f64]) -> f64 {
        theta[0] + theta[1] * alpha - theta[2] * alpha.powi(3)
    }

    /// Elevator force `u = -kp (α - v) - kd α̇ + (d1/d2) L(α; θ)`.
    pub fn control_input(&self, x: &[f64], v: f64, theta: &[f64]) -> f64 {
        -self.kp * (x[0] - v) - self.kd * x[1] + self.d1 / self.d2 * self.lift(x[0], theta)
    }

    /// Closed loop `J α̈ = d2 (-kp (α - v) - kd α̇)` after lift cancellation.
    pub fn closed_loop(&self) -> Result<ContinuousPlant> {
        let a = self.d2 / self.inertia;
        let f = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -a * self.kp, -a * self.kd]);
        let g = DMatrix::from_row_slice(2, 1, &[0.0, a * self.kp]);
        ContinuousPlant::new(f, g, self.ts)
    }
}

/// Problem with rows `α <= α_max`, `-α <= -α_min`, `u <= u_max`, `-u <= u_max`
/// over `x_v = [α, α̇, v]` and `θ = [l0, l1, l3]`.
pub fn build_aircraft_problem(preset: &AircraftPreset, with_disturbance: bool) -> Result<ProblemSpec> {
    let (a, b) = c2d(&preset.closed_loop()?);
    let n_xv = 3;
    let p = preset.p;
    if p < 3 {
        return Err(Error::InvalidArgument(format!(
            "the aircraft input bound is cubic; degree {p} is too small"
        )));
    }
    let lin = PowerBasis::new(n_xv, 1)?;
    let cub = PowerBasis::new(n_xv, 3)?;
    let at = |basis: &PowerBasis, e: &[u32]| basis.position(e).expect("monomial in basis");

    let mut stall_hi = PolyConstraint::zeros(n_xv, p, 3, preset.alpha_max)?;
    stall_hi.c[0][at(&lin, &[1, 0, 0])] = 1.0;
    let mut stall_lo = PolyConstraint::zeros(n_xv, p, 3, -preset.alpha_min)?;
    stall_lo.c[0][at(&lin, &[1, 0, 0])] = -1.0;

    let ratio = preset.d1 / preset.d2;
    let mut u_hi = PolyConstraint::zeros(n_xv, p, 3, preset.u_max)?;
    u_hi.c[0][at(&lin, &[1, 0, 0])] = -preset.kp;
    u_hi.c[0][at(&lin, &[0, 1, 0])] = -preset.kd;
    u_hi.c[0][at(&lin, &[0, 0, 1])] = preset.kp;
    u_hi.d0[0] = ratio;
    // θ index major: entry k·σ + m multiplies θ_k times monomial m.
    u_hi.d[0][lin.len() + at(&lin, &[1, 0, 0])] = ratio;
    u_hi.d[2][2 * cub.len() + at(&cub, &[3, 0, 0])] = -ratio;
    let u_lo = u_hi.negated(preset.u_max);

    let b_w = if with_disturbance {
        DMatrix::from_row_slice(2, 1, &[1.0, 0.0])
    } else {
        DMatrix::zeros(2, 1)
    };
    let w_box = if with_disturbance {
        vec![(-preset.w_bound, preset.w_bound)]
    } else {
        vec![(0.0, 0.0)]
    };
    ProblemSpec::new(
        a,
        b,
        b_w,
        preset.beta,
        p,
        vec![stall_hi, stall_lo, u_hi, u_lo],
        preset.theta_box(),
        w_box,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisturbanceKind {
    UniformRandom,
    Zero,
    /// Each coordinate sits on a randomly chosen face of the box.
    WorstCorner,
}

impl std::str::FromStr for DisturbanceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform-random" | "uniform" => Ok(Self::UniformRandom),
            "zero" => Ok(Self::Zero),
            "worst-corner" => Ok(Self::WorstCorner),
            _ => Err(format!("unknown disturbance kind `{s}`")),
        }
    }
}

/// Seeded disturbance stream over a box.
#[derive(Debug, Clone)]
pub struct DisturbanceSource {
    kind: DisturbanceKind,
    bounds: Vec<(f64, f64)>,
    rng: ChaCha8Rng,
}

impl DisturbanceSource {
    pub fn new(seed: u64, bounds: Vec<(f64, f64)>, kind: DisturbanceKind) -> Result<Self> {
        if bounds.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
            return Err(Error::InvalidArgument("disturbance box must be finite and ordered".into()));
        }
        Ok(Self {
            kind,
            bounds,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn zero(n_w: usize) -> Self {
        Self::new(0, vec![(0.0, 0.0); n_w], DisturbanceKind::Zero).expect("zero box")
    }

    pub fn kind(&self) -> DisturbanceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn next_sample(&mut self) -> Vec<f64> {
        let kind = self.kind;
        let rng = &mut self.rng;
        self.bounds
            .iter()
            .map(|&(lo, hi)| match kind {
                DisturbanceKind::Zero => 0.0,
                DisturbanceKind::UniformRandom => lo + (hi - lo) * rng.random::<f64>(),
                DisturbanceKind::WorstCorner => {
                    if rng.random::<bool>() {
                        hi
                    } else {
                        lo
                    }
                }
            })
            .collect()
    }
}

impl Iterator for DisturbanceSource {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        Some(self.next_sample())
    }
}

/// Recorded closed-loop run. Entry `k` of every field belongs to step `k`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<usize>,
    pub states: Vec<Vec<f64>>,
    pub refs: Vec<Vec<f64>>,
    pub disturbances: Vec<Vec<f64>>,
    /// Bisection result per step; `None` without a governor.
    pub lambdas: Vec<Option<f64>>,
    /// Membership of the lifted state in the admissible set, when one is attached.
    pub audit: Vec<Option<bool>>,
    /// Steps where the governor could not keep even the decayed reference.
    pub margin_exhausted: Vec<usize>,
    /// `constraint_outputs[k][s][i]`: `f_i` at θ sample `s`.
    pub constraint_outputs: Vec<Vec<Vec<f64>>>,
    pub theta_samples: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// First step where some `f_i > h_i (1 + rel)` for some θ sample.
    pub fn first_violation(&self, spec: &ProblemSpec, rel: f64) -> Option<(usize, usize, usize)> {
        for (k, per_theta) in self.constraint_outputs.iter().enumerate() {
            for (s, outs) in per_theta.iter().enumerate() {
                for (i, f) in outs.iter().enumerate() {
                    let h = spec.constraints[i].h;
                    if *f > h + rel * h.abs() {
                        return Some((k, s, i));
                    }
                }
            }
        }
        None
    }
}

/// Constraint values `f_i(x_v, θ)` for every sample.
pub fn constraint_outputs(spec: &ProblemSpec, bases: &[PowerBasis], xv: &[f64], thetas: &[Vec<f64>]) -> Vec<Vec<f64>> {
    thetas
        .iter()
        .map(|th| spec.constraints.iter().map(|c| c.eval(xv, th, bases)).collect())
        .collect()
}

/// Propagates `x(k+1) = A x + B v + B_w w` for `steps` steps.
///
/// With a governor, `v(0)` is the governor's current reference and `v(k)` for
/// `k >= 1` comes from its update; without one, `v ≡ 0`. Constraint outputs are
/// recorded at every vertex of the parameter box.
pub fn simulate(
    spec: &ProblemSpec,
    mut governor: Option<&mut GovernorState>,
    audit_set: Option<&Polytope>,
    x0: &[f64],
    steps: usize,
    w_source: &mut DisturbanceSource,
) -> Result<Trajectory> {
    let n_x = spec.n_x();
    if x0.len() != n_x {
        return Err(Error::DimensionMismatch {
            what: "initial state".into(),
            expected: n_x,
            found: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { step: 0 });
    }
    if w_source.dim() != spec.n_w() {
        return Err(Error::DimensionMismatch {
            what: "disturbance source".into(),
            expected: spec.n_w(),
            found: w_source.dim(),
        });
    }
    let bases = spec.bases()?;
    let thetas = box_vertices(&spec.theta_box);
    let mut traj = Trajectory {
        theta_samples: thetas.clone(),
        ..Default::default()
    };
    let mut x = DVector::from_column_slice(x0);
    let mut v = match governor.as_deref() {
        Some(g) => g.v.clone(),
        None => vec![0.0; spec.n_v()],
    };
    for k in 0..steps {
        let mut lambda = None;
        if k > 0 {
            if let Some(g) = governor.as_deref_mut() {
                let out = g.update(x.as_slice())?;
                if out.margin_exhausted {
                    traj.margin_exhausted.push(k);
                }
                lambda = Some(out.lambda);
                v = out.v;
            }
        }
        let w = w_source.next_sample();
        let xv: Vec<f64> = x.iter().chain(&v).copied().collect();
        traj.audit.push(audit_set.map(|set| {
            let lifted = crate::lift::embed_powers(&xv, &bases);
            lifted.len() == set.dim() && moas::contains(set, &lifted)
        }));
        traj.constraint_outputs.push(constraint_outputs(spec, &bases, &xv, &thetas));
        traj.times.push(k);
        traj.states.push(x.as_slice().to_vec());
        traj.refs.push(v.clone());
        traj.disturbances.push(w.clone());
        traj.lambdas.push(lambda);

        let vv = DVector::from_column_slice(&v);
        let mut next = &spec.a * &x + &spec.b * vv;
        if !w.is_empty() {
            next += &spec.b_w * DVector::from_column_slice(&w);
        }
        if next.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { step: k + 1 });
        }
        x = next;
    }
    Ok(traj)
}

/// Constraint outputs along a finished trajectory for a family of θ samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSweep {
    pub samples: Vec<Vec<f64>>,
    /// `values[s][k][i]`.
    pub values: Vec<Vec<Vec<f64>>>,
    /// `max_abs[s][i]` over the run.
    pub max_abs: Vec<Vec<f64>>,
}

pub fn theta_sweep(spec: &ProblemSpec, traj: &Trajectory, samples: &[Vec<f64>]) -> Result<ThetaSweep> {
    let bases = spec.bases()?;
    let n_c = spec.constraints.len();
    let values: Vec<Vec<Vec<f64>>> = samples
        .par_iter()
        .map(|th| {
            traj.states
                .iter()
                .zip(&traj.refs)
                .map(|(x, v)| {
                    let xv: Vec<f64> = x.iter().chain(v).copied().collect();
                    spec.constraints.iter().map(|c| c.eval(&xv, th, &bases)).collect()
                })
                .collect()
        })
        .collect();
    let max_abs = values
        .iter()
        .map(|series: &Vec<Vec<f64>>| {
            (0..n_c)
                .map(|i| series.iter().map(|f| f[i].abs()).fold(0.0, f64::max))
                .collect()
        })
        .collect();
    Ok(ThetaSweep {
        samples: samples.to_vec(),
        values,
        max_abs,
    })
}

/// Box vertices followed by a `per_axis`-point grid strictly inside the box.
pub fn default_theta_samples(theta_box: &[(f64, f64)], per_axis: usize) -> Vec<Vec<f64>> {
    let mut out = box_vertices(theta_box);
    if per_axis == 0 || theta_box.is_empty() {
        return out;
    }
    let axis = |&(lo, hi): &(f64, f64)| -> Vec<f64> {
        (1..=per_axis)
            .map(|i| lo + (hi - lo) * i as f64 / (per_axis + 1) as f64)
            .collect()
    };
    let axes: Vec<Vec<f64>> = theta_box.iter().map(axis).collect();
    let mut grid = vec![Vec::new()];
    for a in &axes {
        grid = grid
            .into_iter()
            .flat_map(|prefix: Vec<f64>| {
                a.iter().map(move |&t| {
                    let mut p = prefix.clone();
                    p.push(t);
                    p
                })
            })
            .collect();
    }
    out.extend(grid);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn scalar_zero_order_hold() {
        let plant = ContinuousPlant::new(
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::from_element(1, 1, 1.0),
            1.0,
        )
        .unwrap();
        let (a, b) = c2d(&plant);
        let e = (-1.0f64).exp();
        assert_abs_diff_eq!(a[(0, 0)], e, epsilon = 1e-14);
        assert_abs_diff_eq!(b[(0, 0)], 1.0 - e, epsilon = 1e-14);
    }

    #[test]
    fn zero_dynamics_integrate_input() {
        let g = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        let plant = ContinuousPlant::new(DMatrix::zeros(2, 2), g.clone(), 0.5).unwrap();
        let (a, b) = c2d(&plant);
        assert!((a - DMatrix::identity(2, 2)).amax() < 1e-15);
        assert!((b - g * 0.5).amax() < 1e-15);
    }

    #[test]
    fn aircraft_problem_shape() {
        let preset = AircraftPreset::default();
        let spec = build_aircraft_problem(&preset, false).unwrap();
        assert_eq!(spec.constraints.len(), 4);
        assert_eq!(box_vertices(&spec.theta_box).len(), 8);
        assert!(spec.b_w.iter().all(|&v| v == 0.0));
        let bases = spec.bases().unwrap();
        let xv = [0.1, -0.3, 0.05];
        let th = [2.4e5, 9.0e6, 4.0e7];
        let u = preset.control_input(&xv[..2], xv[2], &th);
        assert!((spec.constraints[2].eval(&xv, &th, &bases) - u).abs() < 1e-6);
        assert!((spec.constraints[3].eval(&xv, &th, &bases) + u).abs() < 1e-6);
        assert!((spec.constraints[0].eval(&xv, &th, &bases) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn disturbance_streams() {
        let mut z = DisturbanceSource::new(7, vec![(-1.0, 1.0)], DisturbanceKind::Zero).unwrap();
        assert!(z.by_ref().take(10).all(|w| w == vec![0.0]));
        let a: Vec<_> = DisturbanceSource::new(7, vec![(-1.0, 2.0)], DisturbanceKind::UniformRandom)
            .unwrap()
            .take(100)
            .collect();
        let b: Vec<_> = DisturbanceSource::new(7, vec![(-1.0, 2.0)], DisturbanceKind::UniformRandom)
            .unwrap()
            .take(100)
            .collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|w| (-1.0..=2.0).contains(&w[0])));
        let c = DisturbanceSource::new(1, vec![(-1.0, 2.0)], DisturbanceKind::WorstCorner).unwrap();
        assert!(c.take(50).all(|w| w[0] == -1.0 || w[0] == 2.0));
    }

    #[test]
    fn sample_grid_size() {
        let s = default_theta_samples(&[(0.0, 1.0), (1.0, 2.0)], 3);
        assert_eq!(s.len(), 4 + 9);
        assert_eq!(s[4], vec![0.25, 1.25]);
    }
}
