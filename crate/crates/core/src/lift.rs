//! Lifting of the closed loop and its polynomial constraints.
//!
//! With the reference held on the decay `v(k+1) = β v(k)`, the stacked vector
//! `x_v = [x; v]` evolves as `x_v(k+1) = Φ11 x_v(k) + Φ10 w(k)`. Stacking the
//! power vectors `X_v = [x_v; x_v^2; ...; x_v^p]` yields a linear system
//!
//! ```text
//! X_v(k+1) = Φ X_v(k) + Φ_w D(k)
//! ```
//!
//! where `D(k)` collects the products `x_v^i w^m` with `i + m <= p`, `m >= 1`.
//! The polynomial constraints become linear in `X_v` and in `θ ⊗ X_v`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::polykron::{
    absorb_matrix, commute_merge_matrix, fold_matrix, sigma, MixedBasis, PowerBasis,
};

/// Eigenvalue moduli must stay below `1 - SCHUR_MARGIN`.
pub const SCHUR_MARGIN: f64 = 1e-9;

/// One constraint `d0·θ + Σ_j (c_j·x_v^j + d_j·θx_v^j) <= h`.
///
/// `c[j-1]` has one entry per monomial of `x_v^j`; `d[j-1]` is laid out over
/// `θ ⊗ x_v^j` (θ index major).
#[derive(Debug, Clone, PartialEq)]
pub struct PolyConstraint {
    pub h: f64,
    pub d0: Vec<f64>,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
}

impl PolyConstraint {
    pub fn zeros(n_xv: usize, p: usize, n_theta: usize, h: f64) -> Result<Self> {
        let mut c = Vec::with_capacity(p);
        let mut d = Vec::with_capacity(p);
        for j in 1..=p {
            let s = sigma(n_xv, j)?;
            c.push(vec![0.0; s]);
            d.push(vec![0.0; n_theta * s]);
        }
        Ok(Self {
            h,
            d0: vec![0.0; n_theta],
            c,
            d,
        })
    }

    pub fn degree(&self) -> usize {
        self.c.len()
    }

    pub fn negated(&self, h: f64) -> Self {
        let neg = |v: &Vec<f64>| v.iter().map(|x| -x).collect::<Vec<_>>();
        Self {
            h,
            d0: neg(&self.d0),
            c: self.c.iter().map(neg).collect(),
            d: self.d.iter().map(neg).collect(),
        }
    }

    /// Left-hand side `f(x_v, θ)`.
    pub fn eval(&self, xv: &[f64], theta: &[f64], bases: &[PowerBasis]) -> f64 {
        let mut f: f64 = self.d0.iter().zip(theta).map(|(a, b)| a * b).sum();
        for (j, basis) in bases.iter().enumerate().take(self.degree()) {
            let pw = basis.eval(xv);
            f += self.c[j].iter().zip(&pw).map(|(a, b)| a * b).sum::<f64>();
            let s = pw.len();
            for (k, th) in theta.iter().enumerate() {
                let row = &self.d[j][k * s..(k + 1) * s];
                f += th * row.iter().zip(&pw).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        f
    }

    fn check(&self, idx: usize, n_xv: usize, p: usize, n_theta: usize) -> Result<()> {
        let field = |name: &str| format!("constraints[{idx}].{name}");
        if !self.h.is_finite() || self.h < 0.0 {
            return Err(Error::InvalidField {
                field: field("h"),
                reason: format!("bound must be finite and >= 0, got {}", self.h),
            });
        }
        if self.d0.len() != n_theta {
            return Err(Error::InvalidField {
                field: field("d0"),
                reason: format!("expected {n_theta} entries, found {}", self.d0.len()),
            });
        }
        if self.c.len() != p || self.d.len() != p {
            return Err(Error::InvalidField {
                field: field("c"),
                reason: format!("expected coefficient rows for degrees 1..={p}"),
            });
        }
        for j in 1..=p {
            let s = sigma(n_xv, j)?;
            if self.c[j - 1].len() != s {
                return Err(Error::InvalidField {
                    field: field(&format!("c[{j}]")),
                    reason: format!("expected {s} entries, found {}", self.c[j - 1].len()),
                });
            }
            if self.d[j - 1].len() != n_theta * s {
                return Err(Error::InvalidField {
                    field: field(&format!("d[{j}]")),
                    reason: format!(
                        "expected {} entries, found {}",
                        n_theta * s,
                        self.d[j - 1].len()
                    ),
                });
            }
        }
        let all = self
            .d0
            .iter()
            .chain(self.c.iter().flatten())
            .chain(self.d.iter().flatten());
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidField {
                field: field("terms"),
                reason: "non-finite coefficient".into(),
            });
        }
        Ok(())
    }
}

/// Pre-stabilized loop `x(k+1) = A x + B v + B_w w` with uncertain polynomial constraints.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub b_w: DMatrix<f64>,
    pub beta: f64,
    pub p: usize,
    pub constraints: Vec<PolyConstraint>,
    pub theta_box: Vec<(f64, f64)>,
    pub w_box: Vec<(f64, f64)>,
}

impl ProblemSpec {
    /// Builds and validates a problem.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        b_w: DMatrix<f64>,
        beta: f64,
        p: usize,
        constraints: Vec<PolyConstraint>,
        theta_box: Vec<(f64, f64)>,
        w_box: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let spec = Self {
            a,
            b,
            b_w,
            beta,
            p,
            constraints,
            theta_box,
            w_box,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn n_x(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_v(&self) -> usize {
        self.b.ncols()
    }

    pub fn n_w(&self) -> usize {
        self.b_w.ncols()
    }

    pub fn n_xv(&self) -> usize {
        self.n_x() + self.n_v()
    }

    pub fn n_theta(&self) -> usize {
        self.theta_box.len()
    }

    /// True when some admissible `w` actually moves the state.
    pub fn has_disturbance(&self) -> bool {
        self.b_w.iter().any(|&v| v != 0.0) && self.w_box.iter().any(|&(lo, hi)| lo != 0.0 || hi != 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |field: &str, reason: String| Error::InvalidField {
            field: field.into(),
            reason,
        };
        let n_x = self.n_x();
        if n_x == 0 || self.a.ncols() != n_x {
            return Err(invalid("A", format!("must be square and non-empty, got {}x{}", n_x, self.a.ncols())));
        }
        if self.b.nrows() != n_x || self.b.ncols() == 0 {
            return Err(invalid("B", format!("must have {n_x} rows and at least one column")));
        }
        if self.b_w.nrows() != n_x {
            return Err(invalid("B_w", format!("must have {n_x} rows")));
        }
        let finite = |m: &DMatrix<f64>| m.iter().all(|v| v.is_finite());
        if !finite(&self.a) || !finite(&self.b) || !finite(&self.b_w) {
            return Err(invalid("A", "system matrices must be finite".into()));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(invalid("beta", format!("must lie in (0, 1), got {}", self.beta)));
        }
        if self.p == 0 {
            return Err(invalid("p", "degree must be >= 1".into()));
        }
        if self.w_box.len() != self.n_w() {
            return Err(invalid(
                "w_box",
                format!("expected {} intervals, found {}", self.n_w(), self.w_box.len()),
            ));
        }
        for (name, bx) in [("theta_box", &self.theta_box), ("w_box", &self.w_box)] {
            for (i, &(lo, hi)) in bx.iter().enumerate() {
                if !lo.is_finite() || !hi.is_finite() || lo > hi {
                    return Err(invalid(
                        &format!("{name}[{i}]"),
                        format!("need finite lower <= upper, got [{lo}, {hi}]"),
                    ));
                }
            }
        }
        if self.constraints.is_empty() {
            return Err(invalid("constraints", "at least one constraint is required".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            c.check(i, self.n_xv(), self.p, self.n_theta())?;
        }
        let rho = spectral_radius(&self.a);
        if rho >= 1.0 - SCHUR_MARGIN {
            return Err(Error::NotSchur { radius: rho });
        }
        Ok(())
    }

    /// Power bases of `x_v` for degrees `1..=p`.
    pub fn bases(&self) -> Result<Vec<PowerBasis>> {
        (1..=self.p).map(|j| PowerBasis::new(self.n_xv(), j)).collect()
    }
}

pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// `Φ11 = [[A, B], [0, βI]]`.
pub fn build_phi11(a: &DMatrix<f64>, b: &DMatrix<f64>, beta: f64) -> Result<DMatrix<f64>> {
    let (n_x, n_v) = (a.nrows(), b.ncols());
    if a.ncols() != n_x {
        return Err(Error::DimensionMismatch {
            what: "A columns".into(),
            expected: n_x,
            found: a.ncols(),
        });
    }
    if b.nrows() != n_x {
        return Err(Error::DimensionMismatch {
            what: "B rows".into(),
            expected: n_x,
            found: b.nrows(),
        });
    }
    let mut phi = DMatrix::zeros(n_x + n_v, n_x + n_v);
    phi.view_mut((0, 0), (n_x, n_x)).copy_from(a);
    phi.view_mut((0, n_x), (n_x, n_v)).copy_from(b);
    for i in 0..n_v {
        phi[(n_x + i, n_x + i)] = beta;
    }
    Ok(phi)
}

/// `Φ10 = [[B_w], [0]]`.
pub fn build_phi10(b_w: &DMatrix<f64>, n_v: usize) -> DMatrix<f64> {
    let mut phi = DMatrix::zeros(b_w.nrows() + n_v, b_w.ncols());
    phi.view_mut((0, 0), (b_w.nrows(), b_w.ncols())).copy_from(b_w);
    phi
}

fn disturbance_basis(n_w: usize, q: usize) -> Result<Option<PowerBasis>> {
    match (n_w, q) {
        (0, 0) => Ok(Some(PowerBasis::new(0, 0)?)),
        (0, _) => Ok(None),
        _ => Ok(Some(PowerBasis::new(n_w, q)?)),
    }
}

/// Blocks `Φ_{j,i}` with `x_v^j(k+1) = Σ_{i=0}^{j} Φ_{j,i} x_v^i(k) w^{j-i}(k)`.
///
/// Returned as `blocks[j-1][i]`. Degree `j` follows from degree `j-1` through
///
/// ```text
/// Φ_{j,i} = F_j [ (Φ11 ⊗ Φ_{j-1,i-1}) L_{i-1} + (Φ10 ⊗ Φ_{j-1,i}) Γ_{i,j} ]
/// ```
///
/// with `F_j` folding `x ⊗ x^{j-1}` into `x^j`, `L` absorbing a leading `x`
/// factor and `Γ` merging a leading `w` factor.
pub fn build_blocks(
    phi11: &DMatrix<f64>,
    phi10: &DMatrix<f64>,
    p: usize,
) -> Result<Vec<Vec<DMatrix<f64>>>> {
    if p == 0 {
        return Err(Error::InvalidArgument("build_blocks needs p >= 1".into()));
    }
    let n = phi11.nrows();
    let n_w = phi10.ncols();
    if phi10.nrows() != n {
        return Err(Error::DimensionMismatch {
            what: "Φ10 rows".into(),
            expected: n,
            found: phi10.nrows(),
        });
    }
    let mut blocks: Vec<Vec<DMatrix<f64>>> = vec![vec![phi10.clone(), phi11.clone()]];
    for j in 2..=p {
        let fold = fold_matrix(n, j)?.to_dense();
        let rows = sigma(n, j)?;
        let mut level = Vec::with_capacity(j + 1);
        for i in 0..=j {
            let q = j - i;
            let Some(wq) = disturbance_basis(n_w, q)? else {
                level.push(DMatrix::zeros(rows, 0));
                continue;
            };
            let cols = sigma(n, i)? * wq.len();
            let mut inner = DMatrix::zeros(n * sigma(n, j - 1)?, cols);
            if i >= 1 {
                let prev = &blocks[j - 2][i - 1];
                let absorb = absorb_matrix(i - 1, n, &wq)?.to_dense();
                inner += phi11.kronecker(prev) * absorb;
            }
            if i < j && n_w > 0 {
                let prev = &blocks[j - 2][i];
                let gamma = commute_merge_matrix(i, j, n, n_w)?.to_dense();
                inner += phi10.kronecker(prev) * gamma;
            }
            level.push(&fold * inner);
        }
        blocks.push(level);
    }
    Ok(blocks)
}

/// One disturbance product block `x_v^{x_degree} w^{w_degree}` inside `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DisturbanceTerm {
    pub x_degree: usize,
    pub w_degree: usize,
    pub offset: usize,
    pub len: usize,
}

/// Lifted dynamics `X_v(k+1) = Φ X_v(k) + Φ_w D(k)`.
#[derive(Debug, Clone)]
pub struct ExtendedSystem {
    pub phi11: DMatrix<f64>,
    pub phi10: DMatrix<f64>,
    pub blocks: Vec<Vec<DMatrix<f64>>>,
    pub phi: DMatrix<f64>,
    pub phi_w: DMatrix<f64>,
    /// Bases of `x_v^j` for `j = 1..=p`.
    pub bases: Vec<PowerBasis>,
    /// Offset of each degree block inside `X_v`.
    pub offsets: Vec<usize>,
    /// Degree-major layout of `D`: pairs `(i, j-i)` sorted by `j`, then `i`.
    pub layout: Vec<DisturbanceTerm>,
    n_w: usize,
}

impl ExtendedSystem {
    pub fn from_spec(spec: &ProblemSpec) -> Result<Self> {
        let phi11 = build_phi11(&spec.a, &spec.b, spec.beta)?;
        let phi10 = build_phi10(&spec.b_w, spec.n_v());
        let blocks = build_blocks(&phi11, &phi10, spec.p)?;
        assemble_extended(phi11, phi10, blocks)
    }

    pub fn degree(&self) -> usize {
        self.bases.len()
    }

    pub fn n_xv(&self) -> usize {
        self.phi11.nrows()
    }

    pub fn n_w(&self) -> usize {
        self.n_w
    }

    pub fn dim(&self) -> usize {
        self.phi.nrows()
    }

    pub fn disturbance_dim(&self) -> usize {
        self.phi_w.ncols()
    }

    /// `X_v` for a given `x_v`.
    pub fn embed(&self, xv: &[f64]) -> Vec<f64> {
        embed_powers(xv, &self.bases)
    }

    /// `D` for given `x_v` and `w`, in the recorded layout.
    pub fn disturbance_products(&self, xv: &[f64], w: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.disturbance_dim());
        for term in &self.layout {
            let bx = PowerBasis::new(self.n_xv(), term.x_degree).expect("valid degree");
            let bw = PowerBasis::new(self.n_w, term.w_degree).expect("valid degree");
            out.extend(MixedBasis::new(bx, bw).eval(xv, w));
        }
        out
    }

    /// One step of the lifted dynamics with an arbitrary disturbance vector `d`.
    pub fn step(&self, x_lift: &[f64], d: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(x_lift);
        let mut next = &self.phi * x;
        if !d.is_empty() {
            next += &self.phi_w * DVector::from_column_slice(d);
        }
        next.as_slice().to_vec()
    }
}

/// Stacks `x^1, ..., x^p` over the given bases.
pub fn embed_powers(xv: &[f64], bases: &[PowerBasis]) -> Vec<f64> {
    bases.iter().flat_map(|b| b.eval(xv)).collect()
}

pub fn assemble_extended(
    phi11: DMatrix<f64>,
    phi10: DMatrix<f64>,
    blocks: Vec<Vec<DMatrix<f64>>>,
) -> Result<ExtendedSystem> {
    let n = phi11.nrows();
    let n_w = phi10.ncols();
    let p = blocks.len();
    let bases: Vec<PowerBasis> = (1..=p).map(|j| PowerBasis::new(n, j)).collect::<Result<_>>()?;
    let mut offsets = Vec::with_capacity(p);
    let mut dim = 0;
    for b in &bases {
        offsets.push(dim);
        dim += b.len();
    }
    let mut layout = Vec::new();
    let mut d_dim = 0;
    for j in 1..=p {
        for i in 0..j {
            if n_w == 0 {
                continue;
            }
            let len = sigma(n, i)? * sigma(n_w, j - i)?;
            layout.push(DisturbanceTerm {
                x_degree: i,
                w_degree: j - i,
                offset: d_dim,
                len,
            });
            d_dim += len;
        }
    }
    let mut phi = DMatrix::zeros(dim, dim);
    let mut phi_w = DMatrix::zeros(dim, d_dim);
    for j in 1..=p {
        let diag = &blocks[j - 1][j];
        let off = offsets[j - 1];
        phi.view_mut((off, off), diag.shape()).copy_from(diag);
    }
    for term in &layout {
        let j = term.x_degree + term.w_degree;
        let block = &blocks[j - 1][term.x_degree];
        phi_w
            .view_mut((offsets[j - 1], term.offset), block.shape())
            .copy_from(block);
    }
    Ok(ExtendedSystem {
        phi11,
        phi10,
        blocks,
        phi,
        phi_w,
        bases,
        offsets,
        layout,
        n_w,
    })
}

/// Constraints `D0 θ + C0 X_v + C1 (θ ⊗ X_v) <= H`.
#[derive(Debug, Clone)]
pub struct LiftedConstraints {
    pub d0: DMatrix<f64>,
    pub c0: DMatrix<f64>,
    pub c1: DMatrix<f64>,
    pub h: DVector<f64>,
}

impl LiftedConstraints {
    pub fn n_c(&self) -> usize {
        self.h.len()
    }

    pub fn n_theta(&self) -> usize {
        self.d0.ncols()
    }

    pub fn dim(&self) -> usize {
        self.c0.ncols()
    }

    /// Left-hand sides at a lifted point and a parameter value.
    pub fn eval(&self, x_lift: &[f64], theta: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(x_lift);
        let th = DVector::from_column_slice(theta);
        let tx = th.kronecker(&x);
        (&self.d0 * th + &self.c0 * x + &self.c1 * tx).as_slice().to_vec()
    }
}

pub fn lift_constraints(spec: &ProblemSpec) -> Result<LiftedConstraints> {
    let n_c = spec.constraints.len();
    let n_th = spec.n_theta();
    let mut offsets = Vec::with_capacity(spec.p);
    let mut dim = 0;
    for j in 1..=spec.p {
        offsets.push(dim);
        dim += sigma(spec.n_xv(), j)?;
    }
    let mut d0 = DMatrix::zeros(n_c, n_th);
    let mut c0 = DMatrix::zeros(n_c, dim);
    let mut c1 = DMatrix::zeros(n_c, n_th * dim);
    let mut h = DVector::zeros(n_c);
    for (r, con) in spec.constraints.iter().enumerate() {
        if con.degree() != spec.p {
            return Err(Error::InvalidField {
                field: format!("constraints[{r}]"),
                reason: format!("expected degree {} rows, found {}", spec.p, con.degree()),
            });
        }
        h[r] = con.h;
        for (k, v) in con.d0.iter().enumerate() {
            d0[(r, k)] = *v;
        }
        for j in 1..=spec.p {
            let s = con.c[j - 1].len();
            if con.d[j - 1].len() != n_th * s {
                return Err(Error::InvalidField {
                    field: format!("constraints[{r}].d[{j}]"),
                    reason: "ragged row".into(),
                });
            }
            for (m, v) in con.c[j - 1].iter().enumerate() {
                c0[(r, offsets[j - 1] + m)] = *v;
            }
            for k in 0..n_th {
                for m in 0..s {
                    c1[(r, k * dim + offsets[j - 1] + m)] = con.d[j - 1][k * s + m];
                }
            }
        }
    }
    Ok(LiftedConstraints { d0, c0, c1, h })
}

/// Constraint rows `C_{0,k} X_v <= H_k` at one vertex of the parameter box.
#[derive(Debug, Clone)]
pub struct VertexRows {
    pub theta: Vec<f64>,
    pub c0: DMatrix<f64>,
    pub h: DVector<f64>,
}

/// Corners of a box; the first coordinate is the most significant bit (0 = lower).
pub fn box_vertices(bounds: &[(f64, f64)]) -> Vec<Vec<f64>> {
    let n = bounds.len();
    (0..1usize << n)
        .map(|k| {
            bounds
                .iter()
                .enumerate()
                .map(|(b, &(lo, hi))| if (k >> (n - 1 - b)) & 1 == 1 { hi } else { lo })
                .collect()
        })
        .collect()
}

pub fn instantiate_vertices(lifted: &LiftedConstraints, theta_box: &[(f64, f64)]) -> Vec<VertexRows> {
    let dim = lifted.dim();
    box_vertices(theta_box)
        .into_iter()
        .map(|theta| {
            let mut c0 = lifted.c0.clone();
            for (k, th) in theta.iter().enumerate() {
                c0 += lifted.c1.columns(k * dim, dim) * *th;
            }
            let h = &lifted.h - &lifted.d0 * DVector::from_column_slice(&theta);
            VertexRows { theta, c0, h }
        })
        .collect()
}

/// Equilibrium `x̄ = A x̄ + B r`.
pub fn shift_equilibrium(a: &DMatrix<f64>, b: &DMatrix<f64>, r: &[f64]) -> Result<DVector<f64>> {
    let n = a.nrows();
    let rhs = b * DVector::from_column_slice(r);
    let m = DMatrix::identity(n, n) - a;
    m.lu().solve(&rhs).ok_or(Error::NotSchur {
        radius: spectral_radius(a),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi11_layout() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.3]);
        let b = DMatrix::zeros(2, 1);
        let phi = build_phi11(&a, &b, 0.5).unwrap();
        let want = DMatrix::from_row_slice(3, 3, &[0.5, 0.1, 0.0, 0.0, 0.3, 0.0, 0.0, 0.0, 0.5]);
        assert_eq!(phi, want);
        assert!(build_phi11(&a, &DMatrix::zeros(3, 1), 0.5).is_err());
    }

    #[test]
    fn phi11_spectrum_is_union() {
        let a = DMatrix::from_row_slice(2, 2, &[0.2, 0.3, -0.1, 0.4]);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let phi = build_phi11(&a, &b, 0.7).unwrap();
        let mut got: Vec<f64> = phi.complex_eigenvalues().iter().map(|z| z.norm()).collect();
        let mut want: Vec<f64> = a.complex_eigenvalues().iter().map(|z| z.norm()).collect();
        want.extend([0.7, 0.7]);
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_blocks_follow_binomial() {
        let (a, b) = (0.6, -0.4);
        let blocks = build_blocks(
            &DMatrix::from_element(1, 1, a),
            &DMatrix::from_element(1, 1, b),
            2,
        )
        .unwrap();
        assert!((blocks[1][2][(0, 0)] - a * a).abs() < 1e-15);
        assert!((blocks[1][1][(0, 0)] - 2.0 * a * b).abs() < 1e-15);
        assert!((blocks[1][0][(0, 0)] - b * b).abs() < 1e-15);
    }

    #[test]
    fn base_level_is_unchanged() {
        let phi11 = DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.3, 0.4]);
        let phi10 = DMatrix::from_row_slice(2, 1, &[1.0, 0.5]);
        let blocks = build_blocks(&phi11, &phi10, 1).unwrap();
        assert_eq!(blocks[0][1], phi11);
        assert_eq!(blocks[0][0], phi10);
        let ext = assemble_extended(phi11.clone(), phi10.clone(), blocks).unwrap();
        assert_eq!(ext.phi, phi11);
        assert_eq!(ext.phi_w, phi10);
    }

    #[test]
    fn vertices_of_scalar_theta() {
        // θ x <= 1 with θ in [0, 1]
        let mut con = PolyConstraint::zeros(1, 1, 1, 1.0).unwrap();
        con.d[0][0] = 1.0;
        let spec = ProblemSpec::new(
            DMatrix::from_element(1, 1, 0.5),
            DMatrix::from_element(1, 1, 0.0),
            DMatrix::zeros(1, 0),
            0.5,
            1,
            vec![{
                let mut c = PolyConstraint::zeros(2, 1, 1, 1.0).unwrap();
                c.d[0][0] = 1.0;
                c
            }],
            vec![(0.0, 1.0)],
            vec![],
        )
        .unwrap();
        let lifted = lift_constraints(&spec).unwrap();
        let rows = instantiate_vertices(&lifted, &spec.theta_box);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].c0.row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0]);
        assert_eq!(rows[0].h[0], 1.0);
        assert_eq!(rows[1].c0.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0]);
        assert_eq!(rows[1].h[0], 1.0);
        assert!((con.eval(&[0.5], &[1.0], &[PowerBasis::new(1, 1).unwrap()]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn no_theta_gives_single_vertex_set() {
        let lifted = LiftedConstraints {
            d0: DMatrix::zeros(1, 0),
            c0: DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            c1: DMatrix::zeros(1, 0),
            h: DVector::from_element(1, 1.0),
        };
        let rows = instantiate_vertices(&lifted, &[]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].c0, lifted.c0);
        assert_eq!(rows[0].h, lifted.h);
    }

    #[test]
    fn equilibrium_shift() {
        let a = DMatrix::from_element(1, 1, 0.5);
        let b = DMatrix::from_element(1, 1, 1.0);
        let x = shift_equilibrium(&a, &b, &[2.0]).unwrap();
        assert!((x[0] - 4.0).abs() < 1e-12);
        let z = shift_equilibrium(&a, &b, &[0.0]).unwrap();
        assert_eq!(z[0], 0.0);
        let a2 = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, -0.2, 0.7]);
        let b2 = DMatrix::from_row_slice(2, 1, &[0.3, 1.0]);
        let xb = shift_equilibrium(&a2, &b2, &[1.7]).unwrap();
        let resid = &xb - &a2 * &xb - &b2 * DVector::from_element(1, 1.7);
        assert!(resid.norm() <= 1e-10 * xb.norm());
        let singular = DMatrix::identity(2, 2);
        assert!(shift_equilibrium(&singular, &b2, &[1.0]).is_err());
    }

    #[test]
    fn rejects_non_schur_and_bad_fields() {
        let con = PolyConstraint::zeros(2, 1, 0, 1.0).unwrap();
        let err = ProblemSpec::new(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::zeros(1, 0),
            0.5,
            1,
            vec![con.clone()],
            vec![],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotSchur { .. }));
        let err = ProblemSpec::new(
            DMatrix::from_element(1, 1, 0.5),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::zeros(1, 0),
            1.5,
            1,
            vec![con],
            vec![],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidField { ref field, .. } if field == "beta"));
    }
}
