//! Monomial and Kronecker-power algebra.
//!
//! A degree-`p` power vector `x^p` lists every monomial of total degree `p`
//! in the `n` entries of `x` exactly once. The repetition-bearing Kronecker
//! power `x^{p⊗}` is related to it by a compression matrix `M_c` and an
//! expansion matrix `M_e`:
//!
//! ```text
//! x^p = M_c · x^{p⊗}        x^{p⊗} = M_e · x^p
//! ```
//!
//! Monomials are ordered graded-lexicographically with exponent tuples in
//! decreasing lexicographic order, so for `n = p = 2` the basis is
//! `[x1², x1·x2, x2²]`. The ordering is recorded in every exported artifact
//! through [`ORDERING_ID`].

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Identifier of the monomial ordering used throughout the crate.
pub const ORDERING_ID: &str = "grlex-desc";

/// A monomial `x_1^{e_1} ... x_n^{e_n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exponents: Vec<u32>,
}

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self { exponents }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(x)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }
}

/// Number of monomials of degree `p` in `n` variables, `(n+p-1)! / (p! (n-1)!)`.
///
/// `n = 0` is accepted only together with `p = 0` (the empty product).
pub fn sigma(n: usize, p: usize) -> Result<usize> {
    if n == 0 {
        return if p == 0 {
            Ok(1)
        } else {
            Err(Error::InvalidArgument(format!(
                "sigma requires at least one variable (got n = 0, p = {p})"
            )))
        };
    }
    // C(n-1+k, k) = C(n-2+k, k-1) * (n-1+k) / k, exact at every step.
    let mut count: u128 = 1;
    for k in 1..=p as u128 {
        count = count
            .checked_mul(n as u128 - 1 + k)
            .ok_or(Error::SigmaOverflow { n, p })?
            / k;
    }
    usize::try_from(count).map_err(|_| Error::SigmaOverflow { n, p })
}

/// Ordered basis of the degree-`p` power vector in `n` variables.
#[derive(Debug, Clone)]
pub struct PowerBasis {
    n: usize,
    p: usize,
    monomials: Vec<Monomial>,
    position_of: HashMap<Vec<u32>, usize>,
}

impl PowerBasis {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        let expected = sigma(n, p)?;
        let mut exps = Vec::with_capacity(expected);
        let mut scratch = Vec::with_capacity(n);
        enumerate_decreasing(n, p as u32, &mut scratch, &mut exps);
        debug_assert_eq!(exps.len(), expected);
        let position_of = exps
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        Ok(Self {
            n,
            p,
            monomials: exps.into_iter().map(Monomial::new).collect(),
            position_of,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    /// Index of the monomial with the given exponent tuple.
    pub fn position(&self, exponents: &[u32]) -> Option<usize> {
        self.position_of.get(exponents).copied()
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.monomials.iter().map(|m| m.eval(x)).collect()
    }
}

fn enumerate_decreasing(n: usize, p: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    match n {
        0 => {
            if p == 0 {
                out.push(prefix.clone());
            }
        }
        1 => {
            prefix.push(p);
            out.push(prefix.clone());
            prefix.pop();
        }
        _ => {
            for e in (0..=p).rev() {
                prefix.push(e);
                enumerate_decreasing(n - 1, p - e, prefix, out);
                prefix.pop();
            }
        }
    }
}

pub fn power_basis(n: usize, p: usize) -> Result<PowerBasis> {
    PowerBasis::new(n, p)
}

/// Kronecker self-product `x ⊗ x ⊗ ... ⊗ x` (`p` factors), length `n^p`.
pub fn kron_power(x: &[f64], p: usize) -> Vec<f64> {
    assert!(p >= 1, "kron_power requires p >= 1");
    let mut acc = x.to_vec();
    for _ in 1..p {
        acc = x
            .iter()
            .flat_map(|&xi| acc.iter().map(move |&a| xi * a))
            .collect();
    }
    acc
}

pub fn eval_power(x: &[f64], basis: &PowerBasis) -> Vec<f64> {
    assert_eq!(x.len(), basis.n(), "eval_power: vector length != basis.n");
    basis.eval(x)
}

/// Sparse real matrix stored as (row, col, value) triplets sorted by row then column.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl StructuralMatrix {
    pub fn from_triplets(rows: usize, cols: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.retain(|e| e.2 != 0.0);
        entries.sort_by_key(|e| (e.0, e.1));
        // merge duplicates
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            assert!(r < rows && c < cols, "triplet out of bounds");
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        Self {
            rows,
            cols,
            entries: merged,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    pub fn matmul(&self, rhs: &StructuralMatrix) -> StructuralMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul: inner dimensions differ");
        let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rhs.rows];
        for &(r, c, v) in &rhs.entries {
            by_row[r].push((c, v));
        }
        let mut out = Vec::new();
        for &(r, k, v) in &self.entries {
            for &(c, w) in &by_row[k] {
                out.push((r, c, v * w));
            }
        }
        StructuralMatrix::from_triplets(self.rows, rhs.cols, out)
    }

    /// `I_n ⊗ self`.
    pub fn kron_identity_left(&self, n: usize) -> StructuralMatrix {
        let mut out = Vec::with_capacity(n * self.entries.len());
        for block in 0..n {
            for &(r, c, v) in &self.entries {
                out.push((block * self.rows + r, block * self.cols + c, v));
            }
        }
        StructuralMatrix::from_triplets(n * self.rows, n * self.cols, out)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && self.entries.len() == self.rows
            && self
                .entries
                .iter()
                .enumerate()
                .all(|(i, &(r, c, v))| r == i && c == i && v == 1.0)
    }
}

/// Exponent tuple of the monomial at flat Kronecker index `idx` (first factor most significant).
fn kron_index_exponents(mut idx: usize, n: usize, p: usize) -> Vec<u32> {
    let mut exps = vec![0u32; n];
    for _ in 0..p {
        exps[idx % n] += 1;
        idx /= n;
    }
    exps
}

/// `M_e(n,p)`: exactly one unit entry per row, mapping each Kronecker slot to its monomial.
pub fn expansion_matrix(basis: &PowerBasis) -> StructuralMatrix {
    let (n, p) = (basis.n(), basis.degree());
    if p == 0 {
        return StructuralMatrix::identity(1);
    }
    let len = n.pow(p as u32);
    let entries = (0..len)
        .map(|r| {
            let col = basis
                .position(&kron_index_exponents(r, n, p))
                .expect("every Kronecker slot is a basis monomial");
            (r, col, 1.0)
        })
        .collect();
    StructuralMatrix::from_triplets(len, basis.len(), entries)
}

/// `M_c(n,p)`: selects the first Kronecker slot holding each monomial.
pub fn compression_matrix(basis: &PowerBasis) -> StructuralMatrix {
    let (n, p) = (basis.n(), basis.degree());
    if p == 0 {
        return StructuralMatrix::identity(1);
    }
    let len = n.pow(p as u32);
    let mut first = vec![usize::MAX; basis.len()];
    for r in 0..len {
        let i = basis
            .position(&kron_index_exponents(r, n, p))
            .expect("every Kronecker slot is a basis monomial");
        if first[i] == usize::MAX {
            first[i] = r;
        }
    }
    let entries = first.into_iter().enumerate().map(|(i, r)| (i, r, 1.0)).collect();
    StructuralMatrix::from_triplets(basis.len(), len, entries)
}

/// Ordered basis of the products `a^p ⊗ b^q`; entry `(i, j)` sits at `i·|b| + j`.
#[derive(Debug, Clone)]
pub struct MixedBasis {
    a: PowerBasis,
    b: PowerBasis,
}

impl MixedBasis {
    pub fn new(a: PowerBasis, b: PowerBasis) -> Self {
        Self { a, b }
    }

    pub fn left(&self) -> &PowerBasis {
        &self.a
    }

    pub fn right(&self) -> &PowerBasis {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.a.len() * self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.b.len() + j
    }

    pub fn position(&self, exp_a: &[u32], exp_b: &[u32]) -> Option<usize> {
        Some(self.index(self.a.position(exp_a)?, self.b.position(exp_b)?))
    }

    /// Pair of monomials at a flat index.
    pub fn term(&self, idx: usize) -> (&Monomial, &Monomial) {
        (
            &self.a.monomials()[idx / self.b.len()],
            &self.b.monomials()[idx % self.b.len()],
        )
    }

    pub fn eval(&self, xa: &[f64], xb: &[f64]) -> Vec<f64> {
        let va = self.a.eval(xa);
        let vb = self.b.eval(xb);
        va.iter()
            .flat_map(|&u| vb.iter().map(move |&w| u * w))
            .collect()
    }
}

pub fn mixed_basis(basis_a: &PowerBasis, basis_b: &PowerBasis) -> MixedBasis {
    MixedBasis::new(basis_a.clone(), basis_b.clone())
}

fn unit(n: usize, k: usize) -> Vec<u32> {
    let mut e = vec![0u32; n];
    e[k] = 1;
    e
}

fn add_exps(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `Γ_{i,j}` with `w ⊗ (x^i w^{j-1-i}) = Γ_{i,j} · x^i w^{j-i}`.
///
/// Built by exponent bookkeeping: every left-hand entry is a single monomial
/// of the right-hand basis, so each row holds exactly one unit entry.
pub fn commute_merge_matrix(i: usize, j: usize, n_x: usize, n_w: usize) -> Result<StructuralMatrix> {
    if j == 0 || i > j - 1 {
        return Err(Error::InvalidArgument(format!(
            "commute_merge_matrix needs 0 <= i <= j-1 (i = {i}, j = {j})"
        )));
    }
    if n_w == 0 {
        return Err(Error::InvalidArgument(
            "commute_merge_matrix needs a disturbance of width >= 1".into(),
        ));
    }
    let q = j - 1 - i;
    let bx = PowerBasis::new(n_x, i)?;
    let bq = PowerBasis::new(n_w, q)?;
    let target = MixedBasis::new(bx.clone(), PowerBasis::new(n_w, q + 1)?);
    let mut entries = Vec::with_capacity(n_w * bx.len() * bq.len());
    for a in 0..n_w {
        let ea = unit(n_w, a);
        for (mi, mx) in bx.monomials().iter().enumerate() {
            for (mq, mw) in bq.monomials().iter().enumerate() {
                let row = (a * bx.len() + mi) * bq.len() + mq;
                let col = target
                    .position(mx.exponents(), &add_exps(mw.exponents(), &ea))
                    .ok_or_else(|| Error::InvalidArgument("Γ bookkeeping failed".into()))?;
                entries.push((row, col, 1.0));
            }
        }
    }
    Ok(StructuralMatrix::from_triplets(
        n_w * bx.len() * bq.len(),
        target.len(),
        entries,
    ))
}

/// `L` with `x ⊗ (x^i w^q) = L · x^{i+1} w^q`.
///
/// `w_basis` is the degree-`q` disturbance basis (`PowerBasis::new(0, 0)` when
/// there is no disturbance).
pub fn absorb_matrix(i: usize, n_x: usize, w_basis: &PowerBasis) -> Result<StructuralMatrix> {
    let bx = PowerBasis::new(n_x, i)?;
    let target = MixedBasis::new(PowerBasis::new(n_x, i + 1)?, w_basis.clone());
    let bq = w_basis;
    let mut entries = Vec::with_capacity(n_x * bx.len() * bq.len());
    for a in 0..n_x {
        let ea = unit(n_x, a);
        for (mi, mx) in bx.monomials().iter().enumerate() {
            for (mq, mw) in bq.monomials().iter().enumerate() {
                let row = (a * bx.len() + mi) * bq.len() + mq;
                let col = target
                    .position(&add_exps(mx.exponents(), &ea), mw.exponents())
                    .ok_or_else(|| Error::InvalidArgument("absorb bookkeeping failed".into()))?;
                entries.push((row, col, 1.0));
            }
        }
    }
    Ok(StructuralMatrix::from_triplets(
        n_x * bx.len() * bq.len(),
        target.len(),
        entries,
    ))
}

/// `M_c(n,j) · (I_n ⊗ M_e(n,j-1))`, which maps `x ⊗ x^{j-1}` onto `x^j`.
pub fn fold_matrix(n: usize, j: usize) -> Result<StructuralMatrix> {
    if j == 0 {
        return Err(Error::InvalidArgument("fold_matrix needs j >= 1".into()));
    }
    let bj = PowerBasis::new(n, j)?;
    let bprev = PowerBasis::new(n, j - 1)?;
    let expand = if j == 1 {
        StructuralMatrix::identity(n)
    } else {
        expansion_matrix(&bprev).kron_identity_left(n)
    };
    Ok(compression_matrix(&bj).matmul(&expand))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exps(b: &PowerBasis) -> Vec<Vec<u32>> {
        b.monomials().iter().map(|m| m.exponents().to_vec()).collect()
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(2, 2).unwrap(), 3);
        assert_eq!(sigma(1, 7).unwrap(), 1);
        assert_eq!(sigma(3, 3).unwrap(), 10);
        assert_eq!(sigma(5, 0).unwrap(), 1);
    }

    #[test]
    fn sigma_reports_overflow() {
        assert!(matches!(sigma(1000, 200), Err(Error::SigmaOverflow { .. })));
        assert!(sigma(0, 2).is_err());
    }

    #[test]
    fn basis_orderings() {
        assert_eq!(exps(&power_basis(2, 2).unwrap()), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        let b0 = power_basis(4, 0).unwrap();
        assert_eq!(exps(&b0), vec![vec![0, 0, 0, 0]]);
        assert_eq!(eval_power(&[3.0, -1.0, 2.0, 5.0], &b0), vec![1.0]);
        let b32 = power_basis(3, 2).unwrap();
        assert_eq!(b32.len(), 6);
        assert_eq!(exps(&b32)[0], vec![2, 0, 0]);
        assert_eq!(exps(&b32)[5], vec![0, 0, 2]);
    }

    #[test]
    fn kron_power_examples() {
        assert_eq!(kron_power(&[2.0, 3.0], 2), vec![4.0, 6.0, 6.0, 9.0]);
        assert_eq!(kron_power(&[1.5, -2.0, 7.0], 1), vec![1.5, -2.0, 7.0]);
        let x = [1.0, 2.0, 3.0];
        let k = kron_power(&x, 2);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(k[i * 3 + j], x[i] * x[j]);
            }
        }
    }

    #[test]
    fn eval_power_examples() {
        let b = power_basis(2, 2).unwrap();
        assert_eq!(eval_power(&[2.0, 3.0], &b), vec![4.0, 6.0, 9.0]);
        let b = power_basis(4, 3).unwrap();
        assert!(eval_power(&[1.0; 4], &b).iter().all(|&v| v == 1.0));
    }

    #[test]
    fn structural_matrices_n2_p2() {
        let b = power_basis(2, 2).unwrap();
        let mc = compression_matrix(&b).to_dense();
        let me = expansion_matrix(&b).to_dense();
        let mc_expected = DMatrix::from_row_slice(
            3,
            4,
            &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1.],
        );
        let me_expected =
            DMatrix::from_row_slice(4, 3, &[1., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 1.]);
        assert_eq!(mc, mc_expected);
        assert_eq!(me, me_expected);
    }

    #[test]
    fn single_variable_structural_matrices_are_unit() {
        for p in 1..6 {
            let b = power_basis(1, p).unwrap();
            assert!(compression_matrix(&b).is_identity());
            assert!(expansion_matrix(&b).is_identity());
        }
    }

    #[test]
    fn mixed_basis_ordering() {
        let theta = power_basis(2, 1).unwrap();
        let x2 = power_basis(2, 2).unwrap();
        let mb = mixed_basis(&theta, &x2);
        let terms: Vec<(Vec<u32>, Vec<u32>)> = (0..mb.len())
            .map(|k| {
                let (a, b) = mb.term(k);
                (a.exponents().to_vec(), b.exponents().to_vec())
            })
            .collect();
        assert_eq!(
            terms,
            vec![
                (vec![1, 0], vec![2, 0]),
                (vec![1, 0], vec![1, 1]),
                (vec![1, 0], vec![0, 2]),
                (vec![0, 1], vec![2, 0]),
                (vec![0, 1], vec![1, 1]),
                (vec![0, 1], vec![0, 2]),
            ]
        );
        let q0 = mixed_basis(&x2, &power_basis(3, 0).unwrap());
        assert_eq!(q0.len(), x2.len());
        assert_eq!(q0.eval(&[2.0, 3.0], &[9.0, 9.0, 9.0]), vec![4.0, 6.0, 9.0]);
        let dims = mixed_basis(&power_basis(3, 1).unwrap(), &x2);
        assert_eq!(dims.len(), 9);
    }

    #[test]
    fn gamma_base_case_is_identity() {
        for n_w in 1..4 {
            assert!(commute_merge_matrix(0, 1, 3, n_w).unwrap().is_identity());
        }
    }

    #[test]
    fn gamma_scalar_disturbance() {
        // w·[x1, x2] in basis [x1 w, x2 w]
        let g = commute_merge_matrix(1, 2, 2, 1).unwrap();
        assert_eq!(g.nrows(), 2);
        assert_eq!(g.ncols(), 2);
        assert!(g.is_identity());
    }

    #[test]
    fn gamma_dimensions() {
        let g = commute_merge_matrix(1, 3, 3, 2).unwrap();
        assert_eq!(g.nrows(), 2 * 3 * 2);
        assert_eq!(g.ncols(), 3 * 3);
        assert!(commute_merge_matrix(2, 2, 3, 1).is_err());
    }

    #[test]
    fn fold_matrix_maps_x_kron_lower_power() {
        let x = [0.3, -1.2, 2.0];
        let f = fold_matrix(3, 3).unwrap();
        let lower = eval_power(&x, &power_basis(3, 2).unwrap());
        let lhs: Vec<f64> = x.iter().flat_map(|&a| lower.iter().map(move |&b| a * b)).collect();
        let got = f.mul_vec(&lhs);
        let want = eval_power(&x, &power_basis(3, 3).unwrap());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
    }
}
