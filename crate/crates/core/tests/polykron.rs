use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use refgov::polykron::{
    commute_merge_matrix, compression_matrix, expansion_matrix, kron_power, MixedBasis, PowerBasis, sigma,
};

/// Number of exponent tuples of length `n` summing to `p`, by brute enumeration.
fn count_tuples(n: usize, p: usize) -> usize {
    fn rec(n: usize, left: usize) -> usize {
        if n == 1 {
            return 1;
        }
        (0..=left).map(|k| rec(n - 1, left - k)).sum()
    }
    rec(n, p)
}

fn rel_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

#[test]
fn sigma_matches_enumeration() {
    for n in 1..=5 {
        for p in 0..=5 {
            assert_eq!(sigma(n, p).unwrap(), count_tuples(n, p), "n = {n}, p = {p}");
            assert_eq!(PowerBasis::new(n, p).unwrap().len(), count_tuples(n, p));
        }
    }
}

#[test]
fn compression_inverts_expansion_exactly() {
    for n in 1..=4 {
        for p in 1..=4 {
            let basis = PowerBasis::new(n, p).unwrap();
            let prod = compression_matrix(&basis).matmul(&expansion_matrix(&basis));
            assert!(prod.is_identity(), "n = {n}, p = {p}");
        }
    }
}

#[test]
fn basis_is_grlex_descending() {
    for n in 1..=4 {
        for p in 1..=4 {
            let b = PowerBasis::new(n, p).unwrap();
            for w in b.monomials().windows(2) {
                assert!(w[0].exponents() > w[1].exponents());
                assert_eq!(w[0].degree() as usize, p);
            }
        }
    }
}

fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, n)
}

proptest! {
    #[test]
    fn expansion_reproduces_kronecker_power((n, p, x) in (1usize..=4, 1usize..=4).prop_flat_map(|(n, p)| (Just(n), Just(p), vec_strategy(n)))) {
        let basis = PowerBasis::new(n, p).unwrap();
        let xp = basis.eval(&x);
        let kron = kron_power(&x, p);
        prop_assert!(rel_close(&expansion_matrix(&basis).mul_vec(&xp), &kron, 1e-12));
        prop_assert!(rel_close(&compression_matrix(&basis).mul_vec(&kron), &xp, 1e-12));
    }

    #[test]
    fn gamma_evaluation_identity(
        (n_x, n_w, i, j, x, w) in (1usize..=3, 1usize..=2, 1usize..=4)
            .prop_flat_map(|(n_x, n_w, j)| (Just(n_x), Just(n_w), 0..j, Just(j)))
            .prop_flat_map(|(n_x, n_w, i, j)| (Just(n_x), Just(n_w), Just(i), Just(j), vec_strategy(n_x), vec_strategy(n_w)))
    ) {
        let q = j - 1 - i;
        let lhs_inner = MixedBasis::new(PowerBasis::new(n_x, i).unwrap(), PowerBasis::new(n_w, q).unwrap()).eval(&x, &w);
        let lhs: Vec<f64> = w.iter().flat_map(|&a| lhs_inner.iter().map(move |&b| a * b)).collect();
        let rhs_basis = MixedBasis::new(PowerBasis::new(n_x, i).unwrap(), PowerBasis::new(n_w, q + 1).unwrap());
        let gamma = commute_merge_matrix(i, j, n_x, n_w).unwrap();
        prop_assert!(rel_close(&gamma.mul_vec(&rhs_basis.eval(&x, &w)), &lhs, 1e-12));
    }

    #[test]
    fn kronecker_mixed_product(
        seed in prop::collection::vec(-1.0f64..1.0, 2 * 4 + 3 * 2 + 4 * 5 + 2 * 3)
    ) {
        let a = DMatrix::from_row_slice(2, 4, &seed[0..8]);
        let b = DMatrix::from_row_slice(3, 2, &seed[8..14]);
        let c = DMatrix::from_row_slice(4, 5, &seed[14..34]);
        let d = DMatrix::from_row_slice(2, 3, &seed[34..40]);
        let lhs = a.kronecker(&b) * c.kronecker(&d);
        let rhs = (&a * &c).kronecker(&(&b * &d));
        prop_assert!(rel_close(lhs.as_slice(), rhs.as_slice(), 1e-12));
    }

    #[test]
    fn kronecker_power_of_linear_map(seed in prop::collection::vec(-1.0f64..1.0, 9 + 3)) {
        // (A x)^{2⊗} = (A ⊗ A) x^{2⊗}
        let a = DMatrix::from_row_slice(3, 3, &seed[..9]);
        let x = DVector::from_column_slice(&seed[9..]);
        let ax = &a * &x;
        let lhs = kron_power(ax.as_slice(), 2);
        let rhs = a.kronecker(&a) * DVector::from_vec(kron_power(x.as_slice(), 2));
        prop_assert!(rel_close(&lhs, rhs.as_slice(), 1e-12));
    }
}
