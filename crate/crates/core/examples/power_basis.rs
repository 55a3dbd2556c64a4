//! Compressed power vectors and the Kronecker structure behind them.
//!
//! ```bash
//! cargo run --example power_basis
//! ```

use refgov::polykron::{compression_matrix, expansion_matrix, kron_power, power_basis, sigma};

fn main() -> refgov::Result<()> {
    let x = [2.0, -1.0, 0.5];
    let basis = power_basis(3, 2)?;
    println!("sigma(3, 2) = {}", sigma(3, 2)?);
    for (m, v) in basis.monomials().iter().zip(basis.eval(&x)) {
        println!("  x^{:?} = {v}", m.exponents());
    }

    // x^{2⊗} carries repeated products; M_c folds them, M_e spreads them back.
    let kron = kron_power(&x, 2);
    let mc = compression_matrix(&basis);
    let me = expansion_matrix(&basis);
    println!("Kronecker square has {} entries, compressed {}", kron.len(), mc.mul_vec(&kron).len());
    println!("M_e x^2 == x^(2 kron): {}", me.mul_vec(&basis.eval(&x)) == kron);
    println!("M_c M_e is the identity: {}", mc.matmul(&me).is_identity());
    Ok(())
}
