//! Hermitian operator basis (normalized identity plus generalized Gell-Mann
//! matrices), orthonormal under the Hilbert-Schmidt inner product.

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Orthonormal Hermitian basis of the d×d operators, in a fixed order:
/// 𝟙/√d first, then the symmetric family (E_jk + E_kj)/√2 for j < k, the
/// antisymmetric family i(E_kj − E_jk)/√2 for j < k (both in lexicographic
/// (j, k) order), and finally the diagonal traceless family
/// (Σ_{m≤l-1} E_mm − l·E_ll)/√(l(l+1)) for l = 1..d-1.
///
/// For d = 2 this is {𝟙, σx, σy, σz}/√2.
pub fn hermitian_operator_basis(d: usize) -> Result<Vec<ComplexMatrix>> {
    if d == 0 {
        return Err(Error::InvalidInput("operator basis needs dimension ≥ 1".into()));
    }
    let mut ops = Vec::with_capacity(d * d);
    let inv_sqrt_d = 1.0 / (d as f64).sqrt();
    ops.push(ComplexMatrix::identity(d).scale_re(inv_sqrt_d));

    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = ComplexMatrix::zeros(d, d);
            m.set(j, k, Complex64::new(s, 0.0));
            m.set(k, j, Complex64::new(s, 0.0));
            ops.push(m);
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = ComplexMatrix::zeros(d, d);
            m.set(j, k, Complex64::new(0.0, -s));
            m.set(k, j, Complex64::new(0.0, s));
            ops.push(m);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut m = ComplexMatrix::zeros(d, d);
        for j in 0..l {
            m.set(j, j, Complex64::new(norm, 0.0));
        }
        m.set(l, l, Complex64::new(-(l as f64) * norm, 0.0));
        ops.push(m);
    }
    debug_assert_eq!(ops.len(), d * d);
    Ok(ops)
}
