//! Dense complex matrices sized for few-qubit/qutrit work (dimension ≤ 64).
//!
//! Storage is row-major `Vec<Complex64>`. Decompositions are Jacobi-based
//! (see [`decomp`]): at these sizes they are fast and hit relative accuracy
//! near machine epsilon, which the downstream tolerances (1e-9 .. 1e-12)
//! rely on.

mod basis;
mod decomp;

pub use basis::hermitian_operator_basis;
pub use decomp::{Eigen, Svd};
pub(crate) use decomp::{cholesky_solve, invert_hpd};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance for the Hermiticity query.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Which subsystem of a bipartite operator to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Schatten p-norms supported by [`ComplexMatrix::p_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchattenNorm {
    /// Trace norm: sum of singular values.
    One,
    /// Hilbert-Schmidt (Frobenius) norm.
    Two,
    /// Operator norm: largest singular value.
    Infinity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries, `data[r * cols + c]`.
    pub data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = ComplexMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let nr = rows.len();
        if nr == 0 {
            return Err(Error::InvalidInput("matrix needs at least one row".into()));
        }
        let nc = rows[0].len();
        if nc == 0 || rows.iter().any(|r| r.len() != nc) {
            return Err(Error::InvalidInput("ragged or empty matrix rows".into()));
        }
        Ok(ComplexMatrix {
            rows: nr,
            cols: nc,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (i, z) in diag.iter().enumerate() {
            m.data[i * n + i] = *z;
        }
        m
    }

    /// Rank-one matrix `v w†`.
    pub fn outer(v: &[Complex64], w: &[Complex64]) -> Self {
        ComplexMatrix::from_fn(v.len(), w.len(), |r, c| v[r] * w[c].conj())
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, z: Complex64) {
        self.data[r * self.cols + c] = z;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, z: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * z).collect(),
        }
    }

    pub fn scale_re(&self, x: f64) -> ComplexMatrix {
        self.scale(Complex64::new(x, 0.0))
    }

    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let row_k = k * other.cols;
                let row_out = r * other.cols;
                for c in 0..other.cols {
                    out.data[row_out + c] += a * other.data[row_k + c];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| self.data[r * self.cols + c] * v[c])
                    .sum()
            })
            .collect()
    }

    pub fn transpose(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn conj(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Hilbert-Schmidt inner product ⟨⟨A|B⟩⟩ = Tr(A†B).
    pub fn hs_inner(&self, other: &ComplexMatrix) -> Complex64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn has_finite_entries(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// max |M - M†| over entries; 0 for exactly Hermitian matrices.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut defect: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                let d = (self.get(r, c) - self.get(c, r).conj()).norm();
                defect = defect.max(d);
            }
        }
        defect
    }

    /// True iff max |M - M†| ≤ 1e-12 · max(1, ‖M‖∞).
    pub fn is_hermitian(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let defect = self.hermiticity_defect();
        if defect == 0.0 {
            return true;
        }
        // Cheap screen first: max-entry never exceeds the operator norm, so a
        // defect within tolerance of the entry scale needs no SVD.
        if defect <= HERMITICITY_TOL * 1f64.max(self.max_abs()) {
            return true;
        }
        defect <= HERMITICITY_TOL * 1f64.max(self.op_norm_inf())
    }

    /// (M + M†)/2. Used to scrub rounding before Hermitian-only routines.
    pub fn symmetrize(&self) -> ComplexMatrix {
        assert!(self.is_square());
        ComplexMatrix::from_fn(self.rows, self.cols, |r, c| {
            (self.get(r, c) + self.get(c, r).conj()) * 0.5
        })
    }

    /// Kronecker product, first factor on the slow index:
    /// `(a ⊗ b)[(i·rb + k), (j·cb + l)] = a[i,j]·b[k,l]`.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Partial trace of an operator on C^dA ⊗ C^dB (composite index a·dB + b).
    pub fn partial_trace(&self, d_a: usize, d_b: usize, over: Subsystem) -> Result<ComplexMatrix> {
        if self.rows != d_a * d_b || self.cols != d_a * d_b {
            return Err(Error::InvalidInput(format!(
                "partial trace expects a {0}x{0} matrix (dA={1}, dB={2}), got {3}x{4}",
                d_a * d_b,
                d_a,
                d_b,
                self.rows,
                self.cols
            )));
        }
        let m = match over {
            Subsystem::A => ComplexMatrix::from_fn(d_b, d_b, |b, bp| {
                (0..d_a).map(|a| self.get(a * d_b + b, a * d_b + bp)).sum()
            }),
            Subsystem::B => ComplexMatrix::from_fn(d_a, d_a, |a, ap| {
                (0..d_b).map(|b| self.get(a * d_b + b, ap * d_b + b)).sum()
            }),
        };
        Ok(m)
    }

    /// Largest singular value.
    pub fn op_norm_inf(&self) -> f64 {
        self.singular_values()
            .first()
            .copied()
            .unwrap_or(0.0)
    }

    /// Schatten p-norm for p ∈ {1, 2, ∞}.
    pub fn p_norm(&self, p: SchattenNorm) -> f64 {
        match p {
            SchattenNorm::Two => self.frobenius_norm(),
            SchattenNorm::One => self.singular_values().iter().sum(),
            SchattenNorm::Infinity => self.op_norm_inf(),
        }
    }

    fn singular_values(&self) -> Vec<f64> {
        // Hermitian inputs get the cheaper eigenvalue path; |λ| are exactly
        // the singular values there.
        if self.is_square() && self.hermiticity_defect() <= 1e-13 * 1f64.max(self.max_abs()) {
            let eig = decomp::jacobi_hermitian_eigen(&self.symmetrize());
            let mut s: Vec<f64> = eig.values.iter().map(|l| l.abs()).collect();
            s.sort_by(|a, b| b.partial_cmp(a).unwrap());
            return s;
        }
        self.svd_unchecked().values
    }

    /// Full SVD `M = U·diag(s)·V†` with U (m×m), V (n×n) unitary and the
    /// singular values descending (ties keep their original order).
    pub fn svd(&self) -> Result<Svd> {
        if !self.has_finite_entries() {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(self.svd_unchecked())
    }

    fn svd_unchecked(&self) -> Svd {
        decomp::one_sided_jacobi_svd(self)
    }

    /// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and a
    /// unitary whose columns are the eigenvectors. Rejects matrices whose
    /// Hermiticity defect exceeds the documented tolerance.
    pub fn hermitian_eigen(&self) -> Result<Eigen> {
        if !self.has_finite_entries() {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        if !self.is_square() {
            return Err(Error::InvalidInput("eigendecomposition needs a square matrix".into()));
        }
        if !self.is_hermitian() {
            return Err(Error::NotHermitian {
                defect: self.hermiticity_defect(),
                tol: HERMITICITY_TOL * 1f64.max(self.op_norm_inf()),
            });
        }
        Ok(decomp::jacobi_hermitian_eigen(&self.symmetrize()))
    }

    /// Cholesky factor L with `self = L·L†`, or an error when the matrix is
    /// not positive definite. Input is assumed Hermitian.
    pub fn cholesky(&self) -> Result<ComplexMatrix> {
        decomp::cholesky(self)
    }

    /// Sum of |λ| over the eigenvalues of `(M + M†)/2`. Internal fast path
    /// for trace norms of matrices that are Hermitian by construction.
    pub(crate) fn trace_norm_hermitian(&self) -> f64 {
        let eig = decomp::jacobi_hermitian_eigen(&self.symmetrize());
        eig.values.iter().map(|l| l.abs()).sum()
    }

    /// Eigenvector of the largest eigenvalue of a Hermitian matrix.
    pub(crate) fn top_eigenvector(&self) -> Vec<Complex64> {
        let eig = decomp::jacobi_hermitian_eigen(&self.symmetrize());
        eig.vectors.column(self.rows - 1)
    }
}

/// Complex inner product ⟨v|w⟩, conjugate-linear in the first slot.
pub fn vec_inner(v: &[Complex64], w: &[Complex64]) -> Complex64 {
    v.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kron_places_entries_in_row_major_blocks() {
        // |0⟩⟨0| ⊗ |1⟩⟨1| must have its single 1 at row 1, col 1 (0-based).
        let e00 = ComplexMatrix::from_fn(2, 2, |r, cc| {
            if r == 0 && cc == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) }
        });
        let e11 = ComplexMatrix::from_fn(2, 2, |r, cc| {
            if r == 1 && cc == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) }
        });
        let k = e00.kron(&e11);
        for r in 0..4 {
            for cc in 0..4 {
                let expect = if r == 1 && cc == 1 { 1.0 } else { 0.0 };
                assert_eq!(k.get(r, cc), c(expect, 0.0));
            }
        }
    }

    #[test]
    fn partial_trace_of_product_factorizes() {
        let a = ComplexMatrix::from_rows(vec![
            vec![c(0.7, 0.0), c(0.1, 0.2)],
            vec![c(0.1, -0.2), c(0.3, 0.0)],
        ])
        .unwrap();
        let b = ComplexMatrix::from_rows(vec![
            vec![c(0.4, 0.0), c(0.0, 0.1)],
            vec![c(0.0, -0.1), c(0.6, 0.0)],
        ])
        .unwrap();
        let ab = a.kron(&b);
        let tr_b = ab.partial_trace(2, 2, Subsystem::B).unwrap();
        let tr_a = ab.partial_trace(2, 2, Subsystem::A).unwrap();
        // Tr_B(A⊗B) = Tr(B)·A and Tr_A(A⊗B) = Tr(A)·B.
        let want_b = a.scale(b.trace());
        let want_a = b.scale(a.trace());
        assert!(tr_b.sub(&want_b).max_abs() < 1e-14);
        assert!(tr_a.sub(&want_a).max_abs() < 1e-14);
    }

    #[test]
    fn hermiticity_query_follows_documented_tolerance() {
        let mut m = ComplexMatrix::identity(3);
        assert!(m.is_hermitian());
        m.set(0, 1, c(0.0, 5e-13));
        assert!(m.is_hermitian(), "defect 5e-13 is inside 1e-12·max(1,‖M‖∞)");
        m.set(0, 1, c(0.0, 5e-11));
        assert!(!m.is_hermitian());
    }

    #[test]
    fn trace_and_hs_inner_agree() {
        let a = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(2.0, 1.0)],
            vec![c(0.0, -1.0), c(3.0, 0.0)],
        ])
        .unwrap();
        let b = ComplexMatrix::from_rows(vec![
            vec![c(0.5, 0.5), c(0.0, 0.0)],
            vec![c(1.0, 0.0), c(-1.0, 2.0)],
        ])
        .unwrap();
        let direct = a.adjoint().mul(&b).trace();
        let inner = a.hs_inner(&b);
        assert!((direct - inner).norm() < 1e-14);
    }
}
