//! Jacobi-type decompositions. Cyclic sweeps with exact 2x2 annihilation
//! converge quadratically at these sizes; the sweep caps below are never hit
//! in practice and exist only to bound runtime on adversarial input.

use num_complex::Complex64;

use super::{vec_inner, vec_norm, ComplexMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone)]
pub struct Eigen {
    /// Ascending; ties keep their pre-sort order.
    pub values: Vec<f64>,
    /// Unitary; column j is the eigenvector of `values[j]`.
    pub vectors: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct Svd {
    /// m×m unitary.
    pub u: ComplexMatrix,
    /// Descending, length min(m, n); ties keep their pre-sort order.
    pub values: Vec<f64>,
    /// n×n unitary; `M = U·diag(values)·V†`.
    pub v: ComplexMatrix,
}

/// Unitary eigenvector matrix of the Hermitian 2x2 block [[a, z], [z̄, b]].
/// Returns (j11, j12, j21, j22) with column 1 belonging to the eigenvalue
/// nearest `a`, which keeps rotations close to the identity.
fn hermitian_2x2_rotation(a: f64, b: f64, z: Complex64) -> (Complex64, Complex64, Complex64, Complex64) {
    let delta = 0.5 * (a - b);
    let r = (delta * delta + z.norm_sqr()).sqrt();
    // Eigenvector of λ₊ = (a+b)/2 + r, picking the numerically safe formula.
    let (x, y) = if delta >= 0.0 {
        (Complex64::new(r + delta, 0.0), z.conj())
    } else {
        (z, Complex64::new(r - delta, 0.0))
    };
    let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
    let (v1x, v1y) = (x / n, y / n);
    // Orthogonal complement is the eigenvector of λ₋.
    let (v2x, v2y) = (-v1y.conj(), v1x.conj());
    // λ₊ sits at column 1 iff it is the eigenvalue closer to `a`.
    if delta >= 0.0 {
        (v1x, v2x, v1y, v2y)
    } else {
        (v2x, v1x, v2y, v1y)
    }
}

/// Right-multiply columns (p, q) of `m` by the 2x2 unitary J.
fn apply_rotation_cols(
    m: &mut ComplexMatrix,
    p: usize,
    q: usize,
    j: (Complex64, Complex64, Complex64, Complex64),
) {
    let (j11, j12, j21, j22) = j;
    for r in 0..m.rows {
        let mp = m.data[r * m.cols + p];
        let mq = m.data[r * m.cols + q];
        m.data[r * m.cols + p] = mp * j11 + mq * j21;
        m.data[r * m.cols + q] = mp * j12 + mq * j22;
    }
}

/// Left-multiply rows (p, q) of `m` by J†.
fn apply_rotation_rows(
    m: &mut ComplexMatrix,
    p: usize,
    q: usize,
    j: (Complex64, Complex64, Complex64, Complex64),
) {
    let (j11, j12, j21, j22) = j;
    for c in 0..m.cols {
        let mp = m.data[p * m.cols + c];
        let mq = m.data[q * m.cols + c];
        m.data[p * m.cols + c] = j11.conj() * mp + j21.conj() * mq;
        m.data[q * m.cols + c] = j12.conj() * mp + j22.conj() * mq;
    }
}

/// Cyclic Jacobi for Hermitian input (caller symmetrizes). Deterministic:
/// fixed sweep order, stable final sort.
pub(super) fn jacobi_hermitian_eigen(m: &ComplexMatrix) -> Eigen {
    let n = m.rows;
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.max_abs().max(1e-300);

    for _ in 0..MAX_SWEEPS {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a.get(p, q).norm());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let z = a.get(p, q);
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                if z.norm() <= 1e-18 * scale {
                    continue;
                }
                let j = hermitian_2x2_rotation(app, aqq, z);
                apply_rotation_rows(&mut a, p, q, j);
                apply_rotation_cols(&mut a, p, q, j);
                // Scrub the rotation's rounding residue; the 2x2 block is
                // annihilated exactly in exact arithmetic.
                let fixed = Complex64::new(0.0, 0.0);
                a.set(p, q, fixed);
                a.set(q, p, fixed);
                apply_rotation_cols(&mut v, p, q, j);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap().then(i.cmp(&j)));

    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v.get(r, order[c]));
    Eigen { values, vectors }
}

/// One-sided Jacobi SVD. Maintains W = M·V with V unitary; at convergence
/// the columns of W are orthogonal and their norms are the singular values.
pub(super) fn one_sided_jacobi_svd(m: &ComplexMatrix) -> Svd {
    if m.rows < m.cols {
        // M† = U'ΣV'† gives M = V'ΣU'†.
        let t = one_sided_jacobi_svd(&m.adjoint());
        return Svd {
            u: t.v,
            values: t.values,
            v: t.u,
        };
    }

    let (rows, n) = (m.rows, m.cols);
    let mut w = m.clone();
    let mut v = ComplexMatrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        let mut converged = true;
        for p in 0..n {
            for q in (p + 1)..n {
                let wp = w.column(p);
                let wq = w.column(q);
                let app = wp.iter().map(|z| z.norm_sqr()).sum::<f64>();
                let aqq = wq.iter().map(|z| z.norm_sqr()).sum::<f64>();
                let apq = vec_inner(&wp, &wq);
                if apq.norm_sqr() <= 1e-30 * app * aqq + 1e-300 {
                    continue;
                }
                converged = false;
                let j = hermitian_2x2_rotation(app, aqq, apq);
                apply_rotation_cols(&mut w, p, q, j);
                apply_rotation_cols(&mut v, p, q, j);
            }
        }
        if converged {
            break;
        }
    }

    let norms: Vec<f64> = (0..n).map(|c| vec_norm(&w.column(c))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let values: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let v_sorted = ComplexMatrix::from_fn(n, n, |r, c| v.get(r, order[c]));

    // Left vectors: normalized nonzero columns of W, then an orthonormal
    // completion for null directions and the m−n surplus.
    let sigma_max = values.first().copied().unwrap_or(0.0);
    let cutoff = sigma_max * (rows.max(n) as f64) * 1e-17;
    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(rows);
    for (slot, &i) in order.iter().enumerate() {
        if norms[i] > cutoff && norms[i] > 0.0 {
            let col = w.column(i);
            u_cols.push(col.iter().map(|z| z / norms[i]).collect());
        } else {
            // Placeholder; filled by completion below so indices stay aligned.
            u_cols.push(vec![Complex64::new(0.0, 0.0); rows]);
            let _ = slot;
        }
    }
    complete_orthonormal(&mut u_cols, rows);

    let u = ComplexMatrix::from_fn(rows, rows, |r, c| u_cols[c][r]);
    Svd {
        u,
        values,
        v: v_sorted,
    }
}

/// Replace zero placeholder columns and extend `cols` to a full orthonormal
/// basis of C^dim using Gram-Schmidt over standard basis candidates.
fn complete_orthonormal(cols: &mut Vec<Vec<Complex64>>, dim: usize) {
    let mut fixed: Vec<Vec<Complex64>> = cols
        .iter()
        .filter(|c| vec_norm(c) > 0.5)
        .cloned()
        .collect();
    let mut replacements: Vec<Vec<Complex64>> = Vec::new();
    let needed = dim - fixed.len();
    let mut cand = 0usize;
    while replacements.len() < needed && cand < dim {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[cand] = Complex64::new(1.0, 0.0);
        cand += 1;
        // Two rounds of projection keep orthogonality at machine precision.
        for _ in 0..2 {
            for u in fixed.iter().chain(replacements.iter()) {
                let ov = vec_inner(u, &v);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= ov * ui;
                }
            }
        }
        let nv = vec_norm(&v);
        if nv > 1e-8 {
            replacements.push(v.iter().map(|z| z / nv).collect());
        }
    }
    assert_eq!(replacements.len(), needed, "orthonormal completion failed");
    let mut rep_iter = replacements.into_iter();
    for col in cols.iter_mut() {
        if vec_norm(col) <= 0.5 {
            *col = rep_iter.next().unwrap();
        }
    }
    while cols.len() < dim {
        cols.push(rep_iter.next().unwrap());
    }
    let _ = fixed.drain(..);
}

/// Cholesky factor L (lower triangular) with M = L·L†. Fails on any
/// non-positive pivot, which doubles as the strict positivity test in the
/// interior-point line search.
pub(super) fn cholesky(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::InvalidInput("cholesky needs a square matrix".into()));
    }
    let n = m.rows;
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m.get(j, j).re;
        for k in 0..j {
            d -= l.get(j, k).norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::SolverFailed(format!(
                "matrix is not positive definite (pivot {d:.3e} at index {j})"
            )));
        }
        let djj = d.sqrt();
        l.set(j, j, Complex64::new(djj, 0.0));
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k).conj();
            }
            l.set(i, j, s / djj);
        }
    }
    Ok(l)
}

/// Solve L·L†·x = b given the Cholesky factor L.
pub(crate) fn cholesky_solve(l: &ComplexMatrix, b: &[Complex64]) -> Vec<Complex64> {
    let n = l.rows;
    assert_eq!(b.len(), n);
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let lik = l.get(i, k);
            y[i] = y[i] - lik * y[k];
        }
        y[i] /= l.get(i, i);
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let lki = l.get(k, i).conj();
            y[i] = y[i] - lki * y[k];
        }
        y[i] /= l.get(i, i);
    }
    y
}

/// Inverse of a Hermitian positive definite matrix via its Cholesky factor.
pub(crate) fn invert_hpd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let l = cholesky(m)?;
    let n = m.rows;
    let mut inv = ComplexMatrix::zeros(n, n);
    for c in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[c] = Complex64::new(1.0, 0.0);
        let x = cholesky_solve(&l, &e);
        for r in 0..n {
            inv.set(r, c, x[r]);
        }
    }
    // Symmetrize away the solve's rounding skew.
    Ok(inv.symmetrize())
}
