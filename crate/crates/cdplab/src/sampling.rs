//! Seeded random generators for states, channels, and operators.
//!
//! Every randomized routine in the crate derives its stream from a root seed
//! plus a string label, so runs are reproducible and independent procedures
//! never share a stream.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matrixkit::{vec_norm, ComplexMatrix};
use crate::quantum::{BipartiteState, QuantumChannel};

/// FNV-1a hash of the label folded with the root seed; the fixed splitting
/// rule behind all per-component seeds.
pub fn child_seed(root: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in label.as_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    for b in root.to_le_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

pub fn rng_for(root: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(child_seed(root, label))
}

/// Standard normal via Box–Muller (avoids an extra distribution dependency).
pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn gauss_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(gauss(rng), gauss(rng))
}

/// Ginibre matrix: independent complex Gaussian entries.
pub fn ginibre(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m.set(r, c, gauss_complex(rng));
        }
    }
    m
}

/// Haar-like unit vector in C^dim.
pub fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim).map(|_| gauss_complex(rng)).collect();
    let n = vec_norm(&v);
    for z in v.iter_mut() {
        *z /= n;
    }
    v
}

pub fn random_pure_state(rng: &mut ChaCha8Rng, d_a: usize, d_b: usize) -> BipartiteState {
    let v = random_unit_vector(rng, d_a * d_b);
    BipartiteState::new(d_a, d_b, ComplexMatrix::outer(&v, &v))
        .expect("outer product of a unit vector is a state")
}

/// GG†/Tr density matrix of the given rank.
pub fn random_density_matrix(rng: &mut ChaCha8Rng, d: usize, rank: usize) -> ComplexMatrix {
    let g = ginibre(rng, d, rank.clamp(1, d));
    let m = g.mul(&g.adjoint());
    let tr = m.trace().re;
    m.scale_re(1.0 / tr).symmetrize()
}

pub fn random_bipartite_state(
    rng: &mut ChaCha8Rng,
    d_a: usize,
    d_b: usize,
    rank: usize,
) -> BipartiteState {
    let rho = random_density_matrix(rng, d_a * d_b, rank);
    BipartiteState::new(d_a, d_b, rho).expect("GG†/Tr is a state")
}

/// Haar-like unitary from the QR (modified Gram–Schmidt) of a Ginibre matrix,
/// with the R-diagonal phases absorbed.
pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let g = ginibre(rng, d, d);
    let mut cols: Vec<Vec<Complex64>> = (0..d).map(|c| g.column(c)).collect();
    for i in 0..d {
        for _ in 0..2 {
            for j in 0..i {
                let prev = cols[j].clone();
                let ov: Complex64 = prev
                    .iter()
                    .zip(&cols[i])
                    .map(|(u, v)| u.conj() * v)
                    .sum();
                for (vi, ui) in cols[i].iter_mut().zip(&prev) {
                    *vi -= ov * ui;
                }
            }
        }
        let n = vec_norm(&cols[i]);
        // The diagonal phase: rotate so the Gram–Schmidt pivot is positive,
        // which matches the Haar measure after a Ginibre start.
        let pivot = cols[i][i];
        let phase = if pivot.norm() > 1e-300 {
            pivot / pivot.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for z in cols[i].iter_mut() {
            *z = *z / (n * phase);
        }
    }
    ComplexMatrix::from_fn(d, d, |r, c| cols[c][r])
}

/// Traceless Hermitian matrix with Gaussian entries, normalized in 2-norm.
pub fn random_traceless_hermitian(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let g = ginibre(rng, d, d);
    let mut h = g.add(&g.adjoint()).scale_re(0.5);
    let shift = h.trace().re / d as f64;
    for i in 0..d {
        let v = h.get(i, i);
        h.set(i, i, Complex64::new(v.re - shift, 0.0));
    }
    let n = h.frobenius_norm();
    h.scale_re(1.0 / n)
}

/// Random CPTP map via a Stinespring isometry: QR-orthonormalize the columns
/// of a (d_out·kraus_count) × d_in Ginibre matrix and slice out the Kraus
/// blocks K_e = (𝟙 ⊗ ⟨e|)V.
pub fn random_channel(
    rng: &mut ChaCha8Rng,
    d_in: usize,
    d_out: usize,
    kraus_count: usize,
) -> QuantumChannel {
    let env = kraus_count.max(d_in.div_ceil(d_out));
    let rows = d_out * env;
    let g = ginibre(rng, rows, d_in);
    let mut cols: Vec<Vec<Complex64>> = (0..d_in).map(|c| g.column(c)).collect();
    for i in 0..d_in {
        for _ in 0..2 {
            for j in 0..i {
                let prev = cols[j].clone();
                let ov: Complex64 = prev
                    .iter()
                    .zip(&cols[i])
                    .map(|(u, v)| u.conj() * v)
                    .sum();
                for (vi, ui) in cols[i].iter_mut().zip(&prev) {
                    *vi -= ov * ui;
                }
            }
        }
        let n = vec_norm(&cols[i]);
        for z in cols[i].iter_mut() {
            *z /= n;
        }
    }
    let kraus: Vec<ComplexMatrix> = (0..env)
        .map(|e| ComplexMatrix::from_fn(d_out, d_in, |b, i| cols[i][b * env + e]))
        .collect();
    QuantumChannel::from_kraus(d_in, d_out, kraus).expect("isometry blocks form a channel")
}

/// Convex mixture Σ p_i ρ_i^A ⊗ ρ_i^B of random full-rank product states.
pub fn random_separable_mixture(
    rng: &mut ChaCha8Rng,
    d_a: usize,
    d_b: usize,
    terms: usize,
) -> BipartiteState {
    let terms = terms.max(1);
    let mut weights: Vec<f64> = (0..terms)
        .map(|_| -(rng.gen_range(f64::MIN_POSITIVE..1.0f64)).ln())
        .collect();
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    let mut rho = ComplexMatrix::zeros(d_a * d_b, d_a * d_b);
    for &w in &weights {
        let a = random_density_matrix(rng, d_a, d_a);
        let b = random_density_matrix(rng, d_b, d_b);
        rho = rho.add(&a.kron(&b).scale_re(w));
    }
    BipartiteState::new(d_a, d_b, rho).expect("mixture of states is a state")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn child_seeds_separate_labels_and_roots() {
        assert_ne!(child_seed(7, "ascent"), child_seed(7, "estimator"));
        assert_ne!(child_seed(7, "ascent"), child_seed(8, "ascent"));
        assert_eq!(child_seed(7, "ascent"), child_seed(7, "ascent"));
    }

    #[test]
    fn generators_are_deterministic_under_fixed_seed() {
        let a = random_bipartite_state(&mut rng_for(11, "t"), 2, 3, 6);
        let b = random_bipartite_state(&mut rng_for(11, "t"), 2, 3, 6);
        assert_eq!(a.rho.sub(&b.rho).max_abs(), 0.0);
    }

    #[test]
    fn random_unitary_is_unitary() {
        for d in [2, 3, 4] {
            let u = random_unitary(&mut rng_for(3, "u"), d);
            let defect = u
                .adjoint()
                .mul(&u)
                .sub(&ComplexMatrix::identity(d))
                .max_abs();
            assert!(defect < 1e-12, "d={d} defect {defect}");
        }
    }

    #[test]
    fn random_channel_dimensions_and_tp() {
        // Wide, square, and narrow output shapes; construction validates TP.
        for (d_in, d_out, k) in [(2, 3, 2), (3, 3, 4), (3, 2, 3)] {
            let ch = random_channel(&mut rng_for(5, "ch"), d_in, d_out, k);
            assert_eq!(ch.d_in, d_in);
            assert_eq!(ch.d_out, d_out);
        }
    }

    #[test]
    fn traceless_hermitian_is_traceless_unit_norm() {
        let h = random_traceless_hermitian(&mut rng_for(9, "h"), 3);
        assert!(h.trace().norm() < 1e-14);
        assert!((h.frobenius_norm() - 1.0).abs() < 1e-14);
        assert!(h.hermiticity_defect() < 1e-15);
    }

    #[test]
    fn separable_mixture_is_a_state_with_product_marginal_structure() {
        let s = random_separable_mixture(&mut rng_for(2, "sep"), 2, 2, 4);
        assert!((s.rho.trace().re - 1.0).abs() < 1e-12);
        assert_eq!(s.d_a, 2);
    }
}
