//! Ancilla-assisted process tomography: a bipartite probe with full operator
//! Schmidt rank pins down a channel on A from the single output state
//! (Λ ⊗ id)[ρ_AB]. Orthonormality of the B factors inverts the mixing,
//!
//!   Λ[A_i] = (1/r_i) · Tr_B[(𝟙 ⊗ B_i) X_out],
//!
//! and linearity extends the action to any input. The price of a small
//! lowest coefficient is amplification of output-state noise by 1/r_min —
//! the sensitivity sweep makes that scaling measurable.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrixkit::{hermitian_operator_basis, ComplexMatrix};
use crate::osd::{operator_schmidt, OperatorSchmidtDecomposition, DEFAULT_OSR_THRESHOLD};
use crate::quantum::{apply_channel_on_a, BipartiteState, QuantumChannel};
use crate::sampling::{ginibre, rng_for};

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub reconstructed_choi: ComplexMatrix,
    /// ‖J_rec − J_truth‖₂ when the generating channel is known.
    pub residual_to_truth: Option<f64>,
    /// 1/r_min — the factor by which output-state noise is amplified.
    pub conditioning: f64,
}

/// Tr_B[(𝟙 ⊗ b) x] for x acting on C^{d_left} ⊗ C^{d_b}.
fn contract_b(x: &ComplexMatrix, d_left: usize, d_b: usize, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(d_left, d_left, |a, ap| {
        let mut s = Complex64::new(0.0, 0.0);
        for row in 0..d_b {
            for col in 0..d_b {
                s += b.get(row, col) * x.get(a * d_b + col, ap * d_b + row);
            }
        }
        s
    })
}

/// Rebuilds the Choi matrix of the channel that produced `output_state`
/// from probe `osd`. The formula is run on the full Hermitian operator
/// basis of the input space and the results are assembled into
/// J = Σ_m F_mᵀ ⊗ Λ[F_m]; it is linear in `output_state`, so it accepts
/// noisy (non-state) data as well.
pub fn reconstruct_channel(
    output_state: &ComplexMatrix,
    osd: &OperatorSchmidtDecomposition,
    truth: Option<&QuantumChannel>,
) -> Result<ReconstructionResult> {
    let d_a = osd.d_a;
    let d_b = osd.d_b;
    let needed = d_a * d_a;
    if osd.rank < needed {
        return Err(Error::NotTomographicallyComplete {
            rank: osd.rank,
            needed,
        });
    }
    if !output_state.is_square() || output_state.rows % d_b != 0 {
        return Err(Error::InvalidInput(format!(
            "output state is {}x{}, expected a square matrix on (out ⊗ {d_b})",
            output_state.rows, output_state.cols
        )));
    }
    let d_out = output_state.rows / d_b;
    if !output_state.has_finite_entries() {
        return Err(Error::InvalidInput("output state has non-finite entries".into()));
    }

    // Λ[A_i], recovered factor by factor through the B-side orthonormality.
    let factor_images: Vec<ComplexMatrix> = (0..needed)
        .map(|i| {
            contract_b(output_state, d_out, d_b, &osd.ops_b[i])
                .scale_re(1.0 / osd.coefficients[i])
        })
        .collect();

    let inputs = hermitian_operator_basis(d_a)?;
    let mut choi = ComplexMatrix::zeros(d_a * d_out, d_a * d_out);
    for f_m in &inputs {
        let mut image = ComplexMatrix::zeros(d_out, d_out);
        for (i, lam_a) in factor_images.iter().enumerate() {
            let c_mi = osd.ops_a[i].hs_inner(f_m).re;
            image = image.add(&lam_a.scale_re(c_mi));
        }
        choi = choi.add(&f_m.transpose().kron(&image));
    }

    let residual_to_truth = truth.map(|t| choi.sub(&t.choi).frobenius_norm());
    Ok(ReconstructionResult {
        reconstructed_choi: choi,
        residual_to_truth,
        conditioning: 1.0 / osd.coefficient(needed),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct NoiseStats {
    pub noise_level: f64,
    pub trials: usize,
    pub mean_residual: f64,
    pub max_residual: f64,
    /// 1/r_min of the probe — the predicted amplification factor.
    pub conditioning: f64,
}

/// Hermitian perturbation with unit-independent direction and exact 2-norm
/// `level`; the direction stream depends only on (seed, trial), so sweeps
/// over states or noise levels are paired trial by trial.
fn noise_term(seed: u64, trial: usize, dim: usize, level: f64) -> ComplexMatrix {
    let g = ginibre(&mut rng_for(seed, &format!("noise-{trial}")), dim, dim);
    let h = g.add(&g.adjoint()).scale_re(0.5);
    let n = h.frobenius_norm();
    h.scale_re(level / n)
}

/// Forward-applies the channel, perturbs the output with random Hermitian
/// noise of 2-norm `noise_level`, reconstructs, and reports Choi-residual
/// statistics over `trials` independent directions.
pub fn noise_sensitivity(
    rho: &BipartiteState,
    channel: &QuantumChannel,
    noise_level: f64,
    trials: usize,
    seed: u64,
) -> Result<NoiseStats> {
    if trials == 0 {
        return Err(Error::InvalidInput("need at least one trial".into()));
    }
    if noise_level < 0.0 {
        return Err(Error::InvalidInput(format!(
            "noise level must be nonnegative, got {noise_level}"
        )));
    }
    let osd = operator_schmidt(rho, DEFAULT_OSR_THRESHOLD)?;
    let needed = rho.d_a * rho.d_a;
    if osd.rank < needed {
        return Err(Error::NotTomographicallyComplete {
            rank: osd.rank,
            needed,
        });
    }
    let clean = apply_channel_on_a(channel, rho)?.rho;
    let dim = clean.rows;
    let residuals: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let noisy = if noise_level == 0.0 {
                clean.clone()
            } else {
                clean.add(&noise_term(seed, t, dim, noise_level))
            };
            reconstruct_channel(&noisy, &osd, Some(channel))
                .map(|r| r.residual_to_truth.expect("truth was supplied"))
        })
        .collect::<Result<_>>()?;
    let mean = residuals.iter().sum::<f64>() / trials as f64;
    let max = residuals.iter().fold(0f64, |m, &r| m.max(r));
    Ok(NoiseStats {
        noise_level,
        trials,
        mean_residual: mean,
        max_residual: max,
        conditioning: 1.0 / osd.coefficient(needed),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub p: f64,
    pub r_min: f64,
    pub noise_level: f64,
    pub mean_residual: f64,
    pub max_residual: f64,
    pub trials: usize,
}

/// Noise-sensitivity sweep over isotropic probes: one row per
/// (mixing parameter, noise level), channel fixed to a seeded random
/// unitary so rows are comparable. r_min = p/d makes the 1/r_min
/// amplification directly visible down a column.
pub fn isotropic_sensitivity_sweep(
    d: usize,
    mixing_parameters: &[f64],
    noise_levels: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let u = crate::sampling::random_unitary(&mut rng_for(seed, "sweep-channel"), d);
    let channel = QuantumChannel::from_unitary(&u)?;
    let mut rows = Vec::new();
    for &p in mixing_parameters {
        let rho = crate::quantum::isotropic_state(d, p)?;
        let osd = operator_schmidt(&rho, DEFAULT_OSR_THRESHOLD)?;
        let r_min = osd.coefficient(d * d);
        for &level in noise_levels {
            let stats = noise_sensitivity(&rho, &channel, level, trials, seed)?;
            rows.push(SweepRow {
                p,
                r_min,
                noise_level: level,
                mean_residual: stats.mean_residual,
                max_residual: stats.max_residual,
                trials,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixkit::Subsystem;
    use crate::quantum::{isotropic_state, max_entangled_vec};
    use crate::sampling::{random_bipartite_state, random_channel, random_unitary};

    fn bell(d: usize) -> BipartiteState {
        let psi = max_entangled_vec(d);
        BipartiteState::new(d, d, ComplexMatrix::outer(&psi, &psi)).unwrap()
    }

    fn full_rank_probe(label: &str) -> (BipartiteState, OperatorSchmidtDecomposition) {
        for t in 0.. {
            let mut rng = rng_for(61, &format!("{label}-{t}"));
            let rho = random_bipartite_state(&mut rng, 2, 2, 4);
            let osd = operator_schmidt(&rho, DEFAULT_OSR_THRESHOLD).unwrap();
            if osd.rank == 4 {
                return (rho, osd);
            }
        }
        unreachable!()
    }

    #[test]
    fn identity_channel_is_a_fixed_point() {
        let rho = bell(2);
        let osd = operator_schmidt(&rho, DEFAULT_OSR_THRESHOLD).unwrap();
        let truth = QuantumChannel::identity(2);
        let out = apply_channel_on_a(&truth, &rho).unwrap();
        let rec = reconstruct_channel(&out.rho, &osd, Some(&truth)).unwrap();
        assert!(rec.residual_to_truth.unwrap() <= 1e-9);
        // The identity Choi matrix is d·(maximally entangled projector).
        let psi = max_entangled_vec(2);
        let expect = ComplexMatrix::outer(&psi, &psi).scale_re(2.0);
        assert!(rec.reconstructed_choi.sub(&expect).max_abs() < 1e-10);
        assert!((rec.conditioning - 2.0).abs() < 1e-9);
    }

    #[test]
    fn random_unitary_round_trip_on_an_isotropic_probe() {
        let rho = isotropic_state(2, 0.3).unwrap();
        let osd = operator_schmidt(&rho, DEFAULT_OSR_THRESHOLD).unwrap();
        let u = random_unitary(&mut rng_for(67, "round"), 2);
        let truth = QuantumChannel::from_unitary(&u).unwrap();
        let out = apply_channel_on_a(&truth, &rho).unwrap();
        let rec = reconstruct_channel(&out.rho, &osd, Some(&truth)).unwrap();
        assert!(rec.residual_to_truth.unwrap() <= 1e-8);
        // r_min = p/d for the isotropic probe.
        assert!((rec.conditioning - 2.0 / 0.3).abs() < 1e-8);
    }

    #[test]
    fn rank_deficient_probes_are_rejected_with_the_deficit() {
        let rho = isotropic_state(2, 0.0).unwrap();
        let osd = operator_schmidt(&rho, DEFAULT_OSR_THRESHOLD).unwrap();
        let out = ComplexMatrix::identity(4).scale_re(0.25);
        match reconstruct_channel(&out, &osd, None) {
            Err(Error::NotTomographicallyComplete { rank, needed }) => {
                assert_eq!((rank, needed), (1, 4));
            }
            other => panic!("expected rank error, got {other:?}"),
        }
    }

    #[test]
    fn round_trips_hold_on_random_probe_channel_pairs() {
        for t in 0..10 {
            let (rho, osd) = full_rank_probe(&format!("rt-{t}"));
            let mut rng = rng_for(71, &format!("rt-ch-{t}"));
            let truth = random_channel(&mut rng, 2, 2, 2);
            let out = apply_channel_on_a(&truth, &rho).unwrap();
            let rec = reconstruct_channel(&out.rho, &osd, Some(&truth)).unwrap();
            assert!(
                rec.residual_to_truth.unwrap() <= 1e-8,
                "case {t}: residual {}",
                rec.residual_to_truth.unwrap()
            );
        }
    }

    #[test]
    fn reconstruction_handles_rectangular_channels() {
        let rho = bell(2);
        let osd = operator_schmidt(&rho, DEFAULT_OSR_THRESHOLD).unwrap();
        let mut rng = rng_for(73, "rect");
        let truth = random_channel(&mut rng, 2, 3, 2);
        let out = apply_channel_on_a(&truth, &rho).unwrap();
        let rec = reconstruct_channel(&out.rho, &osd, Some(&truth)).unwrap();
        assert!(rec.residual_to_truth.unwrap() <= 1e-8);
        assert_eq!(rec.reconstructed_choi.rows, 6);
    }

    #[test]
    fn reconstruction_is_linear_in_the_output_data() {
        let (rho, osd) = full_rank_probe("lin");
        let mut rng = rng_for(79, "lin-ch");
        let ca = random_channel(&mut rng, 2, 2, 2);
        let cb = random_channel(&mut rng, 2, 2, 1);
        let xa = apply_channel_on_a(&ca, &rho).unwrap().rho;
        let xb = apply_channel_on_a(&cb, &rho).unwrap().rho;
        let (alpha, beta) = (0.7, -1.3);
        let mixed = xa.scale_re(alpha).add(&xb.scale_re(beta));
        let ja = reconstruct_channel(&xa, &osd, None).unwrap().reconstructed_choi;
        let jb = reconstruct_channel(&xb, &osd, None).unwrap().reconstructed_choi;
        let jm = reconstruct_channel(&mixed, &osd, None).unwrap().reconstructed_choi;
        let expect = ja.scale_re(alpha).add(&jb.scale_re(beta));
        assert!(jm.sub(&expect).max_abs() < 1e-9);
    }

    #[test]
    fn noiseless_reconstruction_yields_a_valid_choi_matrix() {
        let (rho, osd) = full_rank_probe("psd");
        let mut rng = rng_for(83, "psd-ch");
        let truth = random_channel(&mut rng, 2, 2, 2);
        let out = apply_channel_on_a(&truth, &rho).unwrap();
        let j = reconstruct_channel(&out.rho, &osd, None)
            .unwrap()
            .reconstructed_choi;
        let eig = j.symmetrize().hermitian_eigen().unwrap();
        assert!(eig.values[0] > -1e-8, "lowest eigenvalue {}", eig.values[0]);
        let tp = j.partial_trace(2, 2, Subsystem::B).unwrap();
        assert!(tp.sub(&ComplexMatrix::identity(2)).max_abs() < 1e-8);
    }

    #[test]
    fn zero_noise_statistics_collapse_to_the_round_trip_error() {
        let rho = isotropic_state(2, 0.5).unwrap();
        let truth = QuantumChannel::identity(2);
        let stats = noise_sensitivity(&rho, &truth, 0.0, 3, 89).unwrap();
        assert!(stats.mean_residual <= 1e-9);
        assert!(stats.max_residual <= 1e-9);
    }

    #[test]
    fn noise_amplification_tracks_the_lowest_coefficient() {
        let truth = QuantumChannel::identity(2);
        let mut means = Vec::new();
        for p in [1.0, 0.5, 0.1] {
            let rho = isotropic_state(2, p).unwrap();
            let stats = noise_sensitivity(&rho, &truth, 1e-6, 8, 97).unwrap();
            means.push(stats.mean_residual);
        }
        // Paired noise directions: smaller p (smaller r_min) must hurt more.
        assert!(means[0] < means[1] && means[1] < means[2], "means {means:?}");
    }

    #[test]
    fn sweep_rows_carry_the_probe_conditioning() {
        let rows = isotropic_sensitivity_sweep(2, &[1.0, 0.4], &[0.0, 1e-6], 4, 101).unwrap();
        assert_eq!(rows.len(), 4);
        assert!((rows[0].r_min - 0.5).abs() < 1e-12);
        assert!((rows[2].r_min - 0.2).abs() < 1e-12);
        // Zero-noise rows sit at numerical round-trip error.
        assert!(rows[0].mean_residual <= 1e-9 && rows[2].mean_residual <= 1e-9);
        // At equal noise the worse-conditioned probe reconstructs worse.
        assert!(rows[3].mean_residual > rows[1].mean_residual);
    }
}
