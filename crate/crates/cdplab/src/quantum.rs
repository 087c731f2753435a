//! Validated quantum objects: bipartite density operators, pure states with
//! their Schmidt data, quantum channels (Kraus and Choi forms), and
//! Hermitian-preserving maps such as channel differences.
//!
//! Choi convention: the input copy sits on the first tensor slot,
//! `J(Λ) = Σ_ij E_ij ⊗ Λ[E_ij]`, so `Tr J = d_in` and trace-preservation
//! reads `Tr_out J = 𝟙_in`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrixkit::{vec_inner, vec_norm, ComplexMatrix, Subsystem};

/// Absolute Hermiticity tolerance for density operators.
pub const STATE_HERM_TOL: f64 = 1e-10;
/// Absolute trace tolerance for density operators.
pub const STATE_TRACE_TOL: f64 = 1e-10;
/// Eigenvalues in [STATE_EIG_FLOOR, 0) are clipped to zero on construction.
pub const STATE_EIG_FLOOR: f64 = -1e-10;
/// Trace-preservation and complete-positivity tolerance for channels.
pub const CHANNEL_TOL: f64 = 1e-9;

/// A density operator on C^dA ⊗ C^dB (composite index `a·dB + b`).
///
/// Construction validates Hermiticity, unit trace, and positivity; tiny
/// negative eigenvalues inside the floor are clipped and the operator is
/// renormalized, so the stored matrix is exactly a state up to rounding.
#[derive(Debug, Clone)]
pub struct BipartiteState {
    pub d_a: usize,
    pub d_b: usize,
    pub rho: ComplexMatrix,
}

impl BipartiteState {
    pub fn new(d_a: usize, d_b: usize, rho: ComplexMatrix) -> Result<Self> {
        let dim = d_a * d_b;
        if d_a == 0 || d_b == 0 {
            return Err(Error::Validation("subsystem dimensions must be ≥ 1".into()));
        }
        if rho.rows != dim || rho.cols != dim {
            return Err(Error::Validation(format!(
                "state matrix is {}x{}, expected {dim}x{dim} for dA={d_a}, dB={d_b}",
                rho.rows, rho.cols
            )));
        }
        if !rho.has_finite_entries() {
            return Err(Error::Validation("state matrix has non-finite entries".into()));
        }
        let defect = rho.hermiticity_defect();
        if defect > STATE_HERM_TOL * 1f64.max(rho.max_abs()) {
            return Err(Error::Validation(format!(
                "state is not Hermitian: defect {defect:.3e}"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > STATE_TRACE_TOL || tr.im.abs() > STATE_TRACE_TOL {
            return Err(Error::Validation(format!(
                "state trace {tr} differs from 1 beyond 1e-10"
            )));
        }
        let sym = rho.symmetrize();
        let eig = sym.hermitian_eigen()?;
        let min_eig = eig.values.first().copied().unwrap_or(0.0);
        if min_eig < STATE_EIG_FLOOR {
            return Err(Error::Validation(format!(
                "state has negative eigenvalue {min_eig:.3e} below the 1e-10 floor"
            )));
        }
        // Clip the within-floor negatives and renormalize.
        let clipped: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let lam = ComplexMatrix::from_diag(
            &clipped
                .iter()
                .map(|&l| Complex64::new(l / total, 0.0))
                .collect::<Vec<_>>(),
        );
        let cleaned = eig.vectors.mul(&lam).mul(&eig.vectors.adjoint()).symmetrize();
        Ok(BipartiteState {
            d_a,
            d_b,
            rho: cleaned,
        })
    }

    pub fn dim(&self) -> usize {
        self.d_a * self.d_b
    }

    /// Tr(ρ²); 1 for pure states.
    pub fn purity(&self) -> f64 {
        self.rho.hs_inner(&self.rho).re
    }

    pub fn reduced_a(&self) -> ComplexMatrix {
        self.rho
            .partial_trace(self.d_a, self.d_b, Subsystem::B)
            .expect("dimensions validated at construction")
    }

    pub fn reduced_b(&self) -> ComplexMatrix {
        self.rho
            .partial_trace(self.d_a, self.d_b, Subsystem::A)
            .expect("dimensions validated at construction")
    }

    /// The same state with the subsystems exchanged.
    pub fn swapped(&self) -> BipartiteState {
        BipartiteState {
            d_a: self.d_b,
            d_b: self.d_a,
            rho: swap_subsystems(&self.rho, self.d_a, self.d_b),
        }
    }
}

/// Reorder an operator on C^dA ⊗ C^dB into one on C^dB ⊗ C^dA.
pub fn swap_subsystems(m: &ComplexMatrix, d_a: usize, d_b: usize) -> ComplexMatrix {
    assert_eq!(m.rows, d_a * d_b);
    assert_eq!(m.cols, d_a * d_b);
    ComplexMatrix::from_fn(m.rows, m.cols, |r, c| {
        let (b, a) = (r / d_a, r % d_a);
        let (bp, ap) = (c / d_a, c % d_a);
        m.get(a * d_b + b, ap * d_b + bp)
    })
}

/// A pure bipartite state together with its Schmidt data.
#[derive(Debug, Clone)]
pub struct PureBipartiteState {
    pub d_a: usize,
    pub d_b: usize,
    /// Composite-index amplitudes, ‖ψ‖ = 1 within 1e-12.
    pub amplitudes: Vec<Complex64>,
    /// Schmidt weights p_k, descending, summing to 1; length min(dA, dB).
    pub schmidt_coefficients: Vec<f64>,
    /// Columns are the A-side Schmidt vectors (unitary, includes the null
    /// completion when the Schmidt rank is deficient).
    pub schmidt_basis_a: ComplexMatrix,
    /// Columns are the B-side Schmidt vectors.
    pub schmidt_basis_b: ComplexMatrix,
}

/// Schmidt decomposition of a normalized amplitude vector:
/// ψ = Σ_k √p_k |a_k⟩|b_k⟩ with p_k descending.
pub fn schmidt_decompose(amplitudes: &[Complex64], d_a: usize, d_b: usize) -> Result<PureBipartiteState> {
    if amplitudes.len() != d_a * d_b {
        return Err(Error::Validation(format!(
            "amplitude vector has length {}, expected {}",
            amplitudes.len(),
            d_a * d_b
        )));
    }
    let norm = vec_norm(amplitudes);
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Validation(format!(
            "pure state norm {norm} differs from 1 beyond 1e-12"
        )));
    }
    // ψ_{ab} as a dA×dB coefficient matrix; M = UΣV† gives
    // ψ = Σ_k σ_k |u_k⟩ ⊗ |conj(v_k)⟩.
    let m = ComplexMatrix::from_fn(d_a, d_b, |a, b| amplitudes[a * d_b + b]);
    let svd = m.svd()?;
    let p: Vec<f64> = svd.values.iter().map(|s| s * s).collect();
    Ok(PureBipartiteState {
        d_a,
        d_b,
        amplitudes: amplitudes.to_vec(),
        schmidt_coefficients: p,
        schmidt_basis_a: svd.u,
        schmidt_basis_b: svd.v.conj(),
    })
}

impl PureBipartiteState {
    /// Schmidt weight p_k (1-indexed); 0 beyond the stored list, so
    /// `schmidt_weight(d_a)` is well-defined even when dA > dB.
    pub fn schmidt_weight(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.schmidt_coefficients.get(k - 1).copied().unwrap_or(0.0)
    }

    pub fn schmidt_rank(&self, threshold: f64) -> usize {
        let top = self.schmidt_coefficients.first().copied().unwrap_or(0.0);
        self.schmidt_coefficients
            .iter()
            .filter(|&&p| p > threshold * top)
            .count()
    }

    pub fn to_state(&self) -> BipartiteState {
        let rho = ComplexMatrix::outer(&self.amplitudes, &self.amplitudes);
        BipartiteState::new(self.d_a, self.d_b, rho).expect("outer product of a unit vector is a state")
    }
}

/// vec(K) with the input index on the slow slot: for K: C^din → C^dout,
/// `vec(K)[i·dout + a] = K[a, i]`, matching the Choi convention
/// J(X ↦ KXK†) = vec(K)·vec(K)†.
fn vec_kraus(k: &ComplexMatrix) -> Vec<Complex64> {
    let (d_out, d_in) = (k.rows, k.cols);
    let mut v = vec![Complex64::new(0.0, 0.0); d_in * d_out];
    for a in 0..d_out {
        for i in 0..d_in {
            v[i * d_out + a] = k.get(a, i);
        }
    }
    v
}

fn unvec_kraus(v: &[Complex64], d_in: usize, d_out: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d_out, d_in, |a, i| v[i * d_out + a])
}

/// Choi matrix of the map with the given Kraus operators.
pub fn choi_of(kraus: &[ComplexMatrix], d_in: usize, d_out: usize) -> Result<ComplexMatrix> {
    if kraus.is_empty() {
        return Err(Error::InvalidInput("empty Kraus list".into()));
    }
    let mut j = ComplexMatrix::zeros(d_in * d_out, d_in * d_out);
    for k in kraus {
        if k.rows != d_out || k.cols != d_in {
            return Err(Error::InvalidInput(format!(
                "Kraus operator is {}x{}, expected {d_out}x{d_in}",
                k.rows, k.cols
            )));
        }
        let v = vec_kraus(k);
        j = j.add(&ComplexMatrix::outer(&v, &v));
    }
    Ok(j)
}

/// Kraus operators of a completely positive map given its Choi matrix.
/// Eigenvalues below −1e-9 (relative to the largest) are a CP violation.
pub fn kraus_of(choi: &ComplexMatrix, d_in: usize, d_out: usize) -> Result<Vec<ComplexMatrix>> {
    if choi.rows != d_in * d_out || choi.cols != d_in * d_out {
        return Err(Error::InvalidInput(format!(
            "Choi matrix is {}x{}, expected {0}x{0} with d =",
            choi.rows, choi.cols
        )
        .replace("with d =", &format!("({})", d_in * d_out))));
    }
    let eig = choi.hermitian_eigen()?;
    let scale = eig.values.iter().fold(0f64, |m, &l| m.max(l.abs())).max(1.0);
    let mut kraus = Vec::new();
    for (idx, &lam) in eig.values.iter().enumerate() {
        if lam < CHANNEL_TOL.copysign(-1.0) * scale {
            return Err(Error::NotCompletelyPositive(format!(
                "Choi eigenvalue {lam:.3e} below the −1e-9 tolerance"
            )));
        }
        if lam > 1e-14 * scale {
            let col = eig.vectors.column(idx);
            kraus.push(unvec_kraus(&col, d_in, d_out).scale_re(lam.sqrt()));
        }
    }
    if kraus.is_empty() {
        // The zero map has no Kraus operators; callers treat this as CP.
        kraus.push(ComplexMatrix::zeros(d_out, d_in));
    }
    Ok(kraus)
}

/// A completely positive trace-preserving map, stored in both Kraus and Choi
/// forms (they are kept consistent at construction).
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    pub d_in: usize,
    pub d_out: usize,
    pub kraus: Vec<ComplexMatrix>,
    pub choi: ComplexMatrix,
}

impl QuantumChannel {
    pub fn from_kraus(d_in: usize, d_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::Validation("channel needs at least one Kraus operator".into()));
        }
        for k in &kraus {
            if k.rows != d_out || k.cols != d_in {
                return Err(Error::Validation(format!(
                    "Kraus operator is {}x{}, expected {d_out}x{d_in}",
                    k.rows, k.cols
                )));
            }
            if !k.has_finite_entries() {
                return Err(Error::Validation("Kraus operator has non-finite entries".into()));
            }
        }
        // Σ K†K = 𝟙 within 1e-9.
        let mut sum = ComplexMatrix::zeros(d_in, d_in);
        for k in &kraus {
            sum = sum.add(&k.adjoint().mul(k));
        }
        let defect = sum.sub(&ComplexMatrix::identity(d_in)).max_abs();
        if defect > CHANNEL_TOL {
            return Err(Error::Validation(format!(
                "channel is not trace preserving: Σ K†K defect {defect:.3e}"
            )));
        }
        let choi = choi_of(&kraus, d_in, d_out)?;
        Ok(QuantumChannel {
            d_in,
            d_out,
            kraus,
            choi,
        })
    }

    pub fn from_choi(d_in: usize, d_out: usize, choi: ComplexMatrix) -> Result<Self> {
        let defect = choi.hermiticity_defect();
        if defect > STATE_HERM_TOL * 1f64.max(choi.max_abs()) {
            return Err(Error::Validation(format!(
                "Choi matrix is not Hermitian: defect {defect:.3e}"
            )));
        }
        let kraus = kraus_of(&choi.symmetrize(), d_in, d_out)?;
        let tr_out = choi
            .partial_trace(d_in, d_out, Subsystem::B)?
            .sub(&ComplexMatrix::identity(d_in));
        if tr_out.max_abs() > CHANNEL_TOL {
            return Err(Error::Validation(format!(
                "Choi matrix is not trace preserving: Tr_out defect {:.3e}",
                tr_out.max_abs()
            )));
        }
        // Rebuild the Choi from the cleaned Kraus set so both forms agree.
        let choi = choi_of(&kraus, d_in, d_out)?;
        Ok(QuantumChannel {
            d_in,
            d_out,
            kraus,
            choi,
        })
    }

    pub fn identity(d: usize) -> Self {
        QuantumChannel::from_kraus(d, d, vec![ComplexMatrix::identity(d)])
            .expect("identity is a channel")
    }

    pub fn from_unitary(u: &ComplexMatrix) -> Result<Self> {
        let gram = u.adjoint().mul(u);
        if gram.sub(&ComplexMatrix::identity(u.cols)).max_abs() > CHANNEL_TOL {
            return Err(Error::Validation("matrix is not unitary within 1e-9".into()));
        }
        QuantumChannel::from_kraus(u.cols, u.rows, vec![u.clone()])
    }

    /// Fully dephasing channel in the computational basis.
    pub fn dephasing(d: usize) -> Self {
        let kraus = (0..d)
            .map(|i| {
                let mut k = ComplexMatrix::zeros(d, d);
                k.set(i, i, Complex64::new(1.0, 0.0));
                k
            })
            .collect();
        QuantumChannel::from_kraus(d, d, kraus).expect("dephasing is a channel")
    }

    /// X ↦ Tr(X)·𝟙/d.
    pub fn completely_depolarizing(d: usize) -> Self {
        let s = 1.0 / (d as f64).sqrt();
        let mut kraus = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut k = ComplexMatrix::zeros(d, d);
                k.set(i, j, Complex64::new(s, 0.0));
                kraus.push(k);
            }
        }
        QuantumChannel::from_kraus(d, d, kraus).expect("depolarizing is a channel")
    }

    /// X ↦ Tr(X)·σ for a fixed output state σ.
    pub fn replacer(d_in: usize, sigma: &ComplexMatrix) -> Result<Self> {
        let eig = sigma.hermitian_eigen()?;
        let d_out = sigma.rows;
        let mut kraus = Vec::new();
        for (idx, &s) in eig.values.iter().enumerate() {
            if s < -1e-12 {
                return Err(Error::Validation("replacement operator is not PSD".into()));
            }
            if s > 1e-14 {
                let phi = eig.vectors.column(idx);
                for j in 0..d_in {
                    let mut k = ComplexMatrix::zeros(d_out, d_in);
                    for (r, amp) in phi.iter().enumerate() {
                        k.set(r, j, amp * s.sqrt());
                    }
                    kraus.push(k);
                }
            }
        }
        QuantumChannel::from_kraus(d_in, d_out, kraus)
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(x.rows, self.d_in, "channel input dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out = out.add(&k.mul(x).mul(&k.adjoint()));
        }
        out
    }

    /// View the channel as a Hermitian-preserving map (weights all +1).
    pub fn as_hp_map(&self) -> HermitianPreservingMap {
        HermitianPreservingMap {
            d_in: self.d_in,
            d_out: self.d_out,
            choi: self.choi.clone(),
            terms: self.kraus.iter().map(|k| (1.0, k.clone())).collect(),
        }
    }
}

/// A Hermitian-preserving (not necessarily positive) map, typically a
/// difference of two channels. Stored as a Hermitian Choi matrix plus a
/// signed operator-sum form Λ[X] = Σ_k λ_k V_k X V_k†.
#[derive(Debug, Clone)]
pub struct HermitianPreservingMap {
    pub d_in: usize,
    pub d_out: usize,
    pub choi: ComplexMatrix,
    terms: Vec<(f64, ComplexMatrix)>,
}

impl HermitianPreservingMap {
    pub fn from_choi(d_in: usize, d_out: usize, choi: ComplexMatrix) -> Result<Self> {
        if choi.rows != d_in * d_out || choi.cols != d_in * d_out {
            return Err(Error::InvalidInput(format!(
                "Choi matrix is {}x{}, expected {}",
                choi.rows,
                choi.cols,
                d_in * d_out
            )));
        }
        let defect = choi.hermiticity_defect();
        if defect > STATE_HERM_TOL * 1f64.max(choi.max_abs()) {
            return Err(Error::NotHermitian {
                defect,
                tol: STATE_HERM_TOL * 1f64.max(choi.max_abs()),
            });
        }
        let sym = choi.symmetrize();
        let eig = sym.hermitian_eigen()?;
        let scale = eig.values.iter().fold(0f64, |m, &l| m.max(l.abs())).max(1e-300);
        let mut terms = Vec::new();
        for (idx, &lam) in eig.values.iter().enumerate() {
            if lam.abs() > 1e-14 * scale {
                let col = eig.vectors.column(idx);
                terms.push((lam, unvec_kraus(&col, d_in, d_out)));
            }
        }
        Ok(HermitianPreservingMap {
            d_in,
            d_out,
            choi: sym,
            terms,
        })
    }

    /// Λ₀ − Λ₁. The operator-sum form reuses the channels' Kraus operators
    /// with signs, which is exact (no eigendecomposition round-off).
    pub fn from_channel_difference(a: &QuantumChannel, b: &QuantumChannel) -> Result<Self> {
        if a.d_in != b.d_in || a.d_out != b.d_out {
            return Err(Error::InvalidInput(format!(
                "channel dimensions differ: {}→{} vs {}→{}",
                a.d_in, a.d_out, b.d_in, b.d_out
            )));
        }
        let mut terms: Vec<(f64, ComplexMatrix)> =
            a.kraus.iter().map(|k| (1.0, k.clone())).collect();
        terms.extend(b.kraus.iter().map(|k| (-1.0, k.clone())));
        Ok(HermitianPreservingMap {
            d_in: a.d_in,
            d_out: a.d_out,
            choi: a.choi.sub(&b.choi),
            terms,
        })
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(x.rows, self.d_in, "map input dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.d_out, self.d_out);
        for (w, v) in &self.terms {
            out = out.add(&v.mul(x).mul(&v.adjoint()).scale_re(*w));
        }
        out
    }

    /// Adjoint map with respect to the Hilbert-Schmidt inner product:
    /// Λ†[Y] = Σ_k λ_k V_k† Y V_k.
    pub fn apply_adjoint(&self, y: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(y.rows, self.d_out, "adjoint input dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.d_in, self.d_in);
        for (w, v) in &self.terms {
            out = out.add(&v.adjoint().mul(y).mul(v).scale_re(*w));
        }
        out
    }

    /// (Λ ⊗ id_B)[X] for X on C^d_in ⊗ C^dB.
    pub fn apply_on_a(&self, x: &ComplexMatrix, d_b: usize) -> Result<ComplexMatrix> {
        if x.rows != self.d_in * d_b || x.cols != self.d_in * d_b {
            return Err(Error::InvalidInput(format!(
                "joint operator is {}x{}, expected {} (d_in {} × dB {})",
                x.rows,
                x.cols,
                self.d_in * d_b,
                self.d_in,
                d_b
            )));
        }
        let eye_b = ComplexMatrix::identity(d_b);
        let mut out = ComplexMatrix::zeros(self.d_out * d_b, self.d_out * d_b);
        for (w, v) in &self.terms {
            let vb = v.kron(&eye_b);
            out = out.add(&vb.mul(x).mul(&vb.adjoint()).scale_re(*w));
        }
        Ok(out)
    }

    /// (Λ† ⊗ id_B)[Y] for Y on C^d_out ⊗ C^dB.
    pub fn apply_adjoint_on_a(&self, y: &ComplexMatrix, d_b: usize) -> Result<ComplexMatrix> {
        if y.rows != self.d_out * d_b || y.cols != self.d_out * d_b {
            return Err(Error::InvalidInput(format!(
                "joint operator is {}x{}, expected {} (d_out {} × dB {})",
                y.rows,
                y.cols,
                self.d_out * d_b,
                self.d_out,
                d_b
            )));
        }
        let eye_b = ComplexMatrix::identity(d_b);
        let mut out = ComplexMatrix::zeros(self.d_in * d_b, self.d_in * d_b);
        for (w, v) in &self.terms {
            let vb = v.kron(&eye_b);
            out = out.add(&vb.adjoint().mul(y).mul(&vb).scale_re(*w));
        }
        Ok(out)
    }

    /// (id_A ⊗ Λ)[X] for X on C^dA ⊗ C^d_in.
    pub fn apply_on_b(&self, x: &ComplexMatrix, d_a: usize) -> Result<ComplexMatrix> {
        let swapped = swap_subsystems(x, d_a, self.d_in);
        let mapped = self.apply_on_a(&swapped, d_a)?;
        Ok(swap_subsystems(&mapped, self.d_out, d_a))
    }

    pub fn terms(&self) -> &[(f64, ComplexMatrix)] {
        &self.terms
    }
}

/// (Λ ⊗ id)[ρ] for a channel acting on the A side of a state; the output is
/// a state on C^d_out ⊗ C^dB.
pub fn apply_channel_on_a(channel: &QuantumChannel, state: &BipartiteState) -> Result<BipartiteState> {
    if channel.d_in != state.d_a {
        return Err(Error::InvalidInput(format!(
            "channel input dimension {} does not match dA = {}",
            channel.d_in, state.d_a
        )));
    }
    let out = channel.as_hp_map().apply_on_a(&state.rho, state.d_b)?;
    BipartiteState::new(channel.d_out, state.d_b, out)
}

/// (id ⊗ Λ)[ρ] for a channel acting on the B side.
pub fn apply_channel_on_b(channel: &QuantumChannel, state: &BipartiteState) -> Result<BipartiteState> {
    if channel.d_in != state.d_b {
        return Err(Error::InvalidInput(format!(
            "channel input dimension {} does not match dB = {}",
            channel.d_in, state.d_b
        )));
    }
    let out = channel.as_hp_map().apply_on_b(&state.rho, state.d_a)?;
    BipartiteState::new(state.d_a, channel.d_out, out)
}

/// Amplitudes of the maximally entangled state (1/√d)Σ|ii⟩.
pub fn max_entangled_vec(d: usize) -> Vec<Complex64> {
    let s = 1.0 / (d as f64).sqrt();
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        v[i * d + i] = Complex64::new(s, 0.0);
    }
    v
}

/// Isotropic state (1−p)·𝟙/d² + p·|ψ⁺⟩⟨ψ⁺| on C^d ⊗ C^d.
pub fn isotropic_state(d: usize, p: f64) -> Result<BipartiteState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!(
            "isotropic mixing parameter p = {p} outside [0, 1]"
        )));
    }
    let dim = d * d;
    let psi = max_entangled_vec(d);
    let ent = ComplexMatrix::outer(&psi, &psi);
    let rho = ComplexMatrix::identity(dim)
        .scale_re((1.0 - p) / dim as f64)
        .add(&ent.scale_re(p));
    BipartiteState::new(d, d, rho)
}

/// Extension of a purification: for ρ_AB with marginal ρ_A, produces a
/// purification Ψ on A ⊗ A′ (d_A′ = dA) and a channel Λ: A′ → B with
/// (id ⊗ Λ)[Ψ] = ρ_AB, realized by relating Ψ to a purification of ρ_AB
/// through an isometry into B ⊗ C and tracing out C.
#[derive(Debug, Clone)]
pub struct PurificationExtension {
    /// Purification of ρ_A on A ⊗ A′.
    pub purification: PureBipartiteState,
    /// Channel from A′ (dimension dA) to B.
    pub channel: QuantumChannel,
    /// ‖(id ⊗ Λ)[ΨΨ†] − ρ_AB‖₂.
    pub residual: f64,
}

pub fn purify_and_extend(state: &BipartiteState) -> Result<PurificationExtension> {
    let (d_a, d_b) = (state.d_a, state.d_b);
    let rho_a = state.reduced_a();
    let eig_a = rho_a.hermitian_eigen()?;
    // Descending eigenpairs of ρ_A.
    let mut q: Vec<f64> = eig_a.values.iter().rev().map(|&l| l.max(0.0)).collect();
    let e_vecs: Vec<Vec<Complex64>> = (0..d_a)
        .rev()
        .map(|c| eig_a.vectors.column(c))
        .collect();
    let qsum: f64 = q.iter().sum();
    for qi in q.iter_mut() {
        *qi /= qsum;
    }

    // Ψ = Σ_i √q_i |e_i⟩_A |i⟩_A′.
    let mut psi = vec![Complex64::new(0.0, 0.0); d_a * d_a];
    for (i, (qi, e)) in q.iter().zip(&e_vecs).enumerate() {
        let w = qi.sqrt();
        for (a, amp) in e.iter().enumerate() {
            psi[a * d_a + i] += amp * w;
        }
    }
    let purification = schmidt_decompose(&psi, d_a, d_a)?;

    // Purification Φ of ρ_AB on A ⊗ B ⊗ C, with C padded so that
    // dB·dC ≥ dA (needed for the isometry A′ → B ⊗ C to exist).
    let eig_ab = state.rho.hermitian_eigen()?;
    let kept: Vec<(f64, Vec<Complex64>)> = (0..state.dim())
        .rev()
        .map(|c| (eig_ab.values[c].max(0.0), eig_ab.vectors.column(c)))
        .filter(|(l, _)| *l > 1e-15)
        .collect();
    let d_c = kept.len().max(d_a.div_ceil(d_b));
    let d_bc = d_b * d_c;

    // w_i = (⟨e_i| ⊗ 𝟙_BC)|Φ⟩, assembled directly: Φ's C index is the
    // eigenvector label, so w_i[(b, c)] = √μ_c Σ_a conj(e_i[a]) φ_c[a·dB+b].
    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(d_a);
    for (i, e) in e_vecs.iter().enumerate() {
        let mut w = vec![Complex64::new(0.0, 0.0); d_bc];
        for (c, (mu, phi)) in kept.iter().enumerate() {
            let wmu = mu.sqrt();
            for b in 0..d_b {
                let mut acc = Complex64::new(0.0, 0.0);
                for (a, ea) in e.iter().enumerate() {
                    acc += ea.conj() * phi[a * d_b + b];
                }
                w[b * d_c + c] = acc * wmu;
            }
        }
        // ‖w_i‖² = q_i; for usable weight, the isometry column is w_i/√q_i.
        if q[i] > 1e-12 {
            let n = vec_norm(&w);
            u_cols.push(w.iter().map(|z| z / n).collect());
        } else {
            u_cols.push(vec![Complex64::new(0.0, 0.0); d_bc]);
        }
    }
    // Orthonormalize (descending-q order) to scrub rounding cross-talk from
    // near-zero eigenvalues, then complete null columns.
    gram_schmidt_fix(&mut u_cols);

    // Kraus operators of Λ = Tr_C ∘ (U · U†): K_c = (𝟙_B ⊗ ⟨c|)U.
    let kraus: Vec<ComplexMatrix> = (0..d_c)
        .map(|c| ComplexMatrix::from_fn(d_b, d_a, |b, i| u_cols[i][b * d_c + c]))
        .collect();
    let channel = QuantumChannel::from_kraus(d_a, d_b, kraus)?;

    let psi_dm = ComplexMatrix::outer(&psi, &psi);
    let extended = channel.as_hp_map().apply_on_b(&psi_dm, d_a)?;
    let residual = extended.sub(&state.rho).frobenius_norm();
    Ok(PurificationExtension {
        purification,
        channel,
        residual,
    })
}

/// Orthonormalize nonzero columns in order and replace zero columns with an
/// orthonormal completion.
fn gram_schmidt_fix(cols: &mut [Vec<Complex64>]) {
    let dim = cols[0].len();
    let mut done: Vec<Vec<Complex64>> = Vec::new();
    for col in cols.iter_mut() {
        if vec_norm(col) > 0.5 {
            let mut v = col.clone();
            for _ in 0..2 {
                for u in &done {
                    let ov = vec_inner(u, &v);
                    for (vi, ui) in v.iter_mut().zip(u) {
                        *vi -= ov * ui;
                    }
                }
            }
            let n = vec_norm(&v);
            *col = v.iter().map(|z| z / n).collect();
            done.push(col.clone());
        }
    }
    let mut cand = 0usize;
    for col in cols.iter_mut() {
        if vec_norm(col) <= 0.5 {
            loop {
                assert!(cand < dim, "isometry completion ran out of candidates");
                let mut v = vec![Complex64::new(0.0, 0.0); dim];
                v[cand] = Complex64::new(1.0, 0.0);
                cand += 1;
                for _ in 0..2 {
                    for u in &done {
                        let ov = vec_inner(u, &v);
                        for (vi, ui) in v.iter_mut().zip(u) {
                            *vi -= ov * ui;
                        }
                    }
                }
                let n = vec_norm(&v);
                if n > 1e-8 {
                    *col = v.iter().map(|z| z / n).collect();
                    done.push(col.clone());
                    break;
                }
            }
        }
    }
}
