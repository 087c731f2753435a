//! Canonical states and channels shared by the verification suite, the CLI
//! integration tests, and the shipped fixture files. Every constructor is
//! deterministic; the seeded ones use fixed streams so the on-disk copies
//! never drift from the code.

use num_complex::Complex64;

use crate::cdp::pure_witness_channels;
use crate::matrixkit::ComplexMatrix;
use crate::quantum::{isotropic_state, max_entangled_vec, BipartiteState, QuantumChannel};
use crate::sampling::{random_unitary, rng_for};

fn pure_state(amplitudes: &[Complex64], d_a: usize, d_b: usize) -> BipartiteState {
    let m = ComplexMatrix::outer(amplitudes, amplitudes);
    BipartiteState::new(d_a, d_b, m).expect("fixture amplitudes are normalized")
}

/// |ψ⁺⟩⟨ψ⁺| on two qubits.
pub fn bell_d2() -> BipartiteState {
    let psi = max_entangled_vec(2);
    pure_state(&psi, 2, 2)
}

/// |00⟩⟨00| — operator Schmidt rank 1.
pub fn product_d2() -> BipartiteState {
    let mut amps = vec![Complex64::new(0.0, 0.0); 4];
    amps[0] = Complex64::new(1.0, 0.0);
    pure_state(&amps, 2, 2)
}

/// √0.8|00⟩ + √0.2|11⟩ — Schmidt weights (0.8, 0.2).
pub fn pure_82() -> BipartiteState {
    let mut amps = vec![Complex64::new(0.0, 0.0); 4];
    amps[0] = Complex64::new(0.8f64.sqrt(), 0.0);
    amps[3] = Complex64::new(0.2f64.sqrt(), 0.0);
    pure_state(&amps, 2, 2)
}

pub fn iso_d2_p0() -> BipartiteState {
    isotropic_state(2, 0.0).expect("valid parameter")
}

/// p = 1/3 exactly: the realignment sum is 1, the premise boundary of the
/// separable-spectrum cap.
pub fn iso_d2_p33() -> BipartiteState {
    isotropic_state(2, 1.0 / 3.0).expect("valid parameter")
}

pub fn iso_d2_p50() -> BipartiteState {
    isotropic_state(2, 0.5).expect("valid parameter")
}

pub fn iso_d2_p100() -> BipartiteState {
    isotropic_state(2, 1.0).expect("valid parameter")
}

pub fn iso_d3_p50() -> BipartiteState {
    isotropic_state(3, 0.5).expect("valid parameter")
}

/// 0.6|0⟩⟨0|⊗(𝟙+0.9X)/2 + 0.4|1⟩⟨1|⊗(𝟙+0.9Z)/2: zero discord on A with
/// non-commuting conditional states on B.
pub fn classical_on_a_d2() -> BipartiteState {
    let c = |re: f64| Complex64::new(re, 0.0);
    let mut m = ComplexMatrix::zeros(4, 4);
    m.set(0, 0, c(0.6 * 0.5));
    m.set(0, 1, c(0.6 * 0.45));
    m.set(1, 0, c(0.6 * 0.45));
    m.set(1, 1, c(0.6 * 0.5));
    m.set(2, 2, c(0.4 * 0.95));
    m.set(3, 3, c(0.4 * 0.05));
    BipartiteState::new(2, 2, m).expect("fixture is a valid state")
}

/// The perfectly distinguishable routing pair for dA = 2 (diamond norm of
/// the difference is exactly 2).
pub fn eq9_pair_d2() -> (QuantumChannel, QuantumChannel) {
    pure_witness_channels(2).expect("dA = 2 is admissible")
}

/// Full dephasing in the computational basis on one qubit.
pub fn dephase_d2() -> QuantumChannel {
    QuantumChannel::dephasing(2)
}

/// A fixed Haar-random qubit unitary channel (seeded stream, never changes).
pub fn random_unitary_d2() -> QuantumChannel {
    let u = random_unitary(&mut rng_for(0xF1C5, "fixture-unitary"), 2);
    QuantumChannel::from_unitary(&u).expect("unitary from the sampler")
}

/// Every named state fixture, in the order the fixture directory ships them.
pub fn state_fixtures() -> Vec<(&'static str, BipartiteState)> {
    vec![
        ("bell_d2", bell_d2()),
        ("product_d2", product_d2()),
        ("pure_82", pure_82()),
        ("iso_d2_p0", iso_d2_p0()),
        ("iso_d2_p33", iso_d2_p33()),
        ("iso_d2_p50", iso_d2_p50()),
        ("iso_d2_p100", iso_d2_p100()),
        ("iso_d3_p50", iso_d3_p50()),
        ("classical_on_A_d2", classical_on_a_d2()),
    ]
}

/// Every named channel fixture; the routing pair ships as two files.
pub fn channel_fixtures() -> Vec<(&'static str, QuantumChannel)> {
    let (eq9_first, eq9_second) = eq9_pair_d2();
    vec![
        ("eq9_pair_d2_first", eq9_first),
        ("eq9_pair_d2_second", eq9_second),
        ("dephase_d2", dephase_d2()),
        ("random_unitary_d2", random_unitary_d2()),
    ]
}
