//! Quantifies how useful a bipartite quantum state is as a probe for
//! ancilla-assisted discrimination of channels acting on one side.
//!
//! The crate is organized bottom-up:
//!
//! * [`matrixkit`] — dense complex matrices, Hermitian eigendecomposition,
//!   SVD, Schatten norms, tensor products and partial traces.
//! * [`quantum`] — validated bipartite states, quantum channels (Kraus and
//!   Choi forms), Hermitian-preserving maps, purification extension.
//! * [`osd`] — operator Schmidt decompositions, realignment tests, and the
//!   correlation-spectrum caps they imply.
//! * [`diamond`] — diamond norms of channel differences, both as a certified
//!   semidefinite program and as a seesaw ascent over pure probe states.
//! * [`cdp`] — discrimination-power bounds, witness channel constructions,
//!   and an adversarial estimator that squeezes the bracket from above.
//! * [`tomography`] — channel reconstruction from a single bipartite probe
//!   state with full operator Schmidt rank, plus noise-sensitivity sweeps.
//!
//! Supporting modules: [`sampling`] (seeded random objects), [`fixtures`]
//! (canonical states and channels), [`io`] (file formats and reports),
//! [`suite`] (the named verification checks behind `cdplab verify-suite`).

pub mod cdp;
pub mod diamond;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod matrixkit;
pub mod osd;
pub mod quantum;
pub mod sampling;
pub mod suite;
pub mod tomography;

pub use error::{Error, Result};
pub use matrixkit::ComplexMatrix;
