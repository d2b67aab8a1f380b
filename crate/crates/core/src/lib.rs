//! Qutrit quantum channels whose minimal synchronizing words grow without bound.
//!
//! The alphabet is the pair of channels `A` (Kraus factors `|e_2⟩⟨e_1|` and a
//! quarter turn of the `(e_2, e_3)` plane) and `B_n` (rotation by `π/(2n)` in
//! the `(e_1, e_2)` plane). The word `A·Bⁿ·A` always synchronizes, yet for
//! small angles no short word does. This crate provides:
//!
//! - [`matlib`]: a fixed-size 3×3 complex kernel with Hermitian eigenvalues
//!   and Schatten norms;
//! - [`channels`]: density matrices, Kraus channels, words and trace distance;
//! - [`syncsearch`]: synchronization tests, exhaustive minimal-word search and
//!   brute-force non-existence certificates;
//! - [`explorer`]: breadth-first construction of the automaton reachable from
//!   `|e_1⟩⟨e_1|`, with DOT and JSON export;
//! - [`lemmalab`]: seeded randomized checks of the distance inequalities the
//!   construction relies on.

pub mod channels;
pub mod error;
pub mod explorer;
pub mod json;
pub mod lemmalab;
pub mod matlib;
pub mod syncsearch;

pub use channels::{
    affine_probe_states, apply_word, channel_a, channel_b, completeness_defect, trace_distance,
    Alphabet, ChannelFamilyParam, DensityMatrix, KrausChannel, Letter, Word,
};
pub use error::{Error, Result};
pub use explorer::{explore, export_dot, export_json, CanonicalKey, DotOptions, StateGraph};


pub use lemmalab::{CheckReport, RandomSource, SuiteConfig};
pub use matlib::{ComplexMat3, SchattenOrder};
pub use syncsearch::{
    is_synchronizing, minimal_sync_word, n_for_no_sync_up_to, no_sync_certificate,
    NoSyncCertificate, SearchOutcome, SyncVerdict, TheoremParams,
};
