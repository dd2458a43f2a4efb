//! Finite cyclic cellular automata, classical and quantum.
//!
//! The crate covers five layers:
//!
//! * [`lattice`]: configurations on a ring of `n` cells over an alphabet of
//!   `s` states, classical radius-1 rules and the elementary rule-number codec.
//! * [`reversibility`]: exhaustive bijectivity checks with collision
//!   witnesses, permutation cycle structure, and a GF(2) fast path for
//!   affine elementary rules.
//! * [`quantum`]: amplitude vectors over configurations, the global operator
//!   induced by a quantum local rule, and unitarity certification.
//! * [`partitioned`]: rules of the form `g ∘ e` (classical shuffle followed by
//!   a single-cell gate) and their well-formedness certificates.
//! * [`rulescan`]: campaigns over (size, rule) grids with CSV/JSON reports,
//!   the complement-symmetry check and the residue-class conjecture.
//!
//! Configuration indices are 0-based and cell 1 is the most significant
//! base-`s` digit, so index order equals lexicographic order of cell
//! sequences.

pub mod error;
pub mod lattice;
mod par;
pub mod partitioned;
pub mod quantum;
pub mod reversibility;
pub mod rulescan;

pub use error::{Error, Result};
pub use par::available_parallelism;
pub use lattice::{
    decode_config, encode_config, global_step, rule_from_number, spacetime_trace, ConfigIndex,
    ElementaryRuleNumber, LatticeSpec, RuleTable, State,
};
pub use quantum::{Amplitude, GlobalMatrix, QuantumRule, QuantumState};
pub use reversibility::{AffineForm, BijectivityVerdict, Order, PermutationProfile};

/// Default cap on the number of configurations an exhaustive check may visit.
pub const DEFAULT_BUDGET: u64 = 1 << 28;

/// Default cap on the dimension `s^n` of a dense global matrix.
pub const DEFAULT_DENSE_CAP: u64 = 4096;

/// Default tolerance for unitarity tests.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
