//! Quantum and classical complexity of two coupled perturbed cat maps.
//!
//! The crate simulates a two-degrees-of-freedom system of kicked cat
//! maps on the torus, in parallel quantum and classical form:
//!
//! * [`torus`] — the finite torus Hilbert space and the integer
//!   symplectic maps (hyperbolic and elliptic representatives, with a
//!   sinusoidal kick and a position-position coupling);
//! * [`quantum`] — torus coherent states, the position-representation
//!   cat propagator, the factored two-mode propagator and state
//!   evolution;
//! * [`phase_space`] — reduced density matrices, von Neumann entropy,
//!   the operator Schmidt (realignment) spectrum, the discrete Wigner
//!   transform and the Wigner separability entropy;
//! * [`classical`] — the exact coupled map and its inverse, the
//!   discretized Liouville density, backward-iteration evolution and
//!   the classical separability entropy;
//! * [`scenario`] — paired quantum/classical runs over the hh/ee/he/eh
//!   map pairings, producing entropy time series and snapshots;
//! * [`output`] — deterministic CSV/PNG emission;
//! * [`selftest`] — the invariant harness behind `check`.
//!
//! Separability entropies are reported in the halved convention: the
//! quantum value equals the entanglement entropy of the evolving pure
//! state, and the classical value is halved to match.

pub mod backend;
pub mod classical;
pub mod error;
pub mod output;
pub mod phase_space;
pub mod quantum;
pub mod random;
pub mod scenario;
pub mod selftest;
pub mod torus;

pub use classical::{
    cse, evolve_liouville, forward_1dof, forward_2dof, inverse_1dof, inverse_2dof,
    LiouvilleEvolver, LiouvilleGrid, PhasePoint2D, PhasePoint4D,
};
pub use error::{Error, Result};
pub use phase_space::{
    operator_schmidt_spectrum, reduced_density, separability_entropy, von_neumann_entropy,
    wigner_1dof, wse_from_wigner, wse_pure, DensityMatrix, SchmidtSpectrum, WignerGrid,
};
pub use quantum::{
    coherent_state, coupling_diagonal, QuantumState, UnitaryPropagator, DENSE_TWO_MODE_LIMIT,
};
pub use scenario::{
    run_scenario, EntropyRecord, EntropySeries, MapCase, ScenarioConfig, ScenarioResult, Snapshot,
    MAX_DIM,
};
pub use selftest::{run_checks, BoundKind, CheckItem, CheckLevel, CheckReport};
pub use torus::{wrap, CoupledMap, SymplecticMap, TorusHilbert};
