//! Dense state-vector engine: gates, circuits, transpilation to the native
//! set, sampling and the Hermitian matrix exponential.

pub mod circuit;
pub mod gate;
pub mod linalg;
pub mod sampling;
pub mod state;
pub mod transpile;

pub use circuit::{circuit_unitary, Circuit, GateCensus, MAX_UNITARY_QUBITS};
pub use gate::{u3_matrix, Gate, Mat2, Support, C64};
pub use linalg::{
    matrix_exponential, phase_aligned_distance, random_unitary, HermitianMatrix, UnitaryMatrix,
};
pub use sampling::{sample_counts, CountsHistogram};
pub use state::{StateVector, MAX_STATE_QUBITS};
pub use transpile::{synthesize_single_qubit, transpile_to_native};

/// Applies `gate` to `state`, returning the new state.
pub fn apply_gate(state: &StateVector, gate: &Gate) -> crate::Result<StateVector> {
    state.apply_gate(gate)
}
