//! Exact dense simulation of the XY-chain reservoir.

pub mod density;
pub mod hamiltonian;
pub mod propagator;

pub use density::{encode_qubit, inject, kron, partial_trace_inputs, pauli_x_expectations, DensityMatrix, Encoding};
pub use hamiltonian::{build_hamiltonian, site_mask, Boundary, XYChainSpec, MAX_QUBITS};
pub use propagator::{make_propagator, LindbladStrategy, PropagationMode, Propagator, DEFAULT_SUBSTEPS};
