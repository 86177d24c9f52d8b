//! Exact statevector simulation of the variational circuit used inside quantum MLPs.

mod ansatz;
mod oracle;
mod state;

pub use ansatz::{
    ansatz_gates, ansatz_state, brick_layout, grad_ansatz, run_ansatz, vjp_ansatz, AngleSource, AnsatzConfig,
    AnsatzJacobian, AnsatzVjp, CircuitParams, Gate,
};
pub use oracle::{
    dense_unitary, dense_unitary_oracle, embed, gate_matrix, DenseCircuit, DenseMatrix, OracleGate, ORACLE_MAX_QUBITS,
};
pub use state::{StateVector, MAX_QUBITS, MIN_QUBITS};
