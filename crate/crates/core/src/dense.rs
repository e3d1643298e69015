//! Dense-matrix reference computations.
//!
//! These build explicit 2^n×2^n matrices by Kronecker products and serve as
//! an independent route for expectation values, unitary application, and
//! ground-state references.  Intended for n ≤ 12.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::pauli::{Observable, ObservableKind, Pauli};
use crate::sim::{Gate, ParametricCircuit};

fn pauli_matrix(p: Pauli) -> DMatrix<Complex64> {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match p {
        Pauli::I => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        Pauli::X => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Kronecker product ordered so qubit 0 is the least significant bit.
fn kron_string(letters: &[Pauli]) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for &p in letters.iter().rev() {
        m = m.kronecker(&pauli_matrix(p));
    }
    m
}

/// Dense Hermitian matrix of an observable.
pub fn dense_matrix(obs: &Observable) -> DMatrix<Complex64> {
    let dim = 1usize << obs.n_qubits();
    match obs.kind() {
        ObservableKind::ZeroProjector => {
            let mut m = DMatrix::identity(dim, dim);
            m[(0, 0)] = Complex64::new(0.0, 0.0);
            m
        }
        ObservableKind::PauliSum => {
            let mut m = DMatrix::identity(dim, dim) * Complex64::new(obs.constant(), 0.0);
            for t in obs.terms() {
                m += kron_string(t.string.letters()) * Complex64::new(t.coeff, 0.0);
            }
            m
        }
    }
}

/// ⟨ψ|H|ψ⟩ via the dense matrix.
pub fn dense_expectation(obs: &Observable, amps: &[Complex64]) -> f64 {
    let m = dense_matrix(obs);
    let v = nalgebra::DVector::from_column_slice(amps);
    (v.adjoint() * m * v)[(0, 0)].re
}

/// Spectral norm bound check helper: largest |eigenvalue|.
pub fn spectral_norm(obs: &Observable) -> f64 {
    let m = dense_matrix(obs);
    let eig = m.symmetric_eigen();
    eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

/// Minimum eigenvalue (ground-state energy) of an observable.
pub fn ground_energy(obs: &Observable) -> f64 {
    let m = dense_matrix(obs);
    let eig = m.symmetric_eigen();
    eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b))
}

fn gate_matrix(n: usize, gate: &Gate, theta: &[f64]) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    // Build column by column by applying the gate to each basis state.
    for col in 0..dim {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[col] = Complex64::new(1.0, 0.0);
        let mut st = crate::sim::StateVector::from_amplitudes(n, amps);
        st.apply_gate(gate, theta);
        for (row, a) in st.amplitudes().iter().enumerate() {
            m[(row, col)] = *a;
        }
    }
    m
}

/// Full circuit unitary applied to |0…0⟩, computed by dense matrix products.
pub fn apply_circuit_dense(circuit: &ParametricCircuit, theta: &[f64]) -> Vec<Complex64> {
    let dim = 1usize << circuit.n;
    let mut u = DMatrix::identity(dim, dim);
    for gate in &circuit.gates {
        u = gate_matrix(circuit.n, gate, theta) * u;
    }
    let mut zero = nalgebra::DVector::from_element(dim, Complex64::new(0.0, 0.0));
    zero[0] = Complex64::new(1.0, 0.0);
    let v = u * zero;
    v.iter().copied().collect()
}
