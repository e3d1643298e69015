//! Benchmark circuit families.
//!
//! Three layered ansätze: a random-axis compiling circuit with CZ
//! entanglers, a hardware-efficient RX/RZ + CNOT ansatz, and an Ising-chain
//! ansatz built from CNOT-conjugated Z rotations.  Entanglers run over
//! nearest-neighbor pairs in ascending qubit order.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::pauli::Pauli;
use crate::sim::{Gate, ParametricCircuit};

/// Compiling-task ansatz: each layer applies one single-qubit Pauli
/// rotation per qubit with a randomly chosen axis, followed by CZ gates on
/// adjacent qubits.  Axes are drawn from `rng`.
pub fn compile_ansatz<R: Rng>(n: usize, depth: usize, rng: &mut R) -> ParametricCircuit {
    let mut gates = Vec::new();
    let mut param = 0;
    for _ in 0..depth {
        for q in 0..n {
            let axis = match rng.gen_range(0..3) {
                0 => Pauli::X,
                1 => Pauli::Y,
                _ => Pauli::Z,
            };
            gates.push(Gate::Rot { axis, qubit: q, param });
            param += 1;
        }
        for q in 0..n.saturating_sub(1) {
            gates.push(Gate::Cz(q, q + 1));
        }
    }
    ParametricCircuit::new(n, gates, param)
}

/// A compiling task: the ansatz followed by the inverse of the same ansatz
/// frozen at a random target parameter vector, so the all-zeros projector
/// cost vanishes exactly at θ = θ*.
pub struct CompileTask {
    pub circuit: ParametricCircuit,
    pub theta_star: Vec<f64>,
}

/// Build the compiling task for a given task seed.  The axis pattern and
/// target parameters are both drawn from the seed, so a task is fully
/// reproducible.
pub fn compile_task(n: usize, depth: usize, task_seed: u64) -> CompileTask {
    let mut rng = ChaCha8Rng::seed_from_u64(task_seed);
    let ansatz = compile_ansatz(n, depth, &mut rng);
    let theta_star: Vec<f64> = (0..ansatz.n_params)
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect();

    // Append U(θ*)† as fixed gates: reverse order, negated angles; CZ is
    // self-inverse.
    let mut gates = ansatz.gates.clone();
    for gate in ansatz.gates.iter().rev() {
        match *gate {
            Gate::Rot { axis, qubit, param } => gates.push(Gate::FixedRot {
                axis,
                qubit,
                angle: -theta_star[param],
            }),
            Gate::Cz(a, b) => gates.push(Gate::Cz(a, b)),
            ref other => gates.push(*other),
        }
    }
    CompileTask {
        circuit: ParametricCircuit::new(n, gates, ansatz.n_params),
        theta_star,
    }
}

/// Hardware-efficient ansatz: each layer applies RX then RZ on every qubit
/// followed by a CNOT chain on adjacent pairs.  Parameter count is 2·n·D.
pub fn hea_ansatz(n: usize, depth: usize) -> ParametricCircuit {
    let mut gates = Vec::new();
    let mut param = 0;
    for _ in 0..depth {
        for q in 0..n {
            gates.push(Gate::Rot { axis: Pauli::X, qubit: q, param });
            param += 1;
            gates.push(Gate::Rot { axis: Pauli::Z, qubit: q, param });
            param += 1;
        }
        for q in 0..n.saturating_sub(1) {
            gates.push(Gate::Cnot { control: q, target: q + 1 });
        }
    }
    ParametricCircuit::new(n, gates, param)
}

/// Ising-chain ansatz: Hadamards on every qubit, then per layer a ZZ-axis
/// rotation on each bond (CNOT · RZ · CNOT) followed by RX on every qubit.
/// Parameter count is D·(2n−1).
pub fn tfim_ansatz(n: usize, depth: usize) -> ParametricCircuit {
    let mut gates = Vec::new();
    let mut param = 0;
    for q in 0..n {
        gates.push(Gate::H(q));
    }
    for _ in 0..depth {
        for q in 0..n - 1 {
            gates.push(Gate::Cnot { control: q, target: q + 1 });
            gates.push(Gate::Rot { axis: Pauli::Z, qubit: q + 1, param });
            gates.push(Gate::Cnot { control: q, target: q + 1 });
            param += 1;
        }
        for q in 0..n {
            gates.push(Gate::Rot { axis: Pauli::X, qubit: q, param });
            param += 1;
        }
    }
    ParametricCircuit::new(n, gates, param)
}
