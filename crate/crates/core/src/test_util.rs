//! Random circuit and observable generators for tests and calibration
//! harnesses.

use rand::Rng;

use crate::pauli::{group_qubitwise, Observable, Pauli, PauliString, Term};
use crate::sim::{Gate, ParametricCircuit};

/// Random circuit of `n_gates` gates mixing parametric rotations and fixed
/// entanglers/Cliffords.  Returns the circuit and a random parameter vector.
pub fn random_circuit<R: Rng>(n: usize, n_gates: usize, rng: &mut R) -> (ParametricCircuit, Vec<f64>) {
    let mut gates = Vec::with_capacity(n_gates);
    let mut n_params = 0;
    for _ in 0..n_gates {
        let q = rng.gen_range(0..n);
        match rng.gen_range(0..6) {
            0 | 1 | 2 => {
                let axis = match rng.gen_range(0..3) {
                    0 => Pauli::X,
                    1 => Pauli::Y,
                    _ => Pauli::Z,
                };
                gates.push(Gate::Rot { axis, qubit: q, param: n_params });
                n_params += 1;
            }
            3 => gates.push(Gate::H(q)),
            4 => {
                if n > 1 {
                    let mut b = rng.gen_range(0..n);
                    while b == q {
                        b = rng.gen_range(0..n);
                    }
                    gates.push(Gate::Cz(q, b));
                } else {
                    gates.push(Gate::Sdg(q));
                }
            }
            _ => {
                if n > 1 {
                    let mut b = rng.gen_range(0..n);
                    while b == q {
                        b = rng.gen_range(0..n);
                    }
                    gates.push(Gate::Cnot { control: q, target: b });
                } else {
                    gates.push(Gate::H(q));
                }
            }
        }
    }
    let theta: Vec<f64> = (0..n_params)
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect();
    (ParametricCircuit::new(n, gates, n_params), theta)
}

/// Random observable with `n_terms` distinct non-identity Pauli strings and
/// coefficients in [−1, 1].  The term count is capped at the 4^n − 1
/// distinct non-identity strings that exist on `n` qubits.
pub fn random_observable<R: Rng>(n: usize, n_terms: usize, rng: &mut R) -> Observable {
    let max_terms = 4usize.saturating_pow(n as u32).saturating_sub(1);
    let n_terms = n_terms.min(max_terms).max(1);
    let mut terms = Vec::new();
    let mut seen = std::collections::HashSet::new();
    while terms.len() < n_terms {
        let letters: Vec<Pauli> = (0..n)
            .map(|_| match rng.gen_range(0..4) {
                0 => Pauli::I,
                1 => Pauli::X,
                2 => Pauli::Y,
                _ => Pauli::Z,
            })
            .collect();
        let s = PauliString::new(letters);
        if s.is_identity() || !seen.insert(s.to_string()) {
            continue;
        }
        let mut c = 0.0;
        while c == 0.0 {
            c = rng.gen_range(-1.0..1.0);
        }
        terms.push(Term::new(c, s));
    }
    group_qubitwise(terms).expect("nonempty random observable")
}
