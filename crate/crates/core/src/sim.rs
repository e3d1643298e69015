//! Dense statevector simulation of parametric circuits.
//!
//! Qubit `q` corresponds to bit `q` of a basis-state index (qubit 0 is the
//! least significant bit).  Amplitudes are stored densely, so memory is
//! 2^n complex values; the benchmarks here need n ≤ 12–14.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use thiserror::Error;

use crate::pauli::{Observable, ObservableKind, Pauli};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("parameter vector has length {found}, circuit expects {expected}")]
    ParamMismatch { expected: usize, found: usize },
    #[error("observable acts on {obs} qubits, state has {state}")]
    QubitMismatch { obs: usize, state: usize },
    #[error("group index {0} out of range")]
    BadGroup(usize),
    #[error("shots must be at least 1")]
    ZeroShots,
}

/// A circuit element: either a parametric single-qubit Pauli rotation
/// exp(−iθA/2), the same rotation with a frozen angle, or a fixed gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    /// exp(−i θ[param] A/2) with A a single-qubit Pauli (A² = I).
    Rot { axis: Pauli, qubit: usize, param: usize },
    /// Rotation with a constant angle (used e.g. for inverse target circuits).
    FixedRot { axis: Pauli, qubit: usize, angle: f64 },
    H(usize),
    Sdg(usize),
    Cz(usize, usize),
    Cnot { control: usize, target: usize },
}

/// An ordered gate sequence on `n` qubits with `n_params` rotation angles.
///
/// Every parameter index in `[0, n_params)` is used by exactly one `Rot`
/// gate.
#[derive(Debug, Clone)]
pub struct ParametricCircuit {
    pub n: usize,
    pub gates: Vec<Gate>,
    pub n_params: usize,
}

impl ParametricCircuit {
    pub fn new(n: usize, gates: Vec<Gate>, n_params: usize) -> Self {
        #[cfg(debug_assertions)]
        {
            let mut used = vec![0usize; n_params];
            for g in &gates {
                if let Gate::Rot { param, .. } = g {
                    used[*param] += 1;
                }
            }
            debug_assert!(used.iter().all(|&u| u == 1), "parameter map must be one-to-one");
        }
        Self { n, gates, n_params }
    }
}

/// Dense 2^n-amplitude state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩ on `n` qubits.
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n, amps }
    }

    /// Build a state directly from a 2^n amplitude vector.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Self {
        assert_eq!(amps.len(), 1 << n);
        Self { n, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Apply a single-qubit unitary [[u00, u01], [u10, u11]] to `qubit`.
    fn apply_1q(&mut self, qubit: usize, u: [[Complex64; 2]; 2]) {
        let bit = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | bit];
                self.amps[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[i | bit] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    pub fn apply_h(&mut self, qubit: usize) {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_1q(qubit, [[s, s], [s, -s]]);
    }

    pub fn apply_sdg(&mut self, qubit: usize) {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mi = Complex64::new(0.0, -1.0);
        self.apply_1q(qubit, [[one, zero], [zero, mi]]);
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cbit != 0 && i & tbit == 0 {
                self.amps.swap(i, i | tbit);
            }
        }
    }

    /// exp(−i θ P/2) for P ∈ {X, Y, Z}.
    pub fn apply_rotation(&mut self, axis: Pauli, qubit: usize, theta: f64) {
        let c = Complex64::new((theta / 2.0).cos(), 0.0);
        let s = (theta / 2.0).sin();
        let u = match axis {
            Pauli::X => [
                [c, Complex64::new(0.0, -s)],
                [Complex64::new(0.0, -s), c],
            ],
            Pauli::Y => [
                [c, Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), c],
            ],
            Pauli::Z => [
                [Complex64::new((theta / 2.0).cos(), -s), Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), Complex64::new((theta / 2.0).cos(), s)],
            ],
            Pauli::I => return,
        };
        self.apply_1q(qubit, u);
    }

    pub fn apply_gate(&mut self, gate: &Gate, theta: &[f64]) {
        match *gate {
            Gate::Rot { axis, qubit, param } => self.apply_rotation(axis, qubit, theta[param]),
            Gate::FixedRot { axis, qubit, angle } => self.apply_rotation(axis, qubit, angle),
            Gate::H(q) => self.apply_h(q),
            Gate::Sdg(q) => self.apply_sdg(q),
            Gate::Cz(a, b) => self.apply_cz(a, b),
            Gate::Cnot { control, target } => self.apply_cnot(control, target),
        }
    }
}

/// Run `circuit` at parameters `theta` from |0…0⟩.
pub fn run(circuit: &ParametricCircuit, theta: &[f64]) -> Result<StateVector, SimError> {
    if theta.len() != circuit.n_params {
        return Err(SimError::ParamMismatch {
            expected: circuit.n_params,
            found: theta.len(),
        });
    }
    let mut state = StateVector::zero(circuit.n);
    for gate in &circuit.gates {
        state.apply_gate(gate, theta);
    }
    Ok(state)
}

/// Expectation of a single Pauli string: ⟨ψ|P|ψ⟩.
fn pauli_expectation(state: &StateVector, letters: &[Pauli]) -> f64 {
    let mut xmask = 0usize;
    let mut ymask = 0usize;
    let mut zmask = 0usize;
    for (q, &p) in letters.iter().enumerate() {
        match p {
            Pauli::X => xmask |= 1 << q,
            Pauli::Y => {
                xmask |= 1 << q;
                ymask |= 1 << q;
            }
            Pauli::Z => zmask |= 1 << q,
            Pauli::I => {}
        }
    }
    let ny = ymask.count_ones();
    let mut acc = Complex64::new(0.0, 0.0);
    for (z, amp) in state.amps.iter().enumerate() {
        // (Pψ)[z] = phase(z) ψ[z ^ xmask]
        let src = z ^ xmask;
        // Y on output bit b contributes i·(2b−1); Z contributes (−1)^b.
        let yneg = (ymask & !z).count_ones(); // output bits 0 under Y: factor −i each
        let zsign = ((zmask & z).count_ones() & 1) as i32;
        // total i^{ny} with (−1)^{yneg + zsign}
        let mut phase = Complex64::new(1.0, 0.0);
        for _ in 0..(ny % 4) {
            phase *= Complex64::new(0.0, 1.0);
        }
        if (yneg + zsign as u32) & 1 == 1 {
            phase = -phase;
        }
        acc += amp.conj() * phase * state.amps[src];
    }
    acc.re
}

/// ⟨ψ|H|ψ⟩.  The imaginary residue (≤ 1e-10 for Hermitian input) is
/// discarded.
pub fn exact_expectation(state: &StateVector, obs: &Observable) -> Result<f64, SimError> {
    if obs.n_qubits() != state.n {
        return Err(SimError::QubitMismatch {
            obs: obs.n_qubits(),
            state: state.n,
        });
    }
    match obs.kind() {
        ObservableKind::ZeroProjector => Ok(1.0 - state.amps[0].norm_sqr()),
        ObservableKind::PauliSum => {
            let mut total = obs.constant();
            for t in obs.terms() {
                total += t.coeff * pauli_expectation(state, t.string.letters());
            }
            Ok(total)
        }
    }
}

/// Measurement probabilities and per-bitstring outcome values for one group
/// of an observable, after rotating every qubit into its measurement basis.
///
/// Outcome `z` carries probability `probs[z]` and measured value
/// `values[z] = Σ_{i∈G_j} c_i Π_q (±1)`.
pub struct GroupSampler {
    cumulative: Vec<f64>,
    probs: Vec<f64>,
    values: Vec<f64>,
}

impl GroupSampler {
    pub fn new(state: &StateVector, obs: &Observable, group: usize) -> Result<Self, SimError> {
        if obs.n_qubits() != state.n {
            return Err(SimError::QubitMismatch {
                obs: obs.n_qubits(),
                state: state.n,
            });
        }
        if group >= obs.n_groups() {
            return Err(SimError::BadGroup(group));
        }
        let dim = 1usize << state.n;
        let (probs, values) = match obs.kind() {
            ObservableKind::ZeroProjector => {
                let probs: Vec<f64> = state.amps.iter().map(|a| a.norm_sqr()).collect();
                let mut values = vec![1.0; dim];
                values[0] = 0.0;
                (probs, values)
            }
            ObservableKind::PauliSum => {
                let basis = obs.group_basis(group);
                let mut rotated = state.clone();
                for (q, &p) in basis.iter().enumerate() {
                    match p {
                        Pauli::X => rotated.apply_h(q),
                        Pauli::Y => {
                            rotated.apply_sdg(q);
                            rotated.apply_h(q);
                        }
                        Pauli::Z | Pauli::I => {}
                    }
                }
                let probs: Vec<f64> = rotated.amps.iter().map(|a| a.norm_sqr()).collect();
                let mut values = vec![0.0; dim];
                for &idx in &obs.groups()[group] {
                    let term = &obs.terms()[idx];
                    let mut mask = 0usize;
                    for (q, &p) in term.string.letters().iter().enumerate() {
                        if p != Pauli::I {
                            mask |= 1 << q;
                        }
                    }
                    for (z, v) in values.iter_mut().enumerate() {
                        let sign = if (z & mask).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
                        *v += term.coeff * sign;
                    }
                }
                (probs, values)
            }
        };
        let mut cumulative = Vec::with_capacity(dim);
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cumulative.push(acc);
        }
        Ok(Self {
            cumulative,
            probs,
            values,
        })
    }

    /// Draw one bitstring by inverse CDF and return its measured value.
    pub fn sample_one<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        let idx = self.cumulative.partition_point(|&c| c < u);
        self.values[idx.min(self.values.len() - 1)]
    }

    /// Sum and sum of squares of `shots` single-shot values, drawn by
    /// sampling per-outcome counts (conditional binomials over the outcome
    /// distribution).  Statistically identical to `shots` calls of
    /// `sample_one` and far cheaper when shots ≫ 2^n.
    pub fn sample_moments<R: Rng>(&self, shots: u64, rng: &mut R) -> (f64, f64) {
        let counts = multinomial_counts(&self.probs, shots, rng);
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for (z, &c) in counts.iter().enumerate() {
            if c > 0 {
                let v = self.values[z];
                sum += c as f64 * v;
                sumsq += c as f64 * v * v;
            }
        }
        (sum, sumsq)
    }
}

/// Multinomial counts for `trials` draws over `probs` via conditional
/// binomials.
pub fn multinomial_counts<R: Rng>(probs: &[f64], trials: u64, rng: &mut R) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = trials;
    let mut rest: f64 = probs.iter().sum();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == probs.len() - 1 || rest <= p {
            counts[i] = remaining;
            break;
        }
        let q = (p / rest).clamp(0.0, 1.0);
        let c = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining, q).unwrap().sample(rng)
        };
        counts[i] = c;
        remaining -= c;
        rest -= p;
    }
    counts
}

/// Sequence of `shots` single-shot values for group `j` of `obs`.
pub fn sample_group<R: Rng>(
    state: &StateVector,
    obs: &Observable,
    group: usize,
    shots: u64,
    rng: &mut R,
) -> Result<Vec<f64>, SimError> {
    if shots == 0 {
        return Err(SimError::ZeroShots);
    }
    let sampler = GroupSampler::new(state, obs, group)?;
    Ok((0..shots).map(|_| sampler.sample_one(rng)).collect())
}
