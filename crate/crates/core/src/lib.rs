//! Latency-aware adaptive shot allocation for variational quantum
//! algorithms.
//!
//! The crate bundles a dense statevector simulator, grouped Pauli
//! observables with weighted-random-sampling measurement, parameter-shift
//! gradient estimation, the iCANS/gCANS/weCANS/AdamCANS family of shot
//! allocation rules, and cost accounting under a linear overhead model
//! (per-shot, per-circuit-switch, per-round).

pub mod alloc;
pub mod ansatz;
pub mod clock;
pub mod dense;
pub mod grad;
pub mod optimize;
pub mod pauli;
pub mod sim;
pub mod test_util;

pub use clock::{CostClock, LatencyModel};
pub use grad::{SamplingMode, ShotPlan};
pub use optimize::{Budget, OptimizerConfig, OptimizerKind, RunTrace};
pub use pauli::{Observable, Pauli, PauliString, Term};
pub use sim::{ParametricCircuit, StateVector};
