//! Parameter-shift gradient estimation with per-component shot budgets.
//!
//! Each gradient component is estimated from two cost evaluations at
//! θ ± (π/2)e_i with s_i/2 shots each.  Shots within one evaluation are
//! spread over the observable's measurement groups either by weighted
//! random sampling (multinomial over group probabilities, inverse-
//! probability weighted for unbiasedness) or by a fixed deterministic
//! ratio.  Alongside the estimate we track an estimated per-shot variance
//! S_i (so Var(g_i) ≈ S_i/s_i) and the number of executed circuits.

use rand::Rng;
use thiserror::Error;

use crate::pauli::{Observable, ObservableKind};
use crate::sim::{self, GroupSampler, ParametricCircuit, SimError, StateVector};

#[derive(Debug, Error)]
pub enum GradError {
    #[error("shot plan has length {found}, circuit has {expected} parameters")]
    PlanMismatch { expected: usize, found: usize },
    #[error("each component needs at least 2 shots, got {0}")]
    TooFewShots(u64),
    #[error("group probability is zero")]
    ZeroProbability,
    #[error("deterministic ratio needs one nonnegative weight per group with a positive sum")]
    BadRatio,
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// How shots are allocated across measurement groups.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplingMode {
    /// Weighted random sampling: group shot counts drawn from the
    /// multinomial with the observable's group probabilities.
    Wrs,
    /// Fixed per-group weights (e.g. J:g for the Ising chain), rounded to
    /// nearest with the remainder assigned to the largest-weight group.
    DeterministicRatio(Vec<f64>),
    /// Exact expectations with zero variance; isolates optimizer logic.
    InfiniteShots,
}

/// Per-component shot counts.  Counts are made even (rounded up) so both
/// parameter shifts receive equal shots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotPlan {
    s: Vec<u64>,
}

impl ShotPlan {
    pub fn new(s: Vec<u64>) -> Result<Self, GradError> {
        if let Some(&bad) = s.iter().find(|&&x| x < 2) {
            return Err(GradError::TooFewShots(bad));
        }
        Ok(Self {
            s: s.into_iter().map(|x| x + (x & 1)).collect(),
        })
    }

    pub fn uniform(d: usize, shots: u64) -> Result<Self, GradError> {
        Self::new(vec![shots; d])
    }

    pub fn shots(&self) -> &[u64] {
        &self.s
    }

    pub fn total(&self) -> u64 {
        self.s.iter().sum()
    }
}

/// Result of one gradient evaluation.
#[derive(Debug, Clone)]
pub struct GradientSample {
    /// Estimated gradient components.
    pub g: Vec<f64>,
    /// Per-shot variance estimates: Var(g_i) ≈ s_var[i] / shots_used[i].
    pub s_var: Vec<f64>,
    /// Shots actually spent per component (after parity adjustment).
    pub shots_used: Vec<u64>,
    /// Circuits executed per component (distinct shifted-circuit/group
    /// pairs).
    pub switches: Vec<u64>,
    /// Communication rounds; always 1 per evaluation.
    pub comm_rounds: u64,
}

impl GradientSample {
    pub fn grad_norm(&self) -> f64 {
        self.g.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn total_shots(&self) -> u64 {
        self.shots_used.iter().sum()
    }

    pub fn total_switches(&self) -> u64 {
        self.switches.iter().sum()
    }
}

/// A single cost evaluation: estimate of ⟨H⟩, the variance of that
/// estimate, and the number of circuits executed.
#[derive(Debug, Clone, Copy)]
pub struct CostEstimate {
    pub mean: f64,
    pub variance: f64,
    pub circuits: u64,
}

/// Inverse-probability weighting of a measured group value: the single-shot
/// estimator v/p is unbiased for ⟨H⟩ when group j is drawn with
/// probability p_j.
pub fn wrs_single_shot_value(value: f64, prob: f64) -> Result<f64, GradError> {
    if prob <= 0.0 {
        return Err(GradError::ZeroProbability);
    }
    Ok(value / prob)
}

/// Estimate ⟨H⟩ on a prepared state with a finite shot budget.
pub fn measure_expectation<R: Rng>(
    state: &StateVector,
    obs: &Observable,
    shots: u64,
    mode: &SamplingMode,
    rng: &mut R,
) -> Result<CostEstimate, GradError> {
    if shots == 0 {
        return Err(GradError::Sim(SimError::ZeroShots));
    }
    match mode {
        SamplingMode::InfiniteShots => Ok(CostEstimate {
            mean: sim::exact_expectation(state, obs)?,
            variance: 0.0,
            circuits: obs.n_groups() as u64,
        }),
        SamplingMode::Wrs => {
            let probs = obs.group_probs();
            if probs.iter().any(|&p| p <= 0.0) {
                return Err(GradError::ZeroProbability);
            }
            let counts = sim::multinomial_counts(probs, shots, rng);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            let mut circuits = 0;
            for (j, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                circuits += 1;
                let sampler = GroupSampler::new(state, obs, j)?;
                let (s1, s2) = sampler.sample_moments(c, rng);
                sum += s1 / probs[j];
                sumsq += s2 / (probs[j] * probs[j]);
            }
            let mean = sum / shots as f64;
            let per_shot_var = if shots >= 2 {
                ((sumsq - shots as f64 * mean * mean) / (shots as f64 - 1.0)).max(0.0)
            } else {
                // Too few samples for a sample variance; conservative
                // fallback to the squared value.
                mean * mean
            };
            Ok(CostEstimate {
                mean: obs.constant() + mean,
                variance: per_shot_var / shots as f64,
                circuits,
            })
        }
        SamplingMode::DeterministicRatio(weights) => {
            let m = obs.n_groups();
            if obs.kind() != ObservableKind::PauliSum
                || weights.len() != m
                || weights.iter().any(|&w| w < 0.0)
            {
                return Err(GradError::BadRatio);
            }
            let wsum: f64 = weights.iter().sum();
            if wsum <= 0.0 {
                return Err(GradError::BadRatio);
            }
            let mut counts: Vec<u64> = weights
                .iter()
                .map(|&w| ((shots as f64) * w / wsum).round() as u64)
                .collect();
            let assigned: u64 = counts.iter().sum();
            let largest = weights
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            if assigned < shots {
                counts[largest] += shots - assigned;
            } else if assigned > shots {
                let over = assigned - shots;
                counts[largest] = counts[largest].saturating_sub(over);
            }
            let mut mean = obs.constant();
            let mut variance = 0.0;
            let mut circuits = 0;
            for (j, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                circuits += 1;
                let sampler = GroupSampler::new(state, obs, j)?;
                let (s1, s2) = sampler.sample_moments(c, rng);
                let gm = s1 / c as f64;
                mean += gm;
                let gvar = if c >= 2 {
                    ((s2 - c as f64 * gm * gm) / (c as f64 - 1.0)).max(0.0)
                } else {
                    gm * gm
                };
                variance += gvar / c as f64;
            }
            Ok(CostEstimate {
                mean,
                variance,
                circuits,
            })
        }
    }
}

/// Two-point parameter-shift gradient with per-component shot budgets.
pub fn i_evaluate<R: Rng>(
    circuit: &ParametricCircuit,
    obs: &Observable,
    theta: &[f64],
    plan: &ShotPlan,
    mode: &SamplingMode,
    rng: &mut R,
) -> Result<GradientSample, GradError> {
    let d = circuit.n_params;
    if plan.shots().len() != d {
        return Err(GradError::PlanMismatch {
            expected: d,
            found: plan.shots().len(),
        });
    }
    let mut g = vec![0.0; d];
    let mut s_var = vec![0.0; d];
    let mut shots_used = vec![0u64; d];
    let mut switches = vec![0u64; d];
    let mut shifted = theta.to_vec();
    for i in 0..d {
        let s = plan.shots()[i];
        let half = s / 2;
        shifted[i] = theta[i] + std::f64::consts::FRAC_PI_2;
        let state = sim::run(circuit, &shifted)?;
        let plus = measure_expectation(&state, obs, half, mode, rng)?;
        shifted[i] = theta[i] - std::f64::consts::FRAC_PI_2;
        let state = sim::run(circuit, &shifted)?;
        let minus = measure_expectation(&state, obs, half, mode, rng)?;
        shifted[i] = theta[i];

        g[i] = (plus.mean - minus.mean) / 2.0;
        let var_g = (plus.variance + minus.variance) / 4.0;
        s_var[i] = s as f64 * var_g;
        shots_used[i] = s;
        switches[i] = plus.circuits + minus.circuits;
    }
    Ok(GradientSample {
        g,
        s_var,
        shots_used,
        switches,
        comm_rounds: 1,
    })
}

/// Expected number of executed circuits per gradient component when s̃
/// shots are spread by WRS: 2(M − Σ_j (1−p_j)^{s̃/2}), with terms below
/// 0.01 dropped.
pub fn expected_switches(obs: &Observable, s_tilde: f64) -> f64 {
    let m = obs.n_groups() as f64;
    let mut missing = 0.0;
    for &p in obs.group_probs() {
        let t = (1.0 - p).powf(s_tilde / 2.0);
        if t >= 0.01 {
            missing += t;
        }
    }
    2.0 * (m - missing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{group_qubitwise, PauliString, Term};
    use crate::sim::Gate;
    use crate::Pauli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rx_z_setup() -> (ParametricCircuit, Observable) {
        let circ = ParametricCircuit::new(
            1,
            vec![Gate::Rot { axis: Pauli::X, qubit: 0, param: 0 }],
            1,
        );
        let obs = group_qubitwise(vec![Term::new(1.0, PauliString::parse("Z").unwrap())]).unwrap();
        (circ, obs)
    }

    #[test]
    fn gradient_of_cos_theta() {
        // f(θ) = cos θ, so ∂f(π/2) = −1.
        let (circ, obs) = rx_z_setup();
        let plan = ShotPlan::uniform(1, 1_000_000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sample = i_evaluate(
            &circ,
            &obs,
            &[std::f64::consts::FRAC_PI_2],
            &plan,
            &SamplingMode::Wrs,
            &mut rng,
        )
        .unwrap();
        let se = (sample.s_var[0] / sample.shots_used[0] as f64).sqrt();
        assert!((sample.g[0] + 1.0).abs() < 4.0 * se.max(1e-4));
    }

    #[test]
    fn gradient_mean_zero_at_symmetric_point() {
        let (circ, obs) = rx_z_setup();
        let plan = ShotPlan::uniform(1, 1000).unwrap();
        let mut sum = 0.0;
        let mut var_sum = 0.0;
        let runs = 100;
        for seed in 0..runs {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = i_evaluate(&circ, &obs, &[0.0], &plan, &SamplingMode::Wrs, &mut rng).unwrap();
            sum += s.g[0];
            var_sum += s.s_var[0] / s.shots_used[0] as f64;
        }
        let mean = sum / runs as f64;
        let se = (var_sum / (runs as f64 * runs as f64)).sqrt();
        assert!(mean.abs() < 4.0 * se.max(1e-4));
    }

    #[test]
    fn single_group_switch_count() {
        let (circ, obs) = rx_z_setup();
        let plan = ShotPlan::uniform(1, 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = i_evaluate(&circ, &obs, &[0.3], &plan, &SamplingMode::Wrs, &mut rng).unwrap();
        assert_eq!(s.switches[0], 2);
        assert_eq!(s.comm_rounds, 1);
    }

    #[test]
    fn odd_shots_round_up_to_even() {
        let plan = ShotPlan::new(vec![3, 4]).unwrap();
        assert_eq!(plan.shots(), &[4, 4]);
        assert!(ShotPlan::new(vec![1]).is_err());
    }

    #[test]
    fn wrs_weighting() {
        assert_eq!(wrs_single_shot_value(0.7, 1.0).unwrap(), 0.7);
        assert_eq!(wrs_single_shot_value(0.3, 0.5).unwrap(), 0.6);
        assert!(wrs_single_shot_value(1.0, 0.0).is_err());
    }

    #[test]
    fn wrs_estimator_unbiased() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let obs = crate::test_util::random_observable(2, 4, &mut rng);
        let (circ, theta) = crate::test_util::random_circuit(2, 8, &mut rng);
        let state = sim::run(&circ, &theta).unwrap();
        let exact = sim::exact_expectation(&state, &obs).unwrap();
        let est = measure_expectation(&state, &obs, 100_000, &SamplingMode::Wrs, &mut rng).unwrap();
        let se = est.variance.sqrt();
        assert!((est.mean - exact).abs() < 4.0 * se.max(1e-4));
    }

    #[test]
    fn deterministic_ratio_split() {
        let obs = crate::pauli::build_tfim(3, 1.0, 1.5).unwrap();
        let mode = SamplingMode::DeterministicRatio(vec![1.0, 1.5]);
        let theta = vec![0.0; 0];
        let _ = theta;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let state = StateVector::zero(3);
        let est = measure_expectation(&state, &obs, 1000, &mode, &mut rng).unwrap();
        // |000⟩: ⟨ZZ⟩ terms give −2, ⟨X⟩ terms average to 0 with noise.
        assert_eq!(est.circuits, 2);
        assert!((est.mean + 2.0).abs() < 0.5);
    }

    #[test]
    fn deterministic_ratio_switches_are_2m() {
        let obs = crate::pauli::build_tfim(3, 1.0, 1.5).unwrap();
        let circ = crate::ansatz::tfim_ansatz(3, 1);
        let plan = ShotPlan::uniform(circ.n_params, 100).unwrap();
        let mode = SamplingMode::DeterministicRatio(vec![1.0, 1.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let theta: Vec<f64> = (0..circ.n_params).map(|_| rng.gen_range(0.0..1.0)).collect();
        let s = i_evaluate(&circ, &obs, &theta, &plan, &mode, &mut rng).unwrap();
        assert!(s.switches.iter().all(|&m| m == 4));
    }

    #[test]
    fn infinite_shot_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (circ, theta) = crate::test_util::random_circuit(3, 14, &mut rng);
        let obs = crate::test_util::random_observable(3, 4, &mut rng);
        let plan = ShotPlan::uniform(circ.n_params, 2).unwrap();
        let s = i_evaluate(&circ, &obs, &theta, &plan, &SamplingMode::InfiniteShots, &mut rng)
            .unwrap();
        let h = 1e-5;
        for i in 0..circ.n_params {
            let mut tp = theta.clone();
            tp[i] += h;
            let fp = sim::exact_expectation(&sim::run(&circ, &tp).unwrap(), &obs).unwrap();
            tp[i] = theta[i] - h;
            let fm = sim::exact_expectation(&sim::run(&circ, &tp).unwrap(), &obs).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            assert!((s.g[i] - fd).abs() < 1e-6, "component {i}");
        }
        assert!(s.s_var.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn variance_calibration() {
        // Empirical Var(g) across seeds should match mean(S)/s within 2x.
        let (circ, obs) = rx_z_setup();
        let plan = ShotPlan::uniform(1, 1000).unwrap();
        let theta = [0.7];
        let runs = 200;
        let mut gs = Vec::with_capacity(runs);
        let mut pred = 0.0;
        for seed in 0..runs {
            let mut rng = ChaCha8Rng::seed_from_u64(seed as u64 + 1000);
            let s = i_evaluate(&circ, &obs, &theta, &plan, &SamplingMode::Wrs, &mut rng).unwrap();
            gs.push(s.g[0]);
            pred += s.s_var[0] / s.shots_used[0] as f64;
        }
        pred /= runs as f64;
        let mean = gs.iter().sum::<f64>() / runs as f64;
        let emp = gs.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (runs as f64 - 1.0);
        let ratio = emp / pred;
        assert!(ratio > 0.5 && ratio < 2.0, "ratio {ratio}");
    }

    #[test]
    fn expected_switches_values() {
        let obs = group_qubitwise(vec![
            Term::new(1.0, PauliString::parse("XI").unwrap()),
            Term::new(1.0, PauliString::parse("ZI").unwrap()),
        ])
        .unwrap();
        assert_eq!(obs.group_probs(), &[0.5, 0.5]);
        assert!((expected_switches(&obs, 2.0) - 2.0).abs() < 1e-12);
        // (1−0.5)^10 ≈ 0.00098 < 0.01 → dropped → 2·M = 4.
        assert!((expected_switches(&obs, 20.0) - 4.0).abs() < 1e-12);

        let single = group_qubitwise(vec![Term::new(2.0, PauliString::parse("Z").unwrap())]).unwrap();
        assert!((expected_switches(&single, 2.0) - 2.0).abs() < 1e-12);
        assert!((expected_switches(&single, 1000.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn plan_mismatch_is_an_error() {
        let (circ, obs) = rx_z_setup();
        let plan = ShotPlan::uniform(2, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            i_evaluate(&circ, &obs, &[0.0], &plan, &SamplingMode::Wrs, &mut rng),
            Err(GradError::PlanMismatch { .. })
        ));
    }
}
