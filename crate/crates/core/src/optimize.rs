//! Optimization loops: plain SGD, fixed-shot Adam, and the adaptive-shot
//! family (iCANS, gCANS, weCANS(i), weCANS(g), AdamCANS, we-AdamCANS).
//!
//! A run is strictly sequential and stops on a simulated time, economic
//! cost, or total shot budget.  Every iteration is recorded with the exact
//! cost (computed from the statevector, never the noisy estimate) together
//! with the accumulated simulated time, cost, and shot counts.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alloc::{self, Ema, EmaTracker};
use crate::clock::{overhead_ratios, CostClock, LatencyModel};
use crate::grad::{self, GradError, SamplingMode, ShotPlan};
use crate::pauli::Observable;
use crate::sim::{self, ParametricCircuit, SimError};

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Grad(#[from] GradError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Alloc(#[from] alloc::AllocError),
}

/// The eight supported optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimizerKind {
    #[serde(rename = "sgd")]
    Sgd,
    #[serde(rename = "adam")]
    Adam,
    #[serde(rename = "adamcans")]
    AdamCans,
    #[serde(rename = "we-adamcans")]
    WeAdamCans,
    #[serde(rename = "icans")]
    ICans,
    #[serde(rename = "gcans")]
    GCans,
    #[serde(rename = "wecans-i")]
    WeCansI,
    #[serde(rename = "wecans-g")]
    WeCansG,
}

impl OptimizerKind {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
            OptimizerKind::AdamCans => "adamcans",
            OptimizerKind::WeAdamCans => "we-adamcans",
            OptimizerKind::ICans => "icans",
            OptimizerKind::GCans => "gcans",
            OptimizerKind::WeCansI => "wecans-i",
            OptimizerKind::WeCansG => "wecans-g",
        }
    }

    fn is_adam_family(&self) -> bool {
        matches!(
            self,
            OptimizerKind::Adam | OptimizerKind::AdamCans | OptimizerKind::WeAdamCans
        )
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            "adamcans" => Ok(OptimizerKind::AdamCans),
            "we-adamcans" => Ok(OptimizerKind::WeAdamCans),
            "icans" => Ok(OptimizerKind::ICans),
            "gcans" => Ok(OptimizerKind::GCans),
            "wecans-i" => Ok(OptimizerKind::WeCansI),
            "wecans-g" => Ok(OptimizerKind::WeCansG),
            other => Err(format!("unknown optimizer '{other}'")),
        }
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Stop criterion: exactly one budget dimension is active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Budget {
    #[serde(rename = "sim_time")]
    SimTime(f64),
    #[serde(rename = "econ_cost")]
    EconCost(f64),
    #[serde(rename = "shots")]
    Shots(u64),
}

/// Hyperparameters for one optimization run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    /// Step size; `None` means 1/L.
    pub alpha: Option<f64>,
    /// Lipschitz bound; `None` means d·Σ|c_i|.
    pub lipschitz: Option<f64>,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// EMA decay for gradient/variance running averages.
    pub mu: f64,
    /// Shot floor for the Adam-coupled rules.
    pub s_min: u64,
    /// Step-size clipping rate for the gain bound.
    pub r: f64,
    /// When false, the clipped step size feeds only the shot computation.
    pub clipping: bool,
    /// Per-component shot count for fixed-shot SGD/Adam.
    pub fixed_shots: u64,
    pub budget: Budget,
    /// Record the parameter vector in every trace record.
    pub record_theta: bool,
}

impl OptimizerConfig {
    pub fn new(kind: OptimizerKind, budget: Budget) -> Self {
        Self {
            kind,
            alpha: None,
            lipschitz: None,
            beta1: 0.9,
            beta2: 0.99,
            epsilon: 1e-8,
            mu: 0.99,
            s_min: 100,
            r: 0.75,
            clipping: false,
            fixed_shots: 100,
            budget,
            record_theta: false,
        }
    }

    fn validate(&self) -> Result<(), OptimizeError> {
        let ok_unit =
            |x: f64| x > 0.0 && x < 1.0;
        if !ok_unit(self.beta1) || !ok_unit(self.beta2) || !ok_unit(self.mu) || !ok_unit(self.r) {
            return Err(OptimizeError::InvalidConfig(
                "beta1, beta2, mu and r must lie in (0, 1)".into(),
            ));
        }
        if self.s_min < 2 {
            return Err(OptimizeError::InvalidConfig("s_min must be at least 2".into()));
        }
        if self.fixed_shots < 2 {
            return Err(OptimizeError::InvalidConfig(
                "fixed_shots must be at least 2".into(),
            ));
        }
        let positive = match self.budget {
            Budget::SimTime(t) => t > 0.0,
            Budget::EconCost(c) => c > 0.0,
            Budget::Shots(s) => s > 0,
        };
        if !positive {
            return Err(OptimizeError::InvalidConfig("budget must be positive".into()));
        }
        Ok(())
    }
}

/// One recorded iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: u64,
    pub sim_time: f64,
    pub econ_cost: f64,
    pub total_shots: u64,
    pub shot_plan: Vec<u64>,
    pub exact_cost: f64,
    pub grad_norm_est: f64,
    /// Set when a degenerate gain estimate forced the all-s_min plan.
    #[serde(default)]
    pub plan_fallback: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
}

/// Full trace of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub final_theta: Vec<f64>,
}

impl RunTrace {
    pub fn final_exact_cost(&self) -> Option<f64> {
        self.records.last().map(|r| r.exact_cost)
    }
}

fn exhausted(clock: &CostClock, budget: &Budget) -> bool {
    match *budget {
        Budget::SimTime(t) => clock.sim_time >= t,
        Budget::EconCost(c) => clock.econ_cost >= c,
        Budget::Shots(s) => clock.total_shots >= s,
    }
}

/// Estimated circuits per gradient component for the next iteration, used
/// to form overhead ratios before shots are committed.
fn estimated_switches(mode: &SamplingMode, obs: &Observable, s_tilde: &[f64]) -> Vec<f64> {
    match mode {
        SamplingMode::Wrs => s_tilde
            .iter()
            .map(|&s| grad::expected_switches(obs, s.max(2.0)))
            .collect(),
        _ => vec![2.0 * obs.n_groups() as f64; s_tilde.len()],
    }
}

fn uniform_init<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect()
}

struct Recorder<'a> {
    clock: CostClock,
    latency: &'a LatencyModel,
    pricing: Option<&'a LatencyModel>,
    records: Vec<IterationRecord>,
    record_theta: bool,
}

impl<'a> Recorder<'a> {
    fn record(
        &mut self,
        k: u64,
        circuit: &ParametricCircuit,
        obs: &Observable,
        theta: &[f64],
        sample: &grad::GradientSample,
        plan: &ShotPlan,
        plan_fallback: bool,
    ) -> Result<(), OptimizeError> {
        self.clock.charge_iteration(
            self.latency,
            self.pricing,
            sample.total_shots(),
            sample.total_switches(),
            sample.comm_rounds,
        );
        let exact_cost = sim::exact_expectation(&sim::run(circuit, theta)?, obs)?;
        self.records.push(IterationRecord {
            k,
            sim_time: self.clock.sim_time,
            econ_cost: self.clock.econ_cost,
            total_shots: self.clock.total_shots,
            shot_plan: plan.shots().to_vec(),
            exact_cost,
            grad_norm_est: sample.grad_norm(),
            plan_fallback,
            theta: self.record_theta.then(|| theta.to_vec()),
        });
        Ok(())
    }
}

/// Run one optimizer on one task.
///
/// `pricing` feeds the economic-cost accumulator; when the budget is an
/// economic one, overhead ratios are computed under the pricing model
/// instead of the latency model.
#[allow(clippy::too_many_arguments)]
pub fn run_optimizer(
    circuit: &ParametricCircuit,
    obs: &Observable,
    mode: &SamplingMode,
    config: &OptimizerConfig,
    latency: &LatencyModel,
    pricing: Option<&LatencyModel>,
    initial_theta: Option<Vec<f64>>,
    rng: &mut ChaCha8Rng,
) -> Result<RunTrace, OptimizeError> {
    config.validate()?;
    let d = circuit.n_params;
    let l = config
        .lipschitz
        .unwrap_or_else(|| d as f64 * obs.one_norm());
    if l <= 0.0 {
        return Err(OptimizeError::InvalidConfig("Lipschitz bound must be positive".into()));
    }
    let alpha = config.alpha.unwrap_or(1.0 / l);
    if alpha <= 0.0 {
        return Err(OptimizeError::InvalidConfig("alpha must be positive".into()));
    }
    if !config.kind.is_adam_family() && config.kind != OptimizerKind::Sgd && alpha >= 2.0 / l {
        return Err(OptimizeError::InvalidConfig(format!(
            "CANS rules need alpha < 2/L (alpha = {alpha}, L = {l})"
        )));
    }
    let theta = match initial_theta {
        Some(t) => {
            if t.len() != d {
                return Err(OptimizeError::InvalidConfig(
                    "initial theta length does not match parameter count".into(),
                ));
            }
            t
        }
        None => uniform_init(d, rng),
    };

    let overhead_model = match config.budget {
        Budget::EconCost(_) => pricing.unwrap_or(latency),
        _ => latency,
    };

    if config.kind.is_adam_family() {
        run_adam_family(
            circuit, obs, mode, config, latency, pricing, overhead_model, theta, l, alpha, rng,
        )
    } else {
        run_sgd_family(
            circuit, obs, mode, config, latency, pricing, overhead_model, theta, l, alpha, rng,
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn run_sgd_family(
    circuit: &ParametricCircuit,
    obs: &Observable,
    mode: &SamplingMode,
    config: &OptimizerConfig,
    latency: &LatencyModel,
    pricing: Option<&LatencyModel>,
    overhead_model: &LatencyModel,
    mut theta: Vec<f64>,
    l: f64,
    alpha: f64,
    rng: &mut ChaCha8Rng,
) -> Result<RunTrace, OptimizeError> {
    let d = circuit.n_params;
    let mut plan = match config.kind {
        OptimizerKind::Sgd => ShotPlan::uniform(d, config.fixed_shots)?,
        _ => ShotPlan::uniform(d, 2)?,
    };
    let mut tracker = EmaTracker::new(d, config.mu);
    let mut s_tilde = Ema::new(d, config.mu);
    let mut rec = Recorder {
        clock: CostClock::new(),
        latency,
        pricing,
        records: Vec::new(),
        record_theta: config.record_theta,
    };
    let mut k = 0u64;
    while !exhausted(&rec.clock, &config.budget) {
        let sample = grad::i_evaluate(circuit, obs, &theta, &plan, mode, rng)?;
        for i in 0..d {
            theta[i] -= alpha * sample.g[i];
        }
        tracker.update(&sample.g, &sample.s_var);
        let plan_f64: Vec<f64> = plan.shots().iter().map(|&s| s as f64).collect();
        s_tilde.update(&plan_f64);

        if config.kind != OptimizerKind::Sgd {
            let chi = tracker.chi();
            let xi = tracker.xi();
            let m_est = estimated_switches(mode, obs, &s_tilde.corrected());
            let ratios = overhead_ratios(overhead_model, &m_est, d);
            let shots = match config.kind {
                OptimizerKind::ICans => alloc::icans_shots(&chi, &xi, l, alpha)?,
                OptimizerKind::GCans => alloc::gcans_shots(&chi, &xi, l, alpha)?,
                OptimizerKind::WeCansI => {
                    alloc::wecans_i_shots(&chi, &xi, l, alpha, &ratios.per_component)?
                }
                OptimizerKind::WeCansG => {
                    alloc::wecans_g_shots(&chi, &xi, l, alpha, ratios.total)?
                }
                _ => unreachable!(),
            };
            plan = ShotPlan::new(shots)?;
        }
        rec.record(k, circuit, obs, &theta, &sample, &plan, false)?;
        k += 1;
    }
    Ok(RunTrace {
        records: rec.records,
        final_theta: theta,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_adam_family(
    circuit: &ParametricCircuit,
    obs: &Observable,
    mode: &SamplingMode,
    config: &OptimizerConfig,
    latency: &LatencyModel,
    pricing: Option<&LatencyModel>,
    overhead_model: &LatencyModel,
    mut theta: Vec<f64>,
    l: f64,
    alpha_base: f64,
    rng: &mut ChaCha8Rng,
) -> Result<RunTrace, OptimizeError> {
    let d = circuit.n_params;
    let adaptive = config.kind != OptimizerKind::Adam;
    let mut plan = if adaptive {
        ShotPlan::uniform(d, config.s_min)?
    } else {
        ShotPlan::uniform(d, config.fixed_shots)?
    };
    let mut m_raw = vec![0.0; d];
    let mut v_raw = vec![0.0; d];
    let mut tracker = EmaTracker::new(d, config.mu);
    let mut s_tilde = Ema::new(d, config.mu);
    // With Clipping enabled the clipped step size carries over into the
    // next parameter update; otherwise the update always uses the base α.
    let mut alpha_update = alpha_base;
    let mut rec = Recorder {
        clock: CostClock::new(),
        latency,
        pricing,
        records: Vec::new(),
        record_theta: config.record_theta,
    };
    let mut k = 0u64;
    while !exhausted(&rec.clock, &config.budget) {
        let sample = grad::i_evaluate(circuit, obs, &theta, &plan, mode, rng)?;
        let t = k + 1;
        let c1 = 1.0 - config.beta1.powi(t as i32);
        let c2 = 1.0 - config.beta2.powi(t as i32);
        for i in 0..d {
            m_raw[i] = config.beta1 * m_raw[i] + (1.0 - config.beta1) * sample.g[i];
            v_raw[i] = config.beta2 * v_raw[i] + (1.0 - config.beta2) * sample.g[i] * sample.g[i];
            let m = m_raw[i] / c1;
            let v = v_raw[i] / c2;
            theta[i] -= alpha_update * m / (v.sqrt() + config.epsilon);
        }

        let mut plan_fallback = false;
        if adaptive {
            tracker.update(&sample.g, &sample.s_var);
            let plan_f64: Vec<f64> = plan.shots().iter().map(|&s| s as f64).collect();
            s_tilde.update(&plan_f64);
            let chi = tracker.chi();
            let xi = tracker.xi();

            // Predicted update direction for the next step, evaluated at
            // the gradient running average.
            let next_k = (t + 1) as u32;
            let x = alloc::adam_direction(
                &chi,
                &m_raw,
                &v_raw,
                config.beta1,
                config.beta2,
                config.epsilon,
                next_k,
            );
            let (alpha_shots, _clipped) = alloc::clip_alpha(&chi, &x, l, alpha_base, config.r);
            if config.clipping {
                alpha_update = alpha_shots;
            }
            let (a, b) = alloc::adam_gain_terms(
                &chi,
                &xi,
                &m_raw,
                &v_raw,
                alpha_shots,
                l,
                config.epsilon,
                config.beta1,
                config.beta2,
                next_k,
            );
            let r_total = if config.kind == OptimizerKind::AdamCans {
                0.0
            } else {
                let m_est = estimated_switches(mode, obs, &s_tilde.corrected());
                overhead_ratios(overhead_model, &m_est, d).total
            };
            plan = if a > 0.0 {
                ShotPlan::new(alloc::we_adam_shots(a, &b, r_total, config.s_min)?)?
            } else {
                plan_fallback = true;
                ShotPlan::uniform(d, config.s_min)?
            };
        }
        rec.record(k, circuit, obs, &theta, &sample, &plan, plan_fallback)?;
        k += 1;
    }
    Ok(RunTrace {
        records: rec.records,
        final_theta: theta,
    })
}
