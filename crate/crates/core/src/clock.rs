//! Simulated wall-clock and economic-cost accounting.
//!
//! One iteration costs c₁ per shot, c₂ per circuit switch, and c₃ per
//! communication round.  Read (c₁, c₂, c₃) as seconds for a latency model
//! or as prices for a cloud-pricing model; the arithmetic is identical.

use serde::{Deserialize, Serialize};

/// Sentinel overhead ratio for the pure task-pricing corner where c₁ = 0.
pub const OVERHEAD_SENTINEL: f64 = 1e12;

/// Linear overhead model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyModel {
    /// Cost per shot.
    pub c1: f64,
    /// Cost per circuit switch.
    pub c2: f64,
    /// Cost per communication round.
    pub c3: f64,
    /// Display label, e.g. "s" or "$".
    #[serde(default)]
    pub unit: String,
}

impl LatencyModel {
    pub fn new(c1: f64, c2: f64, c3: f64, unit: &str) -> Self {
        assert!(c1 >= 0.0 && c2 >= 0.0 && c3 >= 0.0);
        Self {
            c1,
            c2,
            c3,
            unit: unit.to_string(),
        }
    }

    /// All-zero overheads: the clock then counts shots only.
    pub fn free() -> Self {
        Self::new(0.0, 0.0, 0.0, "")
    }

    /// Superconducting-hardware wall-clock profile (seconds).
    pub fn superconducting() -> Self {
        Self::new(1e-5, 0.1, 4.0, "s")
    }

    /// Cloud per-task pricing profile (dollars).
    pub fn braket_rigetti() -> Self {
        Self::new(3.5e-4, 0.3, 0.0, "$")
    }

    pub fn charge(&self, shots: u64, switches: u64, rounds: u64) -> f64 {
        self.c1 * shots as f64 + self.c2 * switches as f64 + self.c3 * rounds as f64
    }
}

/// Per-iteration overhead ratios relative to the single-shot cost.
#[derive(Debug, Clone, PartialEq)]
pub struct OverheadRatio {
    /// R = (c₂Σm_i + c₃)/c₁.
    pub total: f64,
    /// R_i = (c₂m_i + c₃/d)/c₁ per gradient component.
    pub per_component: Vec<f64>,
    /// Set when c₁ = 0 forced the sentinel ratio.
    pub sentinel: bool,
}

/// Compute R and R_i from (estimated) per-component circuit counts.
pub fn overhead_ratios(latency: &LatencyModel, switches: &[f64], d: usize) -> OverheadRatio {
    let m_sum: f64 = switches.iter().sum();
    if latency.c1 <= 0.0 {
        let zero_overhead = latency.c2 == 0.0 && latency.c3 == 0.0;
        let v = if zero_overhead { 0.0 } else { OVERHEAD_SENTINEL };
        return OverheadRatio {
            total: v,
            per_component: vec![v; switches.len()],
            sentinel: !zero_overhead,
        };
    }
    OverheadRatio {
        total: (latency.c2 * m_sum + latency.c3) / latency.c1,
        per_component: switches
            .iter()
            .map(|&m| (latency.c2 * m + latency.c3 / d as f64) / latency.c1)
            .collect(),
        sentinel: false,
    }
}

/// Monotone accumulators for a single optimization run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CostClock {
    pub sim_time: f64,
    pub econ_cost: f64,
    pub total_shots: u64,
    pub total_switches: u64,
    pub total_rounds: u64,
}

/// The per-iteration increment returned by [`CostClock::charge_iteration`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeDelta {
    pub time: f64,
    pub cost: f64,
}

impl CostClock {
    pub fn new() -> Self {
        Self::default()
    }

    /// Charge one iteration's counts under a time model and an optional
    /// separate pricing model.
    pub fn charge_iteration(
        &mut self,
        latency: &LatencyModel,
        pricing: Option<&LatencyModel>,
        shots: u64,
        switches: u64,
        rounds: u64,
    ) -> ChargeDelta {
        let time = latency.charge(shots, switches, rounds);
        let cost = pricing.map_or(0.0, |p| p.charge(shots, switches, rounds));
        self.sim_time += time;
        self.econ_cost += cost;
        self.total_shots += shots;
        self.total_switches += switches;
        self.total_rounds += rounds;
        ChargeDelta { time, cost }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn superconducting_iteration_charge() {
        let mut clock = CostClock::new();
        let delta = clock.charge_iteration(&LatencyModel::superconducting(), None, 1000, 8, 1);
        assert!((delta.time - 4.81).abs() < 1e-12);
        assert!((clock.sim_time - 4.81).abs() < 1e-12);
    }

    #[test]
    fn braket_pricing_charge() {
        let price = LatencyModel::braket_rigetti();
        assert!((price.charge(1000, 8, 0) - 2.75).abs() < 1e-12);
    }

    #[test]
    fn free_model_counts_shots_only() {
        let mut clock = CostClock::new();
        let delta = clock.charge_iteration(&LatencyModel::free(), None, 123, 9, 1);
        assert_eq!(delta.time, 0.0);
        assert_eq!(clock.total_shots, 123);
    }

    #[test]
    fn charging_is_linear() {
        let latency = LatencyModel::superconducting();
        let mut clock = CostClock::new();
        for _ in 0..7 {
            clock.charge_iteration(&latency, None, 1000, 8, 1);
        }
        assert!((clock.sim_time - 7.0 * 4.81).abs() < 1e-9);
        assert_eq!(clock.total_shots, 7000);
    }

    #[test]
    fn relabeling_time_and_cost_agree() {
        // With c3 = 0 and the same numbers in both slots, the two
        // accumulators coincide.
        let model = LatencyModel::new(3.5e-4, 0.3, 0.0, "$");
        let mut clock = CostClock::new();
        clock.charge_iteration(&model, Some(&model), 5000, 12, 1);
        assert!((clock.sim_time - clock.econ_cost).abs() < 1e-12);
    }

    #[test]
    fn overhead_ratio_values() {
        let latency = LatencyModel::superconducting();
        let ratios = overhead_ratios(&latency, &[2.0; 30], 30);
        assert!((ratios.per_component[0] - (0.2 + 4.0 / 30.0) / 1e-5).abs() < 1e-6);
        let ratios = overhead_ratios(&latency, &[2.0; 30], 30);
        assert!((ratios.total - (0.1 * 60.0 + 4.0) / 1e-5).abs() < 1e-6);
        assert!(!ratios.sentinel);
    }

    #[test]
    fn zero_overhead_ratio() {
        let latency = LatencyModel::new(1e-5, 0.0, 0.0, "s");
        let ratios = overhead_ratios(&latency, &[2.0, 2.0], 2);
        assert_eq!(ratios.total, 0.0);
        assert_eq!(ratios.per_component, vec![0.0, 0.0]);
    }

    #[test]
    fn zero_shot_price_hits_sentinel() {
        let pricing = LatencyModel::new(0.0, 0.3, 0.0, "$");
        let ratios = overhead_ratios(&pricing, &[2.0], 1);
        assert!(ratios.sentinel);
        assert_eq!(ratios.total, OVERHEAD_SENTINEL);
    }
}
