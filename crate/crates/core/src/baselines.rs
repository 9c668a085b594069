//! The four comparison policies evaluated head-to-head against the full
//! solver: random draws, even splits, and the two single-block optimizers.
//!
//! Whenever a sampled or pinned compression rate violates the PSNR floor at
//! the policy's `(p, B)`, it is lifted to the smallest feasible value, the
//! same rule the full solver applies. That keeps every policy inside the
//! feasible set of the joint problem.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{consumption, Allocation};
use crate::optimizer::OptimizerConfig;
use crate::p3::{min_feasible_rho, solve_p3};
use crate::p4::solve_p4;
use crate::scenario::Scenario;

/// RNG stream reserved for the random-allocation baseline, away from the
/// device streams `0..N` used by scenario generation.
pub const RANDOM_BASELINE_STREAM: u64 = 0xBA5E_11E5;

/// The comparison policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaselineKind {
    /// Truncated-normal draws around the range midpoints.
    RandomAllocation,
    /// Even split of every resource.
    AverageAllocation,
    /// Power and bandwidth optimized, everything else at the even split.
    OptimizePBOnly,
    /// Frequencies and compression optimized, power/bandwidth at the split.
    OptimizeFHRhoOnly,
}

impl BaselineKind {
    /// All four policies, in presentation order.
    pub const ALL: [BaselineKind; 4] = [
        BaselineKind::RandomAllocation,
        BaselineKind::AverageAllocation,
        BaselineKind::OptimizePBOnly,
        BaselineKind::OptimizeFHRhoOnly,
    ];

    /// Stable serialized name.
    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::RandomAllocation => "random_allocation",
            BaselineKind::AverageAllocation => "average_allocation",
            BaselineKind::OptimizePBOnly => "optimize_pb_only",
            BaselineKind::OptimizeFHRhoOnly => "optimize_fhrho_only",
        }
    }

    /// Parses a stable name.
    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::UnknownName(name.into()))
    }
}

impl std::fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Lifts each device's compression rate to the PSNR-feasible minimum at the
/// given `(p, B)`, erroring when even the maximum rate falls short.
fn lift_rho(scenario: &Scenario, alloc: &mut Allocation) -> Result<()> {
    for (i, dev) in scenario.devices.iter().enumerate() {
        let feasible = min_feasible_rho(
            &scenario.psnr_model,
            dev,
            i,
            alloc.power[i],
            alloc.bandwidth[i],
            scenario.system.noise_psd,
        )?;
        if alloc.rho[i] < feasible {
            alloc.rho[i] = feasible;
        }
    }
    Ok(())
}

fn with_deadline(scenario: &Scenario, mut alloc: Allocation) -> Result<Allocation> {
    let report = consumption(scenario, &alloc)?;
    alloc.deadline = Some(report.t_max);
    Ok(alloc)
}

/// Even split of every resource, compression at the midpoint, lifted for the
/// PSNR floor where it binds.
pub fn average_allocation(scenario: &Scenario) -> Result<Allocation> {
    let n = scenario.devices.len();
    let mut alloc = Allocation {
        power: scenario.devices.iter().map(|d| d.p_max / 2.0).collect(),
        bandwidth: vec![scenario.system.total_bandwidth / n as f64; n],
        freq_device: scenario.devices.iter().map(|d| d.f_max / 2.0).collect(),
        freq_bs: scenario.devices.iter().map(|d| d.h_max / 2.0).collect(),
        rho: scenario
            .devices
            .iter()
            .map(|d| 0.5 * (d.rho_min + d.rho_max))
            .collect(),
        deadline: None,
    };
    lift_rho(scenario, &mut alloc)?;
    with_deadline(scenario, alloc)
}

fn truncated_normal(rng: &mut ChaCha8Rng, mid: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
    let dist = Normal::new(mid, sigma).expect("finite sigma");
    loop {
        let x = dist.sample(rng);
        if x > lo && x <= hi {
            return x;
        }
    }
}

/// Truncated-normal draws centered at the range midpoints with sigma a tenth
/// of the range width; bandwidth drawn near the even share and rescaled so
/// the budget is spent exactly.
pub fn random_allocation(scenario: &Scenario, seed: u64) -> Result<Allocation> {
    let n = scenario.devices.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(RANDOM_BASELINE_STREAM);
    let b_total = scenario.system.total_bandwidth;
    for attempt in 0..100 {
        let mut alloc = Allocation {
            power: Vec::with_capacity(n),
            bandwidth: Vec::with_capacity(n),
            freq_device: Vec::with_capacity(n),
            freq_bs: Vec::with_capacity(n),
            rho: Vec::with_capacity(n),
            deadline: None,
        };
        for dev in &scenario.devices {
            alloc
                .power
                .push(truncated_normal(&mut rng, dev.p_max / 2.0, dev.p_max / 10.0, 0.0, dev.p_max));
            alloc.freq_device.push(truncated_normal(
                &mut rng,
                dev.f_max / 2.0,
                dev.f_max / 10.0,
                0.0,
                dev.f_max,
            ));
            alloc.freq_bs.push(truncated_normal(
                &mut rng,
                dev.h_max / 2.0,
                dev.h_max / 10.0,
                0.0,
                dev.h_max,
            ));
            let width = dev.rho_max - dev.rho_min;
            let rho = if width > 0.0 {
                truncated_normal(
                    &mut rng,
                    0.5 * (dev.rho_min + dev.rho_max),
                    width / 10.0,
                    dev.rho_min,
                    dev.rho_max,
                )
            } else {
                dev.rho_min
            };
            alloc.rho.push(rho);
            let lo = b_total / (1.25 * n as f64);
            let hi = b_total / (0.8 * n as f64);
            let u: f64 = rand::Rng::random(&mut rng);
            alloc.bandwidth.push(lo + (hi - lo) * u);
        }
        let sum: f64 = alloc.bandwidth.iter().sum();
        for b in &mut alloc.bandwidth {
            *b *= b_total / sum;
        }
        match lift_rho(scenario, &mut alloc) {
            Ok(()) => return with_deadline(scenario, alloc),
            Err(Error::InfeasibleRho { .. }) if attempt < 99 => {} // redraw
            Err(e) => return Err(e),
        }
    }
    unreachable!("loop returns or errors within 100 attempts")
}

/// Optimizes power and bandwidth only; frequencies and compression stay at
/// the even split. The deadline is the pinned point's own slowest round.
pub fn optimize_pb_only(scenario: &Scenario, config: &OptimizerConfig) -> Result<Allocation> {
    let base = average_allocation(scenario)?;
    let report = consumption(scenario, &base)?;
    let deadline = report.t_max;
    let sol = solve_p4(
        scenario,
        &base.rho,
        &report.t_cmp,
        &report.t_bs,
        deadline,
        &config.newton,
        (&base.power, &base.bandwidth),
    )?;
    with_deadline(
        scenario,
        Allocation {
            power: sol.power,
            bandwidth: sol.bandwidth,
            freq_device: base.freq_device,
            freq_bs: base.freq_bs,
            rho: base.rho,
            deadline: None,
        },
    )
}

/// Optimizes frequencies and compression only; power and bandwidth stay at
/// the even split.
pub fn optimize_fhrho_only(scenario: &Scenario, _config: &OptimizerConfig) -> Result<Allocation> {
    let base = average_allocation(scenario)?;
    let sol = solve_p3(scenario, &base.power, &base.bandwidth)?;
    with_deadline(
        scenario,
        Allocation {
            power: base.power,
            bandwidth: base.bandwidth,
            freq_device: sol.freq_device,
            freq_bs: sol.freq_bs,
            rho: sol.rho,
            deadline: None,
        },
    )
}

/// Runs one baseline by kind.
pub fn run_baseline(
    scenario: &Scenario,
    kind: BaselineKind,
    seed: u64,
    config: &OptimizerConfig,
) -> Result<Allocation> {
    match kind {
        BaselineKind::RandomAllocation => random_allocation(scenario, seed),
        BaselineKind::AverageAllocation => average_allocation(scenario),
        BaselineKind::OptimizePBOnly => optimize_pb_only(scenario, config),
        BaselineKind::OptimizeFHRhoOnly => optimize_fhrho_only(scenario, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::verify_feasibility;
    use crate::scenario::{sample_scenario, ScenarioConfig};

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn scenario(n: usize, seed: u64) -> Scenario {
        let mut cfg = ScenarioConfig::default();
        cfg.device_count = n;
        cfg.seed = seed;
        sample_scenario(&cfg).unwrap()
    }

    #[test]
    fn average_hits_midpoints() {
        let sc = scenario(50, 0);
        let a = average_allocation(&sc).unwrap();
        assert!(rel_err(a.bandwidth[0], 4e5) < 1e-12);
        assert!(rel_err(a.power[0], 0.05) < 1e-12);
        assert!(rel_err(a.freq_device[0], 5e8) < 1e-12);
        assert!(rel_err(a.freq_bs[0], 2.5e9) < 1e-12);
        // PSNR slack at the defaults: no lift.
        assert!(rel_err(a.rho[0], 0.2) < 1e-12);
        verify_feasibility(&sc, &a, 1e-9).unwrap();
    }

    #[test]
    fn average_bandwidth_scales_with_count() {
        let sc = scenario(10, 1);
        let a = average_allocation(&sc).unwrap();
        assert!(rel_err(a.bandwidth[3], 2e6) < 1e-12);
    }

    #[test]
    fn random_is_seed_deterministic_and_budget_exact() {
        let sc = scenario(20, 2);
        let a = random_allocation(&sc, 7).unwrap();
        let b = random_allocation(&sc, 7).unwrap();
        assert_eq!(a, b);
        let c = random_allocation(&sc, 8).unwrap();
        assert_ne!(a, c);
        let sum: f64 = a.bandwidth.iter().sum();
        assert!(rel_err(sum, sc.system.total_bandwidth) < 1e-12);
        verify_feasibility(&sc, &a, 1e-9).unwrap();
    }

    #[test]
    fn random_stays_inside_bounds() {
        let sc = scenario(40, 3);
        let a = random_allocation(&sc, 123).unwrap();
        for (i, dev) in sc.devices.iter().enumerate() {
            assert!(a.power[i] > 0.0 && a.power[i] <= dev.p_max);
            assert!(a.freq_device[i] > 0.0 && a.freq_device[i] <= dev.f_max);
            assert!(a.freq_bs[i] > 0.0 && a.freq_bs[i] <= dev.h_max);
            assert!(a.rho[i] >= dev.rho_min && a.rho[i] <= dev.rho_max);
        }
    }

    #[test]
    fn pb_only_pins_the_frequency_block() {
        let sc = scenario(8, 4);
        let cfg = OptimizerConfig::default();
        let avg = average_allocation(&sc).unwrap();
        let pb = optimize_pb_only(&sc, &cfg).unwrap();
        assert_eq!(pb.freq_device, avg.freq_device);
        assert_eq!(pb.freq_bs, avg.freq_bs);
        assert_eq!(pb.rho, avg.rho);
        verify_feasibility(&sc, &pb, 1e-8).unwrap();
        let o_pb = consumption(&sc, &pb).unwrap().objective;
        let o_avg = consumption(&sc, &avg).unwrap().objective;
        assert!(o_pb <= o_avg * (1.0 + 1e-9), "{o_pb} > {o_avg}");
    }

    #[test]
    fn fhrho_only_pins_the_radio_block() {
        let sc = scenario(8, 5);
        let cfg = OptimizerConfig::default();
        let avg = average_allocation(&sc).unwrap();
        let fh = optimize_fhrho_only(&sc, &cfg).unwrap();
        assert_eq!(fh.power, avg.power);
        assert_eq!(fh.bandwidth, avg.bandwidth);
        verify_feasibility(&sc, &fh, 1e-8).unwrap();
        let o_fh = consumption(&sc, &fh).unwrap().objective;
        let o_avg = consumption(&sc, &avg).unwrap().objective;
        assert!(o_fh <= o_avg * (1.0 + 1e-9), "{o_fh} > {o_avg}");
        // All devices finish together under the P3 block.
        let rep = consumption(&sc, &fh).unwrap();
        for i in 0..8 {
            assert!(rel_err(rep.round_time(i), rep.t_max) < 1e-9);
        }
    }

    #[test]
    fn kind_names_roundtrip() {
        for k in BaselineKind::ALL {
            assert_eq!(BaselineKind::from_name(k.name()).unwrap(), k);
        }
        assert!(BaselineKind::from_name("nope").is_err());
    }
}
