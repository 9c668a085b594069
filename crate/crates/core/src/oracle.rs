//! Independent verification machinery: brute-force grid search on tiny
//! instances, standalone KKT-residual evaluators for both solver blocks, and
//! a numerical concavity check of the rate surface.
//!
//! Nothing here shares a code path with the solvers beyond the core model
//! formulas, so agreement between the two is evidence, not tautology.
//!
//! Tolerance convention: "relative to scale" means divided by
//! `max(1, |dominant term|)` of the equation being checked; objective terms
//! in this problem span many decades.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{consumption, psnr, snr, Allocation, LN2};
use crate::p3::P3Solution;
use crate::p4::{Floors, P4Solution};
use crate::scenario::Scenario;

/// Maximum residual per KKT category, each relative to
/// `max(1, |dominant term|)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktReport {
    /// Worst stationarity residual.
    pub stationarity: f64,
    /// Worst complementary-slackness product.
    pub complementary: f64,
    /// Worst primal-feasibility violation.
    pub primal: f64,
    /// Worst dual-feasibility violation (negative multiplier mass).
    pub dual: f64,
}

impl KktReport {
    /// Largest residual across all categories.
    pub fn worst(&self) -> f64 {
        self.stationarity
            .max(self.complementary)
            .max(self.primal)
            .max(self.dual)
    }

    /// True when every category is within `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        self.worst() <= tol
    }
}

fn scaled(residual: f64, dominant: f64) -> f64 {
    residual.abs() / dominant.abs().max(1.0)
}

/// Evaluates every KKT condition of the frequency/deadline block at a given
/// `(p, B)` and solution.
pub fn kkt_residuals_p3(
    scenario: &Scenario,
    power: &[f64],
    bandwidth: &[f64],
    sol: &P3Solution,
) -> KktReport {
    let sys = &scenario.system;
    let mut rep = KktReport::default();
    let mut sum_beta = 0.0;
    for (i, dev) in scenario.devices.iter().enumerate() {
        let f = sol.freq_device[i];
        let h = sol.freq_bs[i];
        let beta = sol.beta[i];
        let work = dev.cycles_device * dev.samples;
        let work_bs = dev.cycles_bs * dev.samples;
        // Stationarity in the two frequencies.
        let t1 = 2.0 * sys.weight_energy * sys.kappa * work * f;
        let t2 = sol.alpha[i];
        let t3 = beta * work / (f * f);
        rep.stationarity = rep
            .stationarity
            .max(scaled(t1 + t2 - t3, t1.max(t2).max(t3)));
        let u1 = 2.0 * sys.weight_energy * sys.kappa * work_bs * h;
        let u2 = sol.tau[i];
        let u3 = beta * work_bs / (h * h);
        rep.stationarity = rep
            .stationarity
            .max(scaled(u1 + u2 - u3, u1.max(u2).max(u3)));
        // Complementary slackness.
        rep.complementary = rep
            .complementary
            .max(scaled(sol.alpha[i] * (f - dev.f_max), sol.alpha[i] * dev.f_max))
            .max(scaled(sol.tau[i] * (h - dev.h_max), sol.tau[i] * dev.h_max));
        let rate =
            crate::model::uplink_rate(power[i], bandwidth[i], dev.gain, sys.noise_psd).unwrap();
        let round = dev.payload_bits(sol.rho[i]) / rate + work / f + work_bs / h;
        rep.complementary = rep
            .complementary
            .max(scaled(beta * (round - sol.deadline), beta * sol.deadline));
        // Primal feasibility.
        rep.primal = rep
            .primal
            .max(scaled((f - dev.f_max).max(0.0), dev.f_max))
            .max(scaled((h - dev.h_max).max(0.0), dev.h_max))
            .max(scaled((round - sol.deadline).max(0.0), sol.deadline));
        // Dual feasibility.
        rep.dual = rep
            .dual
            .max(scaled((-sol.alpha[i]).max(0.0), 1.0))
            .max(scaled((-sol.tau[i]).max(0.0), 1.0))
            .max(scaled((-beta).max(0.0), 1.0));
        sum_beta += beta;
    }
    // Deadline stationarity couples the devices.
    rep.stationarity = rep
        .stationarity
        .max(scaled(sys.weight_time - sum_beta, sys.weight_time));
    rep
}

/// Evaluates every KKT condition of the power/bandwidth block.
pub fn kkt_residuals_p7(
    scenario: &Scenario,
    rho: &[f64],
    floors: &Floors,
    sol: &P4Solution,
) -> KktReport {
    let sys = &scenario.system;
    let n0 = sys.noise_psd;
    let mut rep = KktReport::default();
    for (i, dev) in scenario.devices.iter().enumerate() {
        let p = sol.power[i];
        let b = sol.bandwidth[i];
        let s = p * dev.gain / (n0 * b);
        let payload = dev.payload_bits(rho[i]);
        let a = sol.aux.gamma[i] * payload;
        let we = sol.aux.gamma[i] * sol.aux.delta[i] + sol.eta[i];
        // Power stationarity.
        let t2 = we * dev.gain / (n0 * (1.0 + s) * LN2);
        let t3 = sol.nu[i] * dev.gain;
        rep.stationarity = rep.stationarity.max(scaled(
            a - t2 - t3 + sol.iota[i],
            a.max(t2).max(t3).max(sol.iota[i]),
        ));
        // Bandwidth stationarity.
        let u1 = we * s.ln_1p() / LN2;
        let u2 = we * s / ((1.0 + s) * LN2);
        let u4 = sol.nu[i] * n0 * floors.snr[i];
        rep.stationarity = rep.stationarity.max(scaled(
            -u1 + u2 + sol.zeta + u4,
            u1.max(u2).max(sol.zeta).max(u4),
        ));
        // Complementary slackness.
        let rate = crate::model::uplink_rate(p, b, dev.gain, n0).unwrap();
        rep.complementary = rep
            .complementary
            .max(scaled(
                sol.eta[i] * (floors.rate[i] - rate),
                sol.eta[i] * floors.rate[i],
            ))
            .max(scaled(
                sol.nu[i] * (n0 * b * floors.snr[i] - p * dev.gain),
                sol.nu[i] * p * dev.gain,
            ))
            .max(scaled(
                sol.iota[i] * (p - dev.p_max),
                sol.iota[i] * dev.p_max,
            ));
        // Primal feasibility.
        rep.primal = rep
            .primal
            .max(scaled((p - dev.p_max).max(0.0), dev.p_max))
            .max(scaled(
                (floors.rate[i] - rate).max(0.0),
                floors.rate[i].max(rate),
            ))
            .max(scaled((floors.snr[i] - s).max(0.0), floors.snr[i]));
        // Dual feasibility.
        rep.dual = rep
            .dual
            .max(scaled((-sol.eta[i]).max(0.0), 1.0))
            .max(scaled((-sol.nu[i]).max(0.0), 1.0))
            .max(scaled((-sol.iota[i]).max(0.0), 1.0));
    }
    let bw: f64 = sol.bandwidth.iter().sum();
    rep.primal = rep.primal.max(scaled(
        (bw - sys.total_bandwidth).max(0.0),
        sys.total_bandwidth,
    ));
    rep.complementary = rep.complementary.max(scaled(
        sol.zeta * (bw - sys.total_bandwidth),
        sol.zeta * sys.total_bandwidth,
    ));
    rep.dual = rep.dual.max(scaled((-sol.zeta).max(0.0), 1.0));
    rep
}

/// Outcome of the numerical concavity check of the rate surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcavityReport {
    /// Samples evaluated.
    pub samples: usize,
    /// Samples that violated either bound.
    pub failures: usize,
    /// Worst second directional derivative relative to the rate magnitude
    /// (negative values are healthy).
    pub worst_curvature_ratio: f64,
    /// Worst relative disagreement between the finite-difference quadratic
    /// form and its closed form.
    pub worst_crosscheck: f64,
}

/// Checks, at random points and directions, that the second directional
/// derivative of the rate surface is non-positive (to `1e-9·|r|`) and that it
/// matches the closed-form quadratic form to `1e-6` relative.
///
/// The fourth-order central stencil runs along the ray
/// `t ↦ r(p·(1 + t·x₁), B·(1 + t·x₂))`, so the quadratic form is evaluated on
/// the coordinate-scaled direction `(p·x₁, B·x₂)`.
pub fn concavity_check(gain: f64, noise_psd: f64, samples: usize) -> ConcavityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4c454d4d41); // fixed seed: deterministic check
    let mut failures = 0;
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut worst_cross = 0.0f64;
    let h = 1e-2;
    for k in 0..samples {
        let p = 10f64.powf(-4.0 + 3.0 * rng.random::<f64>()); // 1e-4 .. 1e-1 W
        let b = 10f64.powf(4.0 + 4.0 * rng.random::<f64>()); // 1e4 .. 1e8 Hz
        let angle = std::f64::consts::TAU * rng.random::<f64>();
        let (x1, x2) = (angle.cos(), angle.sin());
        // Exercise the exact null direction of the Hessian now and then.
        let (x1, x2) = if k % 97 == 0 {
            let norm = (p * p + b * b).sqrt();
            (p / norm, b / norm)
        } else {
            (x1, x2)
        };
        let r0 = rate_at(p, b, gain, noise_psd);
        let eval = |t: f64| rate_at(p * (1.0 + t * x1), b * (1.0 + t * x2), gain, noise_psd);
        let fd = (-eval(2.0 * h) + 16.0 * eval(h) - 30.0 * r0 + 16.0 * eval(-h)
            - eval(-2.0 * h))
            / (12.0 * h * h);
        // Closed form on the scaled direction y = (p·x1, B·x2).
        let (y1, y2) = (p * x1, b * x2);
        let s = p * gain / (noise_psd * b);
        let diff = y1 * b - y2 * p;
        let closed = -(diff * diff) * gain * gain
            / (b.powi(3) * noise_psd * noise_psd * (1.0 + s) * (1.0 + s) * LN2);
        let ratio = fd / r0.abs();
        worst_ratio = worst_ratio.max(ratio);
        let cross = (fd - closed).abs() / closed.abs().max(1e-3 * r0.abs());
        worst_cross = worst_cross.max(cross);
        if ratio > 1e-9 || cross > 1e-6 {
            failures += 1;
        }
    }
    ConcavityReport {
        samples,
        failures,
        worst_curvature_ratio: worst_ratio,
        worst_crosscheck: worst_cross,
    }
}

fn rate_at(p: f64, b: f64, g: f64, n0: f64) -> f64 {
    b * (p * g / (n0 * b)).ln_1p() / LN2
}

/// A `(time, energy)` candidate with the grid indices that produced it.
#[derive(Debug, Clone, Copy)]
struct FrontPoint {
    time: f64,
    energy: f64,
    tag: [u16; 4], // p, rho, f, h grid indices
}

/// Keeps only non-dominated `(time, energy)` points, sorted by time.
fn pareto_front(mut pts: Vec<FrontPoint>) -> Vec<FrontPoint> {
    pts.sort_by(|a, b| {
        a.time
            .partial_cmp(&b.time)
            .unwrap()
            .then(a.energy.partial_cmp(&b.energy).unwrap())
    });
    let mut front: Vec<FrontPoint> = Vec::new();
    for p in pts {
        if front.last().map_or(true, |l| p.energy < l.energy) {
            front.push(p);
        }
    }
    front
}

/// Per-dimension axes of the search grid.
#[derive(Debug, Clone)]
pub struct GridAxes {
    /// Power values per device, W.
    pub power: Vec<Vec<f64>>,
    /// Compression values per device.
    pub rho: Vec<Vec<f64>>,
    /// Device frequency values per device, Hz.
    pub freq_device: Vec<Vec<f64>>,
    /// BS frequency values per device, Hz.
    pub freq_bs: Vec<Vec<f64>>,
    /// Bandwidth splits: each entry is a full per-device bandwidth vector
    /// summing to at most the budget.
    pub bandwidth_splits: Vec<Vec<f64>>,
}

fn log_space(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..k)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (k - 1) as f64).exp())
        .collect()
}

fn lin_space(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
        .collect()
}

/// Default axes: log-spaced over three decades up to each bound for power
/// and frequencies (the bounds span decades), linear for the compression
/// rate, and an even-simplex discretization of the bandwidth budget.
pub fn default_axes(scenario: &Scenario, grid_points: usize) -> GridAxes {
    let n = scenario.devices.len();
    let g = grid_points;
    let b_total = scenario.system.total_bandwidth;
    let mut splits = Vec::new();
    match n {
        1 => {
            for v in lin_space(b_total / g as f64, b_total, g) {
                splits.push(vec![v]);
            }
        }
        2 => {
            for i in 1..=g {
                let t = i as f64 / (g + 1) as f64;
                splits.push(vec![t * b_total, (1.0 - t) * b_total]);
            }
        }
        _ => {
            for i in 1..=g {
                for j in 1..=g {
                    let (t1, t2) = (i as f64 / (g + 2) as f64, j as f64 / (g + 2) as f64);
                    let t3 = 1.0 - t1 - t2;
                    if t3 > 0.0 {
                        splits.push(vec![t1 * b_total, t2 * b_total, t3 * b_total]);
                    }
                }
            }
        }
    }
    GridAxes {
        power: scenario
            .devices
            .iter()
            .map(|d| log_space(d.p_max * 1e-3, d.p_max, g))
            .collect(),
        rho: scenario
            .devices
            .iter()
            .map(|d| lin_space(d.rho_min, d.rho_max, g))
            .collect(),
        freq_device: scenario
            .devices
            .iter()
            .map(|d| log_space(d.f_max * 1e-3, d.f_max, g))
            .collect(),
        freq_bs: scenario
            .devices
            .iter()
            .map(|d| log_space(d.h_max * 1e-3, d.h_max, g))
            .collect(),
        bandwidth_splits: splits,
    }
}

/// Exhaustive search over the default grid; returns the best feasible
/// allocation and its objective. An upper bound on the true optimum by
/// construction.
pub fn grid_search(scenario: &Scenario, grid_points: usize) -> Result<(Allocation, f64)> {
    if scenario.devices.len() > 3 {
        return Err(Error::InvalidConfig(
            "grid search is limited to 3 devices".into(),
        ));
    }
    if grid_points < 10 {
        return Err(Error::InvalidConfig("need at least 10 grid points".into()));
    }
    grid_search_with_axes(scenario, &default_axes(scenario, grid_points))
}

/// Grid search over explicit axes (lets tests thread a grid through a known
/// optimum).
pub fn grid_search_with_axes(scenario: &Scenario, axes: &GridAxes) -> Result<(Allocation, f64)> {
    let sys = &scenario.system;
    let n = scenario.devices.len();
    let w1 = sys.weight_time;
    let w2 = sys.weight_energy;

    // Per (device, bandwidth) Pareto front over (p, rho, f, h). The front of
    // a sum of independent (t, e) components lies inside the product of the
    // component fronts, so merging fronts keeps the search exhaustive.
    let device_front = |dev_idx: usize, bandwidth: f64| -> Vec<FrontPoint> {
        let dev = &scenario.devices[dev_idx];
        let mut comm = Vec::new();
        for (pi, &p) in axes.power[dev_idx].iter().enumerate() {
            let s = p * dev.gain / (sys.noise_psd * bandwidth);
            let r = bandwidth * s.ln_1p() / LN2;
            if !(r > 0.0) {
                continue;
            }
            for (ri, &rho) in axes.rho[dev_idx].iter().enumerate() {
                if psnr(&scenario.psnr_model, rho, s) < dev.psnr_min {
                    continue;
                }
                let t_up = dev.payload_bits(rho) / r;
                comm.push(FrontPoint {
                    time: t_up,
                    energy: p * t_up,
                    tag: [pi as u16, ri as u16, 0, 0],
                });
            }
        }
        let comm = pareto_front(comm);
        let mut cmp = Vec::new();
        for (fi, &f) in axes.freq_device[dev_idx].iter().enumerate() {
            let work = dev.cycles_device * dev.samples;
            cmp.push(FrontPoint {
                time: work / f,
                energy: sys.kappa * work * f * f,
                tag: [0, 0, fi as u16, 0],
            });
        }
        let cmp = pareto_front(cmp);
        let mut bs = Vec::new();
        for (hi, &h) in axes.freq_bs[dev_idx].iter().enumerate() {
            let work = dev.cycles_bs * dev.samples;
            bs.push(FrontPoint {
                time: work / h,
                energy: sys.kappa * work * h * h,
                tag: [0, 0, 0, hi as u16],
            });
        }
        let bs = pareto_front(bs);
        let mut sum = Vec::with_capacity(comm.len() * cmp.len());
        for a in &comm {
            for b in &cmp {
                sum.push(FrontPoint {
                    time: a.time + b.time,
                    energy: a.energy + b.energy,
                    tag: [a.tag[0], a.tag[1], b.tag[2], 0],
                });
            }
        }
        let sum = pareto_front(sum);
        let mut full = Vec::with_capacity(sum.len() * bs.len());
        for a in &sum {
            for b in &bs {
                full.push(FrontPoint {
                    time: a.time + b.time,
                    energy: a.energy + b.energy,
                    tag: [a.tag[0], a.tag[1], a.tag[2], b.tag[3]],
                });
            }
        }
        pareto_front(full)
    };

    let mut best: Option<(f64, Vec<f64>, Vec<[u16; 4]>)> = None;
    for split in &axes.bandwidth_splits {
        let fronts: Vec<Vec<FrontPoint>> = (0..n).map(|i| device_front(i, split[i])).collect();
        if fronts.iter().any(|f| f.is_empty()) {
            continue;
        }
        // Fold devices together under max-time / sum-energy.
        let mut acc: Vec<(f64, f64, Vec<[u16; 4]>)> = fronts[0]
            .iter()
            .map(|p| (p.time, p.energy, vec![p.tag]))
            .collect();
        for front in fronts.iter().skip(1) {
            let mut next: Vec<(f64, f64, Vec<[u16; 4]>)> =
                Vec::with_capacity(acc.len() + front.len());
            for a in &acc {
                for b in front {
                    let t = a.0.max(b.time);
                    let e = a.1 + b.energy;
                    let mut tags = a.2.clone();
                    tags.push(b.tag);
                    next.push((t, e, tags));
                }
            }
            // Prune to the (t, e) front to keep the fold tractable.
            next.sort_by(|x, y| {
                x.0.partial_cmp(&y.0)
                    .unwrap()
                    .then(x.1.partial_cmp(&y.1).unwrap())
            });
            let mut pruned: Vec<(f64, f64, Vec<[u16; 4]>)> = Vec::new();
            for item in next {
                if pruned.last().map_or(true, |l| item.1 < l.1) {
                    pruned.push(item);
                }
            }
            acc = pruned;
        }
        for (t, e, tags) in acc {
            let objective = w1 * t + w2 * e;
            if best.as_ref().map_or(true, |(o, ..)| objective < *o) {
                best = Some((objective, split.clone(), tags));
            }
        }
    }
    let (objective, split, tags) = best.ok_or(Error::NoFeasibleGridPoint)?;
    let alloc = Allocation {
        power: (0..n).map(|i| axes.power[i][tags[i][0] as usize]).collect(),
        bandwidth: split,
        freq_device: (0..n)
            .map(|i| axes.freq_device[i][tags[i][2] as usize])
            .collect(),
        freq_bs: (0..n)
            .map(|i| axes.freq_bs[i][tags[i][3] as usize])
            .collect(),
        rho: (0..n).map(|i| axes.rho[i][tags[i][1] as usize]).collect(),
        deadline: None,
    };
    // Recompute through the shared model as a consistency guard.
    let report = consumption(scenario, &alloc)?;
    debug_assert!((report.objective - objective).abs() <= 1e-9 * objective.abs().max(1e-12));
    let mut alloc = alloc;
    alloc.deadline = Some(report.t_max);
    Ok((alloc, report.objective))
}

/// Achieved PSNR of each device under an allocation, dB.
pub fn achieved_psnr(scenario: &Scenario, alloc: &Allocation) -> Vec<f64> {
    scenario
        .devices
        .iter()
        .enumerate()
        .map(|(i, dev)| {
            let s = snr(
                alloc.power[i],
                alloc.bandwidth[i],
                dev.gain,
                scenario.system.noise_psd,
            )
            .unwrap();
            psnr(&scenario.psnr_model, alloc.rho[i], s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::verify_feasibility;
    use crate::optimizer::{solve, OptimizerConfig};
    use crate::p3::solve_p3;
    use crate::scenario::{sample_scenario, ScenarioConfig};

    fn scenario(n: usize, seed: u64) -> Scenario {
        let mut cfg = ScenarioConfig::default();
        cfg.device_count = n;
        cfg.seed = seed;
        sample_scenario(&cfg).unwrap()
    }

    #[test]
    fn p3_residuals_near_zero_for_solver_output() {
        let sc = scenario(10, 1);
        let p = vec![0.05; 10];
        let b = vec![2e6; 10];
        let sol = solve_p3(&sc, &p, &b).unwrap();
        let rep = kkt_residuals_p3(&sc, &p, &b, &sol);
        assert!(rep.passes(1e-6), "report {rep:?}");
    }

    #[test]
    fn p3_residual_grows_with_perturbation() {
        let sc = scenario(5, 2);
        let p = vec![0.05; 5];
        let b = vec![4e5; 5];
        let mut sol = solve_p3(&sc, &p, &b).unwrap();
        let clean = kkt_residuals_p3(&sc, &p, &b, &sol).worst();
        sol.freq_device[2] *= 1.10;
        let bent = kkt_residuals_p3(&sc, &p, &b, &sol);
        assert!(bent.worst() > clean.max(1e-9), "bent {bent:?}");
    }

    #[test]
    fn p3_alpha_only_when_clamped() {
        let sc = scenario(20, 3);
        let p = vec![0.05; 20];
        let b = vec![1e6; 20];
        let sol = solve_p3(&sc, &p, &b).unwrap();
        for i in 0..20 {
            if sol.alpha[i] > 0.0 {
                assert!(
                    (sol.freq_device[i] - sc.devices[i].f_max).abs()
                        < 1e-6 * sc.devices[i].f_max
                );
            }
        }
    }

    #[test]
    fn concavity_holds_everywhere() {
        let rep = concavity_check(2.8e-11, 3.98e-21, 2000);
        assert_eq!(rep.failures, 0, "{rep:?}");
        assert!(rep.worst_curvature_ratio <= 1e-9);
        assert!(rep.worst_crosscheck <= 1e-6);
    }

    #[test]
    fn concavity_null_direction_vanishes() {
        // Direction proportional to (p, B): the quadratic form is exactly 0.
        let (p, b, g, n0) = (0.05, 4e5, 2.8e-11, 3.98e-21);
        let s = p * g / (n0 * b);
        let (y1, y2) = (p * p, b * b); // scaled direction along (p, B)
        let diff = y1 * b - y2 * p;
        let closed =
            -(diff * diff) * g * g / (b.powi(3) * n0 * n0 * (1.0 + s) * (1.0 + s) * LN2);
        assert_eq!(closed, 0.0);
    }

    #[test]
    fn grid_search_refinement_never_hurts() {
        let sc = scenario(2, 4);
        let (_, coarse) = grid_search(&sc, 10).unwrap();
        let (_, fine) = grid_search(&sc, 20).unwrap();
        // The two grids are not nested, so only sanity-compare levels.
        assert!(fine <= coarse * 1.10, "fine {fine} vs coarse {coarse}");
    }

    #[test]
    fn grid_search_output_is_feasible() {
        let sc = scenario(2, 5);
        let (alloc, _) = grid_search(&sc, 12).unwrap();
        verify_feasibility(&sc, &alloc, 1e-9).unwrap();
    }

    #[test]
    fn grid_search_errors_when_nothing_feasible() {
        let mut sc = scenario(1, 6);
        sc.devices[0].psnr_min = 60.0; // unattainable under the fitted surface
        assert!(matches!(
            grid_search(&sc, 10),
            Err(Error::NoFeasibleGridPoint)
        ));
    }

    #[test]
    fn grid_through_solver_optimum_matches_solver() {
        let sc = scenario(1, 7);
        let (alloc, report, _) = solve(&sc, &OptimizerConfig::default()).unwrap();
        let mut axes = default_axes(&sc, 12);
        axes.power[0].push(alloc.power[0]);
        axes.rho[0].push(alloc.rho[0]);
        axes.freq_device[0].push(alloc.freq_device[0]);
        axes.freq_bs[0].push(alloc.freq_bs[0]);
        axes.bandwidth_splits.push(alloc.bandwidth.clone());
        let (_, best) = grid_search_with_axes(&sc, &axes).unwrap();
        // The grid contains the solver's point, so it can only be better.
        assert!(best <= report.objective * (1.0 + 1e-9));
        // And the solver should sit within a hair of the augmented grid best.
        assert!(
            report.objective <= best * 1.02,
            "solver {} vs grid {best}",
            report.objective
        );
    }
}
