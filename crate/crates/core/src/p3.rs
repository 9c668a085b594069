//! Subproblem P3: given fixed power and bandwidth, choose per-device
//! compression rates, device CPU frequencies, BS CPU frequencies and the
//! common round deadline.
//!
//! The KKT system solves in closed form per device: candidate frequencies are
//! a cube root of the time-pressure multiplier, clamped at the hardware caps,
//! and the multiplier itself follows from requiring every device to finish
//! exactly at the deadline. An outer bisection drives the multiplier sum to
//! the time weight.

use crate::error::{Error, Result};
use crate::model::{psnr_inverse_rho, snr, DeviceProfile, PsnrModel};
use crate::rootfind::{self, MACHINE_REL};
use crate::scenario::Scenario;

/// Output of [`solve_p3`]: primal block plus all multipliers, so that the
/// KKT residual suite can audit the solution independently.
#[derive(Debug, Clone, PartialEq)]
pub struct P3Solution {
    /// Compression rate per device.
    pub rho: Vec<f64>,
    /// Device CPU frequency per device, Hz.
    pub freq_device: Vec<f64>,
    /// BS CPU frequency per device, Hz.
    pub freq_bs: Vec<f64>,
    /// Common round deadline, s.
    pub deadline: f64,
    /// Per-device deadline-pressure multipliers; they sum to the time weight.
    pub beta: Vec<f64>,
    /// Multipliers of the device frequency caps.
    pub alpha: Vec<f64>,
    /// Multipliers of the BS frequency caps.
    pub tau: Vec<f64>,
    /// Uplink time per device at the fixed `(p, B)`, s.
    pub t_up: Vec<f64>,
}

/// Smallest compression rate that satisfies the device's PSNR floor at the
/// given power and bandwidth, clamped up to `rho_min`.
///
/// Errors with [`Error::InfeasibleRho`] when even `rho_max` cannot reach the
/// floor; the caller decides whether that aborts the run.
pub fn min_feasible_rho(
    model: &PsnrModel,
    device: &DeviceProfile,
    device_index: usize,
    power: f64,
    bandwidth: f64,
    noise_psd: f64,
) -> Result<f64> {
    let s = snr(power, bandwidth, device.gain, noise_psd)?;
    let rho_bar = psnr_inverse_rho(model, device.psnr_min, s);
    if rho_bar > device.rho_max {
        return Err(Error::InfeasibleRho {
            device: device_index,
            rho_required: rho_bar,
            rho_max: device.rho_max,
        });
    }
    Ok(rho_bar.max(device.rho_min))
}

/// Unclamped frequency candidate `(beta / (2·w2·kappa))^(1/3)`; the caller
/// clamps to the hardware cap.
pub fn candidate_frequency(beta: f64, weight_energy: f64, kappa: f64) -> Result<f64> {
    if !(weight_energy > 0.0) {
        return Err(Error::DegenerateWeights(
            "candidate frequency undefined at weight_energy = 0",
        ));
    }
    debug_assert!(beta >= 0.0 && kappa > 0.0);
    Ok((beta / (2.0 * weight_energy * kappa)).cbrt())
}

/// Minimum achievable round time of a device at fixed uplink time: both
/// frequencies pinned at their caps.
pub fn device_floor(device: &DeviceProfile, t_up: f64) -> f64 {
    t_up + device.cycles_device * device.samples / device.f_max
        + device.cycles_bs * device.samples / device.h_max
}

/// Round time of a device when both frequencies follow the multiplier `beta`
/// (clamped at the caps).
fn round_time_at(device: &DeviceProfile, t_up: f64, beta: f64, w2: f64, kappa: f64) -> f64 {
    let x = (beta / (2.0 * w2 * kappa)).cbrt();
    let f = x.min(device.f_max);
    let h = x.min(device.h_max);
    t_up + device.cycles_device * device.samples / f + device.cycles_bs * device.samples / h
}

/// The unique multiplier at which the device finishes exactly at `deadline`.
///
/// Closed form as long as neither frequency clamps; safeguarded bisection
/// otherwise. The residual `|round time − deadline|` is driven to a few ulps.
pub fn beta_of_deadline(
    device: &DeviceProfile,
    device_index: usize,
    t_up: f64,
    deadline: f64,
    weight_energy: f64,
    kappa: f64,
) -> Result<f64> {
    if !(weight_energy > 0.0) {
        return Err(Error::DegenerateWeights(
            "beta_of_deadline undefined at weight_energy = 0",
        ));
    }
    let floor = device_floor(device, t_up);
    if !(deadline > floor) {
        return Err(Error::DeadlineInfeasible {
            device: device_index,
            deadline,
            floor,
        });
    }
    let slack = deadline - t_up;
    let work = (device.cycles_device + device.cycles_bs) * device.samples;
    let x_unclamped = work / slack;
    let cap = device.f_max.min(device.h_max);
    if x_unclamped <= cap {
        return Ok(2.0 * weight_energy * kappa * x_unclamped.powi(3));
    }
    // One frequency clamps: bracket [beta at the first clamp, doubling up].
    let lo = 2.0 * weight_energy * kappa * cap.powi(3);
    let mut hi = lo.max(f64::MIN_POSITIVE);
    while round_time_at(device, t_up, hi, weight_energy, kappa) > deadline {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Bracketing(format!(
                "beta bracket blew up for device {device_index}"
            )));
        }
    }
    if round_time_at(device, t_up, lo, weight_energy, kappa) <= deadline {
        // Already inside; the closed-form clamp point is the root.
        return Ok(lo);
    }
    rootfind::bisect(
        |b| deadline - round_time_at(device, t_up, b, weight_energy, kappa),
        lo,
        hi,
        MACHINE_REL,
        200,
    )
}

/// Solves P3 at fixed `(power, bandwidth)`.
pub fn solve_p3(scenario: &Scenario, power: &[f64], bandwidth: &[f64]) -> Result<P3Solution> {
    let sys = &scenario.system;
    let n = scenario.devices.len();
    assert_eq!(power.len(), n);
    assert_eq!(bandwidth.len(), n);
    if !(sys.weight_time > 0.0) {
        return Err(Error::DegenerateWeights(
            "weight_time = 0 leaves the deadline unbounded",
        ));
    }

    // Compression rates first; they fix the uplink times.
    let mut rho = Vec::with_capacity(n);
    let mut t_up = Vec::with_capacity(n);
    for (i, dev) in scenario.devices.iter().enumerate() {
        let r_i = min_feasible_rho(
            &scenario.psnr_model,
            dev,
            i,
            power[i],
            bandwidth[i],
            sys.noise_psd,
        )?;
        let rate = crate::model::uplink_rate(power[i], bandwidth[i], dev.gain, sys.noise_psd)?;
        if !(rate > 0.0) {
            return Err(Error::InfeasibleTransmission { device: i });
        }
        rho.push(r_i);
        t_up.push(dev.payload_bits(r_i) / rate);
    }

    let w1 = sys.weight_time;
    let w2 = sys.weight_energy;
    let kappa = sys.kappa;

    if w2 == 0.0 {
        // Pure time objective: run everything flat out.
        return Ok(assemble_degenerate(scenario, rho, t_up));
    }

    let floors: Vec<f64> = scenario
        .devices
        .iter()
        .zip(&t_up)
        .map(|(d, &t)| device_floor(d, t))
        .collect();
    let t_floor = floors.iter().copied().fold(0.0, f64::max);

    let beta_sum = |deadline: f64| -> Result<f64> {
        let mut sum = 0.0;
        for (i, dev) in scenario.devices.iter().enumerate() {
            sum += beta_of_deadline(dev, i, t_up[i], deadline, w2, kappa)?;
        }
        Ok(sum)
    };

    // Bracket the deadline: the multiplier sum decreases in the deadline.
    let lo = t_floor * (1.0 + 64.0 * f64::EPSILON);
    let sum_lo = beta_sum(lo)?;
    if sum_lo <= w1 {
        // Even at the floor the pressure is short of w1: bottleneck devices
        // absorb the leftover mass at their clamped frequencies.
        return assemble_at_floor(scenario, rho, t_up, &floors, t_floor, sum_lo);
    }
    let mut hi = (2.0 * lo).max(lo + 1.0);
    let mut prev_sum = sum_lo;
    let mut sum_hi = beta_sum(hi)?;
    while sum_hi > w1 {
        if sum_hi > prev_sum * (1.0 + 1e-12) {
            return Err(Error::Bracketing(
                "multiplier sum not decreasing in the deadline".into(),
            ));
        }
        prev_sum = sum_hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Bracketing("deadline bracket blew up".into()));
        }
        sum_hi = beta_sum(hi)?;
    }
    let deadline = rootfind::bisect(
        |t| beta_sum(t).unwrap_or(f64::NAN) - w1,
        lo,
        hi,
        MACHINE_REL,
        200,
    )?;

    let mut beta = Vec::with_capacity(n);
    for (i, dev) in scenario.devices.iter().enumerate() {
        beta.push(beta_of_deadline(dev, i, t_up[i], deadline, w2, kappa)?);
    }
    Ok(assemble(scenario, rho, t_up, beta, deadline))
}

/// Builds the solution once the deadline and multipliers are known.
fn assemble(
    scenario: &Scenario,
    rho: Vec<f64>,
    t_up: Vec<f64>,
    beta: Vec<f64>,
    deadline: f64,
) -> P3Solution {
    let sys = &scenario.system;
    let w2 = sys.weight_energy;
    let kappa = sys.kappa;
    let n = scenario.devices.len();
    let mut freq_device = Vec::with_capacity(n);
    let mut freq_bs = Vec::with_capacity(n);
    let mut alpha = Vec::with_capacity(n);
    let mut tau = Vec::with_capacity(n);
    for (i, dev) in scenario.devices.iter().enumerate() {
        let x = (beta[i] / (2.0 * w2 * kappa)).cbrt();
        let f = x.min(dev.f_max);
        let h = x.min(dev.h_max);
        let work = dev.cycles_device * dev.samples;
        let work_bs = dev.cycles_bs * dev.samples;
        // Stationarity gives the cap multipliers; zero (up to round-off) when
        // the frequency is interior.
        let a = (beta[i] * work / (f * f) - 2.0 * w2 * kappa * work * f).max(0.0);
        let t = (beta[i] * work_bs / (h * h) - 2.0 * w2 * kappa * work_bs * h).max(0.0);
        freq_device.push(f);
        freq_bs.push(h);
        alpha.push(if x > dev.f_max { a } else { 0.0 });
        tau.push(if x > dev.h_max { t } else { 0.0 });
    }
    P3Solution {
        rho,
        freq_device,
        freq_bs,
        deadline,
        beta,
        alpha,
        tau,
        t_up,
    }
}

/// Deadline pinned at the slowest device's floor: every non-bottleneck device
/// keeps its exact-finish multiplier, bottlenecks split the leftover mass.
fn assemble_at_floor(
    scenario: &Scenario,
    rho: Vec<f64>,
    t_up: Vec<f64>,
    floors: &[f64],
    t_floor: f64,
    sum_at_floor: f64,
) -> Result<P3Solution> {
    let sys = &scenario.system;
    let w2 = sys.weight_energy;
    let kappa = sys.kappa;
    let n = scenario.devices.len();
    let bottleneck: Vec<usize> = (0..n)
        .filter(|&i| floors[i] >= t_floor * (1.0 - 1e-12))
        .collect();
    let leftover = sys.weight_time - sum_at_floor;
    let mut beta = Vec::with_capacity(n);
    for (i, dev) in scenario.devices.iter().enumerate() {
        let b = if bottleneck.contains(&i) {
            // At the floor both frequencies clamp; any multiplier above the
            // clamp point keeps the finish time exact.
            let clamp = 2.0 * w2 * kappa * dev.f_max.max(dev.h_max).powi(3);
            clamp + leftover / bottleneck.len() as f64
        } else {
            beta_of_deadline(dev, i, t_up[i], t_floor, w2, kappa)?
        };
        beta.push(b);
    }
    Ok(assemble(scenario, rho, t_up, beta, t_floor))
}

/// Pure-time branch (`weight_energy = 0`): frequencies at their caps, the
/// deadline at the slowest floor, multiplier mass on the bottleneck set.
fn assemble_degenerate(scenario: &Scenario, rho: Vec<f64>, t_up: Vec<f64>) -> P3Solution {
    let sys = &scenario.system;
    let n = scenario.devices.len();
    let floors: Vec<f64> = scenario
        .devices
        .iter()
        .zip(&t_up)
        .map(|(d, &t)| device_floor(d, t))
        .collect();
    let t_floor = floors.iter().copied().fold(0.0, f64::max);
    let bottleneck: Vec<usize> = (0..n)
        .filter(|&i| floors[i] >= t_floor * (1.0 - 1e-12))
        .collect();
    let share = sys.weight_time / bottleneck.len() as f64;
    let mut beta = vec![0.0; n];
    let mut alpha = vec![0.0; n];
    let mut tau = vec![0.0; n];
    let mut freq_device = Vec::with_capacity(n);
    let mut freq_bs = Vec::with_capacity(n);
    for (i, dev) in scenario.devices.iter().enumerate() {
        freq_device.push(dev.f_max);
        freq_bs.push(dev.h_max);
        if bottleneck.contains(&i) {
            beta[i] = share;
            alpha[i] = share * dev.cycles_device * dev.samples / (dev.f_max * dev.f_max);
            tau[i] = share * dev.cycles_bs * dev.samples / (dev.h_max * dev.h_max);
        }
    }
    P3Solution {
        rho,
        freq_device,
        freq_bs,
        deadline: t_floor,
        beta,
        alpha,
        tau,
        t_up,
    }
}
