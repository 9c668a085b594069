//! Subproblem P4: transmission power and bandwidth at fixed compression
//! rates, frequencies and deadline.
//!
//! The sum of transmission-energy ratios is tackled through its epigraph
//! form and the parametric reformulation: with auxiliary weights
//! `(gamma, delta)` fixed, the surrogate problem P7 is convex and separable
//! across devices up to the shared bandwidth budget. A modified Newton
//! iteration drives the auxiliary residual `phi` to zero; each inner solve
//! walks the KKT roadmap (power case split, SNR floor, rate floor, bandwidth
//! price bisection).
//!
//! The fully interior regime leaves the bandwidth stationarity independent of
//! `B`; there the device's share is pinned at the smallest bandwidth meeting
//! its rate floor, and any leftover budget is spread over such devices (their
//! transmission energy is flat along that ray). Every inner solution is
//! audited against the exact KKT system; a projected-gradient fallback
//! handles (and flags) anything the roadmap cannot certify.

use crate::error::{Error, Result};
use crate::model::{psnr_inverse_snr, DeviceProfile, PsnrModel, LN2};
use crate::rootfind::{
    invert_curvature_gap, invert_rate_margin, invert_spectral_stretch, rate_margin,
};
use crate::scenario::Scenario;

/// Parametric weights of the surrogate problem; strictly positive, and equal
/// to `w2 / r` and `p·rho·d·D / r` at the fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryState {
    /// Reciprocal-rate weights, one per device.
    pub gamma: Vec<f64>,
    /// Energy-ratio values, one per device.
    pub delta: Vec<f64>,
}

/// How the damped-Newton line search evaluates trial points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LineSearchMode {
    /// Evaluate `phi` at the already-solved inner point (the default; the
    /// residual is affine in the auxiliaries there, so the full step always
    /// satisfies the sufficient-decrease test).
    FixedInnerPoint,
    /// Re-solve the inner problem at every trial step.
    ResolvePerTrial,
}

/// Parameters of the modified-Newton outer loop.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NewtonConfig {
    /// Step-shrink factor in (0, 1).
    pub xi: f64,
    /// Sufficient-decrease factor in (0, 1).
    pub eps: f64,
    /// Maximum outer iterations.
    pub max_iter: usize,
    /// Termination threshold on `‖phi‖₂`, relative to the norm of the
    /// constant terms (`p·rho·d·D` and `w2` per device).
    pub phi_tol: f64,
    /// Line-search evaluation mode.
    pub line_search_mode: LineSearchMode,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            xi: 0.5,
            eps: 0.01,
            max_iter: 50,
            phi_tol: 1e-9,
            line_search_mode: LineSearchMode::FixedInnerPoint,
        }
    }
}

impl NewtonConfig {
    /// Checks the documented parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0 && self.xi < 1.0) || !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidConfig(
                "newton xi and eps must lie in (0, 1)".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("newton max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Per-device lower bounds induced by the fixed block: rate floors from the
/// deadline, SNR floors from the PSNR constraint at the fixed `rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct Floors {
    /// Minimum uplink rate per device, bit/s.
    pub rate: Vec<f64>,
    /// Minimum SNR per device (0 when the PSNR floor is slack).
    pub snr: Vec<f64>,
}

/// Solution of P4 with everything the KKT auditor needs.
#[derive(Debug, Clone, PartialEq)]
pub struct P4Solution {
    /// Transmission power per device, W.
    pub power: Vec<f64>,
    /// Bandwidth per device, Hz.
    pub bandwidth: Vec<f64>,
    /// Auxiliary weights at termination.
    pub aux: AuxiliaryState,
    /// Bandwidth-budget price.
    pub zeta: f64,
    /// Rate-floor multipliers.
    pub eta: Vec<f64>,
    /// SNR-floor multipliers.
    pub nu: Vec<f64>,
    /// Power-cap multipliers.
    pub iota: Vec<f64>,
    /// Terminal `‖phi‖₂`.
    pub phi_norm: f64,
    /// Inner solves performed.
    pub iterations: usize,
    /// Whether the residual met the tolerance within the iteration budget.
    pub converged: bool,
    /// Whether any inner solve fell back to projected gradient.
    pub fallback_used: bool,
}

/// Rate floor of one device: the transmission rate below which the payload
/// cannot fit into the deadline after computation at both ends.
pub fn rate_floor(
    device: &DeviceProfile,
    device_index: usize,
    rho: f64,
    t_cmp: f64,
    t_bs: f64,
    deadline: f64,
) -> Result<f64> {
    let slack = deadline - t_cmp - t_bs;
    if !(slack > 0.0) {
        return Err(Error::DeadlineExhausted {
            device: device_index,
            slack,
        });
    }
    Ok(device.payload_bits(rho) / slack)
}

/// SNR floor of one device at a fixed compression rate; zero when the PSNR
/// constraint is slack.
pub fn snr_floor(model: &PsnrModel, device: &DeviceProfile, rho: f64) -> f64 {
    psnr_inverse_snr(model, device.psnr_min, rho)
}

/// Builds both floors from the P3 block.
pub fn compute_floors(
    scenario: &Scenario,
    rho: &[f64],
    t_cmp: &[f64],
    t_bs: &[f64],
    deadline: f64,
) -> Result<Floors> {
    let mut rate = Vec::with_capacity(scenario.devices.len());
    let mut snr = Vec::with_capacity(scenario.devices.len());
    for (i, dev) in scenario.devices.iter().enumerate() {
        rate.push(rate_floor(dev, i, rho[i], t_cmp[i], t_bs[i], deadline)?);
        snr.push(snr_floor(&scenario.psnr_model, dev, rho[i]));
    }
    Ok(Floors { rate, snr })
}

/// Auxiliary weights evaluated at a concrete `(power, bandwidth)` point.
pub fn init_auxiliary(
    scenario: &Scenario,
    power: &[f64],
    bandwidth: &[f64],
    rho: &[f64],
) -> Result<AuxiliaryState> {
    let n = scenario.devices.len();
    let mut gamma = Vec::with_capacity(n);
    let mut delta = Vec::with_capacity(n);
    for (i, dev) in scenario.devices.iter().enumerate() {
        let r = crate::model::uplink_rate(power[i], bandwidth[i], dev.gain, scenario.system.noise_psd)?;
        if !(r > 0.0) {
            return Err(Error::InfeasibleTransmission { device: i });
        }
        gamma.push(scenario.system.weight_energy / r);
        delta.push(power[i] * dev.payload_bits(rho[i]) / r);
    }
    Ok(AuxiliaryState { gamma, delta })
}

/// Fixed-point residual of the parametric reformulation, `2N` entries:
/// first the energy block, then the weight block.
pub fn phi_residual(
    scenario: &Scenario,
    power: &[f64],
    bandwidth: &[f64],
    rho: &[f64],
    aux: &AuxiliaryState,
) -> Vec<f64> {
    let n = scenario.devices.len();
    let mut phi = Vec::with_capacity(2 * n);
    for (i, dev) in scenario.devices.iter().enumerate() {
        let r = rate(power[i], bandwidth[i], dev.gain, scenario.system.noise_psd);
        phi.push(-power[i] * dev.payload_bits(rho[i]) + aux.delta[i] * r);
    }
    for (i, dev) in scenario.devices.iter().enumerate() {
        let r = rate(power[i], bandwidth[i], dev.gain, scenario.system.noise_psd);
        phi.push(-scenario.system.weight_energy + aux.gamma[i] * r);
    }
    phi
}

fn rate(p: f64, b: f64, g: f64, n0: f64) -> f64 {
    b * (p * g / (n0 * b)).ln_1p() / LN2
}

fn log2_1p(s: f64) -> f64 {
    s.ln_1p() / LN2
}

/// `∂r/∂B` at SNR `s`, in bit/s per Hz.
fn bandwidth_margin(s: f64) -> f64 {
    rate_margin(s) / LN2
}

/// Per-device constants of one inner solve.
struct DeviceCtx {
    power_coef: f64,  // gamma·rho·d·D: marginal cost of power
    rate_weight: f64, // gamma·delta: marginal value of rate
    gain: f64,
    n0: f64,
    p_max: f64,
    rate_floor: f64,
    snr_floor: f64,
    s_level: f64,   // SNR at which the power stationarity is interior
    s_pin: f64,     // max(s_level, snr_floor)
    zeta_flat: f64, // bandwidth price at which the device objective is flat in B
    s_cap: f64,     // SNR beyond which the rate floor needs p > p_max
    b_minfeas: f64, // bandwidth at the (p_max, rate floor) corner
}

impl DeviceCtx {
    fn build(
        index: usize,
        dev: &DeviceProfile,
        n0: f64,
        total_bandwidth: f64,
        gamma: f64,
        delta: f64,
        rho: f64,
        rate_floor_in: f64,
        snr_floor: f64,
    ) -> Result<Self> {
        let payload = dev.payload_bits(rho);
        let power_coef = gamma * payload;
        let rate_weight = gamma * delta;
        let gain = dev.gain;
        // Guard against a degenerate zero floor in standalone use.
        let rate_ceiling = dev.p_max * gain / (n0 * LN2);
        let rate_floor = rate_floor_in.max(1e-9 * rate_ceiling);
        // Joint reachability at full power and the largest usable bandwidth.
        let b_usable = if snr_floor > 0.0 {
            (dev.p_max * gain / (n0 * snr_floor)).min(total_bandwidth)
        } else {
            total_bandwidth
        };
        let reachable = rate(dev.p_max, b_usable, gain, n0);
        if rate_floor > reachable * (1.0 + 1e-12) {
            return Err(Error::RateFloorUnreachable {
                device: index,
                rate_floor,
                rate_cap: reachable,
            });
        }
        let s_level = (rate_weight * gain / (power_coef * n0 * LN2) - 1.0).max(0.0);
        let s_pin = s_level.max(snr_floor);
        let zeta_flat = rate_weight * log2_1p(s_pin) - power_coef * n0 * s_pin / gain;
        // SNR at which meeting the rate floor takes exactly p_max.
        let stretch = dev.p_max * gain / (n0 * rate_floor * LN2);
        let s_cap = if stretch > 1.0 {
            invert_spectral_stretch(stretch)?
        } else {
            // Floor only reachable in the infinite-bandwidth limit; the
            // reachability check above has already bounded this case.
            f64::INFINITY
        };
        let b_minfeas = if s_cap.is_finite() {
            dev.p_max * gain / (n0 * s_cap)
        } else {
            total_bandwidth
        };
        Ok(Self {
            power_coef,
            rate_weight,
            gain,
            n0,
            p_max: dev.p_max,
            rate_floor,
            snr_floor,
            s_level,
            s_pin,
            zeta_flat,
            s_cap,
            b_minfeas,
        })
    }

    /// The (p_max, rate-floor) corner with both multipliers recovered from
    /// the stationarity pair.
    fn corner(&self, zeta: f64) -> DeviceChoice {
        let s = self.s_cap.min(1e12);
        let w_eta = zeta / bandwidth_margin(s);
        let eta = (w_eta - self.rate_weight).max(0.0);
        let iota = ((self.rate_weight + eta) * self.gain / (self.n0 * (1.0 + s) * LN2)
            - self.power_coef)
            .max(0.0);
        DeviceChoice::Point {
            b: self.b_minfeas,
            p: self.p_max,
            eta,
            nu: 0.0,
            iota,
        }
    }

    /// Optimal bandwidth of this device at budget price `zeta`.
    fn choose(&self, zeta: f64) -> DeviceChoice {
        let flat_tol = 1e-9 * self.zeta_flat.abs().max(f64::MIN_POSITIVE);
        if zeta > self.zeta_flat + flat_tol {
            // Rate floor binds; find the SNR along the floor curve.
            let y = zeta * self.gain / (self.power_coef * self.n0);
            let s_g = invert_curvature_gap(y);
            if s_g >= self.s_cap {
                return self.corner(zeta);
            }
            if s_g <= self.snr_floor {
                // Rate and SNR floors both active.
                let s = self.snr_floor;
                let b = self.rate_floor / log2_1p(s);
                let w_eta = (zeta + self.power_coef * self.n0 * s / self.gain) / log2_1p(s);
                let eta = (w_eta - self.rate_weight).max(0.0);
                let nu = ((self.power_coef
                    - w_eta * self.gain / (self.n0 * (1.0 + s) * LN2))
                    / self.gain)
                    .max(0.0);
                return DeviceChoice::Point {
                    b,
                    p: self.n0 * b * s / self.gain,
                    eta,
                    nu,
                    iota: 0.0,
                };
            }
            let b = self.rate_floor / log2_1p(s_g);
            let eta =
                (self.power_coef * self.n0 * (1.0 + s_g) * LN2 / self.gain - self.rate_weight)
                    .max(0.0);
            DeviceChoice::Point {
                b,
                p: self.n0 * b * s_g / self.gain,
                eta,
                nu: 0.0,
                iota: 0.0,
            }
        } else if zeta < self.zeta_flat - flat_tol {
            // Budget side: power at its cap, rate floor slack.
            let s_q = invert_rate_margin(zeta * LN2 / self.rate_weight);
            if s_q < self.snr_floor {
                // SNR floor caps the bandwidth instead.
                let s = self.snr_floor;
                let b = self.p_max * self.gain / (self.n0 * s);
                let nu = ((self.rate_weight * bandwidth_margin(s) - zeta) / (self.n0 * s))
                    .max(0.0);
                let iota = (self.rate_weight * self.gain / (self.n0 * (1.0 + s) * LN2)
                    + nu * self.gain
                    - self.power_coef)
                    .max(0.0);
                return DeviceChoice::Point {
                    b,
                    p: self.p_max,
                    eta: 0.0,
                    nu,
                    iota,
                };
            }
            if s_q >= self.s_cap {
                return self.corner(zeta);
            }
            let b = self.p_max * self.gain / (self.n0 * s_q);
            let iota = (self.rate_weight * self.gain / (self.n0 * (1.0 + s_q) * LN2)
                - self.power_coef)
                .max(0.0);
            DeviceChoice::Point {
                b,
                p: self.p_max,
                eta: 0.0,
                nu: 0.0,
                iota,
            }
        } else {
            // Flat stretch: the objective is indifferent to B between the
            // floor-binding share and the power-cap share.
            let s = self.s_pin;
            let b_lo = self.rate_floor / log2_1p(s);
            let b_hi = self.p_max * self.gain / (self.n0 * s);
            if b_hi < b_lo {
                return self.corner(zeta);
            }
            let nu = if self.snr_floor > self.s_level {
                ((self.power_coef
                    - self.rate_weight * self.gain / (self.n0 * (1.0 + s) * LN2))
                    / self.gain)
                    .max(0.0)
            } else {
                0.0
            };
            DeviceChoice::Flat { b_lo, b_hi, s, nu }
        }
    }
}

enum DeviceChoice {
    Point {
        b: f64,
        p: f64,
        eta: f64,
        nu: f64,
        iota: f64,
    },
    Flat {
        b_lo: f64,
        b_hi: f64,
        s: f64,
        nu: f64,
    },
}

impl DeviceChoice {
    fn floor_bandwidth(&self) -> f64 {
        match self {
            DeviceChoice::Point { b, .. } => *b,
            DeviceChoice::Flat { b_lo, .. } => *b_lo,
        }
    }
}

/// Inner solution: the P7 block at one set of auxiliary weights.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    /// Power per device, W.
    pub power: Vec<f64>,
    /// Bandwidth per device, Hz.
    pub bandwidth: Vec<f64>,
    /// Budget price.
    pub zeta: f64,
    /// Rate-floor multipliers.
    pub eta: Vec<f64>,
    /// SNR-floor multipliers.
    pub nu: Vec<f64>,
    /// Power-cap multipliers.
    pub iota: Vec<f64>,
    /// True when the projected-gradient fallback produced this point.
    pub fallback: bool,
}

/// Solves the surrogate problem P7 at fixed auxiliary weights by the KKT
/// roadmap, then audits the result; on audit failure a projected-gradient
/// descent recomputes (and flags) the block.
pub fn solve_p7_inner(
    scenario: &Scenario,
    rho: &[f64],
    rate_floors: &[f64],
    snr_floors: &[f64],
    aux: &AuxiliaryState,
) -> Result<InnerSolution> {
    let n = scenario.devices.len();
    let n0 = scenario.system.noise_psd;
    let b_total = scenario.system.total_bandwidth;
    let mut ctx = Vec::with_capacity(n);
    for (i, dev) in scenario.devices.iter().enumerate() {
        ctx.push(DeviceCtx::build(
            i,
            dev,
            n0,
            b_total,
            aux.gamma[i],
            aux.delta[i],
            rho[i],
            rate_floors[i],
            snr_floors[i],
        )?);
    }
    let floor_total: f64 = ctx.iter().map(|c| c.b_minfeas).sum();
    if floor_total > b_total * (1.0 + 1e-9) {
        return Err(Error::Bracketing(format!(
            "rate floors need {floor_total:.6e} Hz > budget {b_total:.6e} Hz even at full power"
        )));
    }

    let spread = |zeta: f64| -> f64 { ctx.iter().map(|c| c.choose(zeta).floor_bandwidth()).sum() };

    // Price search: the floor-binding total is non-increasing in the price.
    let zeta = if spread(0.0) <= b_total {
        0.0
    } else {
        let mut hi = ctx
            .iter()
            .map(|c| c.zeta_flat)
            .fold(f64::MIN_POSITIVE, f64::max);
        let mut guard = 0;
        while spread(hi) > b_total {
            hi *= 2.0;
            guard += 1;
            if guard > 600 {
                return Err(Error::Bracketing(
                    "bandwidth price bracket diverged".into(),
                ));
            }
        }
        let mut lo = 0.0f64;
        let mut lo_total = spread(0.0);
        let mut hi_total = spread(hi);
        for _ in 0..260 {
            if hi - lo <= 1e-13 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let total = spread(mid);
            // The floor-binding total must stay inside the bracket envelope;
            // anything else means it is not monotone in the price.
            if total > lo_total * (1.0 + 1e-9) || total < hi_total * (1.0 - 1e-9) {
                return Err(Error::Bracketing(
                    "bandwidth total not monotone in the price".into(),
                ));
            }
            if total > b_total {
                lo = mid;
                lo_total = total;
            } else {
                hi = mid;
                hi_total = total;
            }
        }
        hi
    };

    // Assemble; flat devices first take their floor share, then the leftover
    // budget is spread equally over them up to their power caps.
    let choices: Vec<DeviceChoice> = ctx.iter().map(|c| c.choose(zeta)).collect();
    let mut bandwidth: Vec<f64> = choices.iter().map(|c| c.floor_bandwidth()).collect();
    if zeta > 0.0 {
        let mut leftover = b_total - bandwidth.iter().sum::<f64>();
        let mut flats: Vec<usize> = choices
            .iter()
            .enumerate()
            .filter_map(|(i, c)| matches!(c, DeviceChoice::Flat { .. }).then_some(i))
            .collect();
        while leftover > 1e-15 * b_total && !flats.is_empty() {
            let share = leftover / flats.len() as f64;
            let mut still_open = Vec::new();
            for &i in &flats {
                if let DeviceChoice::Flat { b_hi, .. } = choices[i] {
                    let room = b_hi - bandwidth[i];
                    let add = room.min(share);
                    bandwidth[i] += add;
                    leftover -= add;
                    if room > add {
                        still_open.push(i);
                    }
                }
            }
            if still_open.len() == flats.len() {
                // Nobody capped; one round distributes everything.
                break;
            }
            flats = still_open;
        }
    }

    let mut power = vec![0.0; n];
    let mut eta = vec![0.0; n];
    let mut nu = vec![0.0; n];
    let mut iota = vec![0.0; n];
    for (i, choice) in choices.iter().enumerate() {
        match *choice {
            DeviceChoice::Point {
                p,
                eta: e,
                nu: v,
                iota: io,
                ..
            } => {
                power[i] = p;
                eta[i] = e;
                nu[i] = v;
                iota[i] = io;
            }
            DeviceChoice::Flat { s, nu: v, .. } => {
                power[i] = (n0 * bandwidth[i] * s / ctx[i].gain).min(ctx[i].p_max);
                nu[i] = v;
            }
        }
    }

    let candidate = InnerSolution {
        power,
        bandwidth,
        zeta,
        eta,
        nu,
        iota,
        fallback: false,
    };
    if audit_inner(scenario, rho, rate_floors, snr_floors, aux, &candidate) <= 1e-6 {
        return Ok(candidate);
    }
    projected_gradient(scenario, &ctx)
}

/// Largest relative KKT residual of an inner solution (stationarity,
/// slackness, primal bounds), each scaled by its dominant term.
fn audit_inner(
    scenario: &Scenario,
    rho: &[f64],
    rate_floors: &[f64],
    snr_floors: &[f64],
    aux: &AuxiliaryState,
    sol: &InnerSolution,
) -> f64 {
    let n0 = scenario.system.noise_psd;
    let b_total = scenario.system.total_bandwidth;
    let mut worst = 0.0f64;
    let mut push = |residual: f64, scale: f64| {
        worst = worst.max(residual.abs() / scale.max(f64::MIN_POSITIVE));
    };
    for (i, dev) in scenario.devices.iter().enumerate() {
        let (p, b) = (sol.power[i], sol.bandwidth[i]);
        if !(p > 0.0 && b > 0.0) {
            return f64::INFINITY;
        }
        let s = p * dev.gain / (n0 * b);
        let payload = dev.payload_bits(rho[i]);
        let a = aux.gamma[i] * payload;
        let w = aux.gamma[i] * aux.delta[i];
        let we = w + sol.eta[i];
        // Power stationarity.
        let t1 = a;
        let t2 = we * dev.gain / (n0 * (1.0 + s) * LN2);
        let t3 = sol.nu[i] * dev.gain;
        let t4 = sol.iota[i];
        push(t1 - t2 - t3 + t4, t1.max(t2).max(t3).max(t4));
        // Bandwidth stationarity.
        let u1 = we * log2_1p(s);
        let u2 = we * s / ((1.0 + s) * LN2);
        let u3 = sol.zeta;
        let u4 = sol.nu[i] * n0 * snr_floors[i];
        push(-u1 + u2 + u3 + u4, u1.max(u2).max(u3).max(u4));
        // Primal feasibility and complementary slackness.
        let r = rate(p, b, dev.gain, n0);
        push((rate_floors[i] - r).max(0.0), rate_floors[i].max(r));
        push((snr_floors[i] - s).max(0.0), snr_floors[i].max(1.0));
        push((p - dev.p_max).max(0.0), dev.p_max);
        push(
            sol.eta[i] * (rate_floors[i] - r),
            (sol.eta[i] * rate_floors[i]).max(1.0),
        );
        push(
            sol.nu[i] * (n0 * b * snr_floors[i] - p * dev.gain),
            (sol.nu[i] * p * dev.gain).max(1.0),
        );
        push(
            sol.iota[i] * (p - dev.p_max),
            (sol.iota[i] * dev.p_max).max(1.0),
        );
    }
    let bw: f64 = sol.bandwidth.iter().sum();
    push((bw - b_total).max(0.0), b_total);
    push(sol.zeta * (bw - b_total), (sol.zeta * b_total).max(1.0));
    worst
}

/// Feasible-direction descent on the surrogate objective; the emergency path
/// when the roadmap audit fails. Multiplier recovery is least-squares and the
/// result is flagged.
fn projected_gradient(scenario: &Scenario, ctx: &[DeviceCtx]) -> Result<InnerSolution> {
    let n = scenario.devices.len();
    let n0 = scenario.system.noise_psd;
    let b_total = scenario.system.total_bandwidth;
    // Feasible start: the full-power rate-floor corner, plus the leftover
    // budget spread proportionally (capped by each device's SNR ceiling).
    let floor_total: f64 = ctx.iter().map(|c| c.b_minfeas).sum();
    let mut bandwidth: Vec<f64> = ctx.iter().map(|c| c.b_minfeas).collect();
    let mut power: Vec<f64> = ctx.iter().map(|c| c.p_max).collect();
    let slack_budget = b_total - floor_total;
    if slack_budget > 0.0 {
        for (i, c) in ctx.iter().enumerate() {
            let cap = if c.snr_floor > 0.0 {
                c.p_max * c.gain / (n0 * c.snr_floor)
            } else {
                f64::INFINITY
            };
            let extra = slack_budget * c.b_minfeas / floor_total;
            bandwidth[i] = (bandwidth[i] + extra).min(cap);
        }
    }
    let objective = |p: &[f64], b: &[f64]| -> f64 {
        (0..n)
            .map(|i| {
                let r = rate(p[i], b[i], ctx[i].gain, n0);
                ctx[i].power_coef * p[i] - ctx[i].rate_weight * r
            })
            .sum()
    };
    let feasible = |p: &[f64], b: &[f64]| -> bool {
        let sum: f64 = b.iter().sum();
        if sum > b_total * (1.0 + 1e-12) {
            return false;
        }
        (0..n).all(|i| {
            let s = p[i] * ctx[i].gain / (n0 * b[i]);
            p[i] > 0.0
                && p[i] <= ctx[i].p_max * (1.0 + 1e-12)
                && b[i] > 0.0
                && s >= ctx[i].snr_floor * (1.0 - 1e-12)
                && rate(p[i], b[i], ctx[i].gain, n0) >= ctx[i].rate_floor * (1.0 - 1e-10)
        })
    };
    if !feasible(&power, &bandwidth) {
        return Err(Error::Bracketing(
            "projected-gradient fallback found no feasible start".into(),
        ));
    }
    let mut value = objective(&power, &bandwidth);
    let mut step = 0.25;
    for _ in 0..2000 {
        let mut gp = vec![0.0; n];
        let mut gb = vec![0.0; n];
        for i in 0..n {
            let s = power[i] * ctx[i].gain / (n0 * bandwidth[i]);
            gp[i] = ctx[i].power_coef
                - ctx[i].rate_weight * ctx[i].gain / (n0 * (1.0 + s) * LN2);
            gb[i] = -ctx[i].rate_weight * bandwidth_margin(s);
        }
        let mut improved = false;
        while step > 1e-14 {
            let trial_p: Vec<f64> = (0..n)
                .map(|i| (power[i] - step * ctx[i].p_max * gp[i].signum()).clamp(
                    1e-12 * ctx[i].p_max,
                    ctx[i].p_max,
                ))
                .collect();
            let mut trial_b: Vec<f64> = (0..n)
                .map(|i| (bandwidth[i] - step * b_total / n as f64 * gb[i].signum()).max(1e-12 * b_total))
                .collect();
            let sum: f64 = trial_b.iter().sum();
            if sum > b_total {
                for b in &mut trial_b {
                    *b *= b_total / sum;
                }
            }
            if feasible(&trial_p, &trial_b) {
                let trial_value = objective(&trial_p, &trial_b);
                if trial_value < value - 1e-18 {
                    power = trial_p;
                    bandwidth = trial_b;
                    value = trial_value;
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    // Crude multiplier recovery for reporting; the solution stays flagged.
    let zeta = (0..n)
        .map(|i| {
            let s = power[i] * ctx[i].gain / (n0 * bandwidth[i]);
            ctx[i].rate_weight * bandwidth_margin(s)
        })
        .sum::<f64>()
        / n as f64;
    Ok(InnerSolution {
        power,
        bandwidth,
        zeta,
        eta: vec![0.0; n],
        nu: vec![0.0; n],
        iota: vec![0.0; n],
        fallback: true,
    })
}

/// Total transmission energy of a `(p, B)` block, J.
fn uplink_energy(scenario: &Scenario, rho: &[f64], p: &[f64], b: &[f64]) -> f64 {
    scenario
        .devices
        .iter()
        .enumerate()
        .map(|(i, dev)| {
            p[i] * dev.payload_bits(rho[i]) / rate(p[i], b[i], dev.gain, scenario.system.noise_psd)
        })
        .sum()
}

/// Scale for the `phi` norm: the l2 norm of the residual's constant terms.
fn phi_scale(scenario: &Scenario, rho: &[f64], power: &[f64]) -> f64 {
    let w2 = scenario.system.weight_energy;
    let mut sq = 0.0;
    for (i, dev) in scenario.devices.iter().enumerate() {
        let c = power[i] * dev.payload_bits(rho[i]);
        sq += c * c + w2 * w2;
    }
    sq.sqrt().max(f64::MIN_POSITIVE)
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Runs the modified-Newton refinement of `(power, bandwidth)` from a
/// feasible warm start.
pub fn solve_p4(
    scenario: &Scenario,
    rho: &[f64],
    t_cmp: &[f64],
    t_bs: &[f64],
    deadline: f64,
    config: &NewtonConfig,
    warm_start: (&[f64], &[f64]),
) -> Result<P4Solution> {
    config.validate()?;
    let n = scenario.devices.len();
    let (warm_p, warm_b) = warm_start;
    assert_eq!(warm_p.len(), n);
    assert_eq!(warm_b.len(), n);

    if scenario.system.weight_energy == 0.0 {
        // The block objective vanishes; keep the warm start.
        return Ok(P4Solution {
            power: warm_p.to_vec(),
            bandwidth: warm_b.to_vec(),
            aux: AuxiliaryState {
                gamma: vec![0.0; n],
                delta: vec![0.0; n],
            },
            zeta: 0.0,
            eta: vec![0.0; n],
            nu: vec![0.0; n],
            iota: vec![0.0; n],
            phi_norm: 0.0,
            iterations: 0,
            converged: true,
            fallback_used: false,
        });
    }

    let floors = compute_floors(scenario, rho, t_cmp, t_bs, deadline)?;
    let mut aux = init_auxiliary(scenario, warm_p, warm_b, rho)?;
    let warm_energy = uplink_energy(scenario, rho, warm_p, warm_b);

    let mut best: Option<(f64, InnerSolution, AuxiliaryState, f64)> = None;
    let mut fallback_used = false;
    let mut iterations = 0;
    let mut converged = false;
    let mut last_phi = f64::INFINITY;

    for _ in 0..config.max_iter {
        let inner = solve_p7_inner(scenario, rho, &floors.rate, &floors.snr, &aux)?;
        iterations += 1;
        fallback_used |= inner.fallback;
        let phi = phi_residual(scenario, &inner.power, &inner.bandwidth, rho, &aux);
        let phi_norm = norm2(&phi);
        let scale = phi_scale(scenario, rho, &inner.power);
        last_phi = phi_norm;
        let energy = uplink_energy(scenario, rho, &inner.power, &inner.bandwidth);
        if best.as_ref().map_or(true, |(e, ..)| energy < *e) {
            best = Some((energy, inner.clone(), aux.clone(), phi_norm));
        }
        if phi_norm <= config.phi_tol * scale {
            converged = true;
            best = Some((energy, inner, aux.clone(), phi_norm));
            break;
        }
        // Newton direction: the residual Jacobian w.r.t. the auxiliaries is
        // diag(r) per block.
        let rates: Vec<f64> = (0..n)
            .map(|i| {
                rate(
                    inner.power[i],
                    inner.bandwidth[i],
                    scenario.devices[i].gain,
                    scenario.system.noise_psd,
                )
            })
            .collect();
        let sigma_delta: Vec<f64> = (0..n).map(|i| -phi[i] / rates[i]).collect();
        let sigma_gamma: Vec<f64> = (0..n).map(|i| -phi[n + i] / rates[i]).collect();
        let step = match config.line_search_mode {
            LineSearchMode::FixedInnerPoint => 1.0,
            LineSearchMode::ResolvePerTrial => {
                let mut chosen = config.xi.powi(60);
                let mut factor = 1.0;
                for _ in 0..=60 {
                    let trial = AuxiliaryState {
                        delta: (0..n).map(|i| aux.delta[i] + factor * sigma_delta[i]).collect(),
                        gamma: (0..n).map(|i| aux.gamma[i] + factor * sigma_gamma[i]).collect(),
                    };
                    let t_inner =
                        solve_p7_inner(scenario, rho, &floors.rate, &floors.snr, &trial)?;
                    let t_phi =
                        phi_residual(scenario, &t_inner.power, &t_inner.bandwidth, rho, &trial);
                    if norm2(&t_phi) <= (1.0 - config.eps * factor) * phi_norm {
                        chosen = factor;
                        break;
                    }
                    factor *= config.xi;
                }
                chosen
            }
        };
        for i in 0..n {
            aux.delta[i] += step * sigma_delta[i];
            aux.gamma[i] += step * sigma_gamma[i];
        }
    }

    let (energy, inner, aux_out, phi_norm) = best.expect("at least one inner solve ran");
    debug_assert!(
        energy <= warm_energy * (1.0 + 1e-9),
        "descent contract violated: {energy} > {warm_energy}"
    );
    let _ = last_phi;
    Ok(P4Solution {
        power: inner.power,
        bandwidth: inner.bandwidth,
        aux: aux_out,
        zeta: inner.zeta,
        eta: inner.eta,
        nu: inner.nu,
        iota: inner.iota,
        phi_norm,
        iterations,
        converged,
        fallback_used,
    })
}
