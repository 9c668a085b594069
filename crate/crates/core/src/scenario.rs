//! Seeded, reproducible problem instances: device placement on an annulus
//! around the base station, log-distance path loss with log-normal shadowing,
//! and per-device workload draws.
//!
//! # Reproducibility
//!
//! All randomness comes from the counter-based ChaCha8 generator
//! ([`rand_chacha::ChaCha8Rng`], byte-stable across platforms and pinned by
//! the lockfile). Draws are split into independent streams:
//!
//! * device `n` of a scenario draws from stream `n` of the scenario seed, in
//!   the fixed order: radius (rejection loop), angle, shadowing, `c_1`, `c_2`;
//! * the random-allocation baseline uses the dedicated stream
//!   [`crate::baselines::RANDOM_BASELINE_STREAM`].
//!
//! Identical `(config, seed)` therefore reproduce a scenario bit for bit, and
//! parallel generation across seeds is safe.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DeviceProfile, PsnrModel, SystemParams};

/// Converts dBm to W: `10^((x-30)/10)`.
pub fn dbm_to_watt(x: f64) -> f64 {
    10f64.powf((x - 30.0) / 10.0)
}

/// Converts dB to a linear ratio: `10^(x/10)`.
pub fn db_to_linear(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// Everything needed to generate one problem instance. Field names carry
/// unit suffixes wherever the value is not already linear SI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Cell radius, m.
    pub cell_radius_m: f64,
    /// Devices are rejected closer than this to the BS, m. Keeps the
    /// log-distance model away from its divergence at zero range.
    pub min_distance_m: f64,
    /// Path-loss intercept at 1 km, dB.
    pub path_loss_a_db: f64,
    /// Path-loss slope, dB per decade of distance (distance in km).
    pub path_loss_b_db_per_decade: f64,
    /// Shadow-fading standard deviation, dB; zero disables shadowing.
    pub shadow_sigma_db: f64,
    /// Noise power spectral density, dBm/Hz.
    pub noise_psd_dbm_hz: f64,
    /// Total uplink bandwidth, Hz.
    pub total_bandwidth_hz: f64,
    /// Number of devices.
    pub device_count: usize,
    /// Effective switched capacitance, J·s²/cycle³.
    pub kappa: f64,
    /// Weight on round time.
    pub weight_time: f64,
    /// Weight on total energy.
    pub weight_energy: f64,
    /// Device encoding cycles per sample drawn uniformly from this range.
    pub cycles_device_range: [f64; 2],
    /// BS decoding/update cycles per sample drawn uniformly from this range.
    pub cycles_bs_range: [f64; 2],
    /// Samples per round (batch size).
    pub samples: f64,
    /// Bits per raw sample.
    pub sample_bits: f64,
    /// Maximum transmission power, dBm.
    pub p_max_dbm: f64,
    /// Maximum device CPU frequency, Hz.
    pub f_max_hz: f64,
    /// Maximum BS CPU frequency per device, Hz.
    pub h_max_hz: f64,
    /// Compression-rate bounds.
    pub rho_min: f64,
    /// Upper compression-rate bound.
    pub rho_max: f64,
    /// PSNR floor, dB.
    pub psnr_min_db: f64,
    /// Quality-surface coefficients.
    pub psnr_model: PsnrModel,
    /// Scenario seed; every repetition of an experiment uses a fresh seed
    /// (shadowing and workloads are redrawn per seed).
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            cell_radius_m: 250.0,
            min_distance_m: 10.0,
            path_loss_a_db: 128.1,
            path_loss_b_db_per_decade: 37.6,
            shadow_sigma_db: 8.0,
            noise_psd_dbm_hz: -174.0,
            total_bandwidth_hz: 2e7,
            device_count: 50,
            kappa: 1e-28,
            weight_time: 0.5,
            weight_energy: 0.5,
            cycles_device_range: [1e6, 3e6],
            cycles_bs_range: [3e6, 5e6],
            samples: 32.0,
            sample_bits: 1e6,
            p_max_dbm: 20.0,
            f_max_hz: 1e9,
            h_max_hz: 5e9,
            rho_min: 0.1,
            rho_max: 0.3,
            psnr_min_db: 25.0,
            psnr_model: PsnrModel::fitted(),
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    /// Validates ranges and bounds before sampling.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.min_distance_m > 0.0 && self.cell_radius_m > self.min_distance_m) {
            return bad(format!(
                "need radius > min_distance > 0, got {} and {}",
                self.cell_radius_m, self.min_distance_m
            ));
        }
        if self.shadow_sigma_db < 0.0 {
            return bad("shadow_sigma_db must be >= 0".into());
        }
        for (name, [lo, hi]) in [
            ("cycles_device_range", self.cycles_device_range),
            ("cycles_bs_range", self.cycles_bs_range),
        ] {
            if !(lo > 0.0 && hi >= lo) {
                return bad(format!("{name} must be a non-empty positive range"));
            }
        }
        if !(self.rho_min > 0.0 && self.rho_min <= self.rho_max && self.rho_max <= 1.0) {
            return bad(format!(
                "need 0 < rho_min <= rho_max <= 1, got [{}, {}]",
                self.rho_min, self.rho_max
            ));
        }
        for (name, v) in [
            ("total_bandwidth_hz", self.total_bandwidth_hz),
            ("kappa", self.kappa),
            ("samples", self.samples),
            ("sample_bits", self.sample_bits),
            ("f_max_hz", self.f_max_hz),
            ("h_max_hz", self.h_max_hz),
            ("psnr_min_db", self.psnr_min_db),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.device_count == 0 {
            return bad("device_count must be >= 1".into());
        }
        PsnrModel::new(
            self.psnr_model.a,
            self.psnr_model.b,
            self.psnr_model.c_rho,
            self.psnr_model.c_s,
        )?;
        Ok(())
    }

    /// Reads a config from a JSON document; unknown keys are rejected.
    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One fully instantiated problem: system constants, device profiles, the
/// quality surface, and the positions the gains were derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Network constants.
    pub system: SystemParams,
    /// Per-device profiles, one per device.
    pub devices: Vec<DeviceProfile>,
    /// Reconstruction-quality surface shared by all devices.
    pub psnr_model: PsnrModel,
    /// Device coordinates (x, y) in m, retained for traceability.
    pub positions: Vec<[f64; 2]>,
}

/// Radial distance of a uniform draw over the annulus `[min_d, radius]`,
/// by inverse CDF on the disk (`r = R·sqrt(u)`) with rejection below `min_d`.
pub fn sample_radius<R: Rng>(rng: &mut R, min_d: f64, radius: f64) -> f64 {
    loop {
        let u: f64 = rng.random();
        let r = radius * u.sqrt();
        if r >= min_d {
            return r;
        }
    }
}

fn uniform_in<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    lo + (hi - lo) * u
}

/// Path loss in dB at distance `d_m` meters under the config's log-distance
/// model (the formula's distance unit is km).
pub fn path_loss_db(config: &ScenarioConfig, d_m: f64) -> f64 {
    config.path_loss_a_db + config.path_loss_b_db_per_decade * (d_m / 1000.0).log10()
}

/// Draws a scenario. Deterministic for a given `config` (including its seed).
pub fn sample_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let n = config.device_count;
    let p_max = dbm_to_watt(config.p_max_dbm);
    let noise_psd = dbm_to_watt(config.noise_psd_dbm_hz);
    let mut devices = Vec::with_capacity(n);
    let mut positions = Vec::with_capacity(n);
    for dev in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(dev as u64);
        let r = sample_radius(&mut rng, config.min_distance_m, config.cell_radius_m);
        let theta = uniform_in(&mut rng, 0.0, std::f64::consts::TAU);
        let shadow_db = if config.shadow_sigma_db > 0.0 {
            Normal::new(0.0, config.shadow_sigma_db)
                .expect("validated sigma")
                .sample(&mut rng)
        } else {
            0.0
        };
        let c1 = uniform_in(
            &mut rng,
            config.cycles_device_range[0],
            config.cycles_device_range[1],
        );
        let c2 = uniform_in(&mut rng, config.cycles_bs_range[0], config.cycles_bs_range[1]);
        let loss_db = path_loss_db(config, r) + shadow_db;
        let gain = db_to_linear(-loss_db).min(1.0);
        positions.push([r * theta.cos(), r * theta.sin()]);
        let profile = DeviceProfile {
            gain,
            cycles_device: c1,
            cycles_bs: c2,
            samples: config.samples,
            sample_bits: config.sample_bits,
            p_max,
            f_max: config.f_max_hz,
            h_max: config.h_max_hz,
            rho_min: config.rho_min,
            rho_max: config.rho_max,
            psnr_min: config.psnr_min_db,
        };
        profile.validate()?;
        devices.push(profile);
    }
    Ok(Scenario {
        system: SystemParams::new(
            config.total_bandwidth_hz,
            noise_psd,
            config.kappa,
            config.weight_time,
            config.weight_energy,
            n,
        )?,
        devices,
        psnr_model: config.psnr_model,
        positions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn unit_conversions() {
        assert!(rel_err(dbm_to_watt(0.0), 1e-3) < 1e-14);
        assert!(rel_err(dbm_to_watt(20.0), 0.1) < 1e-14);
        assert!(rel_err(dbm_to_watt(-174.0), 3.9810717055349725e-21) < 1e-14);
        assert!(rel_err(db_to_linear(10.0), 10.0) < 1e-14);
    }

    #[test]
    fn path_loss_reference_points() {
        let cfg = ScenarioConfig::default();
        assert!(rel_err(path_loss_db(&cfg, 1000.0), 128.1) < 1e-14);
        let pl = path_loss_db(&cfg, 250.0);
        assert!(rel_err(pl, 105.46254432606861) < 1e-13, "pl = {pl}");
        let gain = db_to_linear(-pl);
        assert!(rel_err(gain, 2.8427951601967135e-11) < 1e-12, "g = {gain}");
    }

    #[test]
    fn same_seed_identical_scenario() {
        let cfg = ScenarioConfig {
            device_count: 8,
            seed: 42,
            ..ScenarioConfig::default()
        };
        let a = sample_scenario(&cfg).unwrap();
        let b = sample_scenario(&cfg).unwrap();
        assert_eq!(a, b);
        // Byte-for-byte, through serialization.
        let ja = serde_json::to_vec(&a).unwrap();
        let jb = serde_json::to_vec(&b).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn different_seeds_differ() {
        let mut cfg = ScenarioConfig::default();
        cfg.device_count = 4;
        cfg.seed = 1;
        let a = sample_scenario(&cfg).unwrap();
        cfg.seed = 2;
        let b = sample_scenario(&cfg).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn gains_decrease_with_distance_without_shadowing() {
        let cfg = ScenarioConfig {
            shadow_sigma_db: 0.0,
            device_count: 64,
            seed: 9,
            ..ScenarioConfig::default()
        };
        let sc = sample_scenario(&cfg).unwrap();
        let mut pairs: Vec<(f64, f64)> = sc
            .positions
            .iter()
            .zip(&sc.devices)
            .map(|(pos, d)| ((pos[0] * pos[0] + pos[1] * pos[1]).sqrt(), d.gain))
            .collect();
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        for w in pairs.windows(2) {
            assert!(w[1].1 < w[0].1, "gain not decreasing: {w:?}");
        }
    }

    #[test]
    fn gains_bounded_by_one() {
        let cfg = ScenarioConfig {
            device_count: 200,
            seed: 5,
            ..ScenarioConfig::default()
        };
        let sc = sample_scenario(&cfg).unwrap();
        assert!(sc.devices.iter().all(|d| d.gain > 0.0 && d.gain <= 1.0));
    }

    #[test]
    fn workload_draws_inside_ranges() {
        let cfg = ScenarioConfig {
            device_count: 100,
            seed: 11,
            ..ScenarioConfig::default()
        };
        let sc = sample_scenario(&cfg).unwrap();
        for d in &sc.devices {
            assert!(d.cycles_device >= 1e6 && d.cycles_device <= 3e6);
            assert!(d.cycles_bs >= 3e6 && d.cycles_bs <= 5e6);
        }
    }

    #[test]
    fn radial_placement_matches_square_law() {
        use rand::SeedableRng;
        let cfg = ScenarioConfig::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(123);
        let n = 100_000;
        let mut radii: Vec<f64> = (0..n)
            .map(|_| sample_radius(&mut rng, cfg.min_distance_m, cfg.cell_radius_m))
            .collect();
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (r0sq, rsq) = (
            cfg.min_distance_m * cfg.min_distance_m,
            cfg.cell_radius_m * cfg.cell_radius_m,
        );
        let cdf = |r: f64| (r * r - r0sq) / (rsq - r0sq);
        let mut ks = 0.0f64;
        for (i, &r) in radii.iter().enumerate() {
            let f = cdf(r);
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            ks = ks.max((f - lo).abs()).max((f - hi).abs());
        }
        assert!(ks < 0.01, "KS distance {ks}");
    }

    #[test]
    fn config_json_rejects_unknown_keys() {
        let json = r#"{ "device_count": 3, "not_a_key": 1.0 }"#;
        assert!(ScenarioConfig::from_json(json).is_err());
        let ok = ScenarioConfig::from_json(r#"{ "device_count": 3 }"#).unwrap();
        assert_eq!(ok.device_count, 3);
        assert_eq!(ok.cell_radius_m, 250.0);
    }

    #[test]
    fn config_validation_catches_bad_ranges() {
        let mut cfg = ScenarioConfig::default();
        cfg.min_distance_m = 300.0;
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::default();
        cfg.rho_min = 0.5;
        cfg.rho_max = 0.3;
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::default();
        cfg.cycles_device_range = [3e6, 1e6];
        assert!(cfg.validate().is_err());
    }
}
