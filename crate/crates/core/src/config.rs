//! Scenario configuration, reward parameters, and deterministic RNG streams.
//!
//! Everything an experiment needs is captured by a [`SimConfig`] +
//! [`RewardParams`] pair loaded from a flat TOML document, plus a single
//! master seed from which all named RNG substreams are derived. Replaying a
//! run with the same document and seed reproduces it bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Discrete simulation time, in steps.
pub type Step = u64;

#[derive(Debug, Error)]
pub enum ConfigError {
    /// The document failed to parse (includes unknown keys, which are
    /// rejected by name).
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("unknown rng stream `{0}`")]
    UnknownStream(String),
}

/// How computation-queue backlog is reported in observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QueueLenUnit {
    /// Number of queued service units (default).
    Count,
    /// Sum of queued communication sizes in Mbit.
    Mbit,
}

/// Full scenario parameterization. Defaults model one base station with a
/// co-located edge server, 10 mobile devices and 15 static sensors sharing
/// 100 MHz of uplink bandwidth and 100 compute units per step.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub num_ues: usize,
    pub num_sensors: usize,
    pub area_width_m: f64,
    pub area_height_m: f64,
    pub bs_height_m: f64,
    pub device_height_m: f64,
    pub bandwidth_mhz: f64,
    pub carrier_ghz: f64,
    pub tx_power_dbm: f64,
    pub compute_units: f64,
    pub ue_request_prob: f64,
    pub ue_comm_mean_mbit: f64,
    pub ue_comp_mean_units: f64,
    pub sensor_interval_steps: u64,
    pub sensor_comm_mean_mbit: f64,
    pub sensor_comp_mean_units: f64,
    pub ue_speed_mps: f64,
    pub step_duration_s: f64,
    pub episode_length: Step,
    pub noise_dbm_hz: f64,
    pub pathloss_exponent: f64,
    pub reference_loss_db: f64,
    pub master_seed: u64,
    /// Unit used for queue-length observations. Not a config-file key;
    /// set programmatically when a Mbit-denominated observation is wanted.
    pub queue_len_unit: QueueLenUnit,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            num_ues: 10,
            num_sensors: 15,
            area_width_m: 500.0,
            area_height_m: 500.0,
            bs_height_m: 40.0,
            device_height_m: 1.5,
            bandwidth_mhz: 100.0,
            carrier_ghz: 3.5,
            tx_power_dbm: 40.0,
            compute_units: 100.0,
            ue_request_prob: 0.7,
            ue_comm_mean_mbit: 50.0,
            ue_comp_mean_units: 5.0,
            sensor_interval_steps: 1,
            sensor_comm_mean_mbit: 70.0,
            sensor_comp_mean_units: 7.0,
            ue_speed_mps: 1.5,
            step_duration_s: 1.0,
            episode_length: 100,
            noise_dbm_hz: -174.0,
            pathloss_exponent: 3.0,
            reference_loss_db: 43.3,
            master_seed: 42,
            queue_len_unit: QueueLenUnit::Count,
        }
    }
}

impl SimConfig {
    /// Base-station position: the center of the area rectangle.
    pub fn bs_position(&self) -> (f64, f64) {
        (self.area_width_m / 2.0, self.area_height_m / 2.0)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::Invalid { field, reason: format!("must be > 0, got {v}") })
            }
        }
        if self.num_ues < 1 {
            return Err(ConfigError::Invalid { field: "num_ues", reason: "must be >= 1".into() });
        }
        if self.num_sensors < 1 {
            return Err(ConfigError::Invalid {
                field: "num_sensors",
                reason: "must be >= 1".into(),
            });
        }
        positive("area_width_m", self.area_width_m)?;
        positive("area_height_m", self.area_height_m)?;
        positive("bs_height_m", self.bs_height_m)?;
        positive("device_height_m", self.device_height_m)?;
        positive("bandwidth_mhz", self.bandwidth_mhz)?;
        positive("carrier_ghz", self.carrier_ghz)?;
        positive("compute_units", self.compute_units)?;
        positive("ue_comm_mean_mbit", self.ue_comm_mean_mbit)?;
        positive("ue_comp_mean_units", self.ue_comp_mean_units)?;
        positive("sensor_comm_mean_mbit", self.sensor_comm_mean_mbit)?;
        positive("sensor_comp_mean_units", self.sensor_comp_mean_units)?;
        positive("step_duration_s", self.step_duration_s)?;
        positive("pathloss_exponent", self.pathloss_exponent)?;
        if !self.tx_power_dbm.is_finite() {
            return Err(ConfigError::Invalid {
                field: "tx_power_dbm",
                reason: "must be finite".into(),
            });
        }
        if !self.noise_dbm_hz.is_finite() {
            return Err(ConfigError::Invalid {
                field: "noise_dbm_hz",
                reason: "must be finite".into(),
            });
        }
        if !self.reference_loss_db.is_finite() || self.reference_loss_db < 0.0 {
            return Err(ConfigError::Invalid {
                field: "reference_loss_db",
                reason: format!("must be >= 0, got {}", self.reference_loss_db),
            });
        }
        if !(0.0..=1.0).contains(&self.ue_request_prob) {
            return Err(ConfigError::Invalid {
                field: "ue_request_prob",
                reason: format!("must be in [0, 1], got {}", self.ue_request_prob),
            });
        }
        if self.sensor_interval_steps < 1 {
            return Err(ConfigError::Invalid {
                field: "sensor_interval_steps",
                reason: "must be >= 1".into(),
            });
        }
        if !(self.ue_speed_mps >= 0.0 && self.ue_speed_mps.is_finite()) {
            return Err(ConfigError::Invalid {
                field: "ue_speed_mps",
                reason: format!("must be >= 0, got {}", self.ue_speed_mps),
            });
        }
        if self.episode_length < 1 {
            return Err(ConfigError::Invalid {
                field: "episode_length",
                reason: "must be >= 1".into(),
            });
        }
        // Derived, but asserted so config edits can't silently break it.
        let (bx, by) = self.bs_position();
        if !(0.0..=self.area_width_m).contains(&bx) || !(0.0..=self.area_height_m).contains(&by) {
            return Err(ConfigError::Invalid {
                field: "area_width_m",
                reason: "base station must lie inside the area".into(),
            });
        }
        Ok(())
    }
}

/// Reward-shaping constants: a base synchronization reward discounted per
/// step of sensor-information age, plus a flat penalty for requests whose
/// end-to-end delay exceeds a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardParams {
    /// Base reward per completed request with perfectly fresh sensor data.
    pub sync_base: f64,
    /// Per-step geometric discount of the base reward, in (0, 1).
    pub sync_discount: f64,
    /// Penalty added per completed request whose delay exceeds the
    /// threshold; must be <= 0.
    pub delay_penalty: f64,
    pub delay_threshold_steps: Step,
    /// MDP discount factor.
    pub gamma: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            sync_base: 10.0,
            sync_discount: 0.9,
            delay_penalty: 0.0,
            delay_threshold_steps: 2,
            gamma: 0.99,
        }
    }
}

impl RewardParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.sync_base.is_finite() {
            return Err(ConfigError::Invalid {
                field: "sync_base",
                reason: "must be finite".into(),
            });
        }
        if !(self.sync_discount > 0.0 && self.sync_discount < 1.0) {
            return Err(ConfigError::Invalid {
                field: "sync_discount",
                reason: format!("must be in (0, 1), got {}", self.sync_discount),
            });
        }
        if !(self.delay_penalty <= 0.0 && self.delay_penalty.is_finite()) {
            return Err(ConfigError::Invalid {
                field: "delay_penalty",
                reason: format!("must be <= 0, got {}", self.delay_penalty),
            });
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(ConfigError::Invalid {
                field: "gamma",
                reason: format!("must be in [0, 1], got {}", self.gamma),
            });
        }
        Ok(())
    }
}

/// Flat on-disk form. Every key optional; unknown keys are rejected with
/// their names by serde's `deny_unknown_fields`.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    num_ues: Option<usize>,
    num_sensors: Option<usize>,
    area_width_m: Option<f64>,
    area_height_m: Option<f64>,
    bs_height_m: Option<f64>,
    device_height_m: Option<f64>,
    bandwidth_mhz: Option<f64>,
    carrier_ghz: Option<f64>,
    tx_power_dbm: Option<f64>,
    compute_units: Option<f64>,
    ue_request_prob: Option<f64>,
    ue_comm_mean_mbit: Option<f64>,
    ue_comp_mean_units: Option<f64>,
    sensor_interval_steps: Option<u64>,
    sensor_comm_mean_mbit: Option<f64>,
    sensor_comp_mean_units: Option<f64>,
    ue_speed_mps: Option<f64>,
    step_duration_s: Option<f64>,
    episode_length: Option<Step>,
    noise_dbm_hz: Option<f64>,
    pathloss_exponent: Option<f64>,
    reference_loss_db: Option<f64>,
    master_seed: Option<u64>,
    sync_base: Option<f64>,
    sync_discount: Option<f64>,
    delay_penalty: Option<f64>,
    delay_threshold_steps: Option<Step>,
    gamma: Option<f64>,
}

/// Parse a flat key/value TOML document into a validated configuration.
/// Missing keys fall back to defaults; an empty document yields the full
/// default scenario.
pub fn load_config(document: &str) -> Result<(SimConfig, RewardParams), ConfigError> {
    let raw: RawConfig =
        toml::from_str(document).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let d = SimConfig::default();
    let cfg = SimConfig {
        num_ues: raw.num_ues.unwrap_or(d.num_ues),
        num_sensors: raw.num_sensors.unwrap_or(d.num_sensors),
        area_width_m: raw.area_width_m.unwrap_or(d.area_width_m),
        area_height_m: raw.area_height_m.unwrap_or(d.area_height_m),
        bs_height_m: raw.bs_height_m.unwrap_or(d.bs_height_m),
        device_height_m: raw.device_height_m.unwrap_or(d.device_height_m),
        bandwidth_mhz: raw.bandwidth_mhz.unwrap_or(d.bandwidth_mhz),
        carrier_ghz: raw.carrier_ghz.unwrap_or(d.carrier_ghz),
        tx_power_dbm: raw.tx_power_dbm.unwrap_or(d.tx_power_dbm),
        compute_units: raw.compute_units.unwrap_or(d.compute_units),
        ue_request_prob: raw.ue_request_prob.unwrap_or(d.ue_request_prob),
        ue_comm_mean_mbit: raw.ue_comm_mean_mbit.unwrap_or(d.ue_comm_mean_mbit),
        ue_comp_mean_units: raw.ue_comp_mean_units.unwrap_or(d.ue_comp_mean_units),
        sensor_interval_steps: raw.sensor_interval_steps.unwrap_or(d.sensor_interval_steps),
        sensor_comm_mean_mbit: raw.sensor_comm_mean_mbit.unwrap_or(d.sensor_comm_mean_mbit),
        sensor_comp_mean_units: raw.sensor_comp_mean_units.unwrap_or(d.sensor_comp_mean_units),
        ue_speed_mps: raw.ue_speed_mps.unwrap_or(d.ue_speed_mps),
        step_duration_s: raw.step_duration_s.unwrap_or(d.step_duration_s),
        episode_length: raw.episode_length.unwrap_or(d.episode_length),
        noise_dbm_hz: raw.noise_dbm_hz.unwrap_or(d.noise_dbm_hz),
        pathloss_exponent: raw.pathloss_exponent.unwrap_or(d.pathloss_exponent),
        reference_loss_db: raw.reference_loss_db.unwrap_or(d.reference_loss_db),
        master_seed: raw.master_seed.unwrap_or(d.master_seed),
        queue_len_unit: QueueLenUnit::Count,
    };
    let dr = RewardParams::default();
    let reward = RewardParams {
        sync_base: raw.sync_base.unwrap_or(dr.sync_base),
        sync_discount: raw.sync_discount.unwrap_or(dr.sync_discount),
        delay_penalty: raw.delay_penalty.unwrap_or(dr.delay_penalty),
        delay_threshold_steps: raw.delay_threshold_steps.unwrap_or(dr.delay_threshold_steps),
        gamma: raw.gamma.unwrap_or(dr.gamma),
    };
    cfg.validate()?;
    reward.validate()?;
    Ok((cfg, reward))
}

/// Serialize a configuration pair back into the flat document form.
/// `load_config(to_document(c, r))` returns an equal pair.
pub fn to_document(cfg: &SimConfig, reward: &RewardParams) -> String {
    let raw = RawConfig {
        num_ues: Some(cfg.num_ues),
        num_sensors: Some(cfg.num_sensors),
        area_width_m: Some(cfg.area_width_m),
        area_height_m: Some(cfg.area_height_m),
        bs_height_m: Some(cfg.bs_height_m),
        device_height_m: Some(cfg.device_height_m),
        bandwidth_mhz: Some(cfg.bandwidth_mhz),
        carrier_ghz: Some(cfg.carrier_ghz),
        tx_power_dbm: Some(cfg.tx_power_dbm),
        compute_units: Some(cfg.compute_units),
        ue_request_prob: Some(cfg.ue_request_prob),
        ue_comm_mean_mbit: Some(cfg.ue_comm_mean_mbit),
        ue_comp_mean_units: Some(cfg.ue_comp_mean_units),
        sensor_interval_steps: Some(cfg.sensor_interval_steps),
        sensor_comm_mean_mbit: Some(cfg.sensor_comm_mean_mbit),
        sensor_comp_mean_units: Some(cfg.sensor_comp_mean_units),
        ue_speed_mps: Some(cfg.ue_speed_mps),
        step_duration_s: Some(cfg.step_duration_s),
        episode_length: Some(cfg.episode_length),
        noise_dbm_hz: Some(cfg.noise_dbm_hz),
        pathloss_exponent: Some(cfg.pathloss_exponent),
        reference_loss_db: Some(cfg.reference_loss_db),
        master_seed: Some(cfg.master_seed),
        sync_base: Some(reward.sync_base),
        sync_discount: Some(reward.sync_discount),
        delay_penalty: Some(reward.delay_penalty),
        delay_threshold_steps: Some(reward.delay_threshold_steps),
        gamma: Some(reward.gamma),
    };
    toml::to_string(&raw).expect("flat config always serializes")
}

/// Named, independently seeded RNG substreams. Distinct names never share
/// state; the same `(master_seed, name)` always yields the same sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngHub {
    master_seed: u64,
}

/// The declared substreams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    /// Bernoulli request arrivals.
    Traffic,
    /// Device placement and waypoint motion.
    Mobility,
    /// Poisson packet sizes and processing loads.
    Sizes,
    /// Policy network initialization.
    PolicyInit,
    /// Action sampling and minibatch shuffling.
    PolicySampling,
}

impl StreamKind {
    pub const ALL: [StreamKind; 5] = [
        StreamKind::Traffic,
        StreamKind::Mobility,
        StreamKind::Sizes,
        StreamKind::PolicyInit,
        StreamKind::PolicySampling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StreamKind::Traffic => "traffic",
            StreamKind::Mobility => "mobility",
            StreamKind::Sizes => "sizes",
            StreamKind::PolicyInit => "policy-init",
            StreamKind::PolicySampling => "policy-sampling",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, ConfigError> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| ConfigError::UnknownStream(name.to_string()))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl RngHub {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Derive the generator for a declared substream. Pure: calling twice
    /// returns generators in identical states.
    pub fn stream(&self, kind: StreamKind) -> ChaCha8Rng {
        let tag = fnv1a(kind.name().as_bytes());
        ChaCha8Rng::seed_from_u64(splitmix64(self.master_seed ^ tag))
    }

    /// String-keyed variant; errors on names outside the declared set.
    pub fn stream_named(&self, name: &str) -> Result<ChaCha8Rng, ConfigError> {
        StreamKind::from_name(name).map(|k| self.stream(k))
    }
}

/// Deterministic per-episode seed schedule shared by every experiment that
/// evaluates over a seed set (common random numbers across compared
/// configurations).
pub fn episode_seed(master_seed: u64, episode_index: u64) -> u64 {
    splitmix64(splitmix64(master_seed) ^ episode_index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}
