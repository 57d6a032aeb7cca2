//! Scenario configuration, validation and the derived link constants.
//!
//! [`ScenarioConfig`] is the raw record (every tunable, SI units). It is
//! turned into a [`ValidatedConfig`] by [`ScenarioConfig::validate`], which
//! checks every invariant at once and derives the subchannel layout, the
//! subchannel bandwidth, the per-slot CAM probability and the SINR
//! threshold. A `ValidatedConfig` is immutable and can be shared freely
//! between concurrent runs.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use crate::phy;

/// Multiple-access scheme used to resolve co-channel transmissions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AccessMode {
    Oma,
    Noma,
}

/// Distribution of the small-scale fading coefficient `c_ij`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FadingMode {
    /// `c_ij = 1`.
    Constant,
    /// Unit-mean exponential, drawn independently per link and per slot.
    Rayleigh,
}

/// How CAM packets are generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CamMode {
    /// One packet every `cam_period` slots, at a per-vehicle random phase.
    Periodic,
    /// Bernoulli(1 / `cam_period`) per slot.
    Bernoulli,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DistanceMode {
    /// Along-road separation only.
    OneD,
    /// Along-road and lateral (lane) separation.
    TwoD,
}

/// Transmit-queue organisation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QueueDiscipline {
    /// Four FIFO queues served in strict priority order.
    Priority,
    /// One shared FIFO of capacity `4 * queue_capacity`, served in arrival order.
    SingleFifo,
}

/// Normalisation of the mean in-queue age.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QueueAoiMode {
    /// Mean over every queued packet in the system.
    Flat,
    /// Mean per non-empty queue, then over queues of a vehicle, then over
    /// vehicles holding at least one packet.
    Weighted,
}

/// RRI values accepted without `allow_any_rri`.
pub const STANDARD_RRIS: [u32; 3] = [20, 50, 100];

/// Longest run accepted by validation, in slots.
pub const MAX_SIM_DURATION: u64 = 10_000_000;

/// Every tunable of a scenario, in SI units (watts, meters, m/s, slots).
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub num_vehicles: usize,
    /// Road length `D` in meters.
    pub road_length: f64,
    /// Total lane count `U`; the first half drives forward, the rest in reverse.
    pub lanes: u32,
    pub lane_width: f64,
    /// Distance `y0` from the lane boundary to the vehicle.
    pub edge_offset: f64,
    /// Speed in m/s.
    pub speed: f64,
    /// Slot length `τ` in seconds.
    pub slot_duration: f64,
    /// Number of simulated slots.
    pub sim_duration: u64,
    /// Resource reservation interval, slots.
    pub rri: u32,
    /// Selection window `Γ`; must equal `rri` when given.
    pub selection_window: Option<u32>,
    /// Accept an RRI outside {20, 50, 100}.
    pub allow_any_rri: bool,
    pub total_rbs: u32,
    pub rbs_per_subchannel: u32,
    /// Hz per resource block.
    pub bandwidth_per_rb: f64,
    /// Message size `Q` in bits.
    pub message_size: f64,
    /// Transmit power in watts.
    pub tx_power: f64,
    /// Noise power `σ²` in watts over one subchannel.
    pub noise_power: f64,
    pub path_loss_exponent: f64,
    pub fading: FadingMode,
    /// CAM period `T_c`, slots.
    pub cam_period: u32,
    pub cam_mode: CamMode,
    pub lambda_hpd: f64,
    pub lambda_denm: f64,
    pub lambda_mhd: f64,
    pub retrans_period_hpd: u32,
    pub retrans_period_denm: u32,
    /// Total transmissions of one HPD observation (original included).
    pub retrans_count_hpd: u32,
    pub retrans_count_denm: u32,
    /// Capacity `L` of each priority queue.
    pub queue_capacity: usize,
    pub queue_discipline: QueueDiscipline,
    /// Probability of drawing a new resource when RC reaches zero.
    pub p_rk: f64,
    /// Burn a grant use even when the queues are empty at the reserved slot.
    pub decrement_on_silence: bool,
    pub access_mode: AccessMode,
    /// NOMA only: cancel a stronger signal only if it was itself decoded.
    pub sic_gated: bool,
    pub distance_mode: DistanceMode,
    /// Receivers farther than this from a transmitter are not counted as
    /// reception attempts (their interference still counts).
    pub max_range: Option<f64>,
    pub queue_aoi_mode: QueueAoiMode,
    /// Slots excluded from the head of the run in summary statistics.
    pub discard_slots: u64,
    pub rng_seed: u64,
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    libm::pow(10.0, (dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * libm::log10(w) + 30.0
}

pub fn kmh_to_ms(kmh: f64) -> f64 {
    kmh / 3.6
}

impl Default for ScenarioConfig {
    /// Field-trial settings: 10 MHz / 50 RBs, 500-byte messages, 23 dBm,
    /// 120 km/h, 100 ms RRI, rare event traffic and a 100 ms CAM period.
    fn default() -> Self {
        ScenarioConfig {
            num_vehicles: 30,
            road_length: 500.0,
            lanes: 4,
            lane_width: 4.0,
            edge_offset: 2.0,
            speed: kmh_to_ms(120.0),
            slot_duration: 0.001,
            sim_duration: 100_000,
            rri: 100,
            selection_window: None,
            allow_any_rri: false,
            total_rbs: 50,
            rbs_per_subchannel: 10,
            bandwidth_per_rb: 180_000.0,
            message_size: 4000.0,
            tx_power: dbm_to_watts(23.0),
            noise_power: dbm_to_watts(-95.0),
            path_loss_exponent: 2.0,
            fading: FadingMode::Constant,
            cam_period: 100,
            cam_mode: CamMode::Periodic,
            lambda_hpd: 1e-4,
            lambda_denm: 1e-4,
            lambda_mhd: 1e-4,
            retrans_period_hpd: 100,
            retrans_period_denm: 500,
            retrans_count_hpd: 8,
            retrans_count_denm: 5,
            queue_capacity: 5,
            queue_discipline: QueueDiscipline::Priority,
            p_rk: 1.0,
            decrement_on_silence: false,
            access_mode: AccessMode::Oma,
            sic_gated: false,
            distance_mode: DistanceMode::TwoD,
            max_range: None,
            queue_aoi_mode: QueueAoiMode::Flat,
            discard_slots: 0,
            rng_seed: 1,
        }
    }
}

/// One violated invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldError {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConfigError {
    /// Validation failed; every violated invariant is listed.
    Invalid(Vec<FieldError>),
    UnknownKey(String),
    BadValue { key: String, value: String, expected: &'static str },
}

impl ConfigError {
    pub fn violations(&self) -> &[FieldError] {
        match self {
            ConfigError::Invalid(v) => v,
            _ => &[],
        }
    }

    /// True if any violation mentions `field`.
    pub fn concerns(&self, field: &str) -> bool {
        self.violations().iter().any(|v| v.field == field)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Invalid(errors) => {
                f.write_str("invalid configuration")?;
                for e in errors {
                    write!(f, "\n  {e}")?;
                }
                Ok(())
            }
            ConfigError::UnknownKey(k) => write!(f, "unknown configuration key `{k}`"),
            ConfigError::BadValue { key, value, expected } => {
                write!(f, "bad value `{value}` for `{key}`: expected {expected}")
            }
        }
    }
}

impl core::error::Error for ConfigError {}

/// Configuration that passed validation, plus derived constants.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedConfig {
    config: ScenarioConfig,
    pub num_subchannels: usize,
    /// Subchannel bandwidth `B` in Hz.
    pub subchannel_bandwidth: f64,
    /// Per-slot CAM generation probability `1 / T_c`.
    pub cam_probability: f64,
    pub sinr_threshold: f64,
}

impl ValidatedConfig {
    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn into_inner(self) -> ScenarioConfig {
        self.config
    }

    /// Selection window `Γ` in slots (always equal to the RRI).
    pub fn selection_window(&self) -> u32 {
        self.config.rri
    }

    /// Number of candidate single-subframe resources in the window.
    pub fn candidate_resources(&self) -> usize {
        self.config.rri as usize * self.num_subchannels
    }
}

impl Deref for ValidatedConfig {
    type Target = ScenarioConfig;

    fn deref(&self) -> &ScenarioConfig {
        &self.config
    }
}

fn is_prob(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl ScenarioConfig {
    /// Checks every invariant, collecting all violations.
    pub fn validate(&self) -> Result<ValidatedConfig, ConfigError> {
        let mut errs = Vec::new();
        let mut bad = |field: &'static str, message: &str| {
            errs.push(FieldError { field, message: message.to_string() })
        };

        if self.num_vehicles < 2 {
            bad("num_vehicles", "need at least one receiver (num_vehicles >= 2)");
        }
        if !positive(self.road_length) {
            bad("road_length", "must be > 0");
        }
        if self.lanes == 0 || self.lanes % 2 != 0 {
            bad("lanes", "must be a positive even count");
        }
        if !positive(self.lane_width) {
            bad("lane_width", "must be > 0");
        }
        if !(self.edge_offset.is_finite() && self.edge_offset >= 0.0) {
            bad("edge_offset", "must be >= 0");
        }
        if !(self.speed.is_finite() && self.speed >= 0.0) {
            bad("speed", "must be >= 0");
        }
        if !positive(self.slot_duration) {
            bad("slot_duration", "must be > 0");
        }
        if self.sim_duration > MAX_SIM_DURATION {
            bad("sim_duration", "must not exceed 10^7 slots");
        }
        if self.rri == 0 {
            bad("rri", "must be > 0");
        } else if !self.allow_any_rri && !STANDARD_RRIS.contains(&self.rri) {
            bad("rri", "must be one of 20, 50, 100 (set allow_any_rri to override)");
        }
        if let Some(w) = self.selection_window {
            if w != self.rri {
                bad("selection_window", "selection window must equal RRI");
            }
        }
        if self.total_rbs == 0 || self.rbs_per_subchannel == 0 {
            bad("total_rbs", "resource block counts must be > 0");
        } else if self.total_rbs % self.rbs_per_subchannel != 0 {
            bad("total_rbs", "must be a multiple of rbs_per_subchannel");
        }
        if !positive(self.bandwidth_per_rb) {
            bad("bandwidth_per_rb", "must be > 0");
        }
        if !positive(self.message_size) {
            bad("message_size", "must be > 0");
        }
        if !positive(self.tx_power) {
            bad("tx_power", "must be > 0");
        }
        if !positive(self.noise_power) {
            bad("noise_power", "must be > 0");
        }
        if !positive(self.path_loss_exponent) {
            bad("path_loss_exponent", "must be > 0");
        }
        if self.cam_period == 0 {
            bad("cam_period", "must be > 0");
        }
        for (field, p) in [
            ("lambda_hpd", self.lambda_hpd),
            ("lambda_denm", self.lambda_denm),
            ("lambda_mhd", self.lambda_mhd),
            ("p_rk", self.p_rk),
        ] {
            if !is_prob(p) {
                bad(field, "must lie in [0, 1]");
            }
        }
        if self.retrans_count_hpd == 0 || self.retrans_count_denm == 0 {
            bad("retrans_count_hpd", "transmission counts must be >= 1");
        }
        if self.retrans_period_hpd == 0 || self.retrans_period_denm == 0 {
            bad("retrans_period_hpd", "retransmission periods must be > 0");
        }
        if self.queue_capacity == 0 {
            bad("queue_capacity", "must be > 0");
        }
        if let Some(r) = self.max_range {
            if !positive(r) {
                bad("max_range", "must be > 0");
            }
        }

        let num_subchannels = if self.rbs_per_subchannel > 0 {
            (self.total_rbs / self.rbs_per_subchannel) as usize
        } else {
            0
        };
        let subchannel_bandwidth = self.rbs_per_subchannel as f64 * self.bandwidth_per_rb;
        let sinr_threshold =
            match phy::sinr_threshold(self.message_size, subchannel_bandwidth, self.slot_duration) {
                Ok(th) => th,
                Err(e) => {
                    if positive(self.message_size) && positive(subchannel_bandwidth) {
                        bad("message_size", &format!("{e}"));
                    }
                    f64::NAN
                }
            };

        if !errs.is_empty() {
            return Err(ConfigError::Invalid(errs));
        }
        Ok(ValidatedConfig {
            config: self.clone(),
            num_subchannels,
            subchannel_bandwidth,
            cam_probability: 1.0 / self.cam_period as f64,
            sinr_threshold,
        })
    }

    /// Applies one `key = value` override.
    ///
    /// Keys are the field names; `tx_power_dbm`, `noise_power_dbm` and
    /// `speed_kmh` are accepted as unit-converting aliases.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        let bad = |expected: &'static str| ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
            expected,
        };
        let float = || value.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| bad("a finite number"));
        let uint = || value.parse::<u64>().map_err(|_| bad("a non-negative integer"));
        let u32v = || value.parse::<u32>().map_err(|_| bad("a non-negative integer"));
        let boolean = || match value {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            _ => Err(bad("true or false")),
        };
        match key {
            "num_vehicles" | "nv" => self.num_vehicles = uint()? as usize,
            "road_length" => self.road_length = float()?,
            "lanes" => self.lanes = u32v()?,
            "lane_width" => self.lane_width = float()?,
            "edge_offset" => self.edge_offset = float()?,
            "speed" => self.speed = float()?,
            "speed_kmh" => self.speed = kmh_to_ms(float()?),
            "slot_duration" => self.slot_duration = float()?,
            "sim_duration" => self.sim_duration = uint()?,
            "rri" => self.rri = u32v()?,
            "selection_window" => {
                self.selection_window = match value {
                    "" | "none" => None,
                    _ => Some(u32v()?),
                }
            }
            "allow_any_rri" => self.allow_any_rri = boolean()?,
            "total_rbs" => self.total_rbs = u32v()?,
            "rbs_per_subchannel" => self.rbs_per_subchannel = u32v()?,
            "bandwidth_per_rb" => self.bandwidth_per_rb = float()?,
            "message_size" => self.message_size = float()?,
            "tx_power" => self.tx_power = float()?,
            "tx_power_dbm" => self.tx_power = dbm_to_watts(float()?),
            "noise_power" => self.noise_power = float()?,
            "noise_power_dbm" => self.noise_power = dbm_to_watts(float()?),
            "path_loss_exponent" => self.path_loss_exponent = float()?,
            "fading" => {
                self.fading = match value {
                    "constant" => FadingMode::Constant,
                    "rayleigh" | "random" => FadingMode::Rayleigh,
                    _ => return Err(bad("constant or rayleigh")),
                }
            }
            "cam_period" => self.cam_period = u32v()?,
            "cam_mode" => {
                self.cam_mode = match value {
                    "periodic" => CamMode::Periodic,
                    "bernoulli" => CamMode::Bernoulli,
                    _ => return Err(bad("periodic or bernoulli")),
                }
            }
            "lambda_hpd" => self.lambda_hpd = float()?,
            "lambda_denm" => self.lambda_denm = float()?,
            "lambda_mhd" => self.lambda_mhd = float()?,
            "retrans_period_hpd" => self.retrans_period_hpd = u32v()?,
            "retrans_period_denm" => self.retrans_period_denm = u32v()?,
            "retrans_count_hpd" => self.retrans_count_hpd = u32v()?,
            "retrans_count_denm" => self.retrans_count_denm = u32v()?,
            "queue_capacity" => self.queue_capacity = uint()? as usize,
            "queue_discipline" => {
                self.queue_discipline = match value {
                    "priority" => QueueDiscipline::Priority,
                    "single_fifo" | "fifo" => QueueDiscipline::SingleFifo,
                    _ => return Err(bad("priority or single_fifo")),
                }
            }
            "p_rk" => self.p_rk = float()?,
            "decrement_on_silence" => self.decrement_on_silence = boolean()?,
            "access_mode" | "mode" => {
                self.access_mode = match value.to_ascii_lowercase().as_str() {
                    "oma" => AccessMode::Oma,
                    "noma" => AccessMode::Noma,
                    _ => return Err(bad("oma or noma")),
                }
            }
            "sic_gated" => self.sic_gated = boolean()?,
            "distance_mode" => {
                self.distance_mode = match value {
                    "1d" => DistanceMode::OneD,
                    "2d" => DistanceMode::TwoD,
                    _ => return Err(bad("1d or 2d")),
                }
            }
            "max_range" => {
                self.max_range = match value {
                    "" | "none" => None,
                    _ => Some(float()?),
                }
            }
            "queue_aoi_mode" => {
                self.queue_aoi_mode = match value {
                    "flat" => QueueAoiMode::Flat,
                    "weighted" => QueueAoiMode::Weighted,
                    _ => return Err(bad("flat or weighted")),
                }
            }
            "discard_slots" => self.discard_slots = uint()?,
            "rng_seed" | "seed" => self.rng_seed = uint()?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Canonical `(key, value)` listing of every field, in a fixed order.
    ///
    /// Feeding each pair back through [`ScenarioConfig::set`] reproduces the
    /// configuration exactly (floats use shortest round-trip formatting).
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        fn opt<T: fmt::Display>(v: Option<T>) -> String {
            v.map_or_else(|| "none".to_string(), |x| x.to_string())
        }
        alloc::vec![
            ("num_vehicles", self.num_vehicles.to_string()),
            ("road_length", self.road_length.to_string()),
            ("lanes", self.lanes.to_string()),
            ("lane_width", self.lane_width.to_string()),
            ("edge_offset", self.edge_offset.to_string()),
            ("speed", self.speed.to_string()),
            ("slot_duration", self.slot_duration.to_string()),
            ("sim_duration", self.sim_duration.to_string()),
            ("rri", self.rri.to_string()),
            ("selection_window", opt(self.selection_window)),
            ("allow_any_rri", self.allow_any_rri.to_string()),
            ("total_rbs", self.total_rbs.to_string()),
            ("rbs_per_subchannel", self.rbs_per_subchannel.to_string()),
            ("bandwidth_per_rb", self.bandwidth_per_rb.to_string()),
            ("message_size", self.message_size.to_string()),
            ("tx_power", self.tx_power.to_string()),
            ("noise_power", self.noise_power.to_string()),
            ("path_loss_exponent", self.path_loss_exponent.to_string()),
            ("fading", match self.fading {
                FadingMode::Constant => "constant",
                FadingMode::Rayleigh => "rayleigh",
            }.to_string()),
            ("cam_period", self.cam_period.to_string()),
            ("cam_mode", match self.cam_mode {
                CamMode::Periodic => "periodic",
                CamMode::Bernoulli => "bernoulli",
            }.to_string()),
            ("lambda_hpd", self.lambda_hpd.to_string()),
            ("lambda_denm", self.lambda_denm.to_string()),
            ("lambda_mhd", self.lambda_mhd.to_string()),
            ("retrans_period_hpd", self.retrans_period_hpd.to_string()),
            ("retrans_period_denm", self.retrans_period_denm.to_string()),
            ("retrans_count_hpd", self.retrans_count_hpd.to_string()),
            ("retrans_count_denm", self.retrans_count_denm.to_string()),
            ("queue_capacity", self.queue_capacity.to_string()),
            ("queue_discipline", match self.queue_discipline {
                QueueDiscipline::Priority => "priority",
                QueueDiscipline::SingleFifo => "single_fifo",
            }.to_string()),
            ("p_rk", self.p_rk.to_string()),
            ("decrement_on_silence", self.decrement_on_silence.to_string()),
            ("access_mode", match self.access_mode {
                AccessMode::Oma => "oma",
                AccessMode::Noma => "noma",
            }.to_string()),
            ("sic_gated", self.sic_gated.to_string()),
            ("distance_mode", match self.distance_mode {
                DistanceMode::OneD => "1d",
                DistanceMode::TwoD => "2d",
            }.to_string()),
            ("max_range", opt(self.max_range)),
            ("queue_aoi_mode", match self.queue_aoi_mode {
                QueueAoiMode::Flat => "flat",
                QueueAoiMode::Weighted => "weighted",
            }.to_string()),
            ("discard_slots", self.discard_slots.to_string()),
            ("rng_seed", self.rng_seed.to_string()),
        ]
    }
}

impl fmt::Display for AccessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AccessMode::Oma => "OMA",
            AccessMode::Noma => "NOMA",
        })
    }
}
