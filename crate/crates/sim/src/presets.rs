//! Experiment presets: the field-trial settings and the grids behind the
//! success-rate table and the queue/receiver AoI figures.

use cv2x_aoi_core::config::{dbm_to_watts, kmh_to_ms, QueueDiscipline};
use cv2x_aoi_core::sweep::Axis;
use cv2x_aoi_core::{AccessMode, ScenarioConfig};

/// Published simulation settings; everything else keeps its default.
pub fn paper_settings() -> ScenarioConfig {
    ScenarioConfig {
        road_length: 500.0,
        total_rbs: 50,
        rbs_per_subchannel: 10,
        bandwidth_per_rb: 180_000.0,
        message_size: 4000.0,
        tx_power: dbm_to_watts(23.0),
        speed: kmh_to_ms(120.0),
        cam_period: 100,
        lambda_hpd: 1e-4,
        lambda_denm: 1e-4,
        lambda_mhd: 1e-4,
        retrans_period_hpd: 100,
        retrans_period_denm: 500,
        retrans_count_hpd: 8,
        retrans_count_denm: 5,
        sim_duration: 100_000,
        ..ScenarioConfig::default()
    }
}

pub const TABLE1_VEHICLES: [usize; 2] = [30, 50];
pub const RRIS: [u32; 3] = [20, 50, 100];

/// Published success rates, indexed `[mode][nv][rri]` with OMA first.
pub const TABLE1_PAPER: [[[f64; 3]; 2]; 2] = [
    [[0.82891, 0.83738, 0.91560], [0.75367, 0.80050, 0.85184]],
    [[0.89488, 0.93332, 0.97274], [0.87902, 0.92636, 0.95356]],
];

pub fn paper_success_rate(mode: AccessMode, nv: usize, rri: u32) -> Option<f64> {
    let m = match mode {
        AccessMode::Oma => 0,
        AccessMode::Noma => 1,
    };
    let n = TABLE1_VEHICLES.iter().position(|&v| v == nv)?;
    let r = RRIS.iter().position(|&v| v == rri)?;
    Some(TABLE1_PAPER[m][n][r])
}

/// `Nv × RRI × access mode`, the success-rate table and receiver-AoI figures.
pub fn table1_axes() -> Vec<Axis> {
    vec![
        Axis::new("num_vehicles", TABLE1_VEHICLES),
        Axis::new("rri", RRIS),
        Axis::new("access_mode", ["oma", "noma"]),
    ]
}

/// `Nv × RRI`, the mean queue AoI figure.
pub fn queue_aoi_axes() -> Vec<Axis> {
    vec![Axis::new("num_vehicles", TABLE1_VEHICLES), Axis::new("rri", RRIS)]
}

/// Single FIFO against the four priority queues at `Nv = 50`, `RRI = 100`.
pub fn queue_discipline_base() -> ScenarioConfig {
    ScenarioConfig { num_vehicles: 50, rri: 100, ..paper_settings() }
}

pub fn queue_discipline_axes() -> Vec<Axis> {
    let name = |d| match d {
        QueueDiscipline::Priority => "priority",
        QueueDiscipline::SingleFifo => "single_fifo",
    };
    vec![Axis::new("queue_discipline", [QueueDiscipline::SingleFifo, QueueDiscipline::Priority].map(name))]
}
