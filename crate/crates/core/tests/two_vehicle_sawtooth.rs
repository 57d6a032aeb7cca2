//! Two vehicles on fixed, distinct resources with always-busy queues: every
//! reception succeeds and the receiver age is a sawtooth with period RRI.

use cv2x_aoi_core::config::{FadingMode, ScenarioConfig};
use cv2x_aoi_core::mobility::VehiclePose;
use cv2x_aoi_core::sps::{Resource, SpsState};
use cv2x_aoi_core::{Simulation, ValidatedConfig};

const RRI: u64 = 20;
const CAP: u64 = 5;
const OFFSET_1: u64 = 10;

fn config() -> ValidatedConfig {
    ScenarioConfig {
        num_vehicles: 2,
        rri: RRI as u32,
        speed: 0.0,
        fading: FadingMode::Constant,
        cam_period: 1,
        lambda_hpd: 0.0,
        lambda_denm: 0.0,
        lambda_mhd: 0.0,
        queue_capacity: CAP as usize,
        sim_duration: 2_000,
        ..Default::default()
    }
    .validate()
    .unwrap()
}

fn pinned(cfg: &ValidatedConfig) -> Simulation {
    let mut sim = Simulation::new(cfg);
    let pose = |x| VehiclePose { x, lane: 1, direction: 1, y: 2.0 };
    sim.set_pose(0, pose(0.0));
    sim.set_pose(1, pose(100.0));
    sim.set_grant(0, SpsState::with_resource(0, Resource { subframe_offset: 0, subchannel: 0 }, 1_000_000));
    sim.set_grant(1, SpsState::with_resource(0, Resource { subframe_offset: OFFSET_1 as u32, subchannel: 3 }, 1_000_000));
    sim
}

/// Closed form once the queues are saturated: a CAM arrives every slot and
/// the queue holds `CAP` packets spaced `RRI` apart, so every departing
/// head is `CAP * RRI - 1` slots old and the refreshed age is `CAP * RRI`.
fn expected_phi(slot: u64, offset: u64) -> u64 {
    CAP * RRI + (slot + RRI - offset) % RRI
}

#[test]
fn every_reception_succeeds_and_ages_follow_the_sawtooth() {
    let cfg = config();
    let mut sim = pinned(&cfg);
    let (mut ok, mut tried) = (0, 0);
    let mut deltas = Vec::new();
    for _ in 0..cfg.sim_duration {
        let (r, ev) = sim.step();
        ok += r.rx_success;
        tried += r.rx_attempts;
        assert_eq!(r.collisions, 0);
        deltas.push(r.delta_t);
        let t = r.slot;
        if t >= 2 * CAP * RRI {
            assert_eq!(sim.aoi().get(0, 1), expected_phi(t, 0), "slot {t}");
            assert_eq!(sim.aoi().get(1, 0), expected_phi(t, OFFSET_1), "slot {t}");
        }
        for tx in &ev.transmissions {
            let offset = if tx.tx == 0 { 0 } else { OFFSET_1 };
            assert_eq!((t + RRI - offset) % RRI, 0);
        }
    }
    assert!(tried > 0);
    assert_eq!(ok, tried);
    let start = 2 * (CAP * RRI) as usize;
    for t in start..deltas.len() - RRI as usize {
        assert_eq!(deltas[t], deltas[t + RRI as usize], "delta not periodic at {t}");
    }
    let period: Vec<f64> = deltas[start..start + RRI as usize].to_vec();
    assert!(period.iter().any(|&d| d != period[0]), "delta should not be flat");
}
