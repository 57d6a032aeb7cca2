//! OMA and NOMA runs with one seed see identical traffic, grants and
//! geometry, so the NOMA decoded set contains the OMA one in every slot.

use cv2x_aoi_core::config::{FadingMode, ScenarioConfig};
use cv2x_aoi_core::{AccessMode, Simulation};

fn pair(seed: u64, rri: u32, fading: FadingMode, sic_gated: bool) -> (Simulation, Simulation) {
    let base = ScenarioConfig { num_vehicles: 30, rri, fading, sic_gated, rng_seed: seed, ..Default::default() };
    let oma = ScenarioConfig { access_mode: AccessMode::Oma, ..base.clone() }.validate().unwrap();
    let noma = ScenarioConfig { access_mode: AccessMode::Noma, ..base }.validate().unwrap();
    (Simulation::new(&oma), Simulation::new(&noma))
}

fn check(seed: u64, rri: u32, fading: FadingMode, sic_gated: bool, slots: u64) {
    let (mut oma, mut noma) = pair(seed, rri, fading, sic_gated);
    let mut strictly_more = 0;
    for _ in 0..slots {
        let (ro, eo) = oma.step();
        let (rn, en) = noma.step();
        assert_eq!(eo.transmissions, en.transmissions);
        assert_eq!(eo.attempts, en.attempts);
        assert_eq!(ro.phi_bar, rn.phi_bar);
        for s in &eo.successes {
            assert!(en.successes.contains(s), "slot {}: OMA decoded {s:?}, NOMA did not", ro.slot);
        }
        strictly_more += en.successes.len() - eo.successes.len();
    }
    assert!(strictly_more > 0, "NOMA never helped; the scenario has no collisions");
}

#[test]
fn ideal_sic_contains_oma() {
    for seed in 1..=3 {
        check(seed, 20, FadingMode::Constant, false, 20_000);
    }
    check(9, 100, FadingMode::Rayleigh, false, 20_000);
}

#[test]
fn gated_sic_contains_oma() {
    check(4, 50, FadingMode::Rayleigh, true, 20_000);
}
