//! The per-slot simulation loop.
//!
//! Every slot runs the same fixed sequence:
//!
//! 1. mobility step for every vehicle;
//! 2. due retransmission copies and new arrivals are enqueued;
//! 3. each vehicle checks its SPS grant, giving this slot's transmitters;
//! 4. queues are served (transmitters) or aged (everyone else);
//! 5. transmissions are grouped by subchannel and the received power of
//!    every (transmitter, non-transmitting receiver) link is computed;
//! 6. per-receiver, per-subchannel SINR under OMA or NOMA, then decoding;
//! 7. the receiver AoI matrix is updated;
//! 8. a [`SlotReport`] is appended.
//!
//! All randomness comes from per-vehicle substreams (see [`crate::rng`]) and
//! none of it depends on decoding outcomes, so an OMA run and a NOMA run
//! with the same seed see identical traffic, grants, positions and fades.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::analytic::{self, AnalyticParams, SelectionTelemetry};
use crate::aoi::{self, ReceiverAoiMatrix, SlotReport};
use crate::config::{AccessMode, ValidatedConfig};
use crate::mobility::{self, VehiclePose};
use crate::phy::{self, ReceivedSignal};
use crate::queues::{EnqueueOutcome, Packet, PriorityQueueSet, TrafficSource, TransmitAction};
use crate::rng::{substream, SimRng, Subsystem};
use crate::sps::{Reselection, Resource, SpsParams, SpsState};
use crate::message::MessageType;
use crate::{Slot, VehicleId};

/// One vehicle's complete state.
#[derive(Clone, Debug)]
pub struct Vehicle {
    pub pose: VehiclePose,
    pub queues: PriorityQueueSet,
    pub sps: SpsState,
    pub traffic: TrafficSource,
    traffic_rng: SimRng,
    sps_rng: SimRng,
    fading_rng: SimRng,
}

/// A transmission made in one slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transmission {
    pub tx: VehicleId,
    pub resource: Resource,
    /// The departed packet, with its age at the transmission slot.
    pub packet: Packet,
}

/// Everything that happened in one slot, beyond the aggregate report.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SlotEvents {
    pub slot: Slot,
    /// Packets accepted into a queue (retransmission copies first).
    pub enqueued: Vec<(VehicleId, Packet)>,
    pub dropped: Vec<(VehicleId, Packet)>,
    pub transmissions: Vec<Transmission>,
    /// Decoded `(tx, rx)` pairs.
    pub successes: Vec<(VehicleId, VehicleId)>,
    /// `(tx, rx)` pairs that counted as reception attempts.
    pub attempts: Vec<(VehicleId, VehicleId)>,
}

/// Internal fault detected while running, with the slot it happened in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineError {
    pub slot: Slot,
    pub message: &'static str,
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "engine fault at slot {}: {}", self.slot, self.message)
    }
}

impl core::error::Error for EngineError {}

/// A running simulation.
#[derive(Clone, Debug)]
pub struct Simulation {
    cfg: ValidatedConfig,
    sps_params: SpsParams,
    slot: Slot,
    vehicles: Vec<Vehicle>,
    aoi: ReceiverAoiMatrix,
}

impl Simulation {
    pub fn new(cfg: &ValidatedConfig) -> Self {
        let sps_params = SpsParams::from(cfg);
        let vehicles = (0..cfg.num_vehicles)
            .map(|id| {
                let mut mobility_rng = substream(cfg.rng_seed, id, Subsystem::Mobility);
                let mut traffic_rng = substream(cfg.rng_seed, id, Subsystem::Traffic);
                let mut sps_rng = substream(cfg.rng_seed, id, Subsystem::Sps);
                Vehicle {
                    pose: mobility::initial_pose(id, cfg, &mut mobility_rng),
                    queues: PriorityQueueSet::new(cfg),
                    sps: SpsState::new(0, &sps_params, &mut sps_rng),
                    traffic: TrafficSource::new(cfg, &mut traffic_rng),
                    traffic_rng,
                    sps_rng,
                    fading_rng: substream(cfg.rng_seed, id, Subsystem::Fading),
                }
            })
            .collect();
        Simulation { cfg: cfg.clone(), sps_params, slot: 0, vehicles, aoi: ReceiverAoiMatrix::new(cfg.num_vehicles) }
    }

    pub fn config(&self) -> &ValidatedConfig {
        &self.cfg
    }

    /// The next slot to be simulated.
    pub fn slot(&self) -> Slot {
        self.slot
    }

    pub fn vehicles(&self) -> &[Vehicle] {
        &self.vehicles
    }

    pub fn aoi(&self) -> &ReceiverAoiMatrix {
        &self.aoi
    }

    /// Replaces a vehicle's grant, e.g. to pin resources in a test.
    pub fn set_grant(&mut self, vehicle: VehicleId, grant: SpsState) {
        self.vehicles[vehicle].sps = grant;
    }

    /// Moves a vehicle, e.g. to build a fixed geometry.
    pub fn set_pose(&mut self, vehicle: VehicleId, pose: VehiclePose) {
        self.vehicles[vehicle].pose = pose;
    }

    /// Advances one slot.
    pub fn step(&mut self) -> (SlotReport, SlotEvents) {
        let slot = self.slot;
        let cfg = &self.cfg;
        let n = self.vehicles.len();
        let mut events = SlotEvents { slot, ..Default::default() };
        let mut report = SlotReport { slot, ..Default::default() };

        // 1. mobility
        for v in &mut self.vehicles {
            v.pose = mobility::step_position(v.pose, cfg.speed, cfg.slot_duration, cfg.road_length);
        }

        // 2. arrivals
        for (id, v) in self.vehicles.iter_mut().enumerate() {
            let mut incoming = v.queues.release_due(slot);
            incoming.extend(v.traffic.generate_arrivals(&mut v.traffic_rng, slot, cfg));
            for pkt in incoming {
                match v.queues.enqueue(pkt) {
                    EnqueueOutcome::Queued => events.enqueued.push((id, pkt)),
                    EnqueueOutcome::Dropped => {
                        report.drops += 1;
                        events.dropped.push((id, pkt));
                    }
                }
            }
        }

        // 3. SPS opportunities
        let mut transmitting = vec![None::<Resource>; n];
        for (id, v) in self.vehicles.iter_mut().enumerate() {
            let nonempty = !v.queues.is_empty();
            let opp = v.sps.on_transmit_opportunity(slot, nonempty, &self.sps_params, &mut v.sps_rng);
            if opp.transmit {
                transmitting[id] = Some(opp.resource);
                if opp.reselection == Some(Reselection::NewResource) {
                    report.new_selections += 1;
                }
            }
        }

        // 4. service and aging
        let mut head_ages = vec![None::<u64>; n];
        for (id, v) in self.vehicles.iter_mut().enumerate() {
            let action = match transmitting[id] {
                Some(_) => v.queues.select_action(),
                None => TransmitAction::IDLE,
            };
            if let Some(packet) = v.queues.age_and_dequeue(action, slot) {
                head_ages[id] = Some(packet.age);
                let resource = transmitting[id].expect("departure without a grant");
                events.transmissions.push(Transmission { tx: id, resource, packet });
            }
        }
        report.tx = events.transmissions.len() as u32;

        // 5-6. PHY resolution per subchannel
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); cfg.num_subchannels];
        for (k, t) in events.transmissions.iter().enumerate() {
            groups[t.resource.subchannel].push(k);
        }
        report.collisions = groups.iter().filter(|g| g.len() >= 2).count() as u32;
        let mut collided = vec![false; events.transmissions.len()];

        if !events.transmissions.is_empty() {
            let mut signals: Vec<ReceivedSignal> = Vec::new();
            let mut in_range: Vec<bool> = Vec::new();
            for rx in 0..n {
                if head_ages[rx].is_some() {
                    continue;
                }
                let rx_pose = self.vehicles[rx].pose;
                for group in groups.iter().filter(|g| !g.is_empty()) {
                    signals.clear();
                    in_range.clear();
                    for &k in group {
                        let t = &events.transmissions[k];
                        let d = mobility::distance(&self.vehicles[t.tx].pose, &rx_pose, cfg.road_length, cfg.distance_mode);
                        let gain = phy::channel_gain(d, cfg.path_loss_exponent, &mut self.vehicles[rx].fading_rng, cfg.fading);
                        signals.push(ReceivedSignal {
                            tx_id: t.tx,
                            rx_power: cfg.tx_power * gain,
                            resource: t.resource,
                            head_age: t.packet.age,
                        });
                        in_range.push(cfg.max_range.map_or(true, |r| d <= r));
                    }
                    if in_range.iter().filter(|&&e| e).count() >= 2 {
                        for (&k, &e) in group.iter().zip(&in_range) {
                            collided[k] |= e;
                        }
                    }
                    let sinrs = match cfg.access_mode {
                        AccessMode::Oma => phy::sinr_oma_group(&signals, cfg.noise_power),
                        AccessMode::Noma if cfg.sic_gated => {
                            phy::sinr_noma_sic_gated(&signals, cfg.noise_power, cfg.sinr_threshold)
                        }
                        AccessMode::Noma => phy::sinr_noma_sic(&signals, cfg.noise_power),
                    };
                    for (s, eligible) in signals.iter().zip(&in_range) {
                        if !eligible {
                            continue;
                        }
                        events.attempts.push((s.tx_id, rx));
                        let sinr = sinrs.iter().find(|e| e.0 == s.tx_id).map(|e| e.1).unwrap_or(0.0);
                        if phy::decodes(sinr, cfg.sinr_threshold) {
                            events.successes.push((s.tx_id, rx));
                        }
                    }
                }
            }
        }
        report.collided_tx = collided.iter().filter(|&&c| c).count() as u32;
        report.rx_attempts = events.attempts.len() as u32;
        report.rx_success = events.successes.len() as u32;

        // 7. receiver AoI
        self.aoi.update(&events.successes, &head_ages);

        // 8. metrics at the slot boundary
        report.phi_bar = aoi::mean_queue_aoi(self.vehicles.iter().map(|v| &v.queues), cfg.queue_aoi_mode);
        report.delta_t = self.aoi.running_mean();
        let mut totals = [(0u64, 0usize); 4];
        for v in &self.vehicles {
            for (acc, (s, c)) in totals.iter_mut().zip(v.queues.age_totals()) {
                acc.0 += s;
                acc.1 += c;
            }
        }
        for (k, (s, c)) in totals.into_iter().enumerate() {
            report.queued_by_type[k] = c as u32;
            report.phi_by_type[k] = if c == 0 { 0.0 } else { s as f64 / c as f64 };
        }

        self.slot += 1;
        (report, events)
    }

    /// 64-bit FNV-1a digest of the complete mutable state.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        h.u64(self.slot);
        for v in &self.vehicles {
            h.u64(v.pose.x.to_bits());
            h.u64(v.pose.lane as u64);
            h.u64(v.sps.rc as u64);
            h.u64(v.sps.next_tx_slot);
            if let Some(r) = v.sps.reserved {
                h.u64(r.subframe_offset as u64);
                h.u64(r.subchannel as u64);
            }
            for p in v.queues.iter() {
                h.u64(p.msg_type.index() as u64);
                h.u64(p.birth_slot);
                h.u64(p.age);
                h.u64(p.retrans_remaining as u64);
            }
            for &(at, p) in v.queues.pending() {
                h.u64(at);
                h.u64(p.birth_slot);
            }
        }
        for i in 0..self.aoi.num_vehicles() {
            for j in (0..self.aoi.num_vehicles()).filter(|&j| j != i) {
                h.u64(self.aoi.get(i, j));
            }
        }
        h.finish()
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn u64(&mut self, x: u64) {
        for b in x.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// Full output of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationReport {
    pub config: ValidatedConfig,
    pub slots: Vec<SlotReport>,
    /// Digest of the final state (see [`Simulation::digest`]).
    pub final_digest: u64,
}

/// Scalar summary of a run over the slots after `discard_slots`.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub slots: u64,
    /// `None` when no reception was attempted.
    pub success_rate: Option<f64>,
    /// Time average of `φ̄`.
    pub mean_phi_bar: f64,
    /// Time average of `Δ`.
    pub mean_delta_t: f64,
    pub tx: u64,
    pub rx_success: u64,
    pub rx_attempts: u64,
    pub drops: u64,
    pub collisions: u64,
    pub collided_tx: u64,
    /// Fraction of transmissions that did not share their subchannel.
    pub non_collision_rate: Option<f64>,
    /// Empirical new-selection probability `π`.
    pub pi_estimate: Option<f64>,
    /// Closed-form non-collision probability at `pi_estimate`.
    pub analytic_p_ncol: Option<f64>,
    /// Mean age of a queued packet of each type (packet-slot weighted).
    pub mean_age_by_type: [Option<f64>; 4],
}

impl SimulationReport {
    fn kept(&self) -> &[SlotReport] {
        let skip = (self.config.discard_slots as usize).min(self.slots.len());
        &self.slots[skip..]
    }

    pub fn selection_telemetry(&self) -> SelectionTelemetry {
        let kept = self.kept();
        SelectionTelemetry {
            vehicle_slots: kept.len() as u64 * self.config.num_vehicles as u64,
            selection_events: kept.iter().map(|r| r.new_selections as u64).sum(),
        }
    }

    pub fn summary(&self) -> Summary {
        let kept = self.kept();
        let len = kept.len() as u64;
        let sum = |f: fn(&SlotReport) -> u64| kept.iter().map(f).sum::<u64>();
        let mean = |f: fn(&SlotReport) -> f64| {
            if kept.is_empty() {
                0.0
            } else {
                kept.iter().map(f).sum::<f64>() / kept.len() as f64
            }
        };
        let tx = sum(|r| r.tx as u64);
        let collided_tx = sum(|r| r.collided_tx as u64);
        let pi_estimate = analytic::estimate_pi(&self.selection_telemetry()).ok();
        let analytic_p_ncol = pi_estimate
            .and_then(|pi| analytic::p_no_collision(&AnalyticParams::from_config(&self.config, pi)).ok());
        let mut mean_age_by_type = [None; 4];
        for t in MessageType::ALL {
            let k = t.index();
            let count: u64 = kept.iter().map(|r| r.queued_by_type[k] as u64).sum();
            if count > 0 {
                let total: f64 = kept.iter().map(|r| r.phi_by_type[k] * r.queued_by_type[k] as f64).sum();
                mean_age_by_type[k] = Some(total / count as f64);
            }
        }
        Summary {
            slots: len,
            success_rate: aoi::success_rate(kept),
            mean_phi_bar: mean(|r| r.phi_bar),
            mean_delta_t: mean(|r| r.delta_t),
            tx,
            rx_success: sum(|r| r.rx_success as u64),
            rx_attempts: sum(|r| r.rx_attempts as u64),
            drops: sum(|r| r.drops as u64),
            collisions: sum(|r| r.collisions as u64),
            collided_tx,
            non_collision_rate: (tx > 0).then(|| 1.0 - collided_tx as f64 / tx as f64),
            pi_estimate,
            analytic_p_ncol,
            mean_age_by_type,
        }
    }
}

/// Runs `sim_duration` slots from a fresh state.
pub fn run(cfg: &ValidatedConfig) -> Result<SimulationReport, EngineError> {
    let mut sim = Simulation::new(cfg);
    let mut slots = Vec::with_capacity(cfg.sim_duration as usize);
    for _ in 0..cfg.sim_duration {
        let (report, _) = sim.step();
        if report.rx_success > report.rx_attempts {
            return Err(EngineError { slot: report.slot, message: "more successes than attempts" });
        }
        slots.push(report);
    }
    Ok(SimulationReport { config: cfg.clone(), slots, final_digest: sim.digest() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;

    fn small(nv: usize, slots: u64) -> ValidatedConfig {
        ScenarioConfig { num_vehicles: nv, sim_duration: slots, ..Default::default() }.validate().unwrap()
    }

    #[test]
    fn zero_duration_is_empty() {
        let cfg = small(4, 0);
        let r = run(&cfg).unwrap();
        assert!(r.slots.is_empty());
        let sim = Simulation::new(&cfg);
        assert_eq!(aoi::mean_receiver_aoi(sim.aoi()), Some(0.0));
        assert_eq!(r.summary().success_rate, None);
    }

    #[test]
    fn repeated_runs_are_identical() {
        let cfg = small(10, 3000);
        assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
    }

    #[test]
    fn different_seeds_differ() {
        let a = small(10, 3000);
        let b = ScenarioConfig { rng_seed: 2, ..a.config().clone() }.validate().unwrap();
        assert_ne!(run(&a).unwrap().final_digest, run(&b).unwrap().final_digest);
    }

    #[test]
    fn attempts_follow_half_duplex_counting() {
        let cfg = small(12, 5000);
        let mut sim = Simulation::new(&cfg);
        for _ in 0..cfg.sim_duration {
            let (r, ev) = sim.step();
            let txs = ev.transmissions.len() as u32;
            assert_eq!(r.rx_attempts, txs * (12 - txs));
            for &(tx, rx) in &ev.successes {
                assert!(ev.transmissions.iter().any(|t| t.tx == tx));
                assert!(ev.transmissions.iter().all(|t| t.tx != rx));
            }
            assert!(r.rx_success <= r.rx_attempts);
        }
    }

    #[test]
    fn transmissions_respect_the_grant() {
        let cfg = small(8, 4000);
        let mut sim = Simulation::new(&cfg);
        for _ in 0..cfg.sim_duration {
            let grants: Vec<SpsState> = sim.vehicles().iter().map(|v| v.sps).collect();
            let slot = sim.slot();
            let (_, ev) = sim.step();
            for t in &ev.transmissions {
                assert_eq!(grants[t.tx].next_tx_slot, slot);
                assert_eq!(grants[t.tx].reserved, Some(t.resource));
            }
            let mut ids: Vec<_> = ev.transmissions.iter().map(|t| t.tx).collect();
            ids.dedup();
            assert_eq!(ids.len(), ev.transmissions.len());
        }
    }

    #[test]
    fn delta_running_mean_matches_scan() {
        let cfg = small(6, 2000);
        let mut sim = Simulation::new(&cfg);
        for _ in 0..cfg.sim_duration {
            let (r, _) = sim.step();
            assert_eq!(Some(r.delta_t), aoi::mean_receiver_aoi(sim.aoi()));
        }
    }

    #[test]
    fn summary_discards_prefix() {
        let cfg = ScenarioConfig { num_vehicles: 5, sim_duration: 1000, discard_slots: 400, ..Default::default() }
            .validate()
            .unwrap();
        let r = run(&cfg).unwrap();
        assert_eq!(r.summary().slots, 600);
        let expected = r.slots[400..].iter().map(|s| s.delta_t).sum::<f64>() / 600.0;
        assert_eq!(r.summary().mean_delta_t, expected);
    }
}
