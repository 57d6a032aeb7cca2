//! Per-vehicle transmit queues: arrivals, strict-priority service and
//! in-queue aging.
//!
//! Each vehicle keeps one bounded FIFO per [`MessageType`]. At a transmit
//! opportunity the head of the highest-priority non-empty queue departs;
//! every other queued packet grows one slot older. HPD and DENM packets
//! are re-broadcast a fixed number of times: each departure of such a
//! packet schedules a copy that re-enters the queue one retransmission
//! period later, keeping the original birth slot.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::Rng;

use crate::config::{CamMode, QueueDiscipline, ValidatedConfig};
use crate::message::MessageType;
use crate::Slot;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Packet {
    pub msg_type: MessageType,
    pub birth_slot: Slot,
    /// In-queue age `φ`, advanced one slot at a time.
    pub age: u64,
    /// Further copies still to be sent after this one.
    pub retrans_remaining: u32,
}

impl Packet {
    pub fn new(msg_type: MessageType, slot: Slot, retrans_remaining: u32) -> Self {
        Packet { msg_type, birth_slot: slot, age: 0, retrans_remaining }
    }
}

/// Probability of exactly one Poisson(λ) arrival in a slot, `λ e^{-λ}`.
pub fn arrival_probability(lambda: f64) -> f64 {
    lambda * libm::exp(-lambda)
}

/// Traffic-generation parameters of one vehicle.
#[derive(Clone, Copy, Debug)]
pub struct TrafficSource {
    /// Slot offset of the periodic CAM, in `0..cam_period`.
    pub cam_phase: u32,
    p_hpd: f64,
    p_denm: f64,
    p_mhd: f64,
}

impl TrafficSource {
    pub fn new<R: Rng>(cfg: &ValidatedConfig, rng: &mut R) -> Self {
        TrafficSource {
            cam_phase: rng.gen_range(0..cfg.cam_period),
            p_hpd: arrival_probability(cfg.lambda_hpd),
            p_denm: arrival_probability(cfg.lambda_denm),
            p_mhd: arrival_probability(cfg.lambda_mhd),
        }
    }

    /// New packets born in `slot`, highest priority first.
    ///
    /// The number of random draws per slot is fixed, so the stream stays
    /// aligned whatever the outcomes.
    pub fn generate_arrivals<R: Rng>(&self, rng: &mut R, slot: Slot, cfg: &ValidatedConfig) -> Vec<Packet> {
        let hpd = rng.gen::<f64>() < self.p_hpd;
        let denm = rng.gen::<f64>() < self.p_denm;
        let mhd = rng.gen::<f64>() < self.p_mhd;
        let cam = match cfg.cam_mode {
            CamMode::Periodic => {
                slot >= self.cam_phase as Slot && (slot - self.cam_phase as Slot) % cfg.cam_period as Slot == 0
            }
            CamMode::Bernoulli => rng.gen::<f64>() < cfg.cam_probability,
        };

        let mut out = Vec::new();
        if hpd {
            out.push(Packet::new(MessageType::Hpd, slot, cfg.retrans_count_hpd - 1));
        }
        if denm {
            out.push(Packet::new(MessageType::Denm, slot, cfg.retrans_count_denm - 1));
        }
        if cam {
            out.push(Packet::new(MessageType::Cam, slot, 0));
        }
        if mhd {
            out.push(Packet::new(MessageType::Mhd, slot, 0));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnqueueOutcome {
    Queued,
    Dropped,
}

/// Which queue, if any, is served this slot (`s_n`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TransmitAction(Option<MessageType>);

impl TransmitAction {
    pub const IDLE: TransmitAction = TransmitAction(None);

    pub fn serve(msg_type: MessageType) -> Self {
        TransmitAction(Some(msg_type))
    }

    pub fn served(self) -> Option<MessageType> {
        self.0
    }

    /// The indicator `s_n` for one type.
    pub fn s(self, msg_type: MessageType) -> u8 {
        u8::from(self.0 == Some(msg_type))
    }
}

/// The four FIFO queues of one vehicle plus its retransmission schedule.
#[derive(Clone, Debug)]
pub struct PriorityQueueSet {
    discipline: QueueDiscipline,
    capacity: usize,
    /// Indexed by `MessageType::index()`; only slot 0 is used for a single FIFO.
    queues: [VecDeque<Packet>; 4],
    retrans_period: [u64; 4],
    pending: Vec<(Slot, Packet)>,
}

impl PriorityQueueSet {
    pub fn new(cfg: &ValidatedConfig) -> Self {
        Self::with_parameters(
            cfg.queue_discipline,
            cfg.queue_capacity,
            cfg.retrans_period_hpd as u64,
            cfg.retrans_period_denm as u64,
        )
    }

    /// `capacity` is per queue; a single FIFO holds four times as much.
    pub fn with_parameters(discipline: QueueDiscipline, capacity: usize, period_hpd: u64, period_denm: u64) -> Self {
        let capacity = match discipline {
            QueueDiscipline::Priority => capacity,
            QueueDiscipline::SingleFifo => capacity * 4,
        };
        PriorityQueueSet {
            discipline,
            capacity,
            queues: Default::default(),
            retrans_period: [period_hpd, period_denm, 0, 0],
            pending: Vec::new(),
        }
    }

    fn lane(&self, msg_type: MessageType) -> usize {
        match self.discipline {
            QueueDiscipline::Priority => msg_type.index(),
            QueueDiscipline::SingleFifo => 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Queue length `q_n`. Under a single FIFO this counts packets of type `n`.
    pub fn len(&self, msg_type: MessageType) -> usize {
        match self.discipline {
            QueueDiscipline::Priority => self.queues[msg_type.index()].len(),
            QueueDiscipline::SingleFifo => self.queues[0].iter().filter(|p| p.msg_type == msg_type).count(),
        }
    }

    pub fn total_len(&self) -> usize {
        self.queues.iter().map(VecDeque::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.queues.iter().all(VecDeque::is_empty)
    }

    /// Packets of one type, head first.
    pub fn packets(&self, msg_type: MessageType) -> impl Iterator<Item = &Packet> + '_ {
        self.queues[self.lane(msg_type)].iter().filter(move |p| p.msg_type == msg_type)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Packet> + '_ {
        self.queues.iter().flatten()
    }

    /// Retransmission copies not yet re-queued, as `(due_slot, packet)`.
    pub fn pending(&self) -> &[(Slot, Packet)] {
        &self.pending
    }

    /// Appends `pkt` to its queue, or drops it when the queue is full.
    pub fn enqueue(&mut self, pkt: Packet) -> EnqueueOutcome {
        let lane = self.lane(pkt.msg_type);
        let q = &mut self.queues[lane];
        if q.len() >= self.capacity {
            return EnqueueOutcome::Dropped;
        }
        q.push_back(pkt);
        EnqueueOutcome::Queued
    }

    /// Strict priority: serve the highest-priority non-empty queue. A single
    /// FIFO serves whatever packet is at its head.
    pub fn select_action(&self) -> TransmitAction {
        match self.discipline {
            QueueDiscipline::Priority => MessageType::ALL
                .into_iter()
                .find(|t| !self.queues[t.index()].is_empty())
                .map_or(TransmitAction::IDLE, TransmitAction::serve),
            QueueDiscipline::SingleFifo => {
                self.queues[0].front().map_or(TransmitAction::IDLE, |p| TransmitAction::serve(p.msg_type))
            }
        }
    }

    /// One slot of service and aging.
    ///
    /// If the action serves queue `n`, its head departs and is returned with
    /// the age it had at `slot`. Every packet still queued ages one slot.
    /// A departing packet with copies left schedules the next copy for
    /// `slot + T_n`.
    ///
    /// # Panics
    ///
    /// If the action serves an empty queue; the engine never does that.
    pub fn age_and_dequeue(&mut self, action: TransmitAction, slot: Slot) -> Option<Packet> {
        let departed = action.served().map(|t| {
            let lane = self.lane(t);
            let head = self.queues[lane].pop_front().expect("transmit action served an empty queue");
            debug_assert_eq!(head.msg_type, t);
            head
        });
        for p in self.queues.iter_mut().flatten() {
            p.age += 1;
        }
        if let Some(p) = departed {
            if p.retrans_remaining > 0 {
                let copy = Packet { retrans_remaining: p.retrans_remaining - 1, ..p };
                self.pending.push((slot + self.retrans_period[p.msg_type.index()], copy));
            }
        }
        departed
    }

    /// Removes and returns the retransmission copies due at `slot`, with
    /// their age brought up to date.
    pub fn release_due(&mut self, slot: Slot) -> Vec<Packet> {
        let mut due = Vec::new();
        self.pending.retain(|&(at, p)| {
            if at == slot {
                due.push(Packet { age: slot - p.birth_slot, ..p });
                false
            } else {
                true
            }
        });
        due.sort_by_key(|p| p.msg_type);
        due
    }

    /// `(Σ φ, count)` for each message type.
    pub fn age_totals(&self) -> [(u64, usize); 4] {
        let mut out = [(0u64, 0usize); 4];
        for p in self.iter() {
            let e = &mut out[p.msg_type.index()];
            e.0 += p.age;
            e.1 += 1;
        }
        out
    }
}
