//! Receiver-side AoI bookkeeping and the aggregate metrics.

use alloc::vec;
use alloc::vec::Vec;

use crate::config::QueueAoiMode;
use crate::queues::PriorityQueueSet;
use crate::{Slot, VehicleId};

/// `Φ(i→j)` for every ordered pair of distinct vehicles.
///
/// Entries are stored relative to a shared clock, so advancing every entry
/// by one slot is O(1); the matrix also keeps the integer sum of all
/// entries so the pair mean is available without a scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReceiverAoiMatrix {
    n: usize,
    clock: i64,
    /// `Φ(i→j) - clock`, row `i` (transmitter), column `j` (receiver).
    offsets: Vec<i64>,
    offset_sum: i64,
}

impl ReceiverAoiMatrix {
    /// All entries start at zero.
    pub fn new(num_vehicles: usize) -> Self {
        ReceiverAoiMatrix { n: num_vehicles, clock: 0, offsets: vec![0; num_vehicles * num_vehicles], offset_sum: 0 }
    }

    pub fn num_vehicles(&self) -> usize {
        self.n
    }

    /// `Φ(tx→rx)` in slots.
    pub fn get(&self, tx: VehicleId, rx: VehicleId) -> u64 {
        debug_assert_ne!(tx, rx, "diagonal entries are unused");
        (self.offsets[tx * self.n + rx] + self.clock) as u64
    }

    /// Overwrites one entry; meant for tests and hand-built scenarios.
    pub fn set(&mut self, tx: VehicleId, rx: VehicleId, age: u64) {
        assert_ne!(tx, rx, "diagonal entries are unused");
        let slot = &mut self.offsets[tx * self.n + rx];
        self.offset_sum -= *slot;
        *slot = age as i64 - self.clock;
        self.offset_sum += *slot;
    }

    /// One slot of the receiver-age recursion.
    ///
    /// For every `(i, j)` in `successes`, `Φ'(i→j) = head_ages[i] + 1`;
    /// every other entry grows by one. `head_ages[i]` is `Some(φ)` exactly
    /// for the vehicles that transmitted this slot.
    ///
    /// # Panics
    ///
    /// If a success names a receiver that transmitted in the same slot
    /// (half-duplex), or a transmitter without a head age.
    pub fn update(&mut self, successes: &[(VehicleId, VehicleId)], head_ages: &[Option<u64>]) {
        self.clock += 1;
        for &(tx, rx) in successes {
            assert!(head_ages[rx].is_none(), "half-duplex violation: vehicle {rx} received while transmitting");
            let age = head_ages[tx].expect("success from a vehicle that did not transmit");
            let slot = &mut self.offsets[tx * self.n + rx];
            self.offset_sum -= *slot;
            *slot = (age + 1) as i64 - self.clock;
            self.offset_sum += *slot;
        }
    }

    /// Sum of all off-diagonal entries, from the maintained running sum.
    pub fn total(&self) -> u64 {
        // diagonal offsets are never written and stay 0
        let pairs = (self.n * (self.n - 1)) as i64;
        (self.offset_sum + pairs * self.clock) as u64
    }

    /// Pair mean from the running sum.
    pub fn running_mean(&self) -> f64 {
        self.total() as f64 / (self.n * (self.n - 1)) as f64
    }
}

/// `Δ`: mean of `Φ` over all ordered pairs, by a full scan.
///
/// Returns `None` for fewer than two vehicles.
pub fn mean_receiver_aoi(phi: &ReceiverAoiMatrix) -> Option<f64> {
    let n = phi.num_vehicles();
    if n < 2 {
        return None;
    }
    let mut sum: u64 = 0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            sum += phi.get(i, j);
        }
    }
    Some(sum as f64 / (n * (n - 1)) as f64)
}

/// `φ̄`: mean in-queue age over all vehicles' queues; 0 when nothing is queued.
pub fn mean_queue_aoi<'a, I>(queues: I, mode: QueueAoiMode) -> f64
where
    I: IntoIterator<Item = &'a PriorityQueueSet>,
{
    match mode {
        QueueAoiMode::Flat => {
            let (mut sum, mut count) = (0u64, 0usize);
            for q in queues {
                for (s, c) in q.age_totals() {
                    sum += s;
                    count += c;
                }
            }
            if count == 0 {
                0.0
            } else {
                sum as f64 / count as f64
            }
        }
        QueueAoiMode::Weighted => {
            let (mut sum, mut vehicles) = (0.0, 0usize);
            for q in queues {
                let per_type: Vec<f64> =
                    q.age_totals().iter().filter(|(_, c)| *c > 0).map(|&(s, c)| s as f64 / c as f64).collect();
                if !per_type.is_empty() {
                    sum += per_type.iter().sum::<f64>() / per_type.len() as f64;
                    vehicles += 1;
                }
            }
            if vehicles == 0 {
                0.0
            } else {
                sum / vehicles as f64
            }
        }
    }
}

/// Metrics of one slot, taken after the slot's updates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SlotReport {
    pub slot: Slot,
    /// Mean in-queue age `φ̄`.
    pub phi_bar: f64,
    /// Mean receiver age `Δ`.
    pub delta_t: f64,
    /// Transmissions in this slot.
    pub tx: u32,
    pub rx_success: u32,
    /// (transmitter, eligible receiver) pairs.
    pub rx_attempts: u32,
    pub drops: u32,
    /// Subchannels carrying two or more transmissions.
    pub collisions: u32,
    /// Transmissions that shared their subchannel with another one heard by
    /// a common receiver.
    pub collided_tx: u32,
    /// Vehicles that drew a new resource at RC = 0 with a non-empty queue.
    pub new_selections: u32,
    /// Mean in-queue age per message type (0 when that type is absent).
    pub phi_by_type: [f64; 4],
    /// Number of queued packets per message type.
    pub queued_by_type: [u32; 4],
}

/// Σ successes / Σ attempts, or `None` when nothing was attempted.
pub fn success_rate<'a, I>(reports: I) -> Option<f64>
where
    I: IntoIterator<Item = &'a SlotReport>,
{
    let (ok, tried) = reports
        .into_iter()
        .fold((0u64, 0u64), |(ok, tried), r| (ok + r.rx_success as u64, tried + r.rx_attempts as u64));
    (tried > 0).then(|| ok as f64 / tried as f64)
}
