//! Semi-persistent scheduling: reselection counter, uniform resource
//! selection over the selection window, and the per-slot reservation
//! bookkeeping of one vehicle.

use core::fmt;

use rand::Rng;

use crate::config::ValidatedConfig;
use crate::Slot;

/// One single-subframe candidate resource.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Resource {
    /// Subframe within the selection window, `0..Γ`.
    pub subframe_offset: u32,
    pub subchannel: usize,
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.subframe_offset, self.subchannel)
    }
}

/// Scheduler constants, taken from a validated config.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpsParams {
    pub rri: u32,
    pub window: u32,
    pub num_subchannels: usize,
    pub p_rk: f64,
    pub decrement_on_silence: bool,
}

impl From<&ValidatedConfig> for SpsParams {
    fn from(cfg: &ValidatedConfig) -> Self {
        SpsParams {
            rri: cfg.rri,
            window: cfg.selection_window(),
            num_subchannels: cfg.num_subchannels,
            p_rk: cfg.p_rk,
            decrement_on_silence: cfg.decrement_on_silence,
        }
    }
}

/// Initial reselection counter: `500/RRI + U{0, .., 1000/RRI - 1}`.
///
/// For non-standard RRIs the range is clamped so the counter is at least 1.
pub fn init_rc<R: Rng>(rri: u32, rng: &mut R) -> u32 {
    let base = 500 / rri;
    let spread = (1000 / rri).max(1);
    (base + rng.gen_range(0..spread)).max(1)
}

/// Uniform draw over the `window × num_subchannels` candidate set.
pub fn select_resource<R: Rng>(window: u32, num_subchannels: usize, rng: &mut R) -> Resource {
    let candidates = window as usize * num_subchannels;
    assert!(candidates > 0, "empty candidate resource set");
    let k = rng.gen_range(0..candidates);
    Resource { subframe_offset: (k / num_subchannels) as u32, subchannel: k % num_subchannels }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reselection {
    /// RC hit zero and a new resource was drawn.
    NewResource,
    /// RC hit zero and the old resource was kept.
    Kept,
}

/// Outcome of one slot for one vehicle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Opportunity {
    /// The vehicle transmits in this slot on `resource`.
    pub transmit: bool,
    pub resource: Resource,
    pub reselection: Option<Reselection>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpsState {
    /// Remaining uses of the current grant.
    pub rc: u32,
    pub reserved: Option<Resource>,
    /// Absolute slot of the next reserved subframe.
    pub next_tx_slot: Slot,
    /// Slot the current grant's window starts at.
    pub epoch: Slot,
}

impl SpsState {
    /// Initial grant: the window opens at `slot`.
    pub fn new<R: Rng>(slot: Slot, params: &SpsParams, rng: &mut R) -> Self {
        let resource = select_resource(params.window, params.num_subchannels, rng);
        SpsState {
            rc: init_rc(params.rri, rng),
            reserved: Some(resource),
            next_tx_slot: slot + resource.subframe_offset as Slot,
            epoch: slot,
        }
    }

    /// A grant on a given resource; used to pin resources in tests.
    pub fn with_resource(slot: Slot, resource: Resource, rc: u32) -> Self {
        SpsState { rc, reserved: Some(resource), next_tx_slot: slot + resource.subframe_offset as Slot, epoch: slot }
    }

    /// Must be called exactly once per slot.
    ///
    /// The vehicle transmits iff `slot` is its reserved subframe and it has
    /// something queued. A use decrements RC; silent reserved subframes keep
    /// RC unless `decrement_on_silence` is set. When RC reaches zero a new
    /// resource is drawn with probability `p_rk` (its window opens on the
    /// next slot), otherwise the resource is kept; RC is re-initialised in
    /// both cases.
    pub fn on_transmit_opportunity<R: Rng>(
        &mut self,
        slot: Slot,
        queues_nonempty: bool,
        params: &SpsParams,
        rng: &mut R,
    ) -> Opportunity {
        let resource = self.reserved.expect("SPS state without a grant");
        let idle = Opportunity { transmit: false, resource, reselection: None };
        if slot != self.next_tx_slot {
            return idle;
        }
        debug_assert!(slot >= self.epoch);
        debug_assert_eq!((slot - self.epoch) % params.rri as Slot, resource.subframe_offset as Slot % params.rri as Slot);

        let transmit = queues_nonempty;
        self.next_tx_slot += params.rri as Slot;
        if !transmit && !params.decrement_on_silence {
            return idle;
        }
        self.rc = self.rc.saturating_sub(1);
        let mut reselection = None;
        if self.rc == 0 {
            self.rc = init_rc(params.rri, rng);
            if rng.gen_bool(params.p_rk) {
                let fresh = select_resource(params.window, params.num_subchannels, rng);
                self.reserved = Some(fresh);
                self.epoch = slot + 1;
                self.next_tx_slot = self.epoch + fresh.subframe_offset as Slot;
                reselection = Some(Reselection::NewResource);
            } else {
                reselection = Some(Reselection::Kept);
            }
        }
        Opportunity { transmit, resource, reselection }
    }
}
