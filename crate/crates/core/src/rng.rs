//! Deterministic random substreams.
//!
//! Every random draw in a run comes from a ChaCha8 stream whose key is
//! derived from the run seed and whose stream id encodes
//! `(vehicle, subsystem)`. ChaCha is counter based, so a substream's draws
//! depend only on that triple and on how many values were taken from it,
//! never on how the engine interleaves vehicles or subsystems.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::VehicleId;

pub type SimRng = ChaCha8Rng;

/// Consumer of a substream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Subsystem {
    Mobility = 1,
    Traffic = 2,
    Sps = 3,
    /// Fading draws for links received by this vehicle.
    Fading = 4,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key_from_seed(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// Substream for `(seed, vehicle, subsystem)`.
pub fn substream(seed: u64, vehicle: VehicleId, subsystem: Subsystem) -> SimRng {
    let mut rng = ChaCha8Rng::from_seed(key_from_seed(seed));
    rng.set_stream(((vehicle as u64) << 8) | subsystem as u64);
    rng
}
