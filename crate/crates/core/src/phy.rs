//! Link budget and decoding: SINR threshold, channel gain, and per-signal
//! SINR under orthogonal access (OMA) and power-domain SIC (NOMA).
//!
//! Decoding is a threshold model. A signal is received iff its SINR is at
//! least [`sinr_threshold`], the SINR at which the Shannon rate of one
//! subchannel carries a whole message within one slot.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use rand::Rng;

use crate::config::FadingMode;
use crate::sps::Resource;
use crate::VehicleId;

/// Largest accepted `Q / (B τ)`; beyond it the threshold exceeds 2^60.
pub const MAX_SPECTRAL_LOAD: f64 = 60.0;

/// Distances are clamped to this many meters before path loss.
pub const MIN_DISTANCE: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhyError {
    NonPositive { what: &'static str, value: f64 },
    /// `Q / (B τ)` is too large for a physical configuration.
    Overflow { load: f64 },
}

impl fmt::Display for PhyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhyError::NonPositive { what, value } => write!(f, "{what} must be > 0, got {value}"),
            PhyError::Overflow { load } => write!(
                f,
                "Q/(B*tau) = {load} exceeds {MAX_SPECTRAL_LOAD}; the SINR threshold is unphysical"
            ),
        }
    }
}

impl core::error::Error for PhyError {}

/// `2^(Q / (B τ)) - 1`.
///
/// The exponent is the number of bits per Hz needed to deliver `Q` bits in
/// one slot of length `τ` over bandwidth `B`.
pub fn sinr_threshold(message_bits: f64, bandwidth_hz: f64, slot_s: f64) -> Result<f64, PhyError> {
    for (what, value) in [("message size", message_bits), ("bandwidth", bandwidth_hz), ("slot duration", slot_s)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(PhyError::NonPositive { what, value });
        }
    }
    let load = message_bits / (bandwidth_hz * slot_s);
    if !(load <= MAX_SPECTRAL_LOAD) {
        return Err(PhyError::Overflow { load });
    }
    Ok(libm::expm1(load * core::f64::consts::LN_2))
}

/// Subchannel bandwidth, message size and the derived decode threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkBudget {
    pub bandwidth_hz: f64,
    pub message_bits: f64,
    pub sinr_threshold: f64,
}

impl LinkBudget {
    pub fn new(message_bits: f64, bandwidth_hz: f64, slot_s: f64) -> Result<Self, PhyError> {
        Ok(LinkBudget { bandwidth_hz, message_bits, sinr_threshold: sinr_threshold(message_bits, bandwidth_hz, slot_s)? })
    }
}

/// Power gain `|h|² = c · d^(-η)`, with `d` clamped to [`MIN_DISTANCE`].
///
/// `c` is 1 for [`FadingMode::Constant`] and a unit-mean exponential draw
/// for [`FadingMode::Rayleigh`]. Only the Rayleigh mode consumes randomness.
pub fn channel_gain<R: Rng>(distance: f64, path_loss_exponent: f64, rng: &mut R, mode: FadingMode) -> f64 {
    let d = distance.max(MIN_DISTANCE);
    let path = libm::pow(d, -path_loss_exponent);
    match mode {
        FadingMode::Constant => path,
        FadingMode::Rayleigh => {
            // 1 - u lies in (0, 1], so the log is finite
            let u: f64 = rng.gen();
            -libm::log1p(-u) * path
        }
    }
}

/// One transmission as seen by one receiver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReceivedSignal {
    pub tx_id: VehicleId,
    /// Received power in watts, `p · |h|²`.
    pub rx_power: f64,
    pub resource: Resource,
    /// In-queue age of the transmitted packet, slots.
    pub head_age: u64,
}

/// SINR of `target` with every interferer at full power.
pub fn sinr_oma(target: &ReceivedSignal, interferers: &[ReceivedSignal], noise_power: f64) -> f64 {
    debug_assert!(interferers.iter().all(|s| s.tx_id != target.tx_id));
    let interference: f64 = interferers.iter().map(|s| s.rx_power).sum();
    target.rx_power / (interference + noise_power)
}

/// OMA SINR for each signal of a co-channel group, in input order.
pub fn sinr_oma_group(signals: &[ReceivedSignal], noise_power: f64) -> Vec<(VehicleId, f64)> {
    signals
        .iter()
        .map(|s| {
            let others: f64 = signals.iter().filter(|o| o.tx_id != s.tx_id).map(|o| o.rx_power).sum();
            (s.tx_id, s.rx_power / (others + noise_power))
        })
        .collect()
}

/// SIC decoding order: descending power, ties by ascending transmitter id.
fn sic_order(a: &ReceivedSignal, b: &ReceivedSignal) -> Ordering {
    b.rx_power.total_cmp(&a.rx_power).then(a.tx_id.cmp(&b.tx_id))
}

/// SINR of each co-channel signal under idealised SIC, strongest first.
///
/// The k-th signal in decoding order sees only the signals after it as
/// interference; everything decoded earlier has been cancelled.
pub fn sinr_noma_sic(signals: &[ReceivedSignal], noise_power: f64) -> Vec<(VehicleId, f64)> {
    let mut sorted: Vec<ReceivedSignal> = signals.to_vec();
    sorted.sort_by(sic_order);
    // suffix sums, accumulated from the weakest signal upwards
    let mut weaker = Vec::with_capacity(sorted.len());
    let mut acc = 0.0;
    for s in sorted.iter().rev() {
        weaker.push(acc);
        acc += s.rx_power;
    }
    weaker.reverse();
    sorted.iter().zip(weaker).map(|(s, w)| (s.tx_id, s.rx_power / (w + noise_power))).collect()
}

/// SIC that can only cancel signals it actually decoded.
///
/// Walks the decoding order; a stronger signal that fails the threshold
/// stays in the interference of every weaker one.
pub fn sinr_noma_sic_gated(signals: &[ReceivedSignal], noise_power: f64, threshold: f64) -> Vec<(VehicleId, f64)> {
    let mut sorted: Vec<ReceivedSignal> = signals.to_vec();
    sorted.sort_by(sic_order);
    let mut residual_stronger = 0.0;
    let mut out = Vec::with_capacity(sorted.len());
    for (k, s) in sorted.iter().enumerate() {
        let weaker: f64 = sorted[k + 1..].iter().map(|w| w.rx_power).sum();
        let sinr = s.rx_power / (weaker + residual_stronger + noise_power);
        if sinr < threshold {
            residual_stronger += s.rx_power;
        }
        out.push((s.tx_id, sinr));
    }
    out
}

/// Success iff SINR ≥ threshold (boundary inclusive).
pub fn decodes(sinr: f64, threshold: f64) -> bool {
    sinr >= threshold
}

pub fn decode(sinrs: &[(VehicleId, f64)], threshold: f64) -> Vec<(VehicleId, bool)> {
    sinrs.iter().map(|&(id, s)| (id, decodes(s, threshold))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const R0: Resource = Resource { subframe_offset: 0, subchannel: 0 };

    fn sig(tx_id: VehicleId, rx_power: f64) -> ReceivedSignal {
        ReceivedSignal { tx_id, rx_power, resource: R0, head_age: 0 }
    }

    fn lookup(v: &[(VehicleId, f64)], id: VehicleId) -> f64 {
        v.iter().find(|e| e.0 == id).unwrap().1
    }

    #[test]
    fn threshold_for_field_settings() {
        // oracle: 2^(20/9) - 1 evaluated in 40-digit arithmetic
        let expected = 3.666_116_158_304_466_3;
        let th = sinr_threshold(4000.0, 1.8e6, 1e-3).unwrap();
        assert!((th - expected).abs() / expected < 1e-12, "{th}");
        let db = 10.0 * libm::log10(th);
        assert!((db - 5.642).abs() < 1e-3);
    }

    #[test]
    fn threshold_edge_cases() {
        assert!((sinr_threshold(1000.0, 1e6, 1e-3).unwrap() - 1.0).abs() < 1e-15);
        let tiny = sinr_threshold(1e-9, 1.8e6, 1e-3).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-12);
        assert!(matches!(sinr_threshold(1e9, 1.8e6, 1e-3), Err(PhyError::Overflow { .. })));
        assert!(matches!(sinr_threshold(0.0, 1.8e6, 1e-3), Err(PhyError::NonPositive { .. })));
        assert!(matches!(sinr_threshold(f64::NAN, 1.8e6, 1e-3), Err(PhyError::NonPositive { .. })));
    }

    #[test]
    fn constant_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(channel_gain(1.0, 2.0, &mut rng, FadingMode::Constant), 1.0);
        assert!((channel_gain(10.0, 2.0, &mut rng, FadingMode::Constant) - 0.01).abs() < 1e-15);
        // clamped below one meter
        assert_eq!(channel_gain(0.2, 2.0, &mut rng, FadingMode::Constant), 1.0);
    }

    #[test]
    fn rayleigh_gain_has_unit_mean_fade() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 1_000_000;
        let d = 50.0;
        let mean: f64 = (0..n).map(|_| channel_gain(d, 2.0, &mut rng, FadingMode::Rayleigh)).sum::<f64>() / n as f64;
        let target = 1.0 / 2500.0;
        assert!((mean - target).abs() / target < 0.01, "{mean}");
    }

    #[test]
    fn oma_examples() {
        let noise = 1.0;
        assert_eq!(sinr_oma(&sig(0, 1.0), &[], noise), 1.0);
        assert_eq!(sinr_oma(&sig(0, 4.0), &[sig(1, 1.0)], 1.0), 2.0);
        let alone = sinr_oma(&sig(0, 4.0), &[sig(1, 1.0)], 1.0);
        let crowded = sinr_oma(&sig(0, 4.0), &[sig(1, 1.0), sig(2, 1e-9)], 1.0);
        assert!(crowded < alone);
    }

    #[test]
    fn noma_examples() {
        let v = sinr_noma_sic(&[sig(0, 8.0), sig(1, 4.0), sig(2, 2.0)], 1.0);
        assert_eq!(v, [(0, 8.0 / 7.0), (1, 4.0 / 3.0), (2, 2.0)]);
        let single = sinr_noma_sic(&[sig(5, 3.0)], 2.0);
        assert_eq!(single, [(5, sinr_oma(&sig(5, 3.0), &[], 2.0))]);
        let tie = sinr_noma_sic(&[sig(9, 4.0), sig(3, 4.0)], 1.0);
        assert_eq!(tie, [(3, 4.0 / 5.0), (9, 4.0)]);
    }

    #[test]
    fn oma_and_noma_decode_sets() {
        let group = [sig(0, 8.0), sig(1, 4.0), sig(2, 2.0)];
        let th = 1.5;
        let oma = sinr_oma_group(&group, 1.0);
        assert_eq!(oma, [(0, 8.0 / 7.0), (1, 4.0 / 11.0), (2, 2.0 / 13.0)]);
        assert!(decode(&oma, th).iter().all(|&(_, ok)| !ok));
        let noma = decode(&sinr_noma_sic(&group, 1.0), th);
        assert_eq!(noma, [(0, false), (1, false), (2, true)]);
    }

    #[test]
    fn threshold_boundary_is_inclusive() {
        assert!(decodes(3.5, 3.5));
        assert!(!decodes(0.99 * 3.5, 3.5));
    }

    #[test]
    fn gated_sic_keeps_failed_stronger_signals() {
        let group = [sig(0, 8.0), sig(1, 4.0), sig(2, 2.0)];
        let v = sinr_noma_sic_gated(&group, 1.0, 1.5);
        // nothing decodes before the weakest, so it sees everything
        assert_eq!(v, [(0, 8.0 / 7.0), (1, 4.0 / 11.0), (2, 2.0 / 13.0)]);
        let v = sinr_noma_sic_gated(&group, 1.0, 1.0);
        assert_eq!(v, [(0, 8.0 / 7.0), (1, 4.0 / 3.0), (2, 2.0)]);
    }

    fn group() -> impl Strategy<Value = Vec<ReceivedSignal>> {
        proptest::collection::vec(1e-12..1e-3f64, 1..8)
            .prop_map(|ps| ps.into_iter().enumerate().map(|(i, p)| sig(i, p)).collect())
    }

    proptest! {
        #[test]
        fn sic_never_worse_than_oma(g in group(), noise in 1e-14..1e-9f64) {
            let oma = sinr_oma_group(&g, noise);
            let noma = sinr_noma_sic(&g, noise);
            for s in &g {
                let (o, n) = (lookup(&oma, s.tx_id), lookup(&noma, s.tx_id));
                prop_assert!(n >= o * (1.0 - 1e-12));
                // cancellation only helps signals decoded after a stronger one
                let preceded = g.iter().any(|w| w.rx_power > s.rx_power || (w.rx_power == s.rx_power && w.tx_id < s.tx_id));
                if preceded {
                    prop_assert!(n > o);
                } else {
                    prop_assert!((n - o).abs() <= 1e-12 * o, "{n} vs {o}");
                }
            }
        }

        #[test]
        fn sic_ignores_input_order(g in group(), noise in 1e-14..1e-9f64) {
            let mut rev = g.clone();
            rev.reverse();
            prop_assert_eq!(sinr_noma_sic(&g, noise), sinr_noma_sic(&rev, noise));
        }

        #[test]
        fn sinr_is_scale_invariant(g in group(), noise in 1e-14..1e-9f64, k in 1e-3..1e3f64) {
            let scaled: Vec<ReceivedSignal> = g.iter().map(|s| sig(s.tx_id, s.rx_power * k)).collect();
            for (a, b) in sinr_noma_sic(&g, noise).iter().zip(sinr_noma_sic(&scaled, noise * k)) {
                prop_assert!((a.1 - b.1).abs() <= 1e-9 * a.1);
            }
            for (a, b) in sinr_oma_group(&g, noise).iter().zip(sinr_oma_group(&scaled, noise * k)) {
                prop_assert!((a.1 - b.1).abs() <= 1e-9 * a.1);
            }
        }
    }
}
