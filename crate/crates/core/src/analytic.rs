//! Closed-form non-collision probability of Mode 4 SPS, used to cross-check
//! the simulator's collision statistics.

use core::fmt;

use crate::config::ValidatedConfig;

/// Inputs to [`p_no_collision`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticParams {
    /// Probability `π` that a vehicle is at a new-resource selection instant.
    pub pi: f64,
    /// Probability of drawing a new resource when RC reaches zero.
    pub p_rk: f64,
    /// Candidate resources in the selection window.
    pub csr: u64,
    pub num_vehicles: u64,
    /// Selection window `Γ`, slots.
    pub window: u64,
}

impl AnalyticParams {
    /// Takes `P_rk`, `CSR`, `Nv` and `Γ` from a scenario; `π` is supplied.
    pub fn from_config(cfg: &ValidatedConfig, pi: f64) -> Self {
        AnalyticParams {
            pi,
            p_rk: cfg.p_rk,
            csr: cfg.candidate_resources() as u64,
            num_vehicles: cfg.num_vehicles as u64,
            window: cfg.selection_window() as u64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnalyticError {
    /// `CSR - Nv + 1 <= 0`.
    TooFewResources { csr: u64, num_vehicles: u64 },
    /// `1 - π / (1 - π i)` left `[0, 1]` at index `i`.
    FactorOutOfRange { index: u64 },
    ProbabilityOutOfRange { what: &'static str, value: f64 },
    EmptyTelemetry,
}

impl fmt::Display for AnalyticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticError::TooFewResources { csr, num_vehicles } => {
                write!(f, "CSR - Nv + 1 must be positive (CSR = {csr}, Nv = {num_vehicles})")
            }
            AnalyticError::FactorOutOfRange { index } => {
                write!(f, "product factor {index} leaves [0, 1]; need pi * (window - 1) < 1")
            }
            AnalyticError::ProbabilityOutOfRange { what, value } => write!(f, "{what} = {value} is not in [0, 1]"),
            AnalyticError::EmptyTelemetry => f.write_str("telemetry covers zero vehicle-slots"),
        }
    }
}

impl core::error::Error for AnalyticError {}

/// Non-collision probability
///
/// ```text
/// P = [1 - (1 - Π_{i=0}^{Γ-1} (1 - π / (1 - π i))) · (1 - P_rk) / (CSR - Nv + 1)]^(Nv - 1)
/// ```
pub fn p_no_collision(params: &AnalyticParams) -> Result<f64, AnalyticError> {
    let AnalyticParams { pi, p_rk, csr, num_vehicles, window } = *params;
    for (what, value) in [("pi", pi), ("p_rk", p_rk)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(AnalyticError::ProbabilityOutOfRange { what, value });
        }
    }
    if csr + 1 <= num_vehicles {
        return Err(AnalyticError::TooFewResources { csr, num_vehicles });
    }
    let mut product = 1.0;
    for i in 0..window {
        let denom = 1.0 - pi * i as f64;
        let factor = 1.0 - pi / denom;
        if !(denom > 0.0) || !(0.0..=1.0).contains(&factor) {
            return Err(AnalyticError::FactorOutOfRange { index: i });
        }
        product *= factor;
    }
    let per_vehicle = (1.0 - product) * (1.0 - p_rk) / (csr + 1 - num_vehicles) as f64;
    let exponent = num_vehicles.saturating_sub(1);
    Ok(libm::pow(1.0 - per_vehicle, exponent as f64).clamp(0.0, 1.0))
}

/// Counters needed to estimate `π`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SelectionTelemetry {
    /// Vehicle-slots observed.
    pub vehicle_slots: u64,
    /// Vehicle-slots with a non-empty queue, RC at zero and a new resource drawn.
    pub selection_events: u64,
}

/// Empirical `π`: the fraction of vehicle-slots that were new-resource
/// selection instants.
pub fn estimate_pi(telemetry: &SelectionTelemetry) -> Result<f64, AnalyticError> {
    if telemetry.vehicle_slots == 0 {
        return Err(AnalyticError::EmptyTelemetry);
    }
    Ok(telemetry.selection_events as f64 / telemetry.vehicle_slots as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(pi: f64, window: u64, p_rk: f64, csr: u64, nv: u64) -> AnalyticParams {
        AnalyticParams { pi, p_rk, csr, num_vehicles: nv, window }
    }

    /// Independent evaluation: build the product as a fold over explicit
    /// factors and the power by repeated multiplication.
    fn oracle(p: &AnalyticParams) -> f64 {
        let prod: f64 = (0..p.window).map(|i| 1.0 - p.pi / (1.0 - p.pi * i as f64)).product();
        let base = 1.0 - (1.0 - prod) * (1.0 - p.p_rk) / (p.csr as f64 - p.num_vehicles as f64 + 1.0);
        (1..p.num_vehicles).fold(1.0, |acc, _| acc * base)
    }

    #[test]
    fn lone_vehicle_never_collides() {
        assert_eq!(p_no_collision(&params(0.3, 3, 0.2, 50, 1)), Ok(1.0));
    }

    #[test]
    fn nobody_selecting_never_collides() {
        assert_eq!(p_no_collision(&params(0.0, 100, 0.0, 500, 30)), Ok(1.0));
    }

    #[test]
    fn small_worked_case() {
        let p = params(0.01, 2, 0.5, 10, 3);
        // 40-digit evaluation: [1 - 0.02 * 0.5 / 8]^2 = 0.99750156...
        let expected = 0.997_501_562_5;
        let got = p_no_collision(&p).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got}");
        assert!((got - oracle(&p)).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert_eq!(
            p_no_collision(&params(0.01, 2, 0.5, 9, 10)),
            Err(AnalyticError::TooFewResources { csr: 9, num_vehicles: 10 })
        );
        assert!(matches!(p_no_collision(&params(0.5, 3, 0.5, 100, 3)), Err(AnalyticError::FactorOutOfRange { .. })));
        assert!(matches!(p_no_collision(&params(1.5, 3, 0.5, 100, 3)), Err(AnalyticError::ProbabilityOutOfRange { .. })));
    }

    #[test]
    fn pi_estimates() {
        assert_eq!(estimate_pi(&SelectionTelemetry { vehicle_slots: 1000, selection_events: 0 }), Ok(0.0));
        assert_eq!(estimate_pi(&SelectionTelemetry { vehicle_slots: 1000, selection_events: 10 }), Ok(0.01));
        assert_eq!(estimate_pi(&SelectionTelemetry::default()), Err(AnalyticError::EmptyTelemetry));
    }

    fn valid() -> impl Strategy<Value = AnalyticParams> {
        (1u64..60, 0.0..1.0f64, 1u64..40, 0u64..600).prop_flat_map(|(window, p_rk, nv, extra)| {
            let max_pi = 0.999 / window as f64;
            (0.0..max_pi).prop_map(move |pi| params(pi, window, p_rk, nv + extra, nv))
        })
    }

    proptest! {
        #[test]
        fn matches_oracle_and_stays_a_probability(p in valid()) {
            let v = p_no_collision(&p).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!((v - oracle(&p)).abs() < 1e-9);
        }

        #[test]
        fn non_increasing_in_vehicles(p in valid()) {
            let more = AnalyticParams { num_vehicles: p.num_vehicles + 1, csr: p.csr.max(p.num_vehicles + 1), ..p };
            let fewer = AnalyticParams { csr: more.csr, ..p };
            prop_assert!(p_no_collision(&more).unwrap() <= p_no_collision(&fewer).unwrap() + 1e-15);
        }

        #[test]
        fn non_increasing_in_pi(p in valid(), shrink in 0.0..1.0f64) {
            let lower = AnalyticParams { pi: p.pi * shrink, ..p };
            prop_assert!(p_no_collision(&p).unwrap() <= p_no_collision(&lower).unwrap() + 1e-15);
        }
    }
}
