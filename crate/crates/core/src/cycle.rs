//! Closed-form work ledger for the demon-driven gas cycle.
//!
//! One cycle of the engine, for an ideal gas of N particles at temperature T
//! in a cylinder of fixed volume V, with label states of overlap cosθ read
//! out at accuracy δ:
//!
//! 1. the two label gases expand isothermally behind semipermeable walls,
//! 2. the walls slide until partial pressures balance (incomplete when the
//!    readout is imperfect),
//! 3. pistons recompress everything into half the cylinder,
//! 4. the mixture is compressed to the initial pressure, portion by portion,
//! 5. quasistatic unitaries restore the label states at no work cost,
//!
//! plus a measurement/reset bracket that is reversible and contributes no
//! net work. Work is positive when given to the system, so a negative total
//! means the cycle extracted work.
//!
//! Every step is a closed form in (N, V, T, k_B, θ, δ); the simulator in
//! [`crate::gassim`] reproduces these numbers from particle bookkeeping.

use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, LN_2};
use thiserror::Error;

use crate::bounds::Accuracy;
use crate::qstate;

#[derive(Debug, Error, PartialEq)]
pub enum CycleError {
    #[error("{what} = {value} must be positive and finite")]
    NotPositive { what: &'static str, value: f64 },
    #[error("theta = {0} outside [0, pi/2]")]
    ThetaOutOfRange(f64),
}

/// Physical parameters of one cycle.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CycleParams {
    n_particles: f64,
    volume: f64,
    temperature: f64,
    boltzmann: f64,
    theta: f64,
    delta: Accuracy,
}

impl CycleParams {
    pub fn new(
        n_particles: f64,
        volume: f64,
        temperature: f64,
        boltzmann: f64,
        theta: f64,
        delta: Accuracy,
    ) -> Result<Self, CycleError> {
        for (what, value) in [
            ("n_particles", n_particles),
            ("volume", volume),
            ("temperature", temperature),
            ("boltzmann", boltzmann),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(CycleError::NotPositive { what, value });
            }
        }
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(CycleError::ThetaOutOfRange(theta));
        }
        Ok(Self { n_particles, volume, temperature, boltzmann, theta, delta })
    }

    /// N = V = T = k_B = 1; handy because every work term is linear in
    /// N·k_B·T anyway.
    pub fn unit(theta: f64, delta: Accuracy) -> Result<Self, CycleError> {
        Self::new(1.0, 1.0, 1.0, 1.0, theta, delta)
    }

    pub fn n_particles(&self) -> f64 {
        self.n_particles
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn boltzmann(&self) -> f64 {
        self.boltzmann
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn delta(&self) -> Accuracy {
        self.delta
    }

    /// N·k_B·T, the scale every work term carries.
    pub fn work_scale(&self) -> f64 {
        self.n_particles * self.boltzmann * self.temperature
    }
}

/// Per-step works plus the derived geometry of the cycle. Field order is the
/// serialization order.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WorkLedger {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub w5: f64,
    pub w_meas: f64,
    pub w_reset: f64,
    pub p0: f64,
    pub v1: f64,
    pub v2: f64,
    pub c: f64,
    pub total: f64,
}

/// Step 1, both label gases doubling their volume: −N·k_B·T·ln2.
pub fn work_step1(params: &CycleParams) -> f64 {
    -params.work_scale() * LN_2
}

/// Step 2, walls sliding to pressure balance: −N·k_B·T·ln2·[1 − H((1+δ)/2)].
/// A perfect readout (δ = 1) recovers the free-expansion value −N·k_B·T·ln2;
/// a coin-flip readout (δ = 0) moves no wall and extracts nothing.
pub fn work_step2(params: &CycleParams) -> f64 {
    let h = crate::numeric::binary_entropy_raw(params.delta.success_probability().get());
    // + 0.0 normalizes the −0.0 that δ = 0 would otherwise produce
    -params.work_scale() * LN_2 * (1.0 - h) + 0.0
}

/// Volume fraction left of the first wall once pressures balance, (1−δ)/2;
/// by symmetry also the fraction right of the second wall.
pub fn equilibrium_fraction(delta: Accuracy) -> f64 {
    (1.0 - delta.get()) / 2.0
}

/// Step 3, recompression into half the cylinder: +N·k_B·T·ln2, independent
/// of the mixture weight because the two portions' counts add back to N.
pub fn work_step3(params: &CycleParams) -> f64 {
    params.work_scale() * LN_2
}

/// Step 4, compressing the two portions to the initial pressure:
/// N·k_B·T·ln2·H((1+cosθ)/2). At θ = 0 the second portion is empty (V₂ = 0)
/// and the step degenerates to zero work.
pub fn work_step4(params: &CycleParams) -> f64 {
    params.work_scale() * LN_2 * qstate::von_neumann_entropy_even_mixture(params.theta)
}

/// Step 5, quasistatic unitaries restoring the label states: no work.
pub fn work_step5(_params: &CycleParams) -> f64 {
    0.0
}

/// Total work of one cycle in closed form:
/// −N·k_B·T·ln2·[1 − H((1+δ)/2) − S], with S the mixture entropy.
pub fn closed_form_total(params: &CycleParams) -> f64 {
    let h = crate::numeric::binary_entropy_raw(params.delta.success_probability().get());
    let s = qstate::von_neumann_entropy_even_mixture(params.theta);
    -params.work_scale() * LN_2 * (1.0 - h - s) + 0.0
}

/// Assembles the full per-step accounting. The stored total is the exact
/// floating-point sum of the stored parts, left to right.
pub fn ledger(params: &CycleParams) -> WorkLedger {
    let w1 = work_step1(params);
    let w2 = work_step2(params);
    let w3 = work_step3(params);
    let w4 = work_step4(params);
    let w5 = work_step5(params);
    // the readout/reset bracket is reversible and contributes no work
    let w_meas = 0.0;
    let w_reset = 0.0;
    let c = qstate::mixture_spectrum(params.theta).c;
    let half_v = params.volume / 2.0;
    let v1 = c * half_v;
    // v2 as the remainder keeps v1 + v2 = V/2 exact
    let v2 = half_v - v1;
    WorkLedger {
        w1,
        w2,
        w3,
        w4,
        w5,
        w_meas,
        w_reset,
        p0: 2.0 * params.work_scale() / params.volume,
        v1,
        v2,
        c,
        total: w1 + w2 + w3 + w4 + w5 + w_meas + w_reset,
    }
}

/// The ledger total; ≥ 0 means the cycle obeys the second law.
pub fn second_law_margin(params: &CycleParams) -> f64 {
    ledger(params).total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_3;

    fn acc(d: f64) -> Accuracy {
        Accuracy::new(d).unwrap()
    }

    fn unit(theta: f64, delta: f64) -> CycleParams {
        CycleParams::unit(theta, acc(delta)).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(CycleParams::new(0.0, 1.0, 1.0, 1.0, 0.3, acc(0.5)).is_err());
        assert!(CycleParams::new(1.0, -1.0, 1.0, 1.0, 0.3, acc(0.5)).is_err());
        assert!(CycleParams::new(1.0, 1.0, f64::NAN, 1.0, 0.3, acc(0.5)).is_err());
        assert!(CycleParams::new(1.0, 1.0, 1.0, f64::INFINITY, 0.3, acc(0.5)).is_err());
        assert!(CycleParams::new(1.0, 1.0, 1.0, 1.0, 3.0, acc(0.5)).is_err());
        assert!(CycleParams::new(1.0, 1.0, 1.0, 1.0, FRAC_PI_2, acc(0.5)).is_ok());
    }

    #[test]
    fn step1_reference_values() {
        assert_eq!(work_step1(&unit(0.3, 0.5)), -LN_2);
        let p = CycleParams::new(2.0, 1.0, 0.5, 1.0, 0.3, acc(0.5)).unwrap();
        assert_eq!(work_step1(&p), -LN_2);
        let big = CycleParams::new(6.0e23, 1.0, 300.0, 1.380649e-23, 0.3, acc(0.5)).unwrap();
        assert!(work_step1(&big).is_finite());
        assert_relative_eq!(work_step1(&big), 6.0e23 * 1.380649e-23 * 300.0 * -LN_2, epsilon = 1e-9);
    }

    #[test]
    fn step2_reference_values() {
        // perfect readout reduces to the free expansion of step 1
        assert_eq!(work_step2(&unit(0.3, 1.0)), work_step1(&unit(0.3, 1.0)));
        let zero = work_step2(&unit(0.3, 0.0));
        assert_eq!(zero, 0.0);
        assert!(zero.is_sign_positive());
        // δ = 1/2: −ln2·(1 − H(3/4))
        assert_relative_eq!(work_step2(&unit(0.3, 0.5)), -0.13081203594113696, epsilon = 1e-15);
    }

    #[test]
    fn equilibrium_fraction_values() {
        assert_eq!(equilibrium_fraction(acc(0.0)), 0.5);
        assert_eq!(equilibrium_fraction(acc(1.0)), 0.0);
        assert_eq!(equilibrium_fraction(acc(0.5)), 0.25);
    }

    #[test]
    fn step3_is_c_independent() {
        assert_eq!(work_step3(&unit(0.0, 0.5)), LN_2);
        assert_eq!(work_step3(&unit(FRAC_PI_2, 0.5)), work_step3(&unit(0.0, 0.5)));
        let p = CycleParams::new(10.0, 1.0, 1.0, 1.0, 0.3, acc(0.5)).unwrap();
        assert_relative_eq!(work_step3(&p), 6.931471805599453, epsilon = 1e-15);
    }

    #[test]
    fn step4_reference_values() {
        assert_eq!(work_step4(&unit(FRAC_PI_2, 0.5)), LN_2);
        assert_eq!(work_step4(&unit(0.0, 0.5)), 0.0);
        // cosθ = 1/2: ln2·H(3/4)
        assert_relative_eq!(work_step4(&unit(FRAC_PI_3, 0.5)), 0.5623351446188084, epsilon = 1e-15);
    }

    #[test]
    fn step5_is_free() {
        assert_eq!(work_step5(&unit(0.0, 0.0)), 0.0);
        assert_eq!(work_step5(&unit(FRAC_PI_2, 1.0)), 0.0);
    }

    #[test]
    fn ledger_structure() {
        let p = CycleParams::new(3.0, 2.0, 1.5, 2.0, FRAC_PI_3, acc(0.7)).unwrap();
        let l = ledger(&p);
        assert_eq!(l.w_meas + l.w_reset, 0.0);
        assert_eq!(l.total, l.w1 + l.w2 + l.w3 + l.w4 + l.w5 + l.w_meas + l.w_reset);
        assert_eq!(l.v1 + l.v2, p.volume() / 2.0);
        assert_eq!(l.p0, 2.0 * p.work_scale() / p.volume());
        assert_relative_eq!(l.c, 0.75, epsilon = 1e-15);
        assert_relative_eq!(l.v1, 0.75, epsilon = 1e-15);
        assert_relative_eq!(l.v2, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn ledger_reference_totals() {
        // orthogonal states, perfect readout: nothing to pay, nothing gained
        let l = ledger(&unit(FRAC_PI_2, 1.0));
        assert_eq!(l.total, 0.0);
        assert!(l.total.is_sign_positive());
        // overlapping states, perfect readout: net extraction
        let violation = ledger(&unit(0.5f64.acos(), 1.0)).total;
        assert_relative_eq!(violation, -0.13081203594113696, epsilon = 1e-12);
        // break-even accuracy zeroes the total
        for cos_theta in [0.1f64, 0.5, 0.9] {
            let theta = cos_theta.acos();
            let d = bounds::delta_th(theta).unwrap();
            let total = ledger(&CycleParams::unit(theta, d).unwrap()).total;
            assert!(total.abs() <= 1e-10, "total {total} at cos = {cos_theta}");
        }
    }

    #[test]
    fn ledger_matches_closed_form_on_grid() {
        for i in 0..=20 {
            for j in 0..=20 {
                let theta = (i as f64 / 20.0).acos();
                let p = unit(theta, j as f64 / 20.0);
                let diff = (ledger(&p).total - closed_form_total(&p)).abs();
                assert!(diff <= 1e-12 * p.work_scale(), "diff {diff} at ({i}, {j})");
            }
        }
    }

    #[test]
    fn total_strictly_decreasing_in_accuracy() {
        for theta in [0.3, 1.0, 1.5] {
            let mut prev = f64::INFINITY;
            for j in 0..=100 {
                let total = ledger(&unit(theta, j as f64 / 100.0)).total;
                assert!(total < prev, "not strict at theta = {theta}, j = {j}");
                prev = total;
            }
        }
    }

    #[test]
    fn sign_change_brackets_break_even() {
        for i in 1..=10 {
            let cos_theta = i as f64 / 11.0;
            let theta = cos_theta.acos();
            let d = bounds::delta_th(theta).unwrap().get();
            let below = ledger(&unit(theta, d - 1e-6)).total;
            let above = ledger(&unit(theta, d + 1e-6)).total;
            assert!(below > 0.0, "below = {below} at cos = {cos_theta}");
            assert!(above < 0.0, "above = {above} at cos = {cos_theta}");
        }
    }

    #[test]
    fn perfect_readout_recovers_free_expansion() {
        for theta in [0.0, 0.4, 1.2, FRAC_PI_2] {
            let p = unit(theta, 1.0);
            assert!((work_step2(&p) - -p.work_scale() * LN_2).abs() <= 1e-15);
        }
    }

    #[test]
    fn serialization_key_order() {
        let json = serde_json::to_string(&ledger(&unit(0.5, 0.5))).unwrap();
        let keys = ["w1", "w2", "w3", "w4", "w5", "w_meas", "w_reset", "p0", "v1", "v2", "c", "total"];
        let mut last = 0;
        for key in keys {
            let pos = json.find(&format!("\"{key}\"")).unwrap_or_else(|| panic!("missing {key}"));
            assert!(pos > last || key == "w1", "key {key} out of order");
            last = pos;
        }
    }

    proptest! {
        // total scales as N·k_B·T and ignores V
        #[test]
        fn scale_covariance(
            n in 0.5f64..1e6, t in 0.1f64..1e3, kb in 0.1f64..10.0,
            v in 0.1f64..100.0, theta in 0.0f64..FRAC_PI_2, delta in 0.0f64..1.0,
        ) {
            let base = unit(theta, delta);
            let scaled = CycleParams::new(n, v, t, kb, theta, acc(delta)).unwrap();
            let expect = n * kb * t * ledger(&base).total;
            let got = ledger(&scaled).total;
            prop_assert!((got - expect).abs() <= 1e-12 * (n * kb * t).max(1.0));

            let other_v = CycleParams::new(n, v * 7.0, t, kb, theta, acc(delta)).unwrap();
            prop_assert_eq!(got, ledger(&other_v).total);
        }

        #[test]
        fn second_law_margin_sign(theta in 0.0f64..FRAC_PI_2, delta in 0.0f64..1.0) {
            let p = unit(theta, delta);
            let margin = second_law_margin(&p);
            prop_assert_eq!(margin, ledger(&p).total);
            let d_th = bounds::delta_th(theta).unwrap().get();
            if delta < d_th - 1e-9 {
                prop_assert!(margin > 0.0);
            } else if delta > d_th + 1e-9 {
                prop_assert!(margin < 0.0);
            }
        }
    }
}
