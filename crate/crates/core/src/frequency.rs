//! Centre-of-inertia frequency model.

use serde::Serialize;
use thiserror::Error;

use crate::units::Interface;

pub const DEFAULT_F_NOMINAL_HZ: f64 = 50.0;
/// Largest step the frequency model accepts.
pub const MAX_STEP_S: f64 = 0.01;
/// Time constant of the grid-forming fallback when no inertia is online.
pub const GRID_FORMING_TAU_S: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrequencyError {
    #[error("no synchronous inertia online and no grid-forming fallback configured")]
    ZeroInertiaConfig,
    #[error("frequency step {0} s exceeds the {MAX_STEP_S} s limit")]
    StepTooLarge(f64),
    #[error("invalid frequency model parameter: {0}")]
    InvalidParameter(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreqModel {
    /// Aggregate inertia constant on the system base.
    pub h_sys_s: f64,
    /// pu power per pu frequency.
    pub d_load: f64,
    pub f_nominal_hz: f64,
    pub delta_f_hz: f64,
    /// Slope over the most recent step.
    pub rocof_hz_s: f64,
    /// First-order time constant imposed when `h_sys_s` is zero.
    pub grid_forming_tau_s: Option<f64>,
}

impl FreqModel {
    pub fn new(h_sys_s: f64, d_load: f64, f_nominal_hz: f64) -> Result<Self, FrequencyError> {
        if !(h_sys_s.is_finite() && h_sys_s >= 0.0) {
            return Err(FrequencyError::InvalidParameter("h_sys_s"));
        }
        if !(d_load.is_finite() && d_load >= 0.0) {
            return Err(FrequencyError::InvalidParameter("d_load"));
        }
        if !(f_nominal_hz.is_finite() && f_nominal_hz > 0.0) {
            return Err(FrequencyError::InvalidParameter("f_nominal_hz"));
        }
        Ok(Self {
            h_sys_s,
            d_load,
            f_nominal_hz,
            delta_f_hz: 0.0,
            rocof_hz_s: 0.0,
            grid_forming_tau_s: None,
        })
    }

    pub fn with_grid_forming(mut self, tau_s: f64) -> Self {
        self.grid_forming_tau_s = Some(tau_s);
        self
    }

    pub fn delta_omega_pu(&self) -> f64 {
        self.delta_f_hz / self.f_nominal_hz
    }

    /// Inertia used for integration, including the grid-forming fallback.
    pub fn effective_inertia_s(&self) -> Result<f64, FrequencyError> {
        if self.h_sys_s > 0.0 {
            return Ok(self.h_sys_s);
        }
        match self.grid_forming_tau_s {
            Some(tau) if tau > 0.0 && self.d_load > 0.0 => Ok(0.5 * tau * self.d_load),
            _ => Err(FrequencyError::ZeroInertiaConfig),
        }
    }
}

/// Advances `2H dΔω/dt = p_gen − p_load − d·Δω` by `dt`, holding the power
/// imbalance constant over the step. The linear ODE is integrated exactly.
pub fn step_frequency(
    model: &FreqModel,
    p_gen_pu: f64,
    p_load_pu: f64,
    dt: f64,
) -> Result<FreqModel, FrequencyError> {
    if !(dt > 0.0 && dt <= MAX_STEP_S * (1.0 + 1e-12)) {
        return Err(FrequencyError::StepTooLarge(dt));
    }
    let h = model.effective_inertia_s()?;
    let dp = p_gen_pu - p_load_pu;
    let w0 = model.delta_omega_pu();
    let d = model.d_load;
    let w1 = if d > 0.0 {
        let w_ss = dp / d;
        w_ss + (w0 - w_ss) * (-d * dt / (2.0 * h)).exp()
    } else {
        w0 + dp * dt / (2.0 * h)
    };
    let delta_f_hz = w1 * model.f_nominal_hz;
    Ok(FreqModel {
        delta_f_hz,
        rocof_hz_s: (delta_f_hz - model.delta_f_hz) / dt,
        ..*model
    })
}

/// One contributor to system inertia.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaSource {
    pub interface: Interface,
    /// Inertia constant on the unit's own rating.
    pub inertia_s: f64,
    pub rating_mw: f64,
    pub online: bool,
}

/// Rating-weighted inertia of online synchronous units on the system base.
pub fn online_inertia(units: &[InertiaSource], s_base_mva: f64) -> f64 {
    units
        .iter()
        .filter(|u| u.online && u.interface.is_synchronous())
        .map(|u| u.inertia_s * u.rating_mw / s_base_mva)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn run(model: FreqModel, dp: f64, dt: f64, steps: usize) -> FreqModel {
        (0..steps).fold(model, |m, _| step_frequency(&m, dp, 0.0, dt).unwrap())
    }

    #[test]
    fn balanced_stays_at_zero() {
        let m = run(FreqModel::new(5.0, 1.0, 50.0).unwrap(), 0.0, 0.01, 1000);
        assert_eq!(m.delta_f_hz, 0.0);
    }

    #[test]
    fn pure_damping_steady_state() {
        let m = run(FreqModel::new(0.01, 1.0, 50.0).unwrap(), -0.05, 0.01, 200);
        assert_abs_diff_eq!(m.delta_f_hz, -2.5, epsilon = 1e-9);
    }

    #[test]
    fn initial_rocof_from_swing_equation() {
        let m = step_frequency(&FreqModel::new(5.0, 1.0, 50.0).unwrap(), 0.0, 0.1, 0.001).unwrap();
        // −0.1 / (2·5) pu/s = −0.5 Hz/s; damping bends the first step slightly.
        assert!((m.rocof_hz_s + 0.5).abs() < 0.5 * 1e-4);
    }

    #[test]
    fn matches_closed_form_exponential() {
        let (h, d, dp) = (4.0, 2.0, -0.08);
        let m = run(FreqModel::new(h, d, 50.0).unwrap(), dp, 0.005, 600);
        let t = 3.0;
        let expected = dp / d * (1.0 - (-d * t / (2.0 * h)).exp()) * 50.0;
        assert_abs_diff_eq!(m.delta_f_hz, expected, epsilon = 1e-12);
    }

    #[test]
    fn undamped_ramp() {
        let m = run(FreqModel::new(5.0, 0.0, 50.0).unwrap(), -0.1, 0.01, 100);
        assert_abs_diff_eq!(m.delta_f_hz, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn zero_inertia_needs_fallback() {
        let m = FreqModel::new(0.0, 1.0, 50.0).unwrap();
        assert_eq!(step_frequency(&m, -0.1, 0.0, 0.01), Err(FrequencyError::ZeroInertiaConfig));
        let m = run(m.with_grid_forming(GRID_FORMING_TAU_S), -0.1, 0.001, 100);
        // One fallback time constant: 1 − e^-1 of the way to −5 Hz.
        assert_abs_diff_eq!(m.delta_f_hz, -5.0 * (1.0 - (-1.0f64).exp()), epsilon = 1e-9);
        let undamped = FreqModel::new(0.0, 0.0, 50.0).unwrap().with_grid_forming(0.1);
        assert!(step_frequency(&undamped, 0.0, 0.0, 0.01).is_err());
    }

    #[test]
    fn step_limit() {
        let m = FreqModel::new(5.0, 1.0, 50.0).unwrap();
        assert_eq!(step_frequency(&m, 0.0, 0.0, 0.02), Err(FrequencyError::StepTooLarge(0.02)));
    }

    #[test]
    fn inertia_aggregation() {
        let pv = InertiaSource { interface: Interface::PE, inertia_s: 0.0, rating_mw: 50.0, online: true };
        assert_eq!(online_inertia(&[pv], 100.0), 0.0);
        let sg = InertiaSource { interface: Interface::SG, inertia_s: 4.0, rating_mw: 100.0, online: true };
        assert_eq!(online_inertia(&[sg], 100.0), 4.0);
        let units = [
            sg,
            InertiaSource { interface: Interface::SG, inertia_s: 3.0, rating_mw: 60.0, online: true },
            InertiaSource { interface: Interface::SG, inertia_s: 6.0, rating_mw: 80.0, online: false },
            InertiaSource { interface: Interface::SG_IG_PE, inertia_s: 5.0, rating_mw: 30.0, online: true },
        ];
        // 4·100/200 + 3·60/200 = 2 + 0.9
        assert_abs_diff_eq!(online_inertia(&units, 200.0), 2.9, epsilon = 1e-15);
    }
}
