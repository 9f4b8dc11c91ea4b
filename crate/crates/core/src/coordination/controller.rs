use num_complex::Complex64;
use serde::Serialize;

use super::participation::ParticipationFactor;
use super::tf::{log_grid, DiscreteFilter, Poly, TransferFunction};
use super::{CoordinationError, DvppSpec};
use crate::units::TechSpec;

pub const DEFAULT_STALE_TIMEOUT_S: f64 = 0.5;

/// Guard poles sit this many times above the unit bandwidth.
const GUARD_FACTOR: f64 = 10.0;

/// Centre-of-inertia frequency deviation published to every device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BroadcastSignal {
    pub delta_f_hz: f64,
    pub timestamp_s: f64,
    pub staleness_s: f64,
}

impl BroadcastSignal {
    pub fn fresh(delta_f_hz: f64, timestamp_s: f64) -> Self {
        Self {
            delta_f_hz,
            timestamp_s,
            staleness_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlOutput {
    /// Power offset in pu of the system base.
    pub dp_pu: f64,
    pub saturated: bool,
    pub stale: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalController {
    pub unit_id: String,
    /// `K_i(s)` including any guard poles.
    pub continuous: TransferFunction,
    /// Nominal unit model `Ĝ_i(s)` the design inverted.
    pub plant: TransferFunction,
    filter: DiscreteFilter,
    dt: f64,
    f_nominal_hz: f64,
    lo_pu: f64,
    hi_pu: f64,
    stale_timeout_s: f64,
    last: ControlOutput,
}

/// `1/(1 + τ s)` for the unit's lag, or unity when the lag is shorter than `dt`.
pub fn nominal_model(tech: &TechSpec, dt: f64) -> TransferFunction {
    let tau = tech.lag_time_constant_s();
    if tau < dt {
        TransferFunction::constant(1.0)
    } else {
        TransferFunction::first_order_lag(tau)
    }
}

/// Builds `K_i = m_i · C_des / Ĝ_i`, rolled off above `GUARD_FACTOR ·
/// bandwidth` when the inversion would be improper, and discretizes it.
pub fn design_controller(
    factor: &ParticipationFactor,
    spec: &DvppSpec,
    plant: &TransferFunction,
    bandwidth_rad_s: f64,
    dt: f64,
    f_nominal_hz: f64,
) -> Result<LocalController, CoordinationError> {
    spec.validate()?;
    let continuous = if factor.filter.is_zero() || spec.is_zero() {
        TransferFunction::zero()
    } else {
        let k = &(&factor.filter * &spec.desired_response()) * &plant.inverse();
        let deficit = -k.relative_degree();
        if deficit > 0 {
            let corner = GUARD_FACTOR * bandwidth_rad_s;
            let mut den = Poly::constant(1.0);
            for _ in 0..deficit {
                den = &den * &Poly(vec![1.0, 1.0 / corner]);
            }
            &k * &TransferFunction { num: Poly::constant(1.0), den }
        } else {
            k
        }
    };
    let filter = continuous.discretize(dt);
    if !filter.is_stable() {
        return Err(CoordinationError::UnstableRealization {
            unit: factor.unit_id.clone(),
        });
    }
    Ok(LocalController {
        unit_id: factor.unit_id.clone(),
        continuous,
        plant: plant.clone(),
        filter,
        dt,
        f_nominal_hz,
        lo_pu: f64::NEG_INFINITY,
        hi_pu: f64::INFINITY,
        stale_timeout_s: DEFAULT_STALE_TIMEOUT_S,
        last: ControlOutput {
            dp_pu: 0.0,
            saturated: false,
            stale: false,
        },
    })
}

impl LocalController {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn discrete(&self) -> &DiscreteFilter {
        &self.filter
    }

    pub fn last_output(&self) -> ControlOutput {
        self.last
    }

    pub fn set_stale_timeout(&mut self, timeout_s: f64) {
        self.stale_timeout_s = timeout_s;
    }

    /// Offset limits in pu; the upper limit is the unit's headroom.
    pub fn set_limits(&mut self, lo_pu: f64, hi_pu: f64) {
        self.lo_pu = lo_pu.min(0.0);
        self.hi_pu = hi_pu.max(0.0);
    }

    pub fn limits(&self) -> (f64, f64) {
        (self.lo_pu, self.hi_pu)
    }

    /// Restarts at the equilibrium for a constant frequency deviation.
    pub fn reset_steady(&mut self, delta_f_hz: f64) {
        let u = -delta_f_hz / self.f_nominal_hz;
        self.filter.reset_steady(u);
        let y = self.filter.peek(u);
        self.last = ControlOutput {
            dp_pu: y.clamp(self.lo_pu, self.hi_pu),
            saturated: false,
            stale: false,
        };
    }
}

/// One device tick. Output is held when the broadcast is stale; when the
/// demand leaves the headroom band the output is clamped and the filter
/// recursion runs on the clamped value, so the state stays at the clamp.
pub fn local_control_step(
    ctrl: &mut LocalController,
    broadcast: &BroadcastSignal,
    dt: f64,
) -> Result<ControlOutput, CoordinationError> {
    if (dt - ctrl.dt).abs() > 1e-12 * ctrl.dt {
        return Err(CoordinationError::InvalidSpec(format!(
            "controller for `{}` was discretized at {} s, stepped at {} s",
            ctrl.unit_id, ctrl.dt, dt
        )));
    }
    if broadcast.staleness_s > ctrl.stale_timeout_s {
        ctrl.last.stale = true;
        return Ok(ctrl.last);
    }
    let u = -broadcast.delta_f_hz / ctrl.f_nominal_hz;
    let y = ctrl.filter.peek(u);
    let clamped = y.clamp(ctrl.lo_pu, ctrl.hi_pu);
    let saturated = clamped != y;
    ctrl.filter.commit(u, clamped);
    ctrl.last = ControlOutput {
        dp_pu: clamped,
        saturated,
        stale: false,
    };
    Ok(ctrl.last)
}

/// Largest relative deviation of `Σ K_i Ĝ_i` from `C_des` over 200 log-spaced
/// points in `[1e-3, 1e2]` rad/s. Zero when the specification is zero.
pub fn evaluate_aggregate(controllers: &[LocalController], spec: &DvppSpec) -> f64 {
    evaluate_aggregate_up_to(controllers, spec, 1e2)
}

/// As [`evaluate_aggregate`] with the grid truncated at `omega_max`.
pub fn evaluate_aggregate_up_to(controllers: &[LocalController], spec: &DvppSpec, omega_max: f64) -> f64 {
    if spec.is_zero() {
        return 0.0;
    }
    let c = spec.desired_response();
    log_grid(1e-3, 1e2, 200)
        .into_iter()
        .filter(|&w| w <= omega_max)
        .map(|w| {
            let agg: Complex64 = controllers
                .iter()
                .map(|k| k.continuous.eval_jw(w) * k.plant.eval_jw(w))
                .sum();
            let cw = c.eval_jw(w);
            (agg - cw).norm() / cw.norm()
        })
        .fold(0.0, f64::max)
}
