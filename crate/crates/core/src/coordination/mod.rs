//! Decentralized matching of an aggregate droop and virtual-inertia response.

mod controller;
mod layers;
mod participation;
pub mod tf;

pub use controller::{
    design_controller, evaluate_aggregate, evaluate_aggregate_up_to, local_control_step, nominal_model, BroadcastSignal,
    ControlOutput, LocalController, DEFAULT_STALE_TIMEOUT_S,
};
pub use layers::{hierarchical_layers, Layer, LayerKind, LayerSchedule};
pub use participation::{
    design_participation, partition_error, renormalize_on_failure, CoordinationWarning,
    DeviceModel, ParticipationDesign, ParticipationFactor, Pool,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use tf::TransferFunction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoordinationError {
    #[error("no unit has upward headroom")]
    NoHeadroom,
    #[error("every unit of the DVPP has failed")]
    AllUnitsFailed,
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("invalid DVPP spec: {0}")]
    InvalidSpec(String),
    #[error("controller for `{unit}` is unstable after discretization")]
    UnstableRealization { unit: String },
    #[error("layer schedule: {0}")]
    InvalidSchedule(String),
}

/// Aggregate frequency response the DVPP presents to the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DvppSpec {
    /// pu power per pu frequency deviation.
    pub droop_d: f64,
    /// pu power per pu RoCoF.
    pub inertia_h: f64,
    pub filter_tau_s: f64,
    /// Overrides the fast/slow split time constant.
    #[serde(default)]
    pub split_tau_s: Option<f64>,
}

impl DvppSpec {
    pub fn new(droop_d: f64, inertia_h: f64, filter_tau_s: f64) -> Self {
        Self {
            droop_d,
            inertia_h,
            filter_tau_s,
            split_tau_s: None,
        }
    }

    pub fn validate(&self) -> Result<(), CoordinationError> {
        let bad = |m: &str| Err(CoordinationError::InvalidSpec(m.to_string()));
        if !(self.droop_d.is_finite() && self.droop_d >= 0.0) {
            return bad("droop_d must be finite and non-negative");
        }
        if !(self.inertia_h.is_finite() && self.inertia_h >= 0.0) {
            return bad("inertia_h must be finite and non-negative");
        }
        if !(self.filter_tau_s.is_finite() && self.filter_tau_s > 0.0) {
            return bad("filter_tau_s must be positive");
        }
        if let Some(t) = self.split_tau_s {
            if !(t.is_finite() && t > 0.0) {
                return bad("split_tau_s must be positive");
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.droop_d == 0.0 && self.inertia_h == 0.0
    }

    /// `D + H s / (1 + τ_f s)`.
    pub fn desired_response(&self) -> TransferFunction {
        let tau = self.filter_tau_s;
        TransferFunction::new(
            vec![self.droop_d, self.droop_d * tau + self.inertia_h],
            vec![1.0, tau],
        )
    }
}
