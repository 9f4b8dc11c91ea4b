//! Deterministic multi-rate simulation of a scenario.
//!
//! Time advances in device ticks. Within a tick the layers run slowest first:
//! market, redispatch, frequency service, device control. Events take effect
//! at the first tick at or after their timestamp, before any layer runs.

mod engine;
mod events;
mod metrics;
mod trace;

pub use engine::{initial_participation, run, snapshot_problem};
pub use events::{EventKind, EventScript, SimEvent};
pub use metrics::{metrics, Metrics, SETTLING_BAND, SETTLING_FLOOR_HZ};
pub use trace::{ControllerRecord, DispatchRecord, SimTrace, TraceSample};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coordination::{CoordinationError, LayerSchedule, DEFAULT_STALE_TIMEOUT_S};
use crate::frequency::FrequencyError;
use crate::network::NetworkError;
use crate::redispatch::RedispatchError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("event {index} at {time_s} s: {msg}")]
    InvalidEvent { index: usize, time_s: f64, msg: String },
    #[error("while applying event {index} ({label}) at {time_s} s: {source}")]
    AtEvent {
        index: usize,
        time_s: f64,
        label: String,
        source: Box<SimError>,
    },
    #[error(transparent)]
    Coordination(#[from] CoordinationError),
    #[error(transparent)]
    Frequency(#[from] FrequencyError),
    #[error(transparent)]
    Redispatch(#[from] RedispatchError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("trace contains no disturbance event")]
    NoDisturbance,
    #[error("trace CSV: {0}")]
    Csv(String),
}

/// Ornstein-Uhlenbeck perturbation of wind and solar availability, as a
/// relative deviation around the scheduled value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Mean-reversion rate.
    pub theta_per_s: f64,
    /// Stationary standard deviation of the relative deviation.
    pub sigma: f64,
}

/// Frequency imposed instead of the centre-of-inertia model: zero until
/// `start_s`, then a linear ramp to `delta_hz` over `ramp_s`, then held.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyRamp {
    pub start_s: f64,
    pub ramp_s: f64,
    pub delta_hz: f64,
}

impl FrequencyRamp {
    pub fn at(&self, t: f64) -> f64 {
        if t <= self.start_s {
            0.0
        } else if self.ramp_s <= 0.0 || t >= self.start_s + self.ramp_s {
            self.delta_hz
        } else {
            self.delta_hz * (t - self.start_s) / self.ramp_s
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub dt_device_s: f64,
    pub dt_freq_s: f64,
    pub dt_redispatch_s: f64,
    pub dt_market_s: f64,
    pub duration_s: f64,
    pub seed: u64,
    /// Trace sampling period; defaults to `dt_freq_s`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_period_s: Option<f64>,
    /// When false only the initial dispatch is solved.
    pub redispatch_enabled: bool,
    /// Redispatch trigger on availability change, as a fraction of DVPP rating.
    pub trigger_threshold: f64,
    pub stale_timeout_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency_override: Option<FrequencyRamp>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt_device_s: 0.01,
            dt_freq_s: 0.1,
            dt_redispatch_s: 60.0,
            dt_market_s: 3600.0,
            duration_s: 60.0,
            seed: 0,
            sample_period_s: None,
            redispatch_enabled: true,
            trigger_threshold: 0.05,
            stale_timeout_s: DEFAULT_STALE_TIMEOUT_S,
            noise: None,
            frequency_override: None,
        }
    }
}

/// Tick counts derived from a validated config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Cadence {
    pub freq: u64,
    pub redispatch: u64,
    pub market: u64,
    pub sample: u64,
    pub total: u64,
}

/// `a / b` when it is an integer within round-off.
fn ratio(a: f64, b: f64) -> Option<u64> {
    let r = a / b;
    let n = r.round();
    ((r - n).abs() <= 1e-9 * n.max(1.0) && n >= 1.0).then_some(n as u64)
}

impl SimConfig {
    pub fn with_duration(mut self, duration_s: f64) -> Self {
        self.duration_s = duration_s;
        self
    }

    pub fn layers(&self) -> Result<LayerSchedule, SimError> {
        LayerSchedule::new(self.dt_device_s, self.dt_freq_s, self.dt_redispatch_s, self.dt_market_s)
            .map_err(|e| SimError::InvalidConfig(e.to_string()))
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period_s.unwrap_or(self.dt_freq_s)
    }

    pub(crate) fn cadence(&self) -> Result<Cadence, SimError> {
        self.layers()?;
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        let multiple = |slow: f64, fast: f64, what: &str| {
            ratio(slow, fast)
                .ok_or_else(|| SimError::InvalidConfig(format!("{what} period {slow} s is not an integer multiple of {fast} s")))
        };
        let dt = self.dt_device_s;
        let f = multiple(self.dt_freq_s, dt, "frequency")?;
        let r = multiple(self.dt_redispatch_s, self.dt_freq_s, "redispatch")? * f;
        let m = multiple(self.dt_market_s, self.dt_redispatch_s, "market")? * r;
        let sample = multiple(self.sample_period(), dt, "sample")?;
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return bad(format!("duration {} s must be positive", self.duration_s));
        }
        let total = (self.duration_s / dt - 1e-9).ceil() as u64;
        if !(self.stale_timeout_s > 0.0) {
            return bad("stale_timeout_s must be positive".into());
        }
        if !(self.trigger_threshold >= 0.0) {
            return bad("trigger_threshold must be non-negative".into());
        }
        if let Some(n) = self.noise {
            if !(n.theta_per_s > 0.0 && n.sigma >= 0.0 && n.sigma.is_finite()) {
                return bad("noise needs theta_per_s > 0 and sigma >= 0".into());
            }
        }
        Ok(Cadence {
            freq: f,
            redispatch: r,
            market: m,
            sample,
            total,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_cadence() {
        let c = SimConfig::default().cadence().unwrap();
        assert_eq!((c.freq, c.redispatch, c.market, c.sample, c.total), (10, 6000, 360_000, 10, 6000));
    }

    #[test]
    fn rejects_non_integer_ratio() {
        let cfg = SimConfig { dt_freq_s: 0.105, ..SimConfig::default() };
        assert!(matches!(cfg.cadence(), Err(SimError::InvalidConfig(_))));
    }

    #[test]
    fn rejects_small_ratio() {
        let cfg = SimConfig { dt_freq_s: 0.05, ..SimConfig::default() };
        assert!(cfg.cadence().is_err());
    }

    #[test]
    fn ramp_profile() {
        let r = FrequencyRamp { start_s: 1.0, ramp_s: 10.0, delta_hz: -0.1 };
        assert_eq!(r.at(0.5), 0.0);
        assert!((r.at(6.0) + 0.05).abs() < 1e-15);
        assert_eq!(r.at(20.0), -0.1);
    }
}
