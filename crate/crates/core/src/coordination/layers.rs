use serde::{Deserialize, Serialize};

use super::CoordinationError;

/// Minimum period ratio between adjacent layers.
pub const MIN_LAYER_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    DeviceControl,
    FrequencyService,
    Redispatch,
    Market,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub kind: LayerKind,
    pub period_s: f64,
}

/// Layers from fastest to slowest; each closed loop is the plant of the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSchedule {
    pub layers: Vec<Layer>,
}

impl LayerSchedule {
    pub fn new(device_s: f64, frequency_s: f64, redispatch_s: f64, market_s: f64) -> Result<Self, CoordinationError> {
        let s = Self {
            layers: vec![
                Layer { kind: LayerKind::DeviceControl, period_s: device_s },
                Layer { kind: LayerKind::FrequencyService, period_s: frequency_s },
                Layer { kind: LayerKind::Redispatch, period_s: redispatch_s },
                Layer { kind: LayerKind::Market, period_s: market_s },
            ],
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), CoordinationError> {
        for l in &self.layers {
            if !(l.period_s.is_finite() && l.period_s > 0.0) {
                return Err(CoordinationError::InvalidSchedule(format!(
                    "{:?} period must be positive",
                    l.kind
                )));
            }
        }
        for pair in self.layers.windows(2) {
            if pair[1].period_s < MIN_LAYER_RATIO * pair[0].period_s * (1.0 - 1e-12) {
                return Err(CoordinationError::InvalidSchedule(format!(
                    "{:?} period {} s is less than {}x the {:?} period {} s",
                    pair[1].kind, pair[1].period_s, MIN_LAYER_RATIO, pair[0].kind, pair[0].period_s
                )));
            }
        }
        Ok(())
    }

    pub fn period(&self, kind: LayerKind) -> f64 {
        self.layers
            .iter()
            .find(|l| l.kind == kind)
            .map(|l| l.period_s)
            .expect("every schedule has all four layers")
    }
}

/// Default cadence: 10 ms, 100 ms, 60 s, 1 h.
pub fn hierarchical_layers() -> LayerSchedule {
    LayerSchedule::new(0.01, 0.1, 60.0, 3600.0).expect("default schedule is valid")
}
