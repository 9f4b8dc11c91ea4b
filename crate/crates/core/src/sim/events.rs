use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::network::BusId;
use crate::scenario::{line_of_offset, parse_error, read_file, Scenario, ScenarioError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventKind {
    UnitTrip {
        unit: String,
    },
    AvailabilityChange {
        unit: String,
        available_mw: f64,
    },
    LoadStep {
        bus: BusId,
        delta_mw: f64,
    },
    LineOutage {
        from_bus: BusId,
        to_bus: BusId,
    },
    /// Replaces the given fields of the DVPP specification.
    SpecChange {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        droop_d: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inertia_h: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        filter_tau_s: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEvent {
    pub time_s: f64,
    pub kind: EventKind,
}

impl SimEvent {
    pub fn new(time_s: f64, kind: EventKind) -> Self {
        Self { time_s, kind }
    }

    pub fn unit_trip(time_s: f64, unit: &str) -> Self {
        Self::new(time_s, EventKind::UnitTrip { unit: unit.to_string() })
    }

    pub fn load_step(time_s: f64, bus: BusId, delta_mw: f64) -> Self {
        Self::new(time_s, EventKind::LoadStep { bus, delta_mw })
    }
}

/// Short label without commas, as written to the trace.
impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventKind::UnitTrip { unit } => write!(f, "unit_trip:{unit}"),
            EventKind::AvailabilityChange { unit, available_mw } => {
                write!(f, "availability_change:{unit}:{available_mw}")
            }
            EventKind::LoadStep { bus, delta_mw } => write!(f, "load_step:{bus}:{delta_mw}"),
            EventKind::LineOutage { from_bus, to_bus } => write!(f, "line_outage:{from_bus}-{to_bus}"),
            EventKind::SpecChange { droop_d, inertia_h, filter_tau_s } => {
                write!(f, "spec_change")?;
                for (name, v) in [("d", droop_d), ("h", inertia_h), ("tau", filter_tau_s)] {
                    if let Some(v) = v {
                        write!(f, ":{name}={v}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// Events read from a file, with the line each one starts on.
#[derive(Debug, Clone, PartialEq)]
pub struct EventScript {
    pub origin: String,
    pub events: Vec<SimEvent>,
    pub lines: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScript {
    #[serde(default)]
    event: Vec<toml::Table>,
}

impl EventScript {
    pub fn empty() -> Self {
        Self {
            origin: String::new(),
            events: Vec::new(),
            lines: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = read_file(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, ScenarioError> {
        let raw: RawScript = toml::from_str(text).map_err(|e| parse_error(text, origin, &e))?;
        let headers: Vec<usize> = text
            .match_indices("[[event]]")
            .map(|(o, _)| line_of_offset(text, o))
            .collect();
        let mut events = Vec::with_capacity(raw.event.len());
        let mut lines = Vec::with_capacity(raw.event.len());
        for (i, mut table) in raw.event.into_iter().enumerate() {
            let line = headers.get(i).copied().unwrap_or(0);
            let fail = |msg: String| ScenarioError::Validation {
                origin: origin.to_string(),
                line,
                msg: format!("event {i}: {msg}"),
            };
            let time_s = match table.remove("time_s") {
                Some(toml::Value::Float(t)) => t,
                Some(toml::Value::Integer(t)) => t as f64,
                Some(other) => return Err(fail(format!("time_s must be a number, got {other}"))),
                None => return Err(fail("missing time_s".into())),
            };
            if !(time_s.is_finite() && time_s >= 0.0) {
                return Err(fail(format!("time_s {time_s} must be finite and non-negative")));
            }
            let kind: EventKind = toml::Value::Table(table)
                .try_into()
                .map_err(|e: toml::de::Error| fail(e.message().trim().to_string()))?;
            events.push(SimEvent { time_s, kind });
            lines.push(line);
        }
        Ok(Self {
            origin: origin.to_string(),
            events,
            lines,
        })
    }

    /// Checks every event against the scenario and the run length.
    pub fn validate(&self, scenario: &Scenario, duration_s: f64) -> Result<(), ScenarioError> {
        for (i, e) in self.events.iter().enumerate() {
            check_event(e, scenario, duration_s).map_err(|msg| ScenarioError::Validation {
                origin: self.origin.clone(),
                line: self.lines.get(i).copied().unwrap_or(0),
                msg: format!("event {i} ({}): {msg}", e.kind),
            })?;
        }
        Ok(())
    }
}

pub(crate) fn check_event(e: &SimEvent, scenario: &Scenario, duration_s: f64) -> Result<(), String> {
    if !(e.time_s.is_finite() && e.time_s >= 0.0 && e.time_s < duration_s) {
        return Err(format!("time {} s outside [0, {duration_s}) s", e.time_s));
    }
    let has_bus = |b: BusId| scenario.buses.iter().any(|x| x.id == b);
    match &e.kind {
        EventKind::UnitTrip { unit } => {
            scenario.unit(unit).ok_or_else(|| format!("unknown unit `{unit}`"))?;
        }
        EventKind::AvailabilityChange { unit, available_mw } => {
            scenario.unit(unit).ok_or_else(|| format!("unknown unit `{unit}`"))?;
            if !(available_mw.is_finite() && *available_mw >= 0.0) {
                return Err("available_mw must be non-negative".into());
            }
        }
        EventKind::LoadStep { bus, delta_mw } => {
            if !has_bus(*bus) {
                return Err(format!("unknown bus {bus}"));
            }
            if !delta_mw.is_finite() {
                return Err("delta_mw must be finite".into());
            }
        }
        EventKind::LineOutage { from_bus, to_bus } => {
            let found = scenario.lines.iter().any(|l| {
                (l.from_bus, l.to_bus) == (*from_bus, *to_bus) || (l.from_bus, l.to_bus) == (*to_bus, *from_bus)
            });
            if !found {
                return Err(format!("no line between buses {from_bus} and {to_bus}"));
            }
        }
        EventKind::SpecChange { droop_d, inertia_h, filter_tau_s } => {
            let mut spec = scenario.dvpp;
            spec.droop_d = droop_d.unwrap_or(spec.droop_d);
            spec.inertia_h = inertia_h.unwrap_or(spec.inertia_h);
            spec.filter_tau_s = filter_tau_s.unwrap_or(spec.filter_tau_s);
            spec.validate().map_err(|e| e.to_string())?;
        }
    }
    Ok(())
}
