//! Per-technology unit dynamics.
//!
//! Every unit tracks its command through a first-order lag. What the command is
//! allowed to reach depends on the unit's dispatchability class:
//!
//! * **A** (PV) is capped by primary-resource availability at all times.
//! * **B** (wind) may exceed availability for a limited overload budget.
//! * **C** (solar thermal) can exceed availability while its store holds energy.
//! * **D** (hydro, biomass, thermal, geothermal) ignores availability.
//! * **E** (pumped storage) behaves like D but may also consume power.
//!
//! Scheduled commands are held below `ceiling · (1 − reserve_fraction)`; the
//! frequency-service channel (`p_service_mw`) may release the held reserve.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const SECONDS_PER_HOUR: f64 = 3600.0;
const HOUR: f64 = 3600.0;
const DAY: f64 = 24.0 * HOUR;
const WEEK: f64 = 7.0 * DAY;
const MONTH: f64 = 30.0 * DAY;
const YEAR: f64 = 365.0 * DAY;
/// Slack used when comparing powers against ceilings.
const POWER_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnitError {
    #[error("{tech}: response time {value} s outside [{lo}, {hi}] s")]
    ResponseTimeOutOfRange {
        tech: Tech,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("{tech}: inherent storage {value} s outside [{lo}, {hi}] s")]
    StorageTimeOutOfRange {
        tech: Tech,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("{tech}: interface {got:?} does not match technology (expected {expected:?})")]
    InterfaceMismatch {
        tech: Tech,
        got: Interface,
        expected: Interface,
    },
    #[error("{0} must be finite and non-negative")]
    Negative(&'static str),
    #[error("reserve fraction {0} must lie in [0, 1)")]
    ReserveFraction(f64),
}

#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tech {
    PV,
    ST,
    W,
    HYD,
    BIO,
    CF_TPS,
    CC_TPS,
    N_TPS,
    PS_HPP,
    GEO,
}

impl Tech {
    pub const ALL: [Tech; 10] = [
        Tech::PV,
        Tech::ST,
        Tech::W,
        Tech::HYD,
        Tech::BIO,
        Tech::CF_TPS,
        Tech::CC_TPS,
        Tech::N_TPS,
        Tech::PS_HPP,
        Tech::GEO,
    ];

    pub fn dispatch_class(self) -> DispatchClass {
        match self {
            Tech::PV => DispatchClass::HardLimited,
            Tech::W => DispatchClass::BriefOvershoot,
            Tech::ST => DispatchClass::StorageBacked,
            Tech::BIO | Tech::HYD | Tech::CF_TPS | Tech::CC_TPS | Tech::N_TPS | Tech::GEO => {
                DispatchClass::UnconstrainedSlow
            }
            Tech::PS_HPP => DispatchClass::Bidirectional,
        }
    }

    pub fn interface(self) -> Interface {
        match self {
            Tech::PV => Interface::PE,
            Tech::W => Interface::SG_IG_PE,
            _ => Interface::SG,
        }
    }

    /// Response-time range in seconds.
    pub fn response_range_s(self) -> (f64, f64) {
        match self {
            Tech::PV => (0.1, 5.0),
            Tech::ST => (15.0 * 60.0, 4.0 * HOUR),
            Tech::W => (0.5e-3, 1.0),
            Tech::HYD | Tech::PS_HPP => (2.0 * 60.0, 5.0 * 60.0),
            Tech::BIO => (10.0 * 60.0, 6.0 * HOUR),
            Tech::CF_TPS => (80.0 * 60.0, 8.0 * HOUR),
            Tech::CC_TPS => (5.0 * 60.0, 3.0 * HOUR),
            // "approximately 24 h": accept half to double.
            Tech::N_TPS => (12.0 * HOUR, 48.0 * HOUR),
            Tech::GEO => (30.0, 2.0 * 60.0),
        }
    }

    /// Inherent storage time range in seconds.
    pub fn storage_range_s(self) -> (f64, f64) {
        match self {
            Tech::PV | Tech::W => (0.0, 0.0),
            Tech::ST => (0.0, DAY),
            Tech::HYD | Tech::PS_HPP => (4.0 * HOUR, 16.0 * HOUR),
            Tech::BIO => (WEEK, 4.0 * WEEK),
            Tech::CF_TPS | Tech::CC_TPS | Tech::N_TPS => (MONTH, YEAR),
            Tech::GEO => (f64::INFINITY, f64::INFINITY),
        }
    }

    /// Default inertia constant (s, on unit rating). Converter-coupled units
    /// contribute none.
    pub fn default_inertia_s(self) -> f64 {
        match self {
            Tech::PV | Tech::W => 0.0,
            Tech::HYD | Tech::PS_HPP => 3.0,
            Tech::ST | Tech::BIO | Tech::GEO => 4.0,
            Tech::CF_TPS | Tech::CC_TPS => 5.0,
            Tech::N_TPS => 6.0,
        }
    }
}

impl fmt::Display for Tech {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tech::PV => "PV",
            Tech::ST => "ST",
            Tech::W => "W",
            Tech::HYD => "HYD",
            Tech::BIO => "BIO",
            Tech::CF_TPS => "CF-TPS",
            Tech::CC_TPS => "CC-TPS",
            Tech::N_TPS => "N-TPS",
            Tech::PS_HPP => "PS-HPP",
            Tech::GEO => "GEO",
        };
        f.write_str(s)
    }
}

#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Interface {
    PE,
    SG,
    SG_IG_PE,
}

impl Interface {
    /// Whether the unit's rotating mass is electrically coupled to the grid.
    pub fn is_synchronous(self) -> bool {
        matches!(self, Interface::SG)
    }

    pub fn is_converter(self) -> bool {
        !self.is_synchronous()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DispatchClass {
    /// A: availability permanently caps output.
    HardLimited,
    /// B: availability caps output, short overshoot allowed.
    BriefOvershoot,
    /// C: an inherent store can lift output above availability.
    StorageBacked,
    /// D: availability never binds; response may be slow.
    UnconstrainedSlow,
    /// E: like D, plus consumption.
    Bidirectional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TechSpec {
    pub tech: Tech,
    pub response_time_s: f64,
    pub inherent_storage_s: f64,
    pub interface: Interface,
}

fn geometric_mean((lo, hi): (f64, f64)) -> f64 {
    if lo > 0.0 {
        (lo * hi).sqrt()
    } else {
        0.5 * (lo + hi)
    }
}

impl TechSpec {
    /// Defaults at the geometric mean of each range (midpoint when the range
    /// starts at zero).
    pub fn default_for(tech: Tech) -> Self {
        Self {
            tech,
            response_time_s: geometric_mean(tech.response_range_s()),
            inherent_storage_s: geometric_mean(tech.storage_range_s()),
            interface: tech.interface(),
        }
    }

    pub fn with_response_time(mut self, response_time_s: f64) -> Self {
        self.response_time_s = response_time_s;
        self
    }

    pub fn validate(&self) -> Result<(), UnitError> {
        let (lo, hi) = self.tech.response_range_s();
        if !(self.response_time_s >= lo && self.response_time_s <= hi) {
            return Err(UnitError::ResponseTimeOutOfRange {
                tech: self.tech,
                value: self.response_time_s,
                lo,
                hi,
            });
        }
        let (lo, hi) = self.tech.storage_range_s();
        let storage_ok = if lo.is_infinite() {
            self.inherent_storage_s.is_infinite()
        } else {
            self.inherent_storage_s >= lo && self.inherent_storage_s <= hi
        };
        if !storage_ok {
            return Err(UnitError::StorageTimeOutOfRange {
                tech: self.tech,
                value: self.inherent_storage_s,
                lo,
                hi,
            });
        }
        if self.interface != self.tech.interface() {
            return Err(UnitError::InterfaceMismatch {
                tech: self.tech,
                got: self.interface,
                expected: self.tech.interface(),
            });
        }
        Ok(())
    }

    pub fn dispatch_class(&self) -> DispatchClass {
        self.tech.dispatch_class()
    }

    /// Lag time constant; the response time is taken as the 95 % settling time.
    pub fn lag_time_constant_s(&self) -> f64 {
        self.response_time_s / 3.0
    }
}

/// Class B overshoot configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverloadConfig {
    pub budget_s: f64,
    pub max_overshoot_fraction: f64,
}

impl Default for OverloadConfig {
    fn default() -> Self {
        Self {
            budget_s: 10.0,
            max_overshoot_fraction: 0.2,
        }
    }
}

/// Static description of one unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSpec {
    pub tech: TechSpec,
    pub rating_mw: f64,
    pub storage_capacity_mwh: f64,
    pub overload: OverloadConfig,
}

impl UnitSpec {
    pub fn new(tech: TechSpec, rating_mw: f64) -> Self {
        Self {
            tech,
            rating_mw,
            storage_capacity_mwh: 0.0,
            overload: OverloadConfig::default(),
        }
    }

    pub fn with_storage(mut self, storage_capacity_mwh: f64) -> Self {
        self.storage_capacity_mwh = storage_capacity_mwh;
        self
    }

    pub fn class(&self) -> DispatchClass {
        self.tech.dispatch_class()
    }

    pub fn floor_mw(&self) -> f64 {
        match self.class() {
            DispatchClass::Bidirectional => -self.rating_mw,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitState {
    pub p_out_mw: f64,
    /// Scheduled set-point.
    pub p_cmd_mw: f64,
    /// Frequency-service offset added on top of the set-point.
    pub p_service_mw: f64,
    pub p_avail_mw: f64,
    pub energy_stored_mwh: f64,
    pub overload_budget_s: f64,
    /// Set once the overload budget is exhausted; cleared when it is full again.
    pub overload_recovering: bool,
    pub reserve_fraction: f64,
    /// Energy delivered since the state was created.
    pub energy_out_mwh: f64,
    /// Set when the last step had to clamp the command.
    pub saturated: bool,
}

impl UnitState {
    /// Steady state at `p_mw` with the overload budget full.
    pub fn new(spec: &UnitSpec, p_mw: f64, p_avail_mw: f64, reserve_fraction: f64) -> Self {
        Self {
            p_out_mw: p_mw,
            p_cmd_mw: p_mw,
            p_service_mw: 0.0,
            p_avail_mw,
            energy_stored_mwh: spec.storage_capacity_mwh,
            overload_budget_s: spec.overload.budget_s,
            overload_recovering: false,
            reserve_fraction,
            energy_out_mwh: 0.0,
            saturated: false,
        }
    }

    pub fn validate(&self) -> Result<(), UnitError> {
        if !(self.reserve_fraction >= 0.0 && self.reserve_fraction < 1.0) {
            return Err(UnitError::ReserveFraction(self.reserve_fraction));
        }
        if !(self.p_avail_mw.is_finite() && self.p_avail_mw >= 0.0) {
            return Err(UnitError::Negative("p_avail_mw"));
        }
        if !(self.energy_stored_mwh >= 0.0) {
            return Err(UnitError::Negative("energy_stored_mwh"));
        }
        if !(self.overload_budget_s >= 0.0) {
            return Err(UnitError::Negative("overload_budget_s"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Headroom {
    pub up_mw: f64,
    pub down_mw: f64,
}

/// Upper limits in force for the current state.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Ceilings {
    /// Cap on scheduled commands (reserve withheld).
    normal: f64,
    /// Cap on set-point plus frequency-service offset.
    service: f64,
}

/// Ceiling the frequency service may reach, without class B overshoot.
fn nominal_ceiling(state: &UnitState, spec: &UnitSpec) -> f64 {
    let rating = spec.rating_mw;
    match spec.class() {
        DispatchClass::HardLimited | DispatchClass::BriefOvershoot => {
            rating.min(state.p_avail_mw)
        }
        DispatchClass::StorageBacked => {
            if state.energy_stored_mwh > 0.0 {
                rating
            } else {
                rating.min(state.p_avail_mw)
            }
        }
        DispatchClass::UnconstrainedSlow | DispatchClass::Bidirectional => rating,
    }
}

fn ceilings(state: &UnitState, spec: &UnitSpec) -> Ceilings {
    let nominal = nominal_ceiling(state, spec);
    let keep = 1.0 - state.reserve_fraction;
    let base = match spec.class() {
        DispatchClass::HardLimited | DispatchClass::BriefOvershoot => state.p_avail_mw.min(spec.rating_mw),
        _ => nominal,
    };
    let normal = if base > 0.0 { base * keep } else { base };
    if spec.class() == DispatchClass::BriefOvershoot
        && state.overload_budget_s > 0.0
        && !state.overload_recovering
    {
        let over = state.p_avail_mw * (1.0 + spec.overload.max_overshoot_fraction);
        let over = over.min(spec.rating_mw).max(nominal);
        return Ceilings {
            normal: over,
            service: over,
        };
    }
    Ceilings {
        normal,
        service: nominal,
    }
}

/// Limits the scheduler works with: floor, cap on the set-point with the
/// deloading reserve withheld, and cap on set-point plus reserve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispatchLimits {
    pub p_min_mw: f64,
    pub p_max_mw: f64,
    pub reserve_cap_mw: f64,
}

pub fn dispatch_limits(state: &UnitState, spec: &UnitSpec) -> DispatchLimits {
    let nominal = nominal_ceiling(state, spec);
    let base = match spec.class() {
        DispatchClass::HardLimited | DispatchClass::BriefOvershoot => state.p_avail_mw.min(spec.rating_mw),
        _ => nominal,
    };
    let floor = spec.floor_mw();
    let p_max = if base > 0.0 { base * (1.0 - state.reserve_fraction) } else { base };
    DispatchLimits {
        p_min_mw: floor,
        p_max_mw: p_max.max(floor),
        reserve_cap_mw: nominal.max(floor),
    }
}

/// Set-point after applying the class rule for scheduled commands.
pub fn clamped_setpoint(state: &UnitState, spec: &UnitSpec) -> f64 {
    let c = ceilings(state, spec);
    state.p_cmd_mw.clamp(spec.floor_mw(), c.normal.max(spec.floor_mw()))
}

/// Limits on the frequency-service offset relative to the clamped set-point.
pub fn service_limits(state: &UnitState, spec: &UnitSpec) -> (f64, f64) {
    let setpoint = clamped_setpoint(state, spec);
    let hi = (nominal_ceiling(state, spec) - setpoint).max(0.0);
    let lo = (spec.floor_mw() - setpoint).min(0.0);
    (lo, hi)
}

/// Advances one unit by `dt` seconds.
///
/// The explicit update needs `dt <= τ/2`; larger steps are split into equal
/// sub-steps that satisfy it, so very fast units can share a coarse tick.
pub fn step_unit(state: &UnitState, spec: &UnitSpec, dt: f64) -> UnitState {
    let tau = spec.tech.lag_time_constant_s();
    let substeps = ((dt / (0.5 * tau)).ceil() as usize).max(1);
    let h = dt / substeps as f64;
    let mut s = *state;
    let mut saturated = false;
    for _ in 0..substeps {
        saturated |= substep(&mut s, spec, tau, h);
    }
    s.saturated = saturated;
    s
}

fn substep(s: &mut UnitState, spec: &UnitSpec, tau: f64, h: f64) -> bool {
    let class = spec.class();
    let floor = spec.floor_mw();
    let c = ceilings(s, spec);
    let setpoint = s.p_cmd_mw.clamp(floor, c.normal.max(floor));
    let requested = setpoint + s.p_service_mw;
    let upper = c.service.min(c.normal.max(floor) + s.p_service_mw.max(0.0));
    let target = requested.clamp(floor, upper.max(floor));
    let saturated = (s.p_cmd_mw - setpoint).abs() > POWER_TOL || (requested - target).abs() > POWER_TOL;

    let mut p = s.p_out_mw + (target - s.p_out_mw) * h / tau;

    match class {
        DispatchClass::HardLimited => p = p.min(upper),
        DispatchClass::StorageBacked => {
            let from_store = s.energy_stored_mwh * SECONDS_PER_HOUR / h;
            p = p.min(s.p_avail_mw + from_store);
        }
        _ => {}
    }
    p = p.max(floor);

    if class == DispatchClass::BriefOvershoot {
        if p > s.p_avail_mw + POWER_TOL {
            let remaining = s.overload_budget_s - h;
            if remaining < -POWER_TOL {
                p = p.min(s.p_avail_mw);
                s.overload_budget_s = 0.0;
            } else {
                s.overload_budget_s = remaining.max(0.0);
            }
        } else {
            s.overload_budget_s = (s.overload_budget_s + h).min(spec.overload.budget_s);
        }
        if s.overload_budget_s <= 0.0 {
            s.overload_recovering = true;
            p = p.min(s.p_avail_mw.max(floor));
        } else if s.overload_budget_s >= spec.overload.budget_s - POWER_TOL {
            s.overload_recovering = false;
        }
    }

    if class == DispatchClass::StorageBacked {
        let net = (s.p_avail_mw - p) * h / SECONDS_PER_HOUR;
        s.energy_stored_mwh = (s.energy_stored_mwh + net).clamp(0.0, spec.storage_capacity_mwh);
    }
    s.energy_out_mwh += p * h / SECONDS_PER_HOUR;
    s.p_out_mw = p;
    saturated
}

/// Updates primary-resource availability; the clamp applies from the next step.
pub fn set_availability(state: &UnitState, p_avail_mw: f64) -> UnitState {
    UnitState {
        p_avail_mw: p_avail_mw.max(0.0),
        ..*state
    }
}

/// Up and down room relative to current output. The deloading reserve counts
/// as upward room because the frequency service may release it.
pub fn headroom(state: &UnitState, spec: &UnitSpec) -> Headroom {
    let ceiling = nominal_ceiling(state, spec);
    Headroom {
        up_mw: (ceiling - state.p_out_mw).max(0.0),
        down_mw: (state.p_out_mw - spec.floor_mw()).max(0.0),
    }
}
