//! Scenario files: network, unit portfolio, DVPP specification and
//! redispatch settings, plus the four built-in benchmark scenarios.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coordination::DvppSpec;
use crate::frequency::{InertiaSource, DEFAULT_F_NOMINAL_HZ};
use crate::network::{Bus, BusId, Line, Network, VoltageLevel};
use crate::redispatch::ReserveRule;
use crate::units::{Interface, Tech, TechSpec, UnitSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: file not found")]
    NotFound { path: PathBuf },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {msg}", location(origin, *line))]
    Parse {
        origin: String,
        line: usize,
        msg: String,
    },
    #[error("{}: {msg}", location(origin, *line))]
    Validation {
        origin: String,
        line: usize,
        msg: String,
    },
}

/// `origin:line`, or just `origin` when the line is unknown (0).
pub(crate) fn location(origin: &str, line: usize) -> String {
    if line == 0 {
        origin.to_string()
    } else {
        format!("{origin}:{line}")
    }
}

/// 1-based line containing byte `offset`.
pub(crate) fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// 1-based line of the first occurrence of `needle`, or 0.
pub(crate) fn line_of(text: &str, needle: &str) -> usize {
    text.find(needle).map_or(0, |o| line_of_offset(text, o))
}

pub(crate) fn parse_error(text: &str, origin: &str, e: &toml::de::Error) -> ScenarioError {
    ScenarioError::Parse {
        origin: origin.to_string(),
        line: e.span().map_or(0, |s| line_of_offset(text, s.start)),
        msg: e.message().to_string(),
    }
}

/// Reads and deserializes any TOML input file, with `file:line` on errors.
pub fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ScenarioError> {
    let text = read_file(path)?;
    toml::from_str(&text).map_err(|e| parse_error(&text, &path.display().to_string(), &e))
}

pub(crate) fn read_file(path: &Path) -> Result<String, ScenarioError> {
    std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            ScenarioError::NotFound { path: path.to_path_buf() }
        } else {
            ScenarioError::Io { path: path.to_path_buf(), source }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    TypeI,
    #[serde(rename = "type_ii_south")]
    TypeIISouth,
    #[serde(rename = "type_ii_north")]
    TypeIINorth,
    #[serde(rename = "type_iii")]
    TypeIII,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::TypeI,
        ScenarioKind::TypeIISouth,
        ScenarioKind::TypeIINorth,
        ScenarioKind::TypeIII,
    ];

    pub fn expected_bus_count(self) -> usize {
        match self {
            ScenarioKind::TypeI => 7,
            ScenarioKind::TypeIISouth | ScenarioKind::TypeIINorth => 13,
            ScenarioKind::TypeIII => 11,
        }
    }

    /// Name of the built-in scenario, also accepted by [`FromStr`].
    pub fn builtin_name(self) -> &'static str {
        match self {
            ScenarioKind::TypeI => "type-i",
            ScenarioKind::TypeIISouth => "type-ii-south",
            ScenarioKind::TypeIINorth => "type-ii-north",
            ScenarioKind::TypeIII => "type-iii",
        }
    }

    pub fn builtin_source(self) -> &'static str {
        match self {
            ScenarioKind::TypeI => include_str!("../scenarios/type-i.toml"),
            ScenarioKind::TypeIISouth => include_str!("../scenarios/type-ii-south.toml"),
            ScenarioKind::TypeIINorth => include_str!("../scenarios/type-ii-north.toml"),
            ScenarioKind::TypeIII => include_str!("../scenarios/type-iii.toml"),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.builtin_name())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.builtin_name() == norm)
            .ok_or_else(|| format!("unknown scenario kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContingencySet {
    None,
    #[default]
    Lines,
    /// Lines and DVPP units.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RedispatchConfig {
    /// Fixed upward reserve; absent means the largest-unit rule.
    #[serde(default)]
    pub reserve_mw: Option<f64>,
    #[serde(default)]
    pub contingencies: ContingencySet,
    #[serde(default = "yes")]
    pub allow_degraded: bool,
}

impl Default for RedispatchConfig {
    fn default() -> Self {
        Self {
            reserve_mw: None,
            contingencies: ContingencySet::Lines,
            allow_degraded: true,
        }
    }
}

impl RedispatchConfig {
    pub fn reserve_rule(&self) -> ReserveRule {
        match self.reserve_mw {
            Some(r) if r > 0.0 => ReserveRule::Fixed(r),
            Some(_) => ReserveRule::None,
            None => ReserveRule::LargestUnit,
        }
    }
}

/// Hourly DVPP output targets; the last entry holds after the schedule ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSchedule {
    pub schedule_mw: Vec<f64>,
}

fn yes() -> bool {
    true
}

fn default_f_nominal() -> f64 {
    DEFAULT_F_NOMINAL_HZ
}

fn default_d_load() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitConfig {
    pub id: String,
    pub tech: Tech,
    pub bus: BusId,
    pub rating_mw: f64,
    /// Whether the unit belongs to the DVPP portfolio.
    #[serde(default = "yes")]
    pub dvpp: bool,
    #[serde(default)]
    pub cost_per_mwh: f64,
    #[serde(default)]
    pub reserve_fraction: f64,
    /// Primary-resource availability; defaults to the rating.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub available_mw: Option<f64>,
    #[serde(default)]
    pub storage_mwh: f64,
    /// Fixed output of a unit outside the DVPP; defaults to its availability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setpoint_mw: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_time_s: Option<f64>,
    /// Inertia constant on the unit rating.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia_s: Option<f64>,
    #[serde(default = "yes")]
    pub online: bool,
}

impl UnitConfig {
    pub fn tech_spec(&self) -> TechSpec {
        let t = TechSpec::default_for(self.tech);
        match self.response_time_s {
            Some(r) => t.with_response_time(r),
            None => t,
        }
    }

    pub fn unit_spec(&self) -> UnitSpec {
        UnitSpec::new(self.tech_spec(), self.rating_mw).with_storage(self.storage_mwh)
    }

    pub fn available(&self) -> f64 {
        self.available_mw.unwrap_or(self.rating_mw)
    }

    pub fn inertia(&self) -> f64 {
        self.inertia_s.unwrap_or_else(|| self.tech.default_inertia_s())
    }

    /// Output of a unit outside the DVPP.
    pub fn background_output(&self) -> f64 {
        if !self.online {
            return 0.0;
        }
        self.setpoint_mw.unwrap_or_else(|| self.available().min(self.rating_mw))
    }

    pub fn inertia_source(&self) -> InertiaSource {
        InertiaSource {
            interface: self.tech.interface(),
            inertia_s: self.inertia(),
            rating_mw: self.rating_mw,
            online: self.online,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub name: String,
    pub kind: ScenarioKind,
    pub s_base_mva: f64,
    pub slack_bus: BusId,
    #[serde(default = "default_f_nominal")]
    pub f_nominal_hz: f64,
    /// Load damping, pu power per pu frequency.
    #[serde(default = "default_d_load")]
    pub d_load: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_forming_tau_s: Option<f64>,
    /// DVPP output target; defaults to load minus units outside the DVPP.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_mw: Option<f64>,
    pub dvpp: DvppSpec,
    #[serde(default)]
    pub redispatch: RedispatchConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub market: Option<MarketSchedule>,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub units: Vec<UnitConfig>,
}

/// Fixed topology of a scenario with its unit placements.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTopology {
    pub kind: ScenarioKind,
    pub network: Network,
    pub placements: BTreeMap<String, BusId>,
}

impl Scenario {
    pub fn builtin(kind: ScenarioKind) -> Scenario {
        Scenario::from_toml_str(kind.builtin_source(), kind.builtin_name())
            .expect("built-in scenario is valid")
    }

    /// Reads a scenario file, or a built-in when `arg` names one and no such
    /// file exists.
    pub fn load_or_builtin(arg: &str) -> Result<Scenario, ScenarioError> {
        let path = Path::new(arg);
        if !path.exists() {
            if let Ok(kind) = arg.parse::<ScenarioKind>() {
                return Ok(Scenario::builtin(kind));
            }
        }
        Scenario::load(path)
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = read_file(path)?;
        Scenario::from_toml_str(&text, &path.display().to_string())
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Scenario, ScenarioError> {
        let s: Scenario = toml::from_str(text).map_err(|e| parse_error(text, origin, &e))?;
        s.validate().map_err(|(needle, msg)| ScenarioError::Validation {
            origin: origin.to_string(),
            line: needle.map_or(0, |n| line_of(text, &n)),
            msg,
        })?;
        Ok(s)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Checks every invariant. On failure returns a snippet locating the
    /// offending item in the source text, and a message.
    pub fn validate(&self) -> Result<(), (Option<String>, String)> {
        let fail = |needle: Option<String>, msg: String| Err((needle, msg));
        if self.version != SCHEMA_VERSION {
            return fail(Some("version".into()), format!("unsupported schema version {}", self.version));
        }
        let net = self.network().map_err(|e| (None, e.to_string()))?;
        net.check_connected().map_err(|e| (None, e.to_string()))?;

        let expected = self.kind.expected_bus_count();
        if self.buses.len() != expected {
            return fail(
                Some("kind".into()),
                format!("{} requires {expected} buses, found {}", self.kind, self.buses.len()),
            );
        }
        let levels: HashSet<VoltageLevel> = self.buses.iter().map(|b| b.voltage_level).collect();
        let single = self.kind == ScenarioKind::TypeI;
        if single && levels.len() != 1 {
            return fail(Some("kind".into()), format!("{} uses a single voltage level", self.kind));
        }
        if !single && levels.len() != 2 {
            return fail(
                Some("kind".into()),
                format!("{} needs both transmission and distribution buses", self.kind),
            );
        }
        if !(self.f_nominal_hz.is_finite() && self.f_nominal_hz > 0.0) {
            return fail(Some("f_nominal_hz".into()), "f_nominal_hz must be positive".into());
        }
        if !(self.d_load.is_finite() && self.d_load >= 0.0) {
            return fail(Some("d_load".into()), "d_load must be non-negative".into());
        }
        if let Some(t) = self.grid_forming_tau_s {
            if !(t.is_finite() && t > 0.0) {
                return fail(Some("grid_forming_tau_s".into()), "grid_forming_tau_s must be positive".into());
            }
        }
        if let Some(t) = self.target_mw {
            if !t.is_finite() {
                return fail(Some("target_mw".into()), "target_mw must be finite".into());
            }
        }
        self.dvpp
            .validate()
            .map_err(|e| (Some("[dvpp]".to_string()), e.to_string()))?;
        if let Some(r) = self.redispatch.reserve_mw {
            if !(r.is_finite() && r >= 0.0) {
                return fail(Some("reserve_mw".into()), "reserve_mw must be non-negative".into());
            }
        }
        if let Some(m) = &self.market {
            if m.schedule_mw.is_empty() || m.schedule_mw.iter().any(|v| !v.is_finite()) {
                return fail(Some("schedule_mw".into()), "schedule_mw must be a non-empty list of finite values".into());
            }
        }

        let mut seen = HashSet::new();
        for u in &self.units {
            let at = Some(format!("\"{}\"", u.id));
            let bad = |m: String| fail(at.clone(), format!("unit `{}`: {m}", u.id));
            if u.id.is_empty() || u.id.contains([',', '"', '\n']) {
                return fail(None, format!("unit id `{}` must be non-empty without commas or quotes", u.id));
            }
            if !seen.insert(u.id.as_str()) {
                return bad("duplicate id".into());
            }
            if net.bus_index(u.bus).is_none() {
                return bad(format!("bus {} does not exist", u.bus));
            }
            if !(u.rating_mw.is_finite() && u.rating_mw > 0.0) {
                return bad("rating_mw must be positive".into());
            }
            if let Err(e) = u.tech_spec().validate() {
                return bad(e.to_string());
            }
            if !(u.reserve_fraction >= 0.0 && u.reserve_fraction < 1.0) {
                return bad("reserve_fraction must lie in [0, 1)".into());
            }
            if !(u.available().is_finite() && u.available() >= 0.0) {
                return bad("available_mw must be non-negative".into());
            }
            if !(u.storage_mwh.is_finite() && u.storage_mwh >= 0.0) {
                return bad("storage_mwh must be non-negative".into());
            }
            if !(u.cost_per_mwh.is_finite()) {
                return bad("cost_per_mwh must be finite".into());
            }
            if !(u.inertia().is_finite() && u.inertia() >= 0.0) {
                return bad("inertia_s must be non-negative".into());
            }
            if let Some(sp) = u.setpoint_mw {
                let floor = u.unit_spec().floor_mw();
                if u.dvpp {
                    return bad("setpoint_mw applies only to units outside the DVPP".into());
                }
                if !(sp >= floor && sp <= u.rating_mw) {
                    return bad(format!("setpoint_mw {sp} outside [{floor}, {}]", u.rating_mw));
                }
            }
        }
        if !self.units.iter().any(|u| u.dvpp && u.online) {
            return fail(Some("[[units]]".into()), "the DVPP has no online units".into());
        }
        Ok(())
    }

    pub fn network(&self) -> Result<Network, crate::network::NetworkError> {
        Network::new(self.buses.clone(), self.lines.clone(), self.slack_bus, self.s_base_mva)
    }

    pub fn topology(&self) -> ScenarioTopology {
        ScenarioTopology {
            kind: self.kind,
            network: self.network().expect("validated scenario"),
            placements: self.units.iter().map(|u| (u.id.clone(), u.bus)).collect(),
        }
    }

    pub fn unit(&self, id: &str) -> Option<&UnitConfig> {
        self.units.iter().find(|u| u.id == id)
    }

    pub fn dvpp_units(&self) -> impl Iterator<Item = &UnitConfig> {
        self.units.iter().filter(|u| u.dvpp && u.online)
    }

    pub fn background_units(&self) -> impl Iterator<Item = &UnitConfig> {
        self.units.iter().filter(|u| !u.dvpp)
    }

    pub fn total_load_mw(&self) -> f64 {
        self.buses.iter().map(|b| b.load_mw).sum()
    }

    pub fn target_mw(&self) -> f64 {
        self.target_mw.unwrap_or_else(|| {
            self.total_load_mw() - self.background_units().map(UnitConfig::background_output).sum::<f64>()
        })
    }

    /// Sum of DVPP ratings.
    pub fn dvpp_rating_mw(&self) -> f64 {
        self.dvpp_units().map(|u| u.rating_mw).sum()
    }

    /// Synchronous inertia of online units on the system base.
    pub fn system_inertia_s(&self) -> f64 {
        let sources: Vec<InertiaSource> = self.units.iter().map(UnitConfig::inertia_source).collect();
        crate::frequency::online_inertia(&sources, self.s_base_mva)
    }

    /// Share of DVPP rating behind converters.
    pub fn converter_share(&self) -> f64 {
        let pe: f64 = self
            .dvpp_units()
            .filter(|u| u.tech.interface() != Interface::SG)
            .map(|u| u.rating_mw)
            .sum();
        pe / self.dvpp_rating_mw()
    }
}

pub fn builtin_scenario(kind: ScenarioKind) -> ScenarioTopology {
    Scenario::builtin(kind).topology()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::DispatchClass;

    #[test]
    fn builtin_bus_counts() {
        let counts: Vec<usize> = ScenarioKind::ALL
            .iter()
            .map(|&k| builtin_scenario(k).network.bus_count())
            .collect();
        assert_eq!(counts, vec![7, 13, 13, 11]);
    }

    #[test]
    fn type_i_single_voltage_level() {
        let t = builtin_scenario(ScenarioKind::TypeI);
        assert!(t.network.buses().iter().all(|b| b.voltage_level == VoltageLevel::Transmission));
    }

    #[test]
    fn type_ii_mixes_levels_and_south_is_solar_heavy() {
        let south = Scenario::builtin(ScenarioKind::TypeIISouth);
        let levels: HashSet<_> = south.buses.iter().map(|b| b.voltage_level).collect();
        assert_eq!(levels.len(), 2);
        let by = |s: &Scenario, t: Tech| s.dvpp_units().filter(|u| u.tech == t).map(|u| u.rating_mw).sum::<f64>();
        assert!(by(&south, Tech::PV) > by(&south, Tech::W));
        let north = Scenario::builtin(ScenarioKind::TypeIINorth);
        assert!(by(&north, Tech::W) > by(&north, Tech::PV));
    }

    #[test]
    fn type_i_balance() {
        let s = Scenario::builtin(ScenarioKind::TypeI);
        assert_eq!(s.total_load_mw(), 100.0);
        assert_eq!(s.target_mw(), 55.0);
        // CC 5·60 + BIO 4·12 + HYD 3·60, over 100 MVA
        assert!((s.system_inertia_s() - 5.28).abs() < 1e-12);
    }

    #[test]
    fn placements_cover_units() {
        let t = builtin_scenario(ScenarioKind::TypeIII);
        assert_eq!(t.placements.len(), 7);
        assert_eq!(t.placements["PS1"], 3);
        let s = Scenario::builtin(ScenarioKind::TypeIII);
        assert_eq!(s.unit("PS1").unwrap().unit_spec().class(), DispatchClass::Bidirectional);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ScenarioKind::ALL {
            assert_eq!(k.builtin_name().parse::<ScenarioKind>().unwrap(), k);
        }
        assert_eq!("TYPE_II_NORTH".parse::<ScenarioKind>().unwrap(), ScenarioKind::TypeIINorth);
        assert!("type-iv".parse::<ScenarioKind>().is_err());
    }

    #[test]
    fn serialized_scenario_reparses() {
        for k in ScenarioKind::ALL {
            let s = Scenario::builtin(k);
            let again = Scenario::from_toml_str(&s.to_toml_string(), "echo").unwrap();
            assert_eq!(again, s);
        }
    }

    #[test]
    fn parse_error_has_line() {
        let text = Scenario::builtin(ScenarioKind::TypeI).to_toml_string().replace("droop_d = 10.0", "droop_d = \"x\"");
        let err = Scenario::from_toml_str(&text, "bad.toml").unwrap_err();
        let line = line_of(&text, "droop_d");
        assert!(err.to_string().starts_with(&format!("bad.toml:{line}:")), "{err}");
    }

    #[test]
    fn validation_names_unit_and_line() {
        let src = ScenarioKind::TypeI.builtin_source().replace("tech = \"PV\"\nbus = 5", "tech = \"PV\"\nbus = 99");
        let err = Scenario::from_toml_str(&src, "s.toml").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, ScenarioError::Validation { .. }));
        assert!(msg.contains("PV1") && msg.contains("99"), "{msg}");
        assert!(msg.starts_with(&format!("s.toml:{}:", line_of(&src, "\"PV1\""))), "{msg}");
    }

    #[test]
    fn bus_count_invariant_enforced() {
        let src = ScenarioKind::TypeI.builtin_source().replace("kind = \"type_i\"", "kind = \"type_iii\"");
        assert!(Scenario::from_toml_str(&src, "s").is_err());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let src = ScenarioKind::TypeI.builtin_source().replace("id = \"W1\"", "id = \"PV1\"");
        let msg = Scenario::from_toml_str(&src, "s").unwrap_err().to_string();
        assert!(msg.contains("duplicate"), "{msg}");
    }

    #[test]
    fn missing_file_is_not_found() {
        let err = Scenario::load(Path::new("/nonexistent/scenario.toml")).unwrap_err();
        assert!(matches!(err, ScenarioError::NotFound { .. }));
        assert!(err.to_string().contains("/nonexistent/scenario.toml"));
    }

    #[test]
    fn reserve_rules() {
        let mut r = RedispatchConfig::default();
        assert_eq!(r.reserve_rule(), ReserveRule::LargestUnit);
        r.reserve_mw = Some(5.0);
        assert_eq!(r.reserve_rule(), ReserveRule::Fixed(5.0));
        r.reserve_mw = Some(0.0);
        assert_eq!(r.reserve_rule(), ReserveRule::None);
    }
}
