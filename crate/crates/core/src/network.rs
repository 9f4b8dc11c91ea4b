//! DC network model: topology, DC power flow, PTDF and line-outage sensitivities.
//!
//! Injections are expressed in MW and ordered like [`Network::buses`]. Flows are
//! in MW, positive in the `from_bus -> to_bus` direction. The slack bus absorbs
//! whatever imbalance the injection vector carries.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type BusId = u32;

/// Pivot threshold below which a line outage is treated as islanding.
const LODF_SINGULAR_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("bus {0} is defined more than once")]
    DuplicateBus(BusId),
    #[error("line {line} references unknown bus {bus}")]
    UnknownBus { line: usize, bus: BusId },
    #[error("line {line} connects bus {bus} to itself")]
    SelfLoop { line: usize, bus: BusId },
    #[error("line {line}: {what} must be strictly positive, got {value}")]
    NonPositiveLineParameter {
        line: usize,
        what: &'static str,
        value: f64,
    },
    #[error("bus {bus}: load must be finite and non-negative, got {value}")]
    InvalidLoad { bus: BusId, value: f64 },
    #[error("slack bus {0} does not exist")]
    UnknownSlack(BusId),
    #[error("s_base_mva must be strictly positive, got {0}")]
    InvalidBase(f64),
    #[error("network is singular: buses {unreachable:?} are not connected to slack bus {slack}")]
    SingularNetwork {
        slack: BusId,
        unreachable: Vec<BusId>,
    },
    #[error("outage of line {line} islands buses {islanded:?}")]
    IslandingOutage { line: usize, islanded: Vec<BusId> },
    #[error("bus {0} does not exist")]
    NoSuchBus(BusId),
    #[error("line index {0} out of range")]
    UnknownLine(usize),
    #[error("injection vector has {got} entries, network has {expected} buses")]
    InjectionLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoltageLevel {
    Transmission,
    Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: BusId,
    #[serde(default = "default_voltage_level")]
    pub voltage_level: VoltageLevel,
    #[serde(default)]
    pub load_mw: f64,
}

fn default_voltage_level() -> VoltageLevel {
    VoltageLevel::Transmission
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub from_bus: BusId,
    pub to_bus: BusId,
    pub reactance_pu: f64,
    #[serde(alias = "limit_mw")]
    pub flow_limit_mw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    buses: Vec<Bus>,
    lines: Vec<Line>,
    slack_bus: BusId,
    s_base_mva: f64,
    index: HashMap<BusId, usize>,
}

/// Result of a DC power flow.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerFlow {
    pub angles_rad: Vec<f64>,
    pub flows_mw: Vec<f64>,
    /// Injection actually taken by the slack bus after balancing.
    pub slack_injection_mw: f64,
}

impl Network {
    /// Builds a network, checking structural invariants. Connectivity is not
    /// required here; solves report [`NetworkError::SingularNetwork`] instead.
    pub fn new(
        buses: Vec<Bus>,
        lines: Vec<Line>,
        slack_bus: BusId,
        s_base_mva: f64,
    ) -> Result<Self, NetworkError> {
        if !(s_base_mva.is_finite() && s_base_mva > 0.0) {
            return Err(NetworkError::InvalidBase(s_base_mva));
        }
        let mut index = HashMap::with_capacity(buses.len());
        for (i, bus) in buses.iter().enumerate() {
            if index.insert(bus.id, i).is_some() {
                return Err(NetworkError::DuplicateBus(bus.id));
            }
            if !(bus.load_mw.is_finite() && bus.load_mw >= 0.0) {
                return Err(NetworkError::InvalidLoad {
                    bus: bus.id,
                    value: bus.load_mw,
                });
            }
        }
        if !index.contains_key(&slack_bus) {
            return Err(NetworkError::UnknownSlack(slack_bus));
        }
        for (l, line) in lines.iter().enumerate() {
            for bus in [line.from_bus, line.to_bus] {
                if !index.contains_key(&bus) {
                    return Err(NetworkError::UnknownBus { line: l, bus });
                }
            }
            if line.from_bus == line.to_bus {
                return Err(NetworkError::SelfLoop {
                    line: l,
                    bus: line.from_bus,
                });
            }
            if !(line.reactance_pu.is_finite() && line.reactance_pu > 0.0) {
                return Err(NetworkError::NonPositiveLineParameter {
                    line: l,
                    what: "reactance_pu",
                    value: line.reactance_pu,
                });
            }
            if !(line.flow_limit_mw > 0.0) {
                return Err(NetworkError::NonPositiveLineParameter {
                    line: l,
                    what: "flow_limit_mw",
                    value: line.flow_limit_mw,
                });
            }
        }
        Ok(Self {
            buses,
            lines,
            slack_bus,
            s_base_mva,
            index,
        })
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn slack_bus(&self) -> BusId {
        self.slack_bus
    }

    pub fn s_base_mva(&self) -> f64 {
        self.s_base_mva
    }

    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    pub fn bus_index(&self, id: BusId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    fn slack_index(&self) -> usize {
        self.index[&self.slack_bus]
    }

    pub fn set_load(&mut self, bus: BusId, load_mw: f64) -> Result<(), NetworkError> {
        if !(load_mw.is_finite() && load_mw >= 0.0) {
            return Err(NetworkError::InvalidLoad {
                bus,
                value: load_mw,
            });
        }
        let i = self
            .bus_index(bus)
            .ok_or(NetworkError::NoSuchBus(bus))?;
        self.buses[i].load_mw = load_mw;
        Ok(())
    }

    pub fn total_load_mw(&self) -> f64 {
        self.buses.iter().map(|b| b.load_mw).sum()
    }

    /// Converts a sparse bus map into a dense injection vector.
    pub fn injection_vector(&self, injections: &HashMap<BusId, f64>) -> Vec<f64> {
        self.buses
            .iter()
            .map(|b| injections.get(&b.id).copied().unwrap_or(0.0))
            .collect()
    }

    /// Copy of this network with one line removed.
    pub fn without_line(&self, line: usize) -> Result<Network, NetworkError> {
        if line >= self.lines.len() {
            return Err(NetworkError::UnknownLine(line));
        }
        let mut lines = self.lines.clone();
        lines.remove(line);
        Network::new(self.buses.clone(), lines, self.slack_bus, self.s_base_mva)
    }

    /// Buses that cannot reach the slack bus, optionally ignoring one line.
    fn unreachable_from_slack(&self, skip_line: Option<usize>) -> Vec<BusId> {
        let n = self.buses.len();
        let mut adj = vec![Vec::new(); n];
        for (l, line) in self.lines.iter().enumerate() {
            if Some(l) == skip_line {
                continue;
            }
            let (a, b) = (self.index[&line.from_bus], self.index[&line.to_bus]);
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([self.slack_index()]);
        seen[self.slack_index()] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        let mut out: Vec<BusId> = (0..n)
            .filter(|&i| !seen[i])
            .map(|i| self.buses[i].id)
            .collect();
        out.sort_unstable();
        out
    }

    pub fn check_connected(&self) -> Result<(), NetworkError> {
        let unreachable = self.unreachable_from_slack(None);
        if unreachable.is_empty() {
            Ok(())
        } else {
            Err(NetworkError::SingularNetwork {
                slack: self.slack_bus,
                unreachable,
            })
        }
    }

    /// Maps a full bus index onto the reduced (slack removed) index.
    fn reduced_index(&self, full: usize) -> Option<usize> {
        let slack = self.slack_index();
        match full.cmp(&slack) {
            std::cmp::Ordering::Less => Some(full),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(full - 1),
        }
    }

    /// Inverse of the reduced susceptance matrix (per unit), slack row removed.
    fn reduced_b_inverse(&self) -> Result<DMatrix<f64>, NetworkError> {
        self.check_connected()?;
        let m = self.buses.len() - 1;
        let mut b = DMatrix::<f64>::zeros(m, m);
        for line in &self.lines {
            let y = 1.0 / line.reactance_pu;
            let i = self.reduced_index(self.index[&line.from_bus]);
            let j = self.reduced_index(self.index[&line.to_bus]);
            if let Some(i) = i {
                b[(i, i)] += y;
            }
            if let Some(j) = j {
                b[(j, j)] += y;
            }
            if let (Some(i), Some(j)) = (i, j) {
                b[(i, j)] -= y;
                b[(j, i)] -= y;
            }
        }
        if m == 0 {
            return Ok(b);
        }
        b.lu()
            .try_inverse()
            .ok_or_else(|| NetworkError::SingularNetwork {
                slack: self.slack_bus,
                unreachable: Vec::new(),
            })
    }

    fn check_len(&self, injections: &[f64]) -> Result<(), NetworkError> {
        if injections.len() != self.buses.len() {
            return Err(NetworkError::InjectionLength {
                expected: self.buses.len(),
                got: injections.len(),
            });
        }
        Ok(())
    }
}

/// Solves `B θ = P` with the slack angle fixed at zero.
pub fn solve_dc_power_flow(net: &Network, injections: &[f64]) -> Result<PowerFlow, NetworkError> {
    net.check_len(injections)?;
    let x = net.reduced_b_inverse()?;
    let slack = net.slack_index();
    let s_base = net.s_base_mva;

    let p_red = DVector::from_iterator(
        net.buses.len() - 1,
        injections
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != slack)
            .map(|(_, p)| p / s_base),
    );
    let theta_red = &x * p_red;
    let mut angles = vec![0.0; net.buses.len()];
    for (i, angle) in angles.iter_mut().enumerate() {
        if let Some(r) = net.reduced_index(i) {
            *angle = theta_red[r];
        }
    }
    let flows = net
        .lines
        .iter()
        .map(|line| {
            let (a, b) = (net.index[&line.from_bus], net.index[&line.to_bus]);
            (angles[a] - angles[b]) / line.reactance_pu * s_base
        })
        .collect();
    let others: f64 = injections
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != slack)
        .map(|(_, p)| p)
        .sum();
    Ok(PowerFlow {
        angles_rad: angles,
        flows_mw: flows,
        slack_injection_mw: -others,
    })
}

/// Power transfer distribution factors, `lines × buses`.
///
/// Column `b` gives the MW flow change on every line for 1 MW injected at bus
/// `b` and withdrawn at the slack bus, so the slack column is identically zero.
pub fn ptdf(net: &Network) -> Result<DMatrix<f64>, NetworkError> {
    let x = net.reduced_b_inverse()?;
    let n = net.buses.len();
    let mut out = DMatrix::<f64>::zeros(net.lines.len(), n);
    for (l, line) in net.lines.iter().enumerate() {
        let i = net.reduced_index(net.index[&line.from_bus]);
        let j = net.reduced_index(net.index[&line.to_bus]);
        for bus in 0..n {
            let Some(k) = net.reduced_index(bus) else {
                continue;
            };
            let xi = i.map_or(0.0, |i| x[(i, k)]);
            let xj = j.map_or(0.0, |j| x[(j, k)]);
            out[(l, bus)] = (xi - xj) / line.reactance_pu;
        }
    }
    Ok(out)
}

/// Sensitivity of every line flow to a unit transfer across line `k`, i.e. the
/// PTDF of the injection pair (`+1` at `from_bus`, `-1` at `to_bus`).
fn transfer_sensitivity(net: &Network, ptdf: &DMatrix<f64>, k: usize) -> DVector<f64> {
    let line = &net.lines[k];
    let a = net.index[&line.from_bus];
    let b = net.index[&line.to_bus];
    ptdf.column(a) - ptdf.column(b)
}

/// Line outage distribution factors for outage of line `k`: entry `l` is the
/// fraction of the pre-outage flow on `k` that shifts onto line `l`.
pub fn lodf_column(net: &Network, ptdf: &DMatrix<f64>, k: usize) -> Result<DVector<f64>, NetworkError> {
    if k >= net.lines.len() {
        return Err(NetworkError::UnknownLine(k));
    }
    let islanded = net.unreachable_from_slack(Some(k));
    let sens = transfer_sensitivity(net, ptdf, k);
    let denom = 1.0 - sens[k];
    if !islanded.is_empty() || denom.abs() < LODF_SINGULAR_TOL {
        return Err(NetworkError::IslandingOutage { line: k, islanded });
    }
    let mut col = sens / denom;
    col[k] = -1.0;
    Ok(col)
}

/// Post-outage flows after removing line `outaged`, computed from the base case
/// with line outage distribution factors. The outaged line reports zero flow.
pub fn line_outage_flows(
    net: &Network,
    injections: &[f64],
    outaged: usize,
) -> Result<Vec<f64>, NetworkError> {
    let base = solve_dc_power_flow(net, injections)?;
    let sens = ptdf(net)?;
    line_outage_flows_from_base(net, &sens, &base.flows_mw, outaged)
}

/// Same as [`line_outage_flows`] when the PTDF and base-case flows are already known.
pub fn line_outage_flows_from_base(
    net: &Network,
    ptdf: &DMatrix<f64>,
    base_flows: &[f64],
    outaged: usize,
) -> Result<Vec<f64>, NetworkError> {
    let lodf = lodf_column(net, ptdf, outaged)?;
    let fk = base_flows[outaged];
    let mut flows: Vec<f64> = base_flows
        .iter()
        .zip(lodf.iter())
        .map(|(f, d)| f + d * fk)
        .collect();
    flows[outaged] = 0.0;
    Ok(flows)
}

/// Flows predicted by a PTDF matrix for the given injections.
pub fn ptdf_flows(ptdf: &DMatrix<f64>, injections: &[f64]) -> Vec<f64> {
    let p = DVector::from_column_slice(injections);
    (ptdf * p).iter().copied().collect()
}
