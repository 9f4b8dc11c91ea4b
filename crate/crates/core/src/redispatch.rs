//! Security-constrained redispatch of the DVPP units.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::lp::{LinearProgram, LpError, Relation};
use crate::network::{
    lodf_column, ptdf, ptdf_flows, solve_dc_power_flow, BusId, Network, NetworkError,
};

/// Constraint tolerance of the independent validator, MW.
pub const VALIDATION_TOL_MW: f64 = 1e-6;
/// Relative slack allowed on the optimal cost in the tie-breaking stage.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RedispatchError {
    #[error("redispatch infeasible; binding constraint groups: {}", binding.join(", "))]
    Infeasible { binding: Vec<String> },
    #[error("unit `{0}` is placed at unknown bus {1}")]
    UnknownBus(String, BusId),
    #[error("unit `{0}` has p_min above p_max")]
    InvertedLimits(String),
    #[error("unknown contingency: {0}")]
    UnknownContingency(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("LP solver failed: {0}")]
    Solver(LpError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchUnit {
    pub id: String,
    pub bus: BusId,
    pub cost_per_mwh: f64,
    pub p_min_mw: f64,
    /// Cap on the scheduled set-point.
    pub p_max_mw: f64,
    /// Cap on set-point plus held reserve.
    pub reserve_cap_mw: f64,
}

impl DispatchUnit {
    pub fn new(id: impl Into<String>, bus: BusId, cost_per_mwh: f64, p_min_mw: f64, p_max_mw: f64) -> Self {
        Self {
            id: id.into(),
            bus,
            cost_per_mwh,
            p_min_mw,
            p_max_mw,
            reserve_cap_mw: p_max_mw,
        }
    }

    pub fn with_reserve_cap(mut self, cap_mw: f64) -> Self {
        self.reserve_cap_mw = cap_mw;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ReserveRule {
    None,
    Fixed(f64),
    /// Survivors must cover the output of any single unit.
    LargestUnit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Contingency {
    /// Index into the network's line list.
    Line(usize),
    Unit(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchProblem {
    pub network: Network,
    pub units: Vec<DispatchUnit>,
    pub target_mw: f64,
    /// Injections outside the DVPP per bus (loads negative), in bus order.
    pub fixed_injections_mw: Vec<f64>,
    pub reserve: ReserveRule,
    pub contingencies: Vec<Contingency>,
    /// Accept a solution without reserve constraints when the full problem is
    /// infeasible.
    pub allow_degraded: bool,
}

impl DispatchProblem {
    /// Bus loads become the fixed injections; no reserve, no contingencies.
    pub fn new(network: Network, units: Vec<DispatchUnit>, target_mw: f64) -> Self {
        let fixed = network.buses().iter().map(|b| -b.load_mw).collect();
        Self {
            network,
            units,
            target_mw,
            fixed_injections_mw: fixed,
            reserve: ReserveRule::None,
            contingencies: Vec::new(),
            allow_degraded: false,
        }
    }

    pub fn add_fixed_injection(&mut self, bus: BusId, mw: f64) -> Result<(), RedispatchError> {
        let i = self
            .network
            .bus_index(bus)
            .ok_or(NetworkError::NoSuchBus(bus))?;
        self.fixed_injections_mw[i] += mw;
        Ok(())
    }

    /// Every line and every unit as a single outage.
    pub fn with_all_contingencies(mut self) -> Self {
        self.contingencies = (0..self.network.lines().len())
            .map(Contingency::Line)
            .chain(self.units.iter().map(|u| Contingency::Unit(u.id.clone())))
            .collect();
        self
    }

    fn injections(&self, p: &[f64]) -> Result<Vec<f64>, RedispatchError> {
        let mut inj = self.fixed_injections_mw.clone();
        for (u, &pi) in self.units.iter().zip(p) {
            inj[self.bus_of(u)?] += pi;
        }
        Ok(inj)
    }

    fn bus_of(&self, u: &DispatchUnit) -> Result<usize, RedispatchError> {
        self.network
            .bus_index(u.bus)
            .ok_or_else(|| RedispatchError::UnknownBus(u.id.clone(), u.bus))
    }

    fn unit_index(&self, id: &str) -> Result<usize, RedispatchError> {
        self.units
            .iter()
            .position(|u| u.id == id)
            .ok_or_else(|| RedispatchError::UnknownContingency(format!("unit `{id}`")))
    }

    /// Share of unit `k`'s lost output picked up by each survivor, in
    /// proportion to its reserve capacity.
    pub fn activation_shares(&self, k: usize) -> Vec<f64> {
        let cap: Vec<f64> = self
            .units
            .iter()
            .enumerate()
            .map(|(j, u)| if j == k { 0.0 } else { (u.reserve_cap_mw - u.p_min_mw).max(0.0) })
            .collect();
        let total: f64 = cap.iter().sum();
        if total <= 0.0 {
            return vec![0.0; cap.len()];
        }
        cap.iter().map(|c| c / total).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DispatchStatus {
    Optimal,
    Infeasible,
    Degraded,
}

impl std::fmt::Display for DispatchStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DispatchStatus::Optimal => "optimal",
            DispatchStatus::Infeasible => "infeasible",
            DispatchStatus::Degraded => "degraded",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitDispatch {
    pub id: String,
    pub p_set_mw: f64,
    pub reserve_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchSolution {
    pub units: Vec<UnitDispatch>,
    pub base_flows_mw: Vec<f64>,
    /// Per line, the post-contingency flow of largest magnitude.
    pub worst_contingency_flows_mw: Vec<f64>,
    pub objective: f64,
    pub status: DispatchStatus,
    /// Line contingencies skipped because the outage islands the network.
    pub islanding_lines: Vec<usize>,
}

impl DispatchSolution {
    pub fn p_set(&self, id: &str) -> Option<f64> {
        self.units.iter().find(|u| u.id == id).map(|u| u.p_set_mw)
    }

    pub fn p_vector(&self) -> Vec<f64> {
        self.units.iter().map(|u| u.p_set_mw).collect()
    }
}

/// Rows of the LP, tagged by the group used in infeasibility reports.
struct Row {
    group: &'static str,
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

struct Formulation {
    rows: Vec<Row>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    islanding_lines: Vec<usize>,
}

const GROUPS: [&str; 5] = ["balance", "reserve", "base_flows", "line_contingencies", "unit_contingencies"];
const RESERVE_GROUPS: [&str; 2] = ["reserve", "unit_contingencies"];

/// Variables: `p_0..p_{n−1}` then `r_0..r_{n−1}`.
fn formulate(problem: &DispatchProblem, sens: &DMatrix<f64>) -> Result<Formulation, RedispatchError> {
    let n = problem.units.len();
    let nv = 2 * n;
    let net = &problem.network;
    let mut rows = Vec::new();
    let mut lower = vec![0.0; nv];
    let mut upper = vec![f64::INFINITY; nv];
    let mut buses = Vec::with_capacity(n);
    for (i, u) in problem.units.iter().enumerate() {
        if u.p_min_mw > u.p_max_mw {
            return Err(RedispatchError::InvertedLimits(u.id.clone()));
        }
        buses.push(problem.bus_of(u)?);
        lower[i] = u.p_min_mw;
        upper[i] = u.p_max_mw;
        // Reserve never exceeds what the unit could add.
        upper[n + i] = (u.reserve_cap_mw - u.p_min_mw).max(0.0);
        let mut c = vec![0.0; nv];
        c[i] = 1.0;
        c[n + i] = 1.0;
        rows.push(Row { group: "reserve", coeffs: c, relation: Relation::Le, rhs: u.reserve_cap_mw.max(u.p_min_mw) });
    }

    let mut c = vec![0.0; nv];
    c[..n].iter_mut().for_each(|v| *v = 1.0);
    rows.push(Row { group: "balance", coeffs: c, relation: Relation::Eq, rhs: problem.target_mw });

    match problem.reserve {
        ReserveRule::None => {}
        ReserveRule::Fixed(mw) => {
            let mut c = vec![0.0; nv];
            c[n..].iter_mut().for_each(|v| *v = 1.0);
            rows.push(Row { group: "reserve", coeffs: c, relation: Relation::Ge, rhs: mw });
        }
        ReserveRule::LargestUnit => {
            for k in 0..n {
                let mut c = vec![0.0; nv];
                for j in 0..n {
                    if j != k {
                        c[n + j] = 1.0;
                    }
                }
                c[k] = -1.0;
                rows.push(Row { group: "reserve", coeffs: c, relation: Relation::Ge, rhs: 0.0 });
            }
        }
    }

    // Flow on line l = base_l + Σ_i PTDF[l, bus_i] p_i.
    let base = ptdf_flows(sens, &problem.fixed_injections_mw);
    let flow_row = |weights: &dyn Fn(usize) -> f64, extra: &dyn Fn(usize) -> f64| -> Vec<f64> {
        let mut c = vec![0.0; nv];
        for i in 0..n {
            c[i] = weights(buses[i]) + extra(i);
        }
        c
    };
    let push_limits = |rows: &mut Vec<Row>, group: &'static str, coeffs: Vec<f64>, offset: f64, limit: f64| {
        rows.push(Row { group, coeffs: coeffs.clone(), relation: Relation::Le, rhs: limit - offset });
        rows.push(Row { group, coeffs, relation: Relation::Ge, rhs: -limit - offset });
    };
    for (l, line) in net.lines().iter().enumerate() {
        let c = flow_row(&|b| sens[(l, b)], &|_| 0.0);
        push_limits(&mut rows, "base_flows", c, base[l], line.flow_limit_mw);
    }

    let mut islanding_lines = Vec::new();
    for cont in &problem.contingencies {
        match cont {
            Contingency::Line(m) => {
                let m = *m;
                if m >= net.lines().len() {
                    return Err(RedispatchError::UnknownContingency(format!("line {m}")));
                }
                let lodf = match lodf_column(net, sens, m) {
                    Ok(col) => col,
                    Err(NetworkError::IslandingOutage { .. }) => {
                        islanding_lines.push(m);
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                };
                for (l, line) in net.lines().iter().enumerate() {
                    if l == m {
                        continue;
                    }
                    let d = lodf[l];
                    let c = flow_row(&|b| sens[(l, b)] + d * sens[(m, b)], &|_| 0.0);
                    push_limits(&mut rows, "line_contingencies", c, base[l] + d * base[m], line.flow_limit_mw);
                }
            }
            Contingency::Unit(id) => {
                let k = problem.unit_index(id)?;
                let alpha = problem.activation_shares(k);
                // Survivors hold enough reserve for their share.
                for j in 0..n {
                    if j == k {
                        continue;
                    }
                    let mut c = vec![0.0; nv];
                    c[n + j] = 1.0;
                    c[k] = -alpha[j];
                    rows.push(Row { group: "unit_contingencies", coeffs: c, relation: Relation::Ge, rhs: 0.0 });
                }
                if alpha.iter().all(|&a| a == 0.0) {
                    let mut c = vec![0.0; nv];
                    c[k] = 1.0;
                    rows.push(Row { group: "unit_contingencies", coeffs: c, relation: Relation::Le, rhs: 0.0 });
                }
                // Post-outage flows with the loss picked up by the survivors.
                for (l, line) in net.lines().iter().enumerate() {
                    let shift: f64 = (0..n).map(|j| alpha[j] * sens[(l, buses[j])]).sum();
                    let c = flow_row(&|b| sens[(l, b)], &|i| if i == k { shift - sens[(l, buses[k])] } else { 0.0 });
                    push_limits(&mut rows, "unit_contingencies", c, base[l], line.flow_limit_mw);
                }
            }
        }
    }
    Ok(Formulation { rows, lower, upper, islanding_lines })
}

fn build_lp(f: &Formulation, objective: Vec<f64>, include: &dyn Fn(&str) -> bool) -> LinearProgram {
    let mut lp = LinearProgram::new(objective);
    lp.lower = f.lower.clone();
    lp.upper = f.upper.clone();
    for r in f.rows.iter().filter(|r| include(r.group)) {
        lp.add(r.coeffs.clone(), r.relation, r.rhs);
    }
    lp
}

/// Least-cost set-points under the network and security constraints.
pub fn solve_redispatch(problem: &DispatchProblem) -> Result<DispatchSolution, RedispatchError> {
    let sens = ptdf(&problem.network)?;
    let f = formulate(problem, &sens)?;
    let n = problem.units.len();
    let mut cost = vec![0.0; 2 * n];
    for (i, u) in problem.units.iter().enumerate() {
        cost[i] = u.cost_per_mwh;
    }

    let attempt = |include: &dyn Fn(&str) -> bool| -> Result<Option<Vec<f64>>, RedispatchError> {
        let lp = build_lp(&f, cost.clone(), include);
        let first = match lp.solve() {
            Ok(s) => s,
            Err(LpError::Infeasible) => return Ok(None),
            Err(e) => return Err(RedispatchError::Solver(e)),
        };
        // Among equal-cost optima prefer units earlier in id order, then less reserve.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| problem.units[a].id.cmp(&problem.units[b].id));
        let mut tie = vec![0.0; 2 * n];
        for (rank, &i) in order.iter().enumerate() {
            tie[i] = (rank + 1) as f64;
            tie[n + i] = 1e-3;
        }
        let mut lp2 = build_lp(&f, tie, include);
        let bound = first.objective + TIE_TOL * (1.0 + first.objective.abs());
        lp2.add(cost.clone(), Relation::Le, bound);
        match lp2.solve() {
            Ok(s) => Ok(Some(s.x)),
            Err(_) => Ok(Some(first.x)),
        }
    };

    let (x, status) = match attempt(&|_| true)? {
        Some(x) => (x, DispatchStatus::Optimal),
        None => {
            let relaxed = if problem.allow_degraded {
                attempt(&|g| !RESERVE_GROUPS.contains(&g))?
            } else {
                None
            };
            match relaxed {
                Some(x) => (x, DispatchStatus::Degraded),
                None => return Err(diagnose(&f, &cost)),
            }
        }
    };
    let p: Vec<f64> = x[..n].to_vec();
    let objective = problem.units.iter().zip(&p).map(|(u, pi)| u.cost_per_mwh * pi).sum();
    let units = problem
        .units
        .iter()
        .enumerate()
        .map(|(i, u)| UnitDispatch {
            id: u.id.clone(),
            p_set_mw: x[i],
            reserve_mw: if status == DispatchStatus::Degraded { 0.0 } else { x[n + i] },
        })
        .collect();
    let flows = contingency_flows(problem, &p, &f.islanding_lines)?;
    Ok(DispatchSolution {
        units,
        base_flows_mw: flows.0,
        worst_contingency_flows_mw: flows.1,
        objective,
        status,
        islanding_lines: f.islanding_lines,
    })
}

/// Adds constraint groups one at a time and reports those that break feasibility.
fn diagnose(f: &Formulation, cost: &[f64]) -> RedispatchError {
    let mut included: Vec<&str> = Vec::new();
    let mut binding = Vec::new();
    for g in GROUPS {
        included.push(g);
        let lp = build_lp(f, cost.to_vec(), &|name| included.contains(&name));
        if matches!(lp.solve(), Err(LpError::Infeasible)) {
            binding.push(g.to_string());
            included.pop();
        }
    }
    if binding.is_empty() {
        binding.push("combined".to_string());
    }
    RedispatchError::Infeasible { binding }
}

/// Base flows and per-line worst post-contingency flows by direct re-solves.
fn contingency_flows(
    problem: &DispatchProblem,
    p: &[f64],
    islanding: &[usize],
) -> Result<(Vec<f64>, Vec<f64>), RedispatchError> {
    let net = &problem.network;
    let inj = problem.injections(p)?;
    let base = solve_dc_power_flow(net, &inj)?.flows_mw;
    let mut worst = base.clone();
    let mut consider = |flows: &[f64], skip: Option<usize>| {
        for (l, &fl) in flows.iter().enumerate() {
            if Some(l) != skip && fl.abs() > worst[l].abs() {
                worst[l] = fl;
            }
        }
    };
    for c in &problem.contingencies {
        match c {
            Contingency::Line(m) if !islanding.contains(m) => {
                let reduced = net.without_line(*m)?;
                let flows = solve_dc_power_flow(&reduced, &inj)?.flows_mw;
                // Reduced network drops line m; map indices back.
                let full: Vec<f64> = (0..net.lines().len())
                    .map(|l| match l.cmp(m) {
                        std::cmp::Ordering::Less => flows[l],
                        std::cmp::Ordering::Equal => 0.0,
                        std::cmp::Ordering::Greater => flows[l - 1],
                    })
                    .collect();
                consider(&full, Some(*m));
            }
            Contingency::Line(_) => {}
            Contingency::Unit(id) => {
                let k = problem.unit_index(id)?;
                let flows = solve_dc_power_flow(net, &unit_outage_injections(problem, p, k)?)?.flows_mw;
                consider(&flows, None);
            }
        }
    }
    Ok((base, worst))
}

fn unit_outage_injections(problem: &DispatchProblem, p: &[f64], k: usize) -> Result<Vec<f64>, RedispatchError> {
    let alpha = problem.activation_shares(k);
    let mut post = p.to_vec();
    for j in 0..post.len() {
        post[j] += alpha[j] * p[k];
    }
    post[k] = 0.0;
    problem.injections(&post)
}

/// Re-checks a solution against every constraint with fresh power-flow
/// solves. Returns the list of violations.
pub fn validate_dispatch(problem: &DispatchProblem, sol: &DispatchSolution) -> Result<(), Vec<String>> {
    let tol = VALIDATION_TOL_MW;
    let mut errs = Vec::new();
    let by_id: HashMap<&str, &UnitDispatch> = sol.units.iter().map(|u| (u.id.as_str(), u)).collect();
    let mut p = Vec::with_capacity(problem.units.len());
    let mut r = Vec::with_capacity(problem.units.len());
    for u in &problem.units {
        let Some(d) = by_id.get(u.id.as_str()) else {
            errs.push(format!("unit `{}` missing from solution", u.id));
            return Err(errs);
        };
        if d.p_set_mw < u.p_min_mw - tol || d.p_set_mw > u.p_max_mw + tol {
            errs.push(format!("unit `{}` set-point {} outside [{}, {}]", u.id, d.p_set_mw, u.p_min_mw, u.p_max_mw));
        }
        if d.reserve_mw < -tol || d.p_set_mw + d.reserve_mw > u.reserve_cap_mw.max(u.p_min_mw) + tol {
            errs.push(format!("unit `{}` reserve {} exceeds its headroom", u.id, d.reserve_mw));
        }
        p.push(d.p_set_mw);
        r.push(d.reserve_mw);
    }
    let total: f64 = p.iter().sum();
    if (total - problem.target_mw).abs() > tol {
        errs.push(format!("total {total} MW differs from target {} MW", problem.target_mw));
    }
    let net = &problem.network;
    let check_flows = |flows: &[f64], skip: Option<usize>, label: &str, errs: &mut Vec<String>| {
        for (l, line) in net.lines().iter().enumerate() {
            if Some(l) != skip && flows[l].abs() > line.flow_limit_mw + tol {
                errs.push(format!("{label}: line {l} carries {} MW over limit {}", flows[l], line.flow_limit_mw));
            }
        }
    };
    let inj = match problem.injections(&p) {
        Ok(i) => i,
        Err(e) => {
            errs.push(e.to_string());
            return Err(errs);
        }
    };
    match solve_dc_power_flow(net, &inj) {
        Ok(pf) => check_flows(&pf.flows_mw, None, "base case", &mut errs),
        Err(e) => errs.push(e.to_string()),
    }
    if sol.status == DispatchStatus::Optimal {
        let n = problem.units.len();
        match problem.reserve {
            ReserveRule::None => {}
            ReserveRule::Fixed(mw) => {
                if r.iter().sum::<f64>() < mw - tol {
                    errs.push(format!("held reserve below requirement {mw} MW"));
                }
            }
            ReserveRule::LargestUnit => {
                for k in 0..n {
                    let others: f64 = (0..n).filter(|&j| j != k).map(|j| r[j]).sum();
                    if others < p[k] - tol {
                        errs.push(format!("reserve cannot cover loss of `{}`", problem.units[k].id));
                    }
                }
            }
        }
        for c in &problem.contingencies {
            match c {
                Contingency::Line(m) => match net.without_line(*m).and_then(|reduced| {
                    reduced.check_connected()?;
                    solve_dc_power_flow(&reduced, &inj)
                }) {
                    Ok(pf) => {
                        let full: Vec<f64> = (0..net.lines().len())
                            .map(|l| if l < *m { pf.flows_mw[l] } else if l == *m { 0.0 } else { pf.flows_mw[l - 1] })
                            .collect();
                        check_flows(&full, Some(*m), &format!("outage of line {m}"), &mut errs);
                    }
                    Err(NetworkError::IslandingOutage { .. }) | Err(NetworkError::SingularNetwork { .. }) => {
                        if !sol.islanding_lines.contains(m) {
                            errs.push(format!("line {m} islands the network but was not reported"));
                        }
                    }
                    Err(e) => errs.push(e.to_string()),
                },
                Contingency::Unit(id) => {
                    let Some(k) = problem.units.iter().position(|u| &u.id == id) else {
                        errs.push(format!("unknown unit `{id}`"));
                        continue;
                    };
                    let alpha = problem.activation_shares(k);
                    for j in (0..n).filter(|&j| j != k) {
                        if r[j] < alpha[j] * p[k] - tol {
                            errs.push(format!("`{}` holds too little reserve for loss of `{id}`", problem.units[j].id));
                        }
                    }
                    match unit_outage_injections(problem, &p, k).map_err(|e| e.to_string()).and_then(|inj| {
                        solve_dc_power_flow(net, &inj).map_err(|e| e.to_string())
                    }) {
                        Ok(pf) => check_flows(&pf.flows_mw, None, &format!("loss of `{id}`"), &mut errs),
                        Err(e) => errs.push(e),
                    }
                }
            }
        }
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerReason {
    Cadence,
    AvailabilityChange,
    UnitFailure,
}

/// Decides when the redispatch runs: on a fixed cadence, and at once on a
/// large availability change or a unit failure.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerPolicy {
    pub period_s: f64,
    /// Fraction of the DVPP rating.
    pub threshold_fraction: f64,
    pub dvpp_rating_mw: f64,
    last_solve_s: Option<f64>,
    last_availability: Vec<f64>,
}

impl TriggerPolicy {
    pub fn new(period_s: f64, threshold_fraction: f64, dvpp_rating_mw: f64) -> Self {
        Self {
            period_s,
            threshold_fraction,
            dvpp_rating_mw,
            last_solve_s: None,
            last_availability: Vec::new(),
        }
    }

    pub fn with_defaults(dvpp_rating_mw: f64) -> Self {
        Self::new(60.0, 0.05, dvpp_rating_mw)
    }

    /// Whether to solve now. Records the solve when it returns a reason.
    pub fn check(&mut self, now_s: f64, availability_mw: &[f64], unit_failed: bool) -> Option<TriggerReason> {
        let reason = if unit_failed {
            Some(TriggerReason::UnitFailure)
        } else if self.last_solve_s.is_none_or(|t| now_s - t >= self.period_s - 1e-9) {
            Some(TriggerReason::Cadence)
        } else {
            let change: f64 = availability_mw
                .iter()
                .zip(&self.last_availability)
                .map(|(a, b)| (a - b).abs())
                .sum();
            (change > self.threshold_fraction * self.dvpp_rating_mw).then_some(TriggerReason::AvailabilityChange)
        };
        if reason.is_some() {
            self.last_solve_s = Some(now_s);
            self.last_availability = availability_mw.to_vec();
        }
        reason
    }
}
