use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::events::check_event;
use super::{Cadence, ControllerRecord, DispatchRecord, EventKind, SimConfig, SimError, SimEvent, SimTrace, TraceSample};
use crate::coordination::{
    design_controller, design_participation, local_control_step, nominal_model, renormalize_on_failure,
    BroadcastSignal, CoordinationWarning, DeviceModel, DvppSpec, LocalController, ParticipationDesign,
};
use crate::frequency::{online_inertia, step_frequency, FreqModel, InertiaSource};
use crate::network::{ptdf, ptdf_flows, Network};
use crate::redispatch::{solve_redispatch, Contingency, DispatchProblem, DispatchUnit, RedispatchError, TriggerPolicy};
use crate::scenario::{ContingencySet, Scenario, UnitConfig};
use crate::units::{dispatch_limits, headroom, service_limits, set_availability, step_unit, Tech, UnitSpec, UnitState};

/// Runs `scenario` under `spec` with scripted `events`.
pub fn run(scenario: &Scenario, spec: &DvppSpec, events: &[SimEvent], config: &SimConfig) -> Result<SimTrace, SimError> {
    let cadence = config.cadence()?;
    spec.validate()?;
    let mut schedule: Vec<(u64, usize)> = Vec::with_capacity(events.len());
    for (i, e) in events.iter().enumerate() {
        check_event(e, scenario, config.duration_s).map_err(|msg| SimError::InvalidEvent {
            index: i,
            time_s: e.time_s,
            msg,
        })?;
        schedule.push(((e.time_s / config.dt_device_s - 1e-9).ceil().max(0.0) as u64, i));
    }
    // Stable: simultaneous events keep script order.
    schedule.sort_by_key(|&(tick, _)| tick);

    let mut eng = Engine::new(scenario, *spec, config, cadence)?;
    let mut next = 0;
    for k in 0..cadence.total {
        while next < schedule.len() && schedule[next].0 == k {
            let i = schedule[next].1;
            let e = &events[i];
            let t = eng.time(k);
            eng.apply_event(&e.kind).map_err(|source| SimError::AtEvent {
                index: i,
                time_s: e.time_s,
                label: e.kind.to_string(),
                source: Box::new(source),
            })?;
            eng.pending_labels.push(format!("t={t}:{}", e.kind));
            next += 1;
        }
        eng.tick(k)?;
    }
    Ok(eng.trace)
}

/// Participation design the engine derives from the initial dispatch.
pub fn initial_participation(
    scenario: &Scenario,
    spec: &DvppSpec,
    config: &SimConfig,
) -> Result<ParticipationDesign, SimError> {
    let cadence = config.cadence()?;
    spec.validate()?;
    Ok(Engine::new(scenario, *spec, config, cadence)?.design)
}

/// Dispatch problem for the scenario as loaded, before any simulation: the
/// one the engine solves at time zero.
pub fn snapshot_problem(scenario: &Scenario) -> Result<DispatchProblem, SimError> {
    let config = SimConfig::default();
    let cadence = config.cadence()?;
    let mut eng = Engine::build(scenario, scenario.dvpp, &config, cadence)?;
    eng.market_target(0);
    Ok(eng.dispatch_problem())
}

struct SimUnit {
    cfg: UnitConfig,
    spec: UnitSpec,
    state: UnitState,
    bus_index: usize,
    online: bool,
    /// Availability before noise.
    base_avail_mw: f64,
    noise_x: f64,
}

impl SimUnit {
    fn output(&self) -> f64 {
        match (self.online, self.cfg.dvpp) {
            (false, _) => 0.0,
            (true, true) => self.state.p_out_mw,
            (true, false) => self.cfg.background_output(),
        }
    }

    fn in_dvpp(&self) -> bool {
        self.online && self.cfg.dvpp
    }

    fn noisy(&self) -> bool {
        matches!(self.cfg.tech, Tech::PV | Tech::W)
    }
}

struct Engine<'a> {
    scenario: &'a Scenario,
    config: &'a SimConfig,
    cadence: Cadence,
    spec: DvppSpec,
    units: Vec<SimUnit>,
    loads_mw: Vec<f64>,
    line_in_service: Vec<bool>,
    network: Network,
    /// Original index of every in-service line, in network order.
    line_map: Vec<usize>,
    ptdf: DMatrix<f64>,
    freq: FreqModel,
    /// Imbalance present at the start, removed so the initial state is an
    /// equilibrium.
    offset_pu: f64,
    design: ParticipationDesign,
    /// Unit index and controller, in design order.
    controllers: Vec<(usize, LocalController)>,
    broadcast: BroadcastSignal,
    policy: TriggerPolicy,
    unit_failed: bool,
    forced: Option<&'static str>,
    target_mw: f64,
    rng: ChaCha8Rng,
    trace: SimTrace,
    pending_labels: Vec<String>,
}

impl<'a> Engine<'a> {
    fn new(scenario: &'a Scenario, spec: DvppSpec, config: &'a SimConfig, cadence: Cadence) -> Result<Self, SimError> {
        let mut eng = Self::build(scenario, spec, config, cadence)?;
        eng.market_target(0);
        let avail = eng.availability();
        eng.policy.check(0.0, &avail, false);
        let sol = eng.solve_dispatch(0.0, "initial")?;
        for u in eng.units.iter_mut().filter(|u| u.in_dvpp()) {
            if let Some(p) = sol.p_set(&u.cfg.id) {
                u.state.p_cmd_mw = p;
                u.state.p_out_mw = p;
            }
        }
        eng.offset_pu = eng.imbalance_pu();
        eng.design = design_participation(&eng.devices(), &eng.spec)?;
        eng.note_warnings();
        eng.build_controllers()?;
        eng.record(0.0);
        Ok(eng)
    }

    /// State before the initial dispatch.
    fn build(scenario: &'a Scenario, spec: DvppSpec, config: &'a SimConfig, cadence: Cadence) -> Result<Self, SimError> {
        let network = scenario.network()?;
        network.check_connected()?;
        let units: Vec<SimUnit> = scenario
            .units
            .iter()
            .map(|u| {
                let spec = u.unit_spec();
                let avail = u.available();
                SimUnit {
                    state: UnitState::new(&spec, 0.0, avail, u.reserve_fraction),
                    spec,
                    bus_index: network.bus_index(u.bus).expect("validated scenario"),
                    online: u.online,
                    base_avail_mw: avail,
                    noise_x: 0.0,
                    cfg: u.clone(),
                }
            })
            .collect();
        let mut freq = FreqModel::new(0.0, scenario.d_load, scenario.f_nominal_hz)?;
        if let Some(tau) = scenario.grid_forming_tau_s {
            freq = freq.with_grid_forming(tau);
        }
        let ptdf = ptdf(&network)?;
        let dvpp_rating: f64 = units.iter().filter(|u| u.in_dvpp()).map(|u| u.cfg.rating_mw).sum();
        let mut eng = Engine {
            scenario,
            config,
            cadence,
            spec,
            units,
            loads_mw: scenario.buses.iter().map(|b| b.load_mw).collect(),
            line_in_service: vec![true; scenario.lines.len()],
            line_map: (0..scenario.lines.len()).collect(),
            ptdf,
            network,
            freq,
            offset_pu: 0.0,
            design: ParticipationDesign {
                factors: Vec::new(),
                split_tau_s: None,
                warnings: Vec::new(),
            },
            controllers: Vec::new(),
            broadcast: BroadcastSignal::fresh(0.0, 0.0),
            policy: TriggerPolicy::new(config.dt_redispatch_s, config.trigger_threshold, dvpp_rating),
            unit_failed: false,
            forced: None,
            target_mw: scenario.target_mw(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            trace: SimTrace {
                unit_ids: scenario.units.iter().map(|u| u.id.clone()).collect(),
                line_labels: scenario.lines.iter().map(|l| format!("{}-{}", l.from_bus, l.to_bus)).collect(),
                ..SimTrace::default()
            },
            pending_labels: Vec::new(),
        };
        eng.update_inertia();
        Ok(eng)
    }

    fn time(&self, k: u64) -> f64 {
        k as f64 * self.config.dt_device_s
    }

    fn s_base(&self) -> f64 {
        self.scenario.s_base_mva
    }

    fn availability(&self) -> Vec<f64> {
        self.units.iter().filter(|u| u.in_dvpp()).map(|u| u.state.p_avail_mw).collect()
    }

    fn devices(&self) -> Vec<DeviceModel> {
        self.units
            .iter()
            .filter(|u| u.in_dvpp())
            .map(|u| DeviceModel::new(u.cfg.id.clone(), u.spec.tech, headroom(&u.state, &u.spec).up_mw))
            .collect()
    }

    fn update_inertia(&mut self) {
        let sources: Vec<InertiaSource> = self
            .units
            .iter()
            .map(|u| InertiaSource {
                online: u.online,
                ..u.cfg.inertia_source()
            })
            .collect();
        self.freq.h_sys_s = online_inertia(&sources, self.s_base());
    }

    fn imbalance_pu(&self) -> f64 {
        let gen: f64 = self.units.iter().map(SimUnit::output).sum();
        let load: f64 = self.loads_mw.iter().sum();
        (gen - load) / self.s_base()
    }

    fn note_warnings(&mut self) {
        for w in &self.design.warnings {
            let msg = match w {
                CoordinationWarning::EmptyPool(p) => format!("participation: {p:?} pool empty, single-pool weights used"),
                CoordinationWarning::SpecDegraded { failed_unit } => {
                    format!("participation: loss of `{failed_unit}` emptied the fast pool, high-frequency response degraded")
                }
            };
            self.trace.warnings.push(msg);
        }
    }

    fn unit_index(&self, id: &str) -> usize {
        self.units.iter().position(|u| u.cfg.id == id).expect("validated unit id")
    }

    fn build_controllers(&mut self) -> Result<(), SimError> {
        let dt = self.config.dt_device_s;
        let mut out = Vec::with_capacity(self.design.factors.len());
        for f in &self.design.factors {
            let i = self.unit_index(&f.unit_id);
            let u = &self.units[i];
            let plant = nominal_model(&u.spec.tech, dt);
            let bandwidth = 1.0 / u.spec.tech.lag_time_constant_s();
            let mut c = design_controller(f, &self.spec, &plant, bandwidth, dt, self.scenario.f_nominal_hz)?;
            c.set_stale_timeout(self.config.stale_timeout_s);
            let (lo, hi) = service_limits(&u.state, &u.spec);
            c.set_limits(lo / self.s_base(), hi / self.s_base());
            c.reset_steady(self.broadcast.delta_f_hz);
            out.push((i, c));
        }
        self.controllers = out;
        Ok(())
    }

    fn market_target(&mut self, k: u64) {
        if let Some(m) = &self.scenario.market {
            let hour = (k / self.cadence.market) as usize;
            let target = m.schedule_mw[hour.min(m.schedule_mw.len() - 1)];
            if target != self.target_mw {
                self.target_mw = target;
                self.forced = Some("market");
            }
        }
    }

    fn dispatch_problem(&self) -> DispatchProblem {
        let units: Vec<DispatchUnit> = self
            .units
            .iter()
            .filter(|u| u.in_dvpp())
            .map(|u| {
                let l = dispatch_limits(&u.state, &u.spec);
                DispatchUnit::new(u.cfg.id.clone(), u.cfg.bus, u.cfg.cost_per_mwh, l.p_min_mw, l.p_max_mw)
                    .with_reserve_cap(l.reserve_cap_mw)
            })
            .collect();
        let mut fixed: Vec<f64> = self.loads_mw.iter().map(|l| -l).collect();
        for u in self.units.iter().filter(|u| !u.cfg.dvpp) {
            fixed[u.bus_index] += u.output();
        }
        let rd = &self.scenario.redispatch;
        let mut contingencies: Vec<Contingency> = match rd.contingencies {
            ContingencySet::None => Vec::new(),
            _ => (0..self.network.lines().len()).map(Contingency::Line).collect(),
        };
        if rd.contingencies == ContingencySet::All {
            contingencies.extend(units.iter().map(|u| Contingency::Unit(u.id.clone())));
        }
        DispatchProblem {
            network: self.network.clone(),
            units,
            target_mw: self.target_mw,
            fixed_injections_mw: fixed,
            reserve: rd.reserve_rule(),
            contingencies,
            allow_degraded: rd.allow_degraded,
        }
    }

    fn solve_dispatch(&mut self, t: f64, reason: &str) -> Result<crate::redispatch::DispatchSolution, RedispatchError> {
        let sol = solve_redispatch(&self.dispatch_problem())?;
        for u in &sol.units {
            self.trace.dispatch.push(DispatchRecord {
                time_s: t,
                unit_id: u.id.clone(),
                p_set_mw: u.p_set_mw,
                reserve_mw: u.reserve_mw,
                status: sol.status.to_string(),
                objective: sol.objective,
                reason: reason.to_string(),
            });
        }
        Ok(sol)
    }

    fn redispatch(&mut self, t: f64, reason: &str) {
        match self.solve_dispatch(t, reason) {
            Ok(sol) => {
                for u in self.units.iter_mut().filter(|u| u.in_dvpp()) {
                    if let Some(p) = sol.p_set(&u.cfg.id) {
                        u.state.p_cmd_mw = p;
                    }
                }
            }
            Err(e) => {
                self.trace.dispatch.push(DispatchRecord {
                    time_s: t,
                    unit_id: "*".into(),
                    p_set_mw: f64::NAN,
                    reserve_mw: f64::NAN,
                    status: "infeasible".into(),
                    objective: f64::NAN,
                    reason: reason.to_string(),
                });
                self.trace.warnings.push(format!("redispatch at {t} s failed, set-points held: {e}"));
            }
        }
    }

    fn apply_event(&mut self, kind: &EventKind) -> Result<(), SimError> {
        match kind {
            EventKind::UnitTrip { unit } => {
                let i = self.unit_index(unit);
                if !self.units[i].online {
                    return Ok(());
                }
                let was_dvpp = self.units[i].in_dvpp();
                let u = &mut self.units[i];
                u.online = false;
                u.state.p_out_mw = 0.0;
                u.state.p_service_mw = 0.0;
                self.update_inertia();
                if was_dvpp && self.design.factor(unit).is_some() {
                    self.design = renormalize_on_failure(&self.design, unit)?;
                    self.note_warnings();
                    self.build_controllers()?;
                    self.unit_failed = true;
                }
            }
            EventKind::AvailabilityChange { unit, available_mw } => {
                let i = self.unit_index(unit);
                let u = &mut self.units[i];
                u.base_avail_mw = *available_mw;
                u.noise_x = 0.0;
                u.state = set_availability(&u.state, *available_mw);
            }
            EventKind::LoadStep { bus, delta_mw } => {
                let i = self.network.bus_index(*bus).expect("validated bus");
                self.loads_mw[i] += delta_mw;
            }
            EventKind::LineOutage { from_bus, to_bus } => {
                let hit = self.scenario.lines.iter().enumerate().position(|(i, l)| {
                    self.line_in_service[i]
                        && ((l.from_bus, l.to_bus) == (*from_bus, *to_bus) || (l.from_bus, l.to_bus) == (*to_bus, *from_bus))
                });
                let Some(l) = hit else {
                    return Ok(());
                };
                self.line_in_service[l] = false;
                self.line_map = (0..self.scenario.lines.len()).filter(|&i| self.line_in_service[i]).collect();
                let lines = self.line_map.iter().map(|&i| self.scenario.lines[i].clone()).collect();
                let net = Network::new(self.scenario.buses.clone(), lines, self.scenario.slack_bus, self.s_base())?;
                net.check_connected()?;
                self.ptdf = ptdf(&net)?;
                self.network = net;
                self.forced = Some("line_outage");
            }
            EventKind::SpecChange { droop_d, inertia_h, filter_tau_s } => {
                let mut spec = self.spec;
                spec.droop_d = droop_d.unwrap_or(spec.droop_d);
                spec.inertia_h = inertia_h.unwrap_or(spec.inertia_h);
                spec.filter_tau_s = filter_tau_s.unwrap_or(spec.filter_tau_s);
                self.design = design_participation(&self.devices(), &spec)?;
                self.spec = spec;
                self.note_warnings();
                self.build_controllers()?;
            }
        }
        Ok(())
    }

    fn step_noise(&mut self) {
        let Some(n) = self.config.noise else {
            return;
        };
        let a = (-n.theta_per_s * self.config.dt_freq_s).exp();
        let b = n.sigma * (1.0 - a * a).sqrt();
        for u in self.units.iter_mut().filter(|u| u.in_dvpp() && u.noisy()) {
            let xi: f64 = StandardNormal.sample(&mut self.rng);
            u.noise_x = a * u.noise_x + b * xi;
            let avail = (u.base_avail_mw * (1.0 + u.noise_x)).max(0.0);
            u.state = set_availability(&u.state, avail);
        }
    }

    fn tick(&mut self, k: u64) -> Result<(), SimError> {
        let t = self.time(k);
        let dt = self.config.dt_device_s;
        if k % self.cadence.market == 0 && k > 0 {
            self.market_target(k);
        }
        if k % self.cadence.freq == 0 {
            if k > 0 {
                self.step_noise();
                let avail = self.availability();
                let forced = self.forced.take();
                let failed = std::mem::take(&mut self.unit_failed);
                if self.config.redispatch_enabled {
                    if let Some(reason) = self.policy.check(t, &avail, failed || forced.is_some()) {
                        let label = match (forced, failed) {
                            (Some(f), _) => f.to_string(),
                            (None, true) => "unit_failure".to_string(),
                            (None, false) => format!("{reason:?}").to_lowercase(),
                        };
                        self.redispatch(t, &label);
                    }
                }
            }
            self.broadcast = BroadcastSignal::fresh(self.freq.delta_f_hz, t);
        }

        let signal = BroadcastSignal {
            staleness_s: t - self.broadcast.timestamp_s,
            ..self.broadcast
        };
        let s_base = self.s_base();
        for (i, c) in &mut self.controllers {
            let u = &mut self.units[*i];
            let (lo, hi) = service_limits(&u.state, &u.spec);
            c.set_limits(lo / s_base, hi / s_base);
            let out = local_control_step(c, &signal, dt)?;
            u.state.p_service_mw = out.dp_pu * s_base;
        }
        for u in self.units.iter_mut().filter(|u| u.in_dvpp()) {
            u.state = step_unit(&u.state, &u.spec, dt);
        }

        let t_next = self.time(k + 1);
        match &self.config.frequency_override {
            Some(ramp) => {
                let f = ramp.at(t_next);
                self.freq.rocof_hz_s = (f - self.freq.delta_f_hz) / dt;
                self.freq.delta_f_hz = f;
            }
            None => {
                let dp = self.imbalance_pu() - self.offset_pu;
                self.freq = step_frequency(&self.freq, dp, 0.0, dt)?;
            }
        }
        if (k + 1) % self.cadence.sample == 0 {
            self.record(t_next);
        }
        Ok(())
    }

    fn record(&mut self, t: f64) {
        let mut inj: Vec<f64> = self.loads_mw.iter().map(|l| -l).collect();
        for u in &self.units {
            inj[u.bus_index] += u.output();
        }
        let flows = ptdf_flows(&self.ptdf, &inj);
        let mut line_flows_mw = vec![0.0; self.scenario.lines.len()];
        for (f, &orig) in flows.iter().zip(&self.line_map) {
            line_flows_mw[orig] = *f;
        }
        let dvpp = || self.units.iter().filter(|u| u.in_dvpp());
        self.trace.samples.push(TraceSample {
            time_s: t,
            delta_f_hz: self.freq.delta_f_hz,
            rocof_hz_s: self.freq.rocof_hz_s,
            p_load_mw: self.loads_mw.iter().sum(),
            p_dvpp_mw: dvpp().map(|u| u.state.p_out_mw).sum(),
            target_mw: dvpp().map(|u| u.state.p_cmd_mw).sum(),
            service_mw: dvpp().map(|u| u.state.p_service_mw).sum(),
            unit_p_mw: self.units.iter().map(SimUnit::output).collect(),
            line_flows_mw,
            events: std::mem::take(&mut self.pending_labels).join(";"),
        });
        for (i, c) in &self.controllers {
            let out = c.last_output();
            self.trace.controllers.push(ControllerRecord {
                time_s: t,
                unit_id: self.units[*i].cfg.id.clone(),
                dp_cmd_pu: out.dp_pu,
                saturated: out.saturated,
            });
        }
    }
}
