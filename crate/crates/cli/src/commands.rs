use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;

use dvpp::coordination::DvppSpec;
use dvpp::market::{sample_realizations, settle, solve_robust_offer, vertex_worst_case, MarketInput, Portfolio};
use dvpp::redispatch::{solve_redispatch, validate_dispatch};
use dvpp::scenario::{read_toml, Scenario};
use dvpp::sim::{metrics, run, snapshot_problem, EventScript, Metrics, SimConfig, SimError, SimTrace};
use dvpp::wind::{run_step_experiment, write_experiment_csv, ExperimentConfig, Strategy, TurbineParams};

use crate::failure::Failure;
use crate::{OfferArgs, RedispatchArgs, ScenarioArgs, SimulateArgs, StepArgs, StrategyArg, ValidateArgs};

type CmdResult = Result<(), Failure>;

/// Above this many periods the vertex enumeration is skipped.
const MAX_VERTEX_PERIODS: usize = 8;
const CERTIFICATE_SAMPLES: usize = 1000;
const CERTIFICATE_TOL: f64 = 1e-6;

const METRICS_HEADER: [&str; 6] = [
    "event_time_s",
    "nadir_hz",
    "rocof_max_hz_s",
    "settling_time_s",
    "steady_state_dev_hz",
    "unserved_energy_mwh",
];

struct Loaded {
    scenario: Scenario,
    spec: DvppSpec,
    events: EventScript,
}

fn load(args: &ScenarioArgs, duration_s: f64) -> Result<Loaded, Failure> {
    let scenario = Scenario::load_or_builtin(&args.scenario)?;
    let mut spec = scenario.dvpp;
    spec.droop_d = args.spec_droop.unwrap_or(spec.droop_d);
    spec.inertia_h = args.spec_inertia.unwrap_or(spec.inertia_h);
    spec.validate()
        .map_err(|e| Failure::validation(anyhow!("DVPP specification: {e}")))?;
    let events = match &args.events {
        Some(path) => EventScript::load(path)?,
        None => EventScript::empty(),
    };
    events.validate(&scenario, duration_s)?;
    Ok(Loaded { scenario, spec, events })
}

fn sim_config(args: &SimulateArgs) -> Result<SimConfig, Failure> {
    let mut cfg: SimConfig = match &args.config {
        Some(path) => read_toml(path)?,
        None => SimConfig::default(),
    };
    if let Some(d) = args.duration {
        cfg.duration_s = d;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.layers()?;
    Ok(cfg)
}

fn create_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
        .map_err(Failure::runtime)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(Failure::runtime)
}

fn csv_failure(e: impl std::fmt::Display) -> Failure {
    Failure::runtime(anyhow!("{e}"))
}

/// Everything needed to repeat a run, written next to its outputs.
#[derive(Serialize)]
struct Echo<'a> {
    scenario: &'a str,
    scenario_name: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    events: Option<String>,
    dvpp: DvppSpec,
    sim: &'a SimConfig,
}

fn write_metrics(dir: &Path, m: Option<&Metrics>) -> CmdResult {
    let mut w = csv::Writer::from_writer(create(dir, "metrics.csv")?);
    match m {
        Some(m) => w.serialize(m).map_err(csv_failure)?,
        None => w.write_record(METRICS_HEADER).map_err(csv_failure)?,
    }
    w.flush()?;
    Ok(())
}

fn write_trace_files(dir: &Path, trace: &SimTrace) -> CmdResult {
    trace.write_csv(create(dir, "trace.csv")?)?;
    trace.write_dispatch_csv(create(dir, "dispatch.csv")?)?;
    trace.write_controllers_csv(create(dir, "controllers.csv")?)?;
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> CmdResult {
    let cfg = sim_config(args)?;
    let Loaded { scenario, spec, events } = load(&args.scenario, cfg.duration_s)?;
    let trace = run(&scenario, &spec, &events.events, &cfg)?;

    create_out(&args.out)?;
    write_trace_files(&args.out, &trace)?;
    let m = match metrics(&trace) {
        Ok(m) => Some(m),
        Err(SimError::NoDisturbance) => None,
        Err(e) => return Err(e.into()),
    };
    write_metrics(&args.out, m.as_ref())?;
    let echo = Echo {
        scenario: &args.scenario.scenario,
        scenario_name: &scenario.name,
        events: args.scenario.events.as_ref().map(|p| p.display().to_string()),
        dvpp: spec,
        sim: &cfg,
    };
    let text = toml::to_string(&echo).map_err(Failure::runtime)?;
    create(&args.out, "config.toml")?.write_all(text.as_bytes())?;
    create(&args.out, "scenario.toml")?.write_all(scenario.to_toml_string().as_bytes())?;

    println!(
        "{}: {} s simulated, {} samples, {} events, {} dispatch rows",
        scenario.name,
        cfg.duration_s,
        trace.samples.len(),
        events.events.len(),
        trace.dispatch.len()
    );
    match m {
        Some(m) => println!(
            "nadir {:.4} Hz, max RoCoF {:.4} Hz/s, settling {:.2} s, steady state {:.4} Hz, unserved {:.4} MWh",
            m.nadir_hz, m.rocof_max_hz_s, m.settling_time_s, m.steady_state_dev_hz, m.unserved_energy_mwh
        ),
        None => println!("no disturbance events; metrics.csv has a header only"),
    }
    for w in &trace.warnings {
        eprintln!("warning: {w}");
    }
    println!("outputs written to {}", args.out.display());
    Ok(())
}

#[derive(Serialize)]
struct CellSummary {
    v_mps: f64,
    dp_ref: f64,
    p_initial_pu: f64,
    final_normalized: f64,
    settling_time_s: Option<f64>,
    final_speed_deviation: f64,
    infeasible_demand: bool,
    speed_limited: bool,
}

pub fn step_experiment(args: &StepArgs) -> CmdResult {
    let strategy = match args.strategy {
        StrategyArg::Os1 => Strategy::OS1,
        StrategyArg::Os2 => Strategy::OS2,
    };
    let mut cfg = ExperimentConfig::default();
    if let Some(d) = args.duration {
        if !(d.is_finite() && d > cfg.dt) {
            return Err(Failure::validation(anyhow!("duration {d} s is too short")));
        }
        cfg.duration_s = d;
    }
    let exp = run_step_experiment(&TurbineParams::default(), strategy, &cfg);
    create_out(&args.out)?;
    let stem = format!("step_{}", strategy.to_string().to_lowercase());
    let mut traces = create(&args.out, &format!("{stem}.csv"))?;
    write_experiment_csv(&exp, &mut traces)?;
    traces.flush()?;

    let mut summary = csv::Writer::from_writer(create(&args.out, &format!("{stem}_summary.csv"))?);
    println!("{strategy}: {} cells", exp.traces.len());
    println!("{:>6} {:>6} {:>10} {:>10}  flags", "v_mps", "dp", "final", "settle_s");
    for tr in &exp.traces {
        let cell = CellSummary {
            v_mps: tr.v_mps,
            dp_ref: tr.dp_ref,
            p_initial_pu: tr.p_initial_pu,
            final_normalized: tr.final_normalized,
            settling_time_s: tr.settling_time_s,
            final_speed_deviation: tr.final_speed_deviation,
            infeasible_demand: tr.infeasible_demand,
            speed_limited: tr.speed_limited,
        };
        summary.serialize(&cell).map_err(csv_failure)?;
        let mut flags = Vec::new();
        if tr.infeasible_demand {
            flags.push("infeasible");
        }
        if tr.speed_limited {
            flags.push("speed-limited");
        }
        let settle = tr.settling_time_s.map_or("-".to_string(), |t| format!("{t:.2}"));
        println!(
            "{:>6} {:>6} {:>10.4} {:>10}  {}",
            tr.v_mps,
            tr.dp_ref,
            tr.final_normalized,
            settle,
            flags.join(",")
        );
    }
    summary.flush()?;
    println!("outputs written to {}", args.out.display());
    Ok(())
}

#[derive(Serialize)]
struct OfferRow {
    period: usize,
    offer_mw: f64,
    storage_mw: f64,
    price_low: f64,
    price_high: f64,
    avail_low_mw: f64,
    avail_high_mw: f64,
}

pub fn offer(args: &OfferArgs) -> CmdResult {
    let input: MarketInput = read_toml(&args.input)?;
    let mut profile = input.profile();
    if let Some(g) = args.gamma {
        profile.gamma = g;
    }
    profile.validate().map_err(|e| Failure::validation(anyhow!("{}: {e}", args.input.display())))?;
    let portfolio = input.portfolio.unwrap_or_default();
    let schedule = solve_robust_offer(&profile, &portfolio, input.penalty_per_mwh).map_err(Failure::runtime)?;

    create_out(&args.out)?;
    let mut w = csv::Writer::from_writer(create(&args.out, "offer.csv")?);
    for (t, p) in profile.periods.iter().enumerate() {
        w.serialize(OfferRow {
            period: t,
            offer_mw: schedule.offer_mw[t],
            storage_mw: schedule.storage_mw[t],
            price_low: p.price_low,
            price_high: p.price_high,
            avail_low_mw: p.avail_low_mw,
            avail_high_mw: p.avail_high_mw,
        })
        .map_err(csv_failure)?;
    }
    w.flush()?;

    println!("gamma {}, {} periods", profile.gamma, profile.periods.len());
    println!("worst-case revenue: {:.6}", schedule.worst_case_revenue);
    let floor = schedule.worst_case_revenue - CERTIFICATE_TOL;
    let mut ok = true;
    if profile.periods.len() <= MAX_VERTEX_PERIODS {
        let vertex = vertex_worst_case(&schedule, &portfolio, &profile);
        ok &= vertex >= floor;
        println!("certificate: vertex minimum {vertex:.6}");
    } else {
        println!("certificate: vertex check skipped above {MAX_VERTEX_PERIODS} periods");
    }
    let sampled = sampled_minimum(&profile, &portfolio, &schedule, args.seed);
    ok &= sampled >= floor;
    println!("certificate: minimum over {CERTIFICATE_SAMPLES} sampled realizations {sampled:.6}");
    println!("outputs written to {}", args.out.display());
    if ok {
        println!("certificate: ok");
        Ok(())
    } else {
        Err(Failure::runtime(anyhow!("certificate check failed: a realization fell below the certified worst case")))
    }
}

fn sampled_minimum(
    profile: &dvpp::market::UncertainProfile,
    portfolio: &Portfolio,
    schedule: &dvpp::market::OfferSchedule,
    seed: u64,
) -> f64 {
    sample_realizations(profile, CERTIFICATE_SAMPLES, seed)
        .iter()
        .map(|r| settle(schedule, portfolio, &r.prices, &r.availability_mw).revenue)
        .fold(f64::INFINITY, f64::min)
}

#[derive(Serialize)]
struct DispatchRow<'a> {
    unit_id: &'a str,
    bus: u32,
    p_set_mw: f64,
    reserve_mw: f64,
    cost_per_mwh: f64,
}

pub fn redispatch(args: &RedispatchArgs) -> CmdResult {
    let scenario = Scenario::load_or_builtin(&args.scenario)?;
    let mut problem = snapshot_problem(&scenario)?;
    if let Some(t) = args.target {
        if !t.is_finite() {
            return Err(Failure::validation(anyhow!("target must be finite")));
        }
        problem.target_mw = t;
    }
    let sol = solve_redispatch(&problem).map_err(Failure::runtime)?;
    validate_dispatch(&problem, &sol)
        .map_err(|v| Failure::runtime(anyhow!("solution failed validation: {}", v.join("; "))))?;

    create_out(&args.out)?;
    let mut w = csv::Writer::from_writer(create(&args.out, "dispatch.csv")?);
    for (u, d) in problem.units.iter().zip(&sol.units) {
        w.serialize(DispatchRow {
            unit_id: &d.id,
            bus: u.bus,
            p_set_mw: d.p_set_mw,
            reserve_mw: d.reserve_mw,
            cost_per_mwh: u.cost_per_mwh,
        })
        .map_err(csv_failure)?;
    }
    w.flush()?;

    println!(
        "{}: target {} MW, status {}, objective {:.4}",
        scenario.name, problem.target_mw, sol.status, sol.objective
    );
    for d in &sol.units {
        println!("  {:<8} {:>10.4} MW  reserve {:>8.4} MW", d.id, d.p_set_mw, d.reserve_mw);
    }
    if !sol.islanding_lines.is_empty() {
        println!("  skipped islanding line contingencies: {:?}", sol.islanding_lines);
    }
    println!("outputs written to {}", args.out.display());
    Ok(())
}

pub fn validate(args: &ValidateArgs) -> CmdResult {
    let mut cfg = SimConfig::default();
    if let Some(d) = args.duration {
        cfg.duration_s = d;
    }
    cfg.layers()?;
    let Loaded { scenario, events, .. } = load(&args.scenario, cfg.duration_s)?;
    snapshot_problem(&scenario)?;
    println!(
        "ok: {} ({} buses, {} lines, {} units, {} DVPP), {} events",
        scenario.name,
        scenario.buses.len(),
        scenario.lines.len(),
        scenario.units.len(),
        scenario.dvpp_units().count(),
        events.events.len()
    );
    Ok(())
}
