use dvpp::redispatch::{solve_redispatch, validate_dispatch};
use dvpp::scenario::{Scenario, ScenarioKind};
use dvpp::sim::{metrics, run, snapshot_problem, EventScript, SimConfig, SimEvent};

const SCRIPT: &str = r#"
[[event]]
time_s = 2.0
kind = "unit_trip"
unit = "BIO1"
"#;

#[test]
fn every_builtin_snapshot_dispatches_within_limits() {
    for kind in ScenarioKind::ALL {
        let sc = Scenario::builtin(kind);
        let problem = snapshot_problem(&sc).unwrap();
        let sol = solve_redispatch(&problem).unwrap();
        validate_dispatch(&problem, &sol).unwrap_or_else(|v| panic!("{}: {v:?}", kind.builtin_name()));
        let total: f64 = sol.p_vector().iter().sum();
        assert!((total - problem.target_mw).abs() < 1e-6, "{}", kind.builtin_name());
    }
}

#[test]
fn scripted_trip_drives_a_frequency_dip_and_recovery() {
    let sc = Scenario::builtin(ScenarioKind::TypeI);
    let script = EventScript::parse(SCRIPT, "inline").unwrap();
    script.validate(&sc, 60.0).unwrap();
    let cfg = SimConfig::default().with_duration(60.0);
    let trace = run(&sc, &sc.dvpp, &script.events, &cfg).unwrap();
    let m = metrics(&trace).unwrap();
    assert!((m.event_time_s - 2.0).abs() < 0.02);
    assert!(m.nadir_hz < 0.0);
    let last = trace.samples.last().unwrap();
    assert!(last.delta_f_hz > m.nadir_hz);
    assert!(trace.samples.iter().all(|s| s.delta_f_hz.is_finite()));
}

#[test]
fn script_rejects_events_after_the_run() {
    let sc = Scenario::builtin(ScenarioKind::TypeI);
    let script = EventScript::parse(SCRIPT, "inline").unwrap();
    assert!(script.validate(&sc, 1.0).is_err());
}

#[test]
fn scenario_round_trips_through_its_source() {
    for kind in ScenarioKind::ALL {
        let a = Scenario::builtin(kind);
        let b = Scenario::from_toml_str(kind.builtin_source(), "copy").unwrap();
        assert_eq!(a.units.len(), b.units.len());
        assert_eq!(a.topology().network.bus_count(), kind.expected_bus_count());
    }
}

#[test]
fn trip_of_unknown_unit_is_refused() {
    let sc = Scenario::builtin(ScenarioKind::TypeI);
    let cfg = SimConfig::default().with_duration(5.0);
    assert!(run(&sc, &sc.dvpp, &[SimEvent::unit_trip(1.0, "NOPE")], &cfg).is_err());
}
