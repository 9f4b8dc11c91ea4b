use serde::Serialize;

use super::{SimError, SimTrace};

/// Half-width of the settling band relative to the steady-state deviation.
pub const SETTLING_BAND: f64 = 0.1;
/// Smallest settling band, so a disturbance that recovers to zero still
/// settles.
pub const SETTLING_FLOOR_HZ: f64 = 1e-3;

/// Frequency-quality figures over the window after the first event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub event_time_s: f64,
    /// Deviation of largest magnitude, with its sign.
    pub nadir_hz: f64,
    /// Largest RoCoF magnitude.
    pub rocof_max_hz_s: f64,
    /// Time from the event to the first entry into the settling band that is
    /// never left.
    pub settling_time_s: f64,
    /// Deviation at the end of the trace.
    pub steady_state_dev_hz: f64,
    /// Shortfall of DVPP output against set-points plus requested service.
    pub unserved_energy_mwh: f64,
}

pub fn metrics(trace: &SimTrace) -> Result<Metrics, SimError> {
    let event_time_s = trace
        .event_log()
        .first()
        .map(|(t, _)| *t)
        .ok_or(SimError::NoDisturbance)?;
    let window: Vec<_> = trace.samples.iter().filter(|s| s.time_s >= event_time_s).collect();
    let last = window.last().ok_or(SimError::NoDisturbance)?;
    let ss = last.delta_f_hz;

    let nadir_hz = window
        .iter()
        .map(|s| s.delta_f_hz)
        .fold(0.0, |m: f64, v| if v.abs() > m.abs() { v } else { m });
    let rocof_max_hz_s = window.iter().map(|s| s.rocof_hz_s.abs()).fold(0.0, f64::max);

    let band = (SETTLING_BAND * ss.abs()).max(SETTLING_FLOOR_HZ);
    let settled_from = match window.iter().rposition(|s| (s.delta_f_hz - ss).abs() > band) {
        Some(i) => window[i + 1].time_s,
        None => event_time_s,
    };

    let shortfall = |s: &&crate::sim::TraceSample| (s.target_mw + s.service_mw - s.p_dvpp_mw).max(0.0);
    let unserved_mws: f64 = window
        .windows(2)
        .map(|w| 0.5 * (shortfall(&w[0]) + shortfall(&w[1])) * (w[1].time_s - w[0].time_s))
        .sum();

    Ok(Metrics {
        event_time_s,
        nadir_hz,
        rocof_max_hz_s,
        settling_time_s: settled_from - event_time_s,
        steady_state_dev_hz: ss,
        unserved_energy_mwh: unserved_mws / 3600.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::TraceSample;
    use approx::assert_abs_diff_eq;

    fn trace_from(f: impl Fn(f64) -> f64, dt: f64, n: usize) -> SimTrace {
        let samples = (0..=n)
            .map(|k| {
                let t = k as f64 * dt;
                TraceSample {
                    time_s: t,
                    delta_f_hz: f(t),
                    rocof_hz_s: 0.0,
                    p_load_mw: 0.0,
                    p_dvpp_mw: 10.0,
                    target_mw: 10.0,
                    service_mw: 0.0,
                    unit_p_mw: vec![],
                    line_flows_mw: vec![],
                    events: if k == 0 { "t=0:load_step:1:5".into() } else { String::new() },
                }
            })
            .collect();
        SimTrace {
            samples,
            ..SimTrace::default()
        }
    }

    #[test]
    fn flat_trace_is_all_zero() {
        let m = metrics(&trace_from(|_| 0.0, 0.1, 100)).unwrap();
        assert_eq!((m.nadir_hz, m.steady_state_dev_hz, m.settling_time_s, m.unserved_energy_mwh), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn exponential_settling() {
        let dt = 1e-3;
        let m = metrics(&trace_from(|t| -0.5 * (1.0 - (-t / 2.0).exp()), dt, 60_000)).unwrap();
        assert_abs_diff_eq!(m.steady_state_dev_hz, -0.5, epsilon = 1e-9);
        // |Δf − Δf_ss| = 0.5 e^{-t/2} = 0.05 at t = 2 ln 10.
        assert_abs_diff_eq!(m.settling_time_s, 2.0 * 10f64.ln(), epsilon = 2.0 * dt);
        assert!(m.nadir_hz.abs() >= m.steady_state_dev_hz.abs());
    }

    #[test]
    fn overshoot_nadir() {
        let m = metrics(&trace_from(|t| -0.3 * (1.0 - (-t).exp() * (3.0 * t).cos()), 0.01, 2000)).unwrap();
        assert!(m.nadir_hz < -0.3 - 0.05);
    }

    #[test]
    fn unserved_energy_integrates_shortfall() {
        let mut t = trace_from(|_| 0.0, 1.0, 3600);
        for s in &mut t.samples {
            s.service_mw = 2.0;
        }
        assert_abs_diff_eq!(metrics(&t).unwrap().unserved_energy_mwh, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn needs_a_disturbance() {
        let mut t = trace_from(|_| 0.0, 0.1, 10);
        t.samples[0].events.clear();
        assert!(matches!(metrics(&t), Err(SimError::NoDisturbance)));
    }
}
