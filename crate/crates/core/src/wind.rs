//! Variable-speed wind turbine with demanded-power tracking.
//!
//! Everything is per-unit on the rated power and rated rotor speed, so the
//! electrical output is `p = ω · T_g` and the rotor obeys
//! `2H dω/dt = T_aero − T_g`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

/// Betz limit.
pub const BETZ: f64 = 16.0 / 27.0;
pub const MAX_STEP_S: f64 = 0.01;
pub const OMEGA_MIN_PU: f64 = 0.5;
pub const OMEGA_MAX_PU: f64 = 1.2;
const BETA_MAX_DEG: f64 = 30.0;
/// Fraction of available power a demand may claim before it is clamped.
const DEMAND_MARGIN: f64 = 0.98;

/// Analytic power coefficient
/// `Cp = c1 (c2/λi − c3 β − c4) e^(−c5/λi) + c6 λ`,
/// `1/λi = 1/(λ + 0.08 β) − 0.035/(β³ + 1)`, β in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpCurve {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
}

impl Default for CpCurve {
    fn default() -> Self {
        Self {
            c1: 0.5176,
            c2: 116.0,
            c3: 0.4,
            c4: 5.0,
            c5: 21.0,
            c6: 0.0068,
        }
    }
}

impl CpCurve {
    /// Clamped to `[0, BETZ]`.
    pub fn cp(&self, lambda: f64, beta_deg: f64) -> f64 {
        if lambda <= 0.0 {
            return 0.0;
        }
        let inv = 1.0 / (lambda + 0.08 * beta_deg) - 0.035 / (beta_deg.powi(3) + 1.0);
        let raw = self.c1 * (self.c2 * inv - self.c3 * beta_deg - self.c4) * (-self.c5 * inv).exp()
            + self.c6 * lambda;
        raw.clamp(0.0, BETZ)
    }

    /// Tip-speed ratio maximizing `Cp` at zero pitch, and that maximum.
    pub fn optimum(&self) -> (f64, f64) {
        let f = |l: f64| -self.cp(l, 0.0);
        let (mut a, mut b) = (1.0, 20.0);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        while (b - a).abs() > 1e-10 {
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - g * (b - a);
            d = a + g * (b - a);
        }
        let l = 0.5 * (a + b);
        (l, self.cp(l, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbineParams {
    /// Rotor and drive-train inertia constant on rated power and speed.
    pub inertia_h_s: f64,
    pub rated_power_mw: f64,
    /// Rated rotor speed, rad/s.
    pub rated_speed: f64,
    pub rotor_radius_m: f64,
    pub air_density: f64,
    pub cp_curve: CpCurve,
    pub pitch_tau_s: f64,
    pub torque_tau_s: f64,
}

impl Default for TurbineParams {
    /// A 5 MW, 68 m rotor whose rated speed puts optimal tip-speed operation
    /// exactly at rated power at rated wind.
    fn default() -> Self {
        let cp_curve = CpCurve::default();
        let (radius, rho, rated_mw) = (68.0, 1.225, 5.0);
        let (lambda_opt, cp_max) = cp_curve.optimum();
        let area = PI * radius * radius;
        let v_rated = (rated_mw * 1e6 / (0.5 * rho * area * cp_max)).cbrt();
        let rated_speed = lambda_opt * v_rated / radius;
        let j = 4.3e7;
        Self {
            inertia_h_s: 0.5 * j * rated_speed * rated_speed / (rated_mw * 1e6),
            rated_power_mw: rated_mw,
            rated_speed,
            rotor_radius_m: radius,
            air_density: rho,
            cp_curve,
            pitch_tau_s: 0.2,
            torque_tau_s: 0.05,
        }
    }
}

impl TurbineParams {
    fn swept_area(&self) -> f64 {
        PI * self.rotor_radius_m * self.rotor_radius_m
    }

    /// Wind power through the rotor disc, per-unit.
    pub fn wind_power_pu(&self, v: f64) -> f64 {
        0.5 * self.air_density * self.swept_area() * v.powi(3) / (self.rated_power_mw * 1e6)
    }

    pub fn tip_speed_ratio(&self, v: f64, omega_pu: f64) -> f64 {
        omega_pu * self.rated_speed * self.rotor_radius_m / v
    }

    /// Speed reference holding optimal tip speed below rated and rated above.
    pub fn nominal_speed_pu(&self, v: f64) -> f64 {
        let (lambda_opt, _) = self.cp_curve.optimum();
        (lambda_opt * v / (self.rotor_radius_m * self.rated_speed)).clamp(OMEGA_MIN_PU, 1.0)
    }

    /// Largest power the rotor can extract at `omega_pu` with zero pitch,
    /// capped at rating.
    pub fn available_power_pu(&self, v: f64, omega_pu: f64) -> f64 {
        aero_power(self, v, omega_pu, 0.0).min(1.0)
    }
}

/// Aerodynamic power, per-unit of rating.
pub fn aero_power(params: &TurbineParams, v: f64, omega_pu: f64, beta_deg: f64) -> f64 {
    if v <= 0.0 || omega_pu <= 0.0 {
        return 0.0;
    }
    let lambda = params.tip_speed_ratio(v, omega_pu);
    params.wind_power_pu(v) * params.cp_curve.cp(lambda, beta_deg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// Torque only, speed held at its nominal value.
    OS1,
    /// Torque and speed, moving along the zero-pitch over-speed branch.
    OS2,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "OS1" => Ok(Strategy::OS1),
            "OS2" => Ok(Strategy::OS2),
            other => Err(format!("unknown strategy `{other}` (expected OS1 or OS2)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurbineState {
    pub omega_pu: f64,
    pub t_g_pu: f64,
    pub beta_deg: f64,
    pub v_wind: f64,
    pub p_ref: f64,
    pub strategy: Strategy,
    /// Integral part of the pitch command.
    pub pitch_integral_deg: f64,
    pub infeasible_demand: bool,
    pub speed_limited: bool,
}

impl TurbineState {
    pub fn power_pu(&self) -> f64 {
        self.omega_pu * self.t_g_pu
    }

    /// Rotor kinetic energy in pu·s.
    pub fn kinetic_energy(&self, params: &TurbineParams) -> f64 {
        params.inertia_h_s * self.omega_pu * self.omega_pu
    }

    /// Equilibrium producing `p_ref` under `strategy`.
    pub fn equilibrium(params: &TurbineParams, v: f64, p_ref: f64, strategy: Strategy) -> Self {
        let mut s = Self {
            omega_pu: params.nominal_speed_pu(v),
            t_g_pu: 0.0,
            beta_deg: 0.0,
            v_wind: v,
            p_ref,
            strategy,
            pitch_integral_deg: 0.0,
            infeasible_demand: false,
            speed_limited: false,
        };
        let (p, infeasible) = effective_demand(params, &s);
        s.infeasible_demand = infeasible;
        s.omega_pu = speed_reference(params, v, p, strategy);
        s.beta_deg = pitch_for_power(params, v, s.omega_pu, p);
        s.pitch_integral_deg = s.beta_deg;
        s.t_g_pu = p / s.omega_pu;
        s
    }
}

/// Demand after clamping to what the rotor can deliver at its reference speed.
fn effective_demand(params: &TurbineParams, s: &TurbineState) -> (f64, bool) {
    let omega = params.nominal_speed_pu(s.v_wind);
    let cap = DEMAND_MARGIN * aero_power(params, s.v_wind, omega, 0.0);
    let cap = cap.min(1.0);
    let p = s.p_ref.max(0.0);
    if p > cap {
        (cap, true)
    } else {
        (p, false)
    }
}

/// Rotor speed the strategy steers towards for demand `p`.
fn speed_reference(params: &TurbineParams, v: f64, p: f64, strategy: Strategy) -> f64 {
    let nominal = params.nominal_speed_pu(v);
    match strategy {
        Strategy::OS1 => nominal,
        Strategy::OS2 => {
            let cap = 1.1;
            if aero_power(params, v, cap, 0.0) >= p {
                return cap.max(nominal);
            }
            // Zero-pitch power falls with speed above the optimum.
            let (mut lo, mut hi) = (nominal, cap);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if aero_power(params, v, mid, 0.0) > p {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    }
}

/// Pitch angle at which the rotor extracts `p` at fixed speed.
fn pitch_for_power(params: &TurbineParams, v: f64, omega: f64, p: f64) -> f64 {
    if aero_power(params, v, omega, 0.0) <= p {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, BETA_MAX_DEG);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if aero_power(params, v, omega, mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Advances the turbine by `dt` (at most 10 ms).
pub fn step_turbine(state: &TurbineState, params: &TurbineParams, dt: f64) -> TurbineState {
    assert!(dt > 0.0 && dt <= MAX_STEP_S * (1.0 + 1e-12), "turbine step {dt} s out of range");
    let mut s = *state;
    let v = s.v_wind;
    let (p_dem, infeasible) = effective_demand(params, &s);
    s.infeasible_demand = infeasible;
    let two_h = 2.0 * params.inertia_h_s;
    let omega_ref = speed_reference(params, v, p_dem, s.strategy);
    let err = s.omega_pu - omega_ref;

    // Pitch PI, gain-scheduled on the local torque sensitivity.
    let t_aero = |w: f64, b: f64| aero_power(params, v, w, b) / w;
    let sens = ((t_aero(s.omega_pu, s.beta_deg) - t_aero(s.omega_pu, s.beta_deg + 0.5)) / 0.5).max(1e-3);
    let kp = two_h * 1.4 / sens;
    let ki = two_h / sens;
    let unclamped = kp * err + s.pitch_integral_deg;
    let pushing_out = (unclamped >= BETA_MAX_DEG && err > 0.0) || (unclamped <= 0.0 && err < 0.0);
    if !pushing_out {
        s.pitch_integral_deg = (s.pitch_integral_deg + ki * err * dt).clamp(-BETA_MAX_DEG, 2.0 * BETA_MAX_DEG);
    }
    let beta_cmd = (kp * err + s.pitch_integral_deg).clamp(0.0, BETA_MAX_DEG);

    let t_cmd = match s.strategy {
        Strategy::OS1 => p_dem / s.omega_pu,
        Strategy::OS2 => {
            let k = two_h * 0.5;
            (p_dem / s.omega_pu + k * err).max(0.0)
        }
    };

    let ta = t_aero(s.omega_pu, s.beta_deg);
    let tg = s.t_g_pu;
    let mut omega = s.omega_pu + dt * (ta - tg) / two_h;
    s.speed_limited = false;
    if omega > OMEGA_MAX_PU || omega < OMEGA_MIN_PU {
        omega = omega.clamp(OMEGA_MIN_PU, OMEGA_MAX_PU);
        s.speed_limited = true;
    }
    s.omega_pu = omega;
    s.t_g_pu = tg + (t_cmd - tg) * (dt / params.torque_tau_s).min(1.0);
    s.beta_deg += (beta_cmd - s.beta_deg) * (dt / params.pitch_tau_s).min(1.0);
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub wind_speeds: [f64; 3],
    pub steps: [f64; 6],
    pub operating_fraction: f64,
    pub duration_s: f64,
    pub dt: f64,
    /// Keep every n-th sample in the trace.
    pub sample_every: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            wind_speeds: [8.0, 12.0, 16.0],
            steps: [-0.3, -0.2, -0.1, 0.1, 0.2, 0.3],
            operating_fraction: 0.7,
            duration_s: 40.0,
            dt: 0.005,
            sample_every: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceSample {
    pub time_s: f64,
    pub dp_normalized: f64,
    pub omega_pu: f64,
    pub power_pu: f64,
    pub t_g_pu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepTrace {
    pub v_mps: f64,
    pub dp_ref: f64,
    pub p_initial_pu: f64,
    pub omega_nominal_pu: f64,
    pub infeasible_demand: bool,
    pub speed_limited: bool,
    pub final_normalized: f64,
    /// Last entry into the ±2% band around 1.
    pub settling_time_s: Option<f64>,
    /// Last time OS1 speed left the ±1% band around nominal.
    pub speed_recovery_time_s: Option<f64>,
    pub final_speed_deviation: f64,
    /// Largest `|p − ω·T_g|` over the trace.
    pub identity_error: f64,
    /// Kinetic energy change minus the integrated power imbalance, relative to
    /// the integrated absolute imbalance.
    pub energy_error: f64,
    pub max_betz_ratio: f64,
    pub samples: Vec<TraceSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepExperiment {
    pub strategy: Strategy,
    pub traces: Vec<StepTrace>,
}

/// Operating point of the experiment: a fraction of what the wind allows.
pub fn operating_point(params: &TurbineParams, v: f64, fraction: f64) -> f64 {
    fraction * params.available_power_pu(v, params.nominal_speed_pu(v))
}

pub fn run_step(params: &TurbineParams, strategy: Strategy, v: f64, dp_ref: f64, cfg: &ExperimentConfig) -> StepTrace {
    let p0 = operating_point(params, v, cfg.operating_fraction);
    let mut s = TurbineState::equilibrium(params, v, p0, strategy);
    let omega_nominal = params.nominal_speed_pu(v);
    s.p_ref = p0 + dp_ref;
    let n = (cfg.duration_s / cfg.dt).round() as usize;
    let mut samples = Vec::with_capacity(n / cfg.sample_every.max(1) + 2);
    let mut infeasible = false;
    let mut speed_limited = false;
    let mut last_outside_band = Some(0.0);
    let mut last_speed_outside = None;
    let mut identity_error: f64 = 0.0;
    let mut max_betz: f64 = 0.0;
    let e0 = s.kinetic_energy(params);
    let mut imbalance = 0.0;
    let mut abs_imbalance = 0.0;
    let betz_cap = BETZ * params.wind_power_pu(v);
    let mut prev_gap = aero_power(params, v, s.omega_pu, s.beta_deg) - s.power_pu();

    let record = |t: f64, s: &TurbineState, out: &mut Vec<TraceSample>| {
        let p = s.power_pu();
        out.push(TraceSample {
            time_s: t,
            dp_normalized: (p - p0) / dp_ref,
            omega_pu: s.omega_pu,
            power_pu: p,
            t_g_pu: s.t_g_pu,
        });
    };
    record(0.0, &s, &mut samples);
    for k in 1..=n {
        let t = k as f64 * cfg.dt;
        s = step_turbine(&s, params, cfg.dt);
        infeasible |= s.infeasible_demand;
        speed_limited |= s.speed_limited;
        let p = s.power_pu();
        let pa = aero_power(params, v, s.omega_pu, s.beta_deg);
        max_betz = max_betz.max(pa / betz_cap);
        identity_error = identity_error.max((p - s.omega_pu * s.t_g_pu).abs());
        let gap = pa - p;
        imbalance += 0.5 * (prev_gap + gap) * cfg.dt;
        abs_imbalance += 0.5 * (prev_gap.abs() + gap.abs()) * cfg.dt;
        prev_gap = gap;

        let norm = (p - p0) / dp_ref;
        if (norm - 1.0).abs() > 0.02 {
            last_outside_band = Some(t);
        }
        if (s.omega_pu - omega_nominal).abs() > 0.01 * omega_nominal {
            last_speed_outside = Some(t);
        }
        if k % cfg.sample_every.max(1) == 0 || k == n {
            record(t, &s, &mut samples);
        }
    }
    let final_norm = (s.power_pu() - p0) / dp_ref;
    let de = s.kinetic_energy(params) - e0;
    let energy_error = if abs_imbalance > 0.0 {
        (de - imbalance).abs() / abs_imbalance
    } else {
        de.abs()
    };
    let settled = (final_norm - 1.0).abs() <= 0.02;
    StepTrace {
        v_mps: v,
        dp_ref,
        p_initial_pu: p0,
        omega_nominal_pu: omega_nominal,
        infeasible_demand: infeasible,
        speed_limited,
        final_normalized: final_norm,
        settling_time_s: if settled { last_outside_band.map(|t| t + cfg.dt) } else { None },
        speed_recovery_time_s: match last_speed_outside {
            None => Some(0.0),
            Some(t) if t < cfg.duration_s - 0.5 * cfg.dt => Some(t + cfg.dt),
            Some(_) => None,
        },
        final_speed_deviation: (s.omega_pu - omega_nominal).abs() / omega_nominal,
        identity_error,
        energy_error,
        max_betz_ratio: max_betz,
        samples,
    }
}

/// The 3 × 6 grid of wind speeds and bidirectional demand steps.
pub fn run_step_experiment(params: &TurbineParams, strategy: Strategy, cfg: &ExperimentConfig) -> StepExperiment {
    let mut traces = Vec::with_capacity(18);
    for &v in &cfg.wind_speeds {
        for &dp in &cfg.steps {
            traces.push(run_step(params, strategy, v, dp, cfg));
        }
    }
    StepExperiment { strategy, traces }
}

/// Writes `time_s,v_mps,dp_ref,dp_normalized` rows.
pub fn write_experiment_csv<W: Write>(exp: &StepExperiment, mut out: W) -> std::io::Result<()> {
    writeln!(out, "time_s,v_mps,dp_ref,dp_normalized")?;
    for tr in &exp.traces {
        for s in &tr.samples {
            writeln!(out, "{:.4},{},{},{:.9}", s.time_s, tr.v_mps, tr.dp_ref, s.dp_normalized)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn no_wind_no_power() {
        let p = TurbineParams::default();
        assert_eq!(aero_power(&p, 0.0, 1.0, 0.0), 0.0);
    }

    #[test]
    fn cp_optimum_is_the_curve_maximum() {
        let c = CpCurve::default();
        let (l, cmax) = c.optimum();
        assert_abs_diff_eq!(c.cp(l, 0.0), cmax, epsilon = 1e-15);
        for dl in [-0.5, -0.05, 0.05, 0.5] {
            assert!(c.cp(l + dl, 0.0) < cmax);
        }
        assert!(cmax > 0.45 && cmax < BETZ);
        for b in [1.0, 5.0, 20.0] {
            assert!(c.cp(l, b) < cmax);
        }
    }

    #[test]
    fn aero_power_at_twelve_mps_matches_formula() {
        let p = TurbineParams::default();
        let (l, _) = p.cp_curve.optimum();
        let omega_pu = l * 12.0 / (68.0 * p.rated_speed);
        // Direct evaluation of the coefficient formula.
        let inv: f64 = 1.0 / l - 0.035;
        let cp = 0.5176 * (116.0 * inv - 5.0) * (-21.0 * inv).exp() + 0.0068 * l;
        let watts = 0.5 * 1.225 * PI * 68.0f64.powi(2) * cp * 12.0f64.powi(3);
        assert_abs_diff_eq!(aero_power(&p, 12.0, omega_pu, 0.0), watts / 5e6, epsilon = 1e-12);
    }

    #[test]
    fn rated_point_is_consistent() {
        let p = TurbineParams::default();
        let (l, cmax) = p.cp_curve.optimum();
        let v_rated = p.rated_speed * p.rotor_radius_m / l;
        assert_abs_diff_eq!(aero_power(&p, v_rated, 1.0, 0.0), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.wind_power_pu(v_rated) * cmax, 1.0, epsilon = 1e-9);
        assert!(p.inertia_h_s > 5.0 && p.inertia_h_s < 8.0);
    }

    #[test]
    fn equilibrium_is_invariant() {
        let p = TurbineParams::default();
        for strategy in [Strategy::OS1, Strategy::OS2] {
            for v in [8.0, 12.0, 16.0] {
                let p0 = operating_point(&p, v, 0.7);
                let s0 = TurbineState::equilibrium(&p, v, p0, strategy);
                let mut s = s0;
                for _ in 0..2000 {
                    s = step_turbine(&s, &p, 0.005);
                }
                assert_abs_diff_eq!(s.power_pu(), p0, epsilon = 1e-6);
                assert_abs_diff_eq!(s.omega_pu, s0.omega_pu, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn up_step_at_twelve_mps_settles() {
        let p = TurbineParams::default();
        let cfg = ExperimentConfig::default();
        for strategy in [Strategy::OS1, Strategy::OS2] {
            let tr = run_step(&p, strategy, 12.0, 0.1, &cfg);
            assert!(!tr.infeasible_demand);
            assert_abs_diff_eq!(tr.p_initial_pu, 0.7, epsilon = 1e-12);
            assert_abs_diff_eq!(tr.p_initial_pu + tr.dp_ref * tr.final_normalized, 0.8, epsilon = 0.002);
            assert!(tr.settling_time_s.is_some(), "{strategy}");
        }
    }

    #[test]
    fn os1_speed_returns_to_nominal() {
        let p = TurbineParams::default();
        let cfg = ExperimentConfig::default();
        for dp in [-0.3, 0.1, 0.3] {
            let tr = run_step(&p, Strategy::OS1, 16.0, dp, &cfg);
            assert!(tr.final_speed_deviation < 0.01);
            assert!(tr.speed_recovery_time_s.is_some());
        }
    }

    #[test]
    fn os2_down_step_converges() {
        let p = TurbineParams::default();
        let tr = run_step(&p, Strategy::OS2, 16.0, -0.1, &ExperimentConfig::default());
        assert!(!tr.infeasible_demand);
        assert_abs_diff_eq!(tr.final_normalized, 1.0, epsilon = 0.02);
        let tr = run_step(&p, Strategy::OS2, 8.0, -0.2, &ExperimentConfig::default());
        assert_abs_diff_eq!(tr.final_normalized, 1.0, epsilon = 0.02);
        assert!(tr.samples.iter().all(|s| (OMEGA_MIN_PU..=OMEGA_MAX_PU).contains(&s.omega_pu)));
    }

    #[test]
    fn large_up_step_in_weak_wind_is_flagged() {
        let p = TurbineParams::default();
        let tr = run_step(&p, Strategy::OS1, 8.0, 0.3, &ExperimentConfig::default());
        assert!(tr.infeasible_demand);
        assert!(tr.final_normalized < 0.98);
    }

    #[test]
    fn power_identity_energy_and_betz_hold() {
        let p = TurbineParams::default();
        let cfg = ExperimentConfig::default();
        for strategy in [Strategy::OS1, Strategy::OS2] {
            for (v, dp) in [(12.0, 0.2), (16.0, -0.3), (8.0, 0.1)] {
                let tr = run_step(&p, strategy, v, dp, &cfg);
                assert!(tr.identity_error < 1e-9);
                assert!(tr.energy_error < 1e-3, "{strategy} {v} {dp}: {}", tr.energy_error);
                assert!(tr.max_betz_ratio <= 1.0);
            }
        }
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("os2".parse::<Strategy>(), Ok(Strategy::OS2));
        assert!("os3".parse::<Strategy>().is_err());
    }
}
