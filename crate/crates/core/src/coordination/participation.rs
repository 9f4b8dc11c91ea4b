use serde::Serialize;

use super::tf::{log_grid, TransferFunction};
use super::{CoordinationError, DvppSpec};
use crate::units::TechSpec;

/// Headroom below this is treated as none.
const HEADROOM_TOL_MW: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pool {
    Slow,
    Fast,
}

/// What the participation design needs to know about one device.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceModel {
    pub unit_id: String,
    pub tech: TechSpec,
    pub headroom_mw: f64,
}

impl DeviceModel {
    pub fn new(unit_id: impl Into<String>, tech: TechSpec, headroom_mw: f64) -> Self {
        Self {
            unit_id: unit_id.into(),
            tech,
            headroom_mw,
        }
    }

    fn tau(&self) -> f64 {
        self.tech.lag_time_constant_s()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticipationFactor {
    pub unit_id: String,
    pub pool: Pool,
    pub filter: TransferFunction,
    /// Share of the pool mass, in `[0, 1]`.
    pub static_weight: f64,
    pub headroom_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CoordinationWarning {
    /// A pool had no usable member; the other pool carries all mass.
    EmptyPool(Pool),
    /// Mass moved to the slow pool, which cannot follow fast frequency content.
    SpecDegraded { failed_unit: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticipationDesign {
    pub factors: Vec<ParticipationFactor>,
    /// Time constant of the pool crossover; `None` for a single-pool design.
    pub split_tau_s: Option<f64>,
    pub warnings: Vec<CoordinationWarning>,
}

impl ParticipationDesign {
    pub fn factor(&self, unit_id: &str) -> Option<&ParticipationFactor> {
        self.factors.iter().find(|f| f.unit_id == unit_id)
    }
}

/// Splits the aggregate specification over the devices.
///
/// Converter-interfaced devices form the fast pool unless `spec.split_tau_s`
/// is given, in which case devices with a lag below it are fast.
pub fn design_participation(
    devices: &[DeviceModel],
    spec: &DvppSpec,
) -> Result<ParticipationDesign, CoordinationError> {
    spec.validate()?;
    let total: f64 = devices.iter().map(|d| d.headroom_mw.max(0.0)).sum();
    if devices.is_empty() || total <= HEADROOM_TOL_MW {
        return Err(CoordinationError::NoHeadroom);
    }
    let pools: Vec<Pool> = devices
        .iter()
        .map(|d| {
            let fast = match spec.split_tau_s {
                Some(t) => d.tau() < t,
                None => d.tech.interface.is_converter(),
            };
            if fast {
                Pool::Fast
            } else {
                Pool::Slow
            }
        })
        .collect();

    let usable = |p: Pool| {
        devices
            .iter()
            .zip(&pools)
            .filter(move |(d, q)| **q == p && d.headroom_mw > HEADROOM_TOL_MW)
            .map(|(d, _)| d)
    };
    let split = spec.split_tau_s.or_else(|| {
        let slow_fast = usable(Pool::Fast).map(|d| d.tau()).fold(f64::NAN, f64::max);
        let fast_slow = usable(Pool::Slow).map(|d| d.tau()).fold(f64::NAN, f64::min);
        Some((slow_fast * fast_slow).sqrt())
    });

    let headrooms: Vec<f64> = devices.iter().map(|d| d.headroom_mw).collect();
    let ids: Vec<&str> = devices.iter().map(|d| d.unit_id.as_str()).collect();
    Ok(build(&ids, &pools, &headrooms, split))
}

/// Assembles factors for the given pool membership.
fn build(ids: &[&str], pools: &[Pool], headrooms: &[f64], split: Option<f64>) -> ParticipationDesign {
    let pool_total = |p: Pool| -> f64 {
        pools
            .iter()
            .zip(headrooms)
            .filter(|(q, h)| **q == p && **h > HEADROOM_TOL_MW)
            .map(|(_, h)| h)
            .sum()
    };
    let fast_total = pool_total(Pool::Fast);
    let slow_total = pool_total(Pool::Slow);
    let mut warnings = Vec::new();

    let single = if fast_total <= HEADROOM_TOL_MW {
        if pools.contains(&Pool::Fast) || slow_total > 0.0 {
            warnings.push(CoordinationWarning::EmptyPool(Pool::Fast));
        }
        Some(Pool::Slow)
    } else if slow_total <= HEADROOM_TOL_MW {
        warnings.push(CoordinationWarning::EmptyPool(Pool::Slow));
        Some(Pool::Fast)
    } else {
        None
    };
    // A single unit never needs a warning.
    if ids.len() == 1 {
        warnings.clear();
    }

    let split = match (single, split) {
        (None, Some(t)) if t.is_finite() && t > 0.0 => Some(t),
        (None, _) => Some(1.0),
        (Some(_), _) => None,
    };

    let factors = ids
        .iter()
        .zip(pools)
        .zip(headrooms)
        .map(|((id, &pool), &h)| {
            let h_use = if h > HEADROOM_TOL_MW { h } else { 0.0 };
            let (weight, shape) = match single {
                Some(p) => {
                    let total = if p == Pool::Fast { fast_total } else { slow_total };
                    (h_use / total, TransferFunction::constant(1.0))
                }
                None => {
                    let t = split.expect("two-pool design has a split");
                    match pool {
                        Pool::Fast => (h_use / fast_total, TransferFunction::first_order_high_pass(t)),
                        Pool::Slow => (h_use / slow_total, TransferFunction::first_order_lag(t)),
                    }
                }
            };
            ParticipationFactor {
                unit_id: id.to_string(),
                pool,
                filter: if weight > 0.0 {
                    shape.scale(weight)
                } else {
                    TransferFunction::zero()
                },
                static_weight: weight,
                headroom_mw: h,
            }
        })
        .collect();
    ParticipationDesign {
        factors,
        split_tau_s: split,
        warnings,
    }
}

/// Redistributes a failed unit's mass within its pool by remaining headroom.
/// The failed unit is dropped from the returned design.
pub fn renormalize_on_failure(
    design: &ParticipationDesign,
    failed_unit: &str,
) -> Result<ParticipationDesign, CoordinationError> {
    let failed = design
        .factor(failed_unit)
        .ok_or_else(|| CoordinationError::UnknownUnit(failed_unit.to_string()))?;
    let failed_pool = failed.pool;
    let survivors: Vec<&ParticipationFactor> = design
        .factors
        .iter()
        .filter(|f| f.unit_id != failed_unit)
        .collect();
    if !survivors.iter().any(|f| f.headroom_mw > HEADROOM_TOL_MW) {
        return Err(CoordinationError::AllUnitsFailed);
    }
    let ids: Vec<&str> = survivors.iter().map(|f| f.unit_id.as_str()).collect();
    let pools: Vec<Pool> = survivors.iter().map(|f| f.pool).collect();
    let headrooms: Vec<f64> = survivors.iter().map(|f| f.headroom_mw).collect();
    let mut out = build(&ids, &pools, &headrooms, design.split_tau_s);
    let pool_emptied = !survivors
        .iter()
        .any(|f| f.pool == failed_pool && f.headroom_mw > HEADROOM_TOL_MW);
    if pool_emptied && design.split_tau_s.is_some() {
        out.warnings.retain(|w| !matches!(w, CoordinationWarning::EmptyPool(_)));
        if failed_pool == Pool::Fast {
            out.warnings.push(CoordinationWarning::SpecDegraded {
                failed_unit: failed_unit.to_string(),
            });
        } else {
            out.warnings.push(CoordinationWarning::EmptyPool(Pool::Slow));
        }
    }
    Ok(out)
}

/// Largest `|Σ m_i(jω) − 1|` over 200 log-spaced points in `[1e-3, 1e2]` rad/s.
pub fn partition_error(factors: &[ParticipationFactor]) -> f64 {
    log_grid(1e-3, 1e2, 200)
        .into_iter()
        .map(|w| {
            let sum: num_complex::Complex64 = factors.iter().map(|f| f.filter.eval_jw(w)).sum();
            (sum - 1.0).norm()
        })
        .fold(0.0, f64::max)
}
