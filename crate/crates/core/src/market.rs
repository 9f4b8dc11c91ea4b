//! Robust day-ahead energy offers for a price-taking DVPP.
//!
//! Prices deviate from the interval midpoint by at most the half-width, and
//! the scaled deviations sum to at most the budget `Γ`. Offers are limited by
//! what the DVPP can deliver in the worst availability case, so availability
//! never causes shortfall inside the set and only prices drive the worst case.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{LinearProgram, LpError, Relation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarketError {
    #[error("dispatchable ceiling is zero in every period")]
    InfeasibleProfile,
    #[error("period {period}: {what}")]
    InvalidInterval { period: usize, what: String },
    #[error("uncertainty budget {gamma} outside [0, {periods}]")]
    InvalidBudget { gamma: f64, periods: usize },
    #[error("LP solver failed: {0}")]
    Solver(LpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodInterval {
    pub price_low: f64,
    pub price_high: f64,
    pub avail_low_mw: f64,
    pub avail_high_mw: f64,
}

impl PeriodInterval {
    pub fn nominal_price(&self) -> f64 {
        0.5 * (self.price_low + self.price_high)
    }

    pub fn price_half_width(&self) -> f64 {
        0.5 * (self.price_high - self.price_low)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertainProfile {
    #[serde(rename = "period")]
    pub periods: Vec<PeriodInterval>,
    pub gamma: f64,
}

impl UncertainProfile {
    pub fn validate(&self) -> Result<(), MarketError> {
        for (t, p) in self.periods.iter().enumerate() {
            let bad = |what: &str| MarketError::InvalidInterval { period: t, what: what.to_string() };
            let all = [p.price_low, p.price_high, p.avail_low_mw, p.avail_high_mw];
            if all.iter().any(|v| !v.is_finite()) {
                return Err(bad("non-finite bound"));
            }
            if p.price_low > p.price_high {
                return Err(bad("price_low above price_high"));
            }
            if p.avail_low_mw > p.avail_high_mw || p.avail_low_mw < 0.0 {
                return Err(bad("availability interval invalid"));
            }
        }
        let n = self.periods.len();
        if !(self.gamma >= 0.0 && self.gamma <= n as f64) {
            return Err(MarketError::InvalidBudget { gamma: self.gamma, periods: n });
        }
        Ok(())
    }
}

/// What the DVPP can offer besides the uncertain renewable availability.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Portfolio {
    /// Dispatchable capability (storage-backed, slow and bidirectional units).
    #[serde(default)]
    pub firm_mw: f64,
    #[serde(default)]
    pub storage_power_mw: f64,
    /// Energy that can be shifted into offers over the horizon.
    #[serde(default)]
    pub storage_energy_mwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OfferSchedule {
    pub offer_mw: Vec<f64>,
    /// Planned storage discharge per period.
    pub storage_mw: Vec<f64>,
    pub worst_case_revenue: f64,
    pub penalty_per_mwh: f64,
}

/// Per-period cap without storage: firm capability plus low availability.
pub fn base_ceiling(profile: &UncertainProfile, portfolio: &Portfolio) -> Vec<f64> {
    profile.periods.iter().map(|p| portfolio.firm_mw + p.avail_low_mw).collect()
}

/// Maximizes worst-case revenue over the budgeted price set.
///
/// The inner minimization is replaced by its LP dual, so the whole problem is
/// one LP in offers `o`, storage `s`, budget multiplier `q` and per-period
/// multipliers `p`:
/// `max Σ λ̄ o − Γ q − Σ p` with `p_t + q ≥ δ_t o_t`.
pub fn solve_robust_offer(
    profile: &UncertainProfile,
    portfolio: &Portfolio,
    penalty_per_mwh: f64,
) -> Result<OfferSchedule, MarketError> {
    profile.validate()?;
    let ceiling = base_ceiling(profile, portfolio);
    let has_storage = portfolio.storage_power_mw > 0.0 && portfolio.storage_energy_mwh > 0.0;
    if ceiling.iter().all(|&c| c <= 0.0) && !has_storage {
        return Err(MarketError::InfeasibleProfile);
    }
    let n = profile.periods.len();
    // Layout: o (n), s (n), p (n), q (1).
    let nv = 3 * n + 1;
    let (o, s, p, q) = (0, n, 2 * n, 3 * n);
    let mut obj = vec![0.0; nv];
    for (t, per) in profile.periods.iter().enumerate() {
        obj[o + t] = -per.nominal_price();
        obj[p + t] = 1.0;
        // Tiny preference for not cycling storage needlessly.
        obj[s + t] = 1e-9;
    }
    obj[q] = profile.gamma;
    let mut lp = LinearProgram::new(obj);
    for t in 0..n {
        lp.set_bounds(s + t, 0.0, if has_storage { portfolio.storage_power_mw } else { 0.0 });
        let mut c = vec![0.0; nv];
        c[o + t] = 1.0;
        c[s + t] = -1.0;
        lp.add(c, Relation::Le, ceiling[t].max(0.0));
        let mut c = vec![0.0; nv];
        c[p + t] = 1.0;
        c[q] = 1.0;
        c[o + t] = -profile.periods[t].price_half_width();
        lp.add(c, Relation::Ge, 0.0);
    }
    if has_storage {
        let mut c = vec![0.0; nv];
        c[s..s + n].iter_mut().for_each(|v| *v = 1.0);
        lp.add(c, Relation::Le, portfolio.storage_energy_mwh);
    }
    let sol = lp.solve().map_err(MarketError::Solver)?;
    let offer_mw: Vec<f64> = sol.x[o..o + n].iter().map(|v| v.max(0.0)).collect();
    let storage_mw: Vec<f64> = sol.x[s..s + n].iter().map(|v| v.max(0.0)).collect();
    let worst = worst_case_revenue(profile, &offer_mw);
    Ok(OfferSchedule {
        offer_mw,
        storage_mw,
        worst_case_revenue: worst,
        penalty_per_mwh,
    })
}

/// Exact worst case of `Σ λ_t o_t` over the budgeted price set: the largest
/// `⌊Γ⌋` losses `δ_t o_t` in full plus the fractional remainder of the next.
pub fn worst_case_revenue(profile: &UncertainProfile, offer_mw: &[f64]) -> f64 {
    let nominal: f64 = profile
        .periods
        .iter()
        .zip(offer_mw)
        .map(|(p, o)| p.nominal_price() * o)
        .sum();
    let mut losses: Vec<f64> = profile
        .periods
        .iter()
        .zip(offer_mw)
        .map(|(p, o)| p.price_half_width() * o.max(0.0))
        .collect();
    losses.sort_by(|a, b| b.partial_cmp(a).expect("finite losses"));
    let full = profile.gamma.floor() as usize;
    let frac = profile.gamma - profile.gamma.floor();
    let mut loss: f64 = losses.iter().take(full).sum();
    if let Some(next) = losses.get(full) {
        loss += frac * next;
    }
    nominal - loss
}

/// Realized revenue and shortfall for one outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settlement {
    pub revenue: f64,
    pub shortfall_mwh: f64,
}

/// `Σ λ_t min(o_t, d_t) − penalty · max(0, o_t − d_t)` with hourly periods,
/// where `d_t` is firm capability plus realized availability plus planned
/// storage.
pub fn settle(
    schedule: &OfferSchedule,
    portfolio: &Portfolio,
    prices: &[f64],
    availability_mw: &[f64],
) -> Settlement {
    let mut revenue = 0.0;
    let mut shortfall = 0.0;
    for (t, &o) in schedule.offer_mw.iter().enumerate() {
        let storage = schedule.storage_mw.get(t).copied().unwrap_or(0.0);
        let deliverable = portfolio.firm_mw + availability_mw[t] + storage;
        let short = (o - deliverable).max(0.0);
        revenue += prices[t] * o.min(deliverable) - schedule.penalty_per_mwh * short;
        shortfall += short;
    }
    Settlement {
        revenue,
        shortfall_mwh: shortfall,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub prices: Vec<f64>,
    pub availability_mw: Vec<f64>,
}

/// Seeded samples from the uncertainty set: `⌊Γ⌋` random periods deviate by
/// up to the full half-width, one more by up to the fractional budget, and
/// availability is uniform within its interval.
pub fn sample_realizations(profile: &UncertainProfile, count: usize, seed: u64) -> Vec<Realization> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = profile.periods.len();
    let full = (profile.gamma.floor() as usize).min(n);
    let frac = profile.gamma - profile.gamma.floor();
    (0..count)
        .map(|_| {
            let picks = sample(&mut rng, n, (full + 1).min(n)).into_vec();
            let mut prices: Vec<f64> = profile.periods.iter().map(|p| p.nominal_price()).collect();
            for (i, &t) in picks.iter().enumerate() {
                let scale = if i < full { 1.0 } else { frac };
                let z: f64 = rng.random_range(-1.0..=1.0);
                prices[t] += scale * z * profile.periods[t].price_half_width();
            }
            let availability_mw = profile
                .periods
                .iter()
                .map(|p| {
                    if p.avail_high_mw > p.avail_low_mw {
                        rng.random_range(p.avail_low_mw..=p.avail_high_mw)
                    } else {
                        p.avail_low_mw
                    }
                })
                .collect();
            Realization { prices, availability_mw }
        })
        .collect()
}

/// Lowest settled revenue over the vertices of the uncertainty set: each
/// period's price at nominal, low or high with at most `Γ` (integer) periods
/// off nominal, and each availability at either bound.
pub fn vertex_worst_case(
    schedule: &OfferSchedule,
    portfolio: &Portfolio,
    profile: &UncertainProfile,
) -> f64 {
    let n = profile.periods.len();
    let budget = profile.gamma.floor() as usize;
    let mut worst = f64::INFINITY;
    let price_choices = 3usize.pow(n as u32);
    for code in 0..price_choices {
        let mut c = code;
        let mut off = 0;
        let mut prices = Vec::with_capacity(n);
        for p in &profile.periods {
            let k = c % 3;
            c /= 3;
            prices.push(match k {
                0 => p.nominal_price(),
                1 => {
                    off += 1;
                    p.price_low
                }
                _ => {
                    off += 1;
                    p.price_high
                }
            });
        }
        if off > budget {
            continue;
        }
        for mask in 0..(1usize << n) {
            let avail: Vec<f64> = profile
                .periods
                .iter()
                .enumerate()
                .map(|(t, p)| if mask >> t & 1 == 1 { p.avail_high_mw } else { p.avail_low_mw })
                .collect();
            worst = worst.min(settle(schedule, portfolio, &prices, &avail).revenue);
        }
    }
    worst
}

/// Schema of the market input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketInput {
    pub gamma: f64,
    #[serde(default)]
    pub penalty_per_mwh: f64,
    #[serde(default)]
    pub portfolio: Option<Portfolio>,
    #[serde(rename = "period")]
    pub periods: Vec<PeriodInterval>,
}

impl MarketInput {
    pub fn profile(&self) -> UncertainProfile {
        UncertainProfile {
            periods: self.periods.clone(),
            gamma: self.gamma,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn example(gamma: f64) -> UncertainProfile {
        let p = PeriodInterval { price_low: 10.0, price_high: 30.0, avail_low_mw: 5.0, avail_high_mw: 10.0 };
        UncertainProfile { periods: vec![p, p], gamma }
    }

    #[test]
    fn two_period_example() {
        let prof = example(2.0);
        let port = Portfolio::default();
        let s = solve_robust_offer(&prof, &port, 0.0).unwrap();
        assert_abs_diff_eq!(s.offer_mw[0], 5.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.offer_mw[1], 5.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.worst_case_revenue, 100.0, epsilon = 1e-9);
        assert_abs_diff_eq!(vertex_worst_case(&s, &port, &prof), 100.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_budget_is_nominal() {
        let s = solve_robust_offer(&example(0.0), &Portfolio::default(), 0.0).unwrap();
        assert_eq!(s.offer_mw, vec![5.0, 5.0]);
        assert_abs_diff_eq!(s.worst_case_revenue, 200.0, epsilon = 1e-9);
    }

    #[test]
    fn negative_worst_prices_get_no_offer() {
        let mut prof = example(2.0);
        prof.periods[1].price_low = -40.0;
        prof.periods[1].price_high = 20.0;
        let s = solve_robust_offer(&prof, &Portfolio::default(), 0.0).unwrap();
        assert_abs_diff_eq!(s.offer_mw[1], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.offer_mw[0], 5.0, epsilon = 1e-9);
    }

    #[test]
    fn settlement_formula() {
        let s = OfferSchedule { offer_mw: vec![5.0], storage_mw: vec![0.0], worst_case_revenue: 0.0, penalty_per_mwh: 50.0 };
        let port = Portfolio::default();
        let exact = settle(&s, &port, &[20.0], &[5.0]);
        assert_eq!(exact, Settlement { revenue: 100.0, shortfall_mwh: 0.0 });
        let short = settle(&s, &port, &[20.0], &[4.0]);
        assert_abs_diff_eq!(short.revenue, 80.0 - 50.0, epsilon = 1e-12);
        assert_abs_diff_eq!(short.shortfall_mwh, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sampled_realizations_respect_certificate() {
        let prof = example(1.5);
        let port = Portfolio { firm_mw: 2.0, ..Default::default() };
        let s = solve_robust_offer(&prof, &port, 50.0).unwrap();
        for r in sample_realizations(&prof, 500, 7) {
            let rev = settle(&s, &port, &r.prices, &r.availability_mw).revenue;
            assert!(rev >= s.worst_case_revenue - 1e-6);
        }
    }

    #[test]
    fn interior_optimum_matches_grid_search() {
        // Unequal ceilings with negative low prices make the optimum interior.
        let prof = UncertainProfile {
            periods: vec![
                PeriodInterval { price_low: -0.5, price_high: 2.5, avail_low_mw: 10.0, avail_high_mw: 10.0 },
                PeriodInterval { price_low: -0.5, price_high: 2.5, avail_low_mw: 5.0, avail_high_mw: 5.0 },
            ],
            gamma: 1.0,
        };
        let s = solve_robust_offer(&prof, &Portfolio::default(), 0.0).unwrap();
        let mut best = f64::NEG_INFINITY;
        for i in 0..=100 {
            for j in 0..=50 {
                best = best.max(worst_case_revenue(&prof, &[i as f64 * 0.1, j as f64 * 0.1]));
            }
        }
        assert_abs_diff_eq!(s.worst_case_revenue, best, epsilon = 1e-9);
        assert_abs_diff_eq!(s.offer_mw[0], 5.0, epsilon = 1e-9);
    }

    #[test]
    fn storage_extends_ceiling_within_energy() {
        let prof = example(0.0);
        let port = Portfolio { firm_mw: 0.0, storage_power_mw: 3.0, storage_energy_mwh: 4.0 };
        let s = solve_robust_offer(&prof, &port, 0.0).unwrap();
        assert_abs_diff_eq!(s.offer_mw.iter().sum::<f64>(), 14.0, epsilon = 1e-9);
        assert!(s.storage_mw.iter().sum::<f64>() <= 4.0 + 1e-9);
    }

    #[test]
    fn invalid_inputs() {
        let mut prof = example(3.0);
        assert!(matches!(solve_robust_offer(&prof, &Portfolio::default(), 0.0), Err(MarketError::InvalidBudget { .. })));
        prof.gamma = 1.0;
        prof.periods[0].price_low = 40.0;
        assert!(matches!(solve_robust_offer(&prof, &Portfolio::default(), 0.0), Err(MarketError::InvalidInterval { period: 0, .. })));
        let zero = UncertainProfile {
            periods: vec![PeriodInterval { price_low: 1.0, price_high: 2.0, avail_low_mw: 0.0, avail_high_mw: 3.0 }],
            gamma: 0.0,
        };
        assert_eq!(solve_robust_offer(&zero, &Portfolio::default(), 0.0), Err(MarketError::InfeasibleProfile));
    }

    #[test]
    fn worst_case_non_increasing_in_budget() {
        let port = Portfolio::default();
        let mut last = f64::INFINITY;
        for g in [0.0, 0.5, 1.0, 1.5, 2.0] {
            let w = solve_robust_offer(&example(g), &port, 0.0).unwrap().worst_case_revenue;
            assert!(w <= last + 1e-9);
            last = w;
        }
    }

    #[test]
    fn market_file_parses() {
        let text = r#"
gamma = 2.0
penalty_per_mwh = 50.0

[[period]]
price_low = 10.0
price_high = 30.0
avail_low_mw = 5.0
avail_high_mw = 10.0
"#;
        let m: MarketInput = toml::from_str(text).unwrap();
        assert_eq!(m.profile().periods.len(), 1);
        assert_eq!(m.penalty_per_mwh, 50.0);
    }
}
