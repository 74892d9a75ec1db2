//! Market workflow: bucket quotes by time to maturity, pick liquid
//! representatives, fit the liquid curve, classify illiquid bonds, calibrate
//! the probing frequency to observed spreads, and price unquoted bonds.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::curves::{
    bond_yield, fit_svensson, to_model_cashflows, year_fraction, BondQuote, BondSpec, DayCount,
    SvenssonParams,
};
use crate::error::{Error, Result};
use crate::lookback::{CaseId, Payoff, BUSINESS_DAYS};
use crate::math::{mean_and_std, population_std};
use crate::simulate::McConfig;
use crate::spread::{solve_gamma_multi, LiquiditySpreadResult, ModelEnv};

/// Maturity bucket; intervals are `(lo, hi]` years.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBucket {
    pub name: &'static str,
    pub lo: f64,
    pub hi: f64,
}

/// The bucket partition of the maturity axis.
pub const BUCKETS: [TimeBucket; 16] = [
    TimeBucket { name: "A", lo: 0.0, hi: 0.25 },
    TimeBucket { name: "B", lo: 0.25, hi: 0.5 },
    TimeBucket { name: "C", lo: 0.5, hi: 0.75 },
    TimeBucket { name: "D", lo: 0.75, hi: 1.0 },
    TimeBucket { name: "E", lo: 1.0, hi: 1.5 },
    TimeBucket { name: "F", lo: 1.5, hi: 2.5 },
    TimeBucket { name: "G", lo: 2.5, hi: 3.5 },
    TimeBucket { name: "H", lo: 3.5, hi: 5.0 },
    TimeBucket { name: "I", lo: 5.0, hi: 7.5 },
    TimeBucket { name: "L", lo: 7.5, hi: 10.0 },
    TimeBucket { name: "M", lo: 10.0, hi: 15.0 },
    TimeBucket { name: "N", lo: 15.0, hi: 20.0 },
    TimeBucket { name: "O", lo: 20.0, hi: 25.0 },
    TimeBucket { name: "P", lo: 25.0, hi: 30.0 },
    TimeBucket { name: "Q", lo: 30.0, hi: 40.0 },
    TimeBucket { name: "R", lo: 40.0, hi: f64::INFINITY },
];

/// Bucket containing a positive time to maturity (boundary to the lower
/// bucket: `(lo, hi]`).
pub fn bucket_of(ttm: f64) -> Result<&'static TimeBucket> {
    if !(ttm > 0.0) {
        return Err(Error::invalid("ttm", "time to maturity must be positive"));
    }
    Ok(BUCKETS
        .iter()
        .find(|b| ttm > b.lo && ttm <= b.hi)
        .expect("buckets partition (0, inf)"))
}

/// A quote with its model-time maturity and bucket.
#[derive(Debug, Clone)]
pub struct BucketedQuote {
    pub quote: BondQuote,
    pub ttm: f64,
    pub bucket: &'static TimeBucket,
}

/// Attach time to maturity (ACT/365F from the quote date) and bucket.
pub fn assign_buckets(quotes: &[BondQuote]) -> Result<Vec<BucketedQuote>> {
    quotes
        .iter()
        .map(|q| {
            let ttm = year_fraction(q.as_of, q.bond.maturity_date, DayCount::act_365_fixed())?;
            Ok(BucketedQuote {
                quote: q.clone(),
                ttm,
                bucket: bucket_of(ttm)?,
            })
        })
        .collect()
}

/// Volume window for the traded filter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeWindow {
    #[default]
    LastDay,
    LastWeek,
}

fn traded_in_window(q: &BondQuote, window: VolumeWindow) -> bool {
    if q.volume <= 0.0 {
        return false;
    }
    match (window, q.last_trade_date) {
        (VolumeWindow::LastDay, Some(d)) => (q.as_of - d).num_days() <= 1,
        (VolumeWindow::LastWeek, Some(d)) => (q.as_of - d).num_days() <= 7,
        // Volume without a trade date counts as traded.
        (_, None) => true,
    }
}

/// Liquid-representative selection.
#[derive(Debug, Clone)]
pub struct LiquidSelection {
    /// Ids of the representatives, up to three per bucket.
    pub representatives: Vec<String>,
    /// Buckets skipped because nothing traded in the window.
    pub skipped_buckets: Vec<&'static str>,
}

/// Pick up to three representatives per bucket: traded in the window,
/// smallest bid-ask spread first; ties broken by larger volume, then by id.
pub fn select_liquid(bucketed: &[BucketedQuote], window: VolumeWindow) -> LiquidSelection {
    let mut representatives = Vec::new();
    let mut skipped = Vec::new();
    for bucket in &BUCKETS {
        let mut candidates: Vec<&BucketedQuote> = bucketed
            .iter()
            .filter(|b| std::ptr::eq(b.bucket, bucket))
            .collect();
        if candidates.is_empty() {
            continue;
        }
        candidates.retain(|b| traded_in_window(&b.quote, window));
        if candidates.is_empty() {
            skipped.push(bucket.name);
            continue;
        }
        candidates.sort_by(|a, b| {
            a.quote
                .bid_ask_spread()
                .total_cmp(&b.quote.bid_ask_spread())
                .then(b.quote.volume.total_cmp(&a.quote.volume))
                .then(a.quote.id.cmp(&b.quote.id))
        });
        representatives.extend(candidates.iter().take(3).map(|b| b.quote.id.clone()));
    }
    LiquidSelection {
        representatives,
        skipped_buckets: skipped,
    }
}

/// Liquidity label of a quoted bond.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LiquidityLabel {
    LiquidRep,
    Liquid,
    Illiquid,
}

impl std::fmt::Display for LiquidityLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            LiquidityLabel::LiquidRep => "LIQUID_REP",
            LiquidityLabel::Liquid => "LIQUID",
            LiquidityLabel::Illiquid => "ILLIQUID",
        };
        f.write_str(s)
    }
}

/// One classified bond.
#[derive(Debug, Clone)]
pub struct ClassifiedBond {
    pub id: String,
    pub bucket: &'static str,
    pub ttm: f64,
    pub flat_yield: f64,
    pub curve_yield: f64,
    /// Yield minus liquid-curve yield, in basis points.
    pub spread_bps: f64,
    /// Population standard deviation of the bucket's spreads, basis points.
    pub sigma_bucket_bps: f64,
    pub label: LiquidityLabel,
    /// Negative spread beyond one bucket deviation: a price that has not
    /// adjusted to the current curve.
    pub stale: bool,
}

/// Classification of all quotes against the liquid curve.
#[derive(Debug, Clone)]
pub struct LiquidityClassification {
    pub bonds: Vec<ClassifiedBond>,
    /// Buckets with fewer than two bonds, where no deviation is defined.
    pub excluded_buckets: Vec<&'static str>,
}

impl LiquidityClassification {
    pub fn illiquid(&self) -> impl Iterator<Item = &ClassifiedBond> {
        self.bonds
            .iter()
            .filter(|b| b.label == LiquidityLabel::Illiquid)
    }
}

/// Classify bonds: a bond is illiquid when its yield exceeds the liquid
/// curve by more than one bucket standard deviation. Negative deviations are
/// retained (and flagged stale past one deviation) but never illiquid.
pub fn classify(
    bucketed: &[BucketedQuote],
    liquid_params: &SvenssonParams,
    representatives: &[String],
) -> Result<LiquidityClassification> {
    struct Row {
        idx: usize,
        bucket: &'static str,
        spread_bps: f64,
    }
    let mut rows = Vec::with_capacity(bucketed.len());
    for (idx, b) in bucketed.iter().enumerate() {
        let cf = to_model_cashflows(&b.quote.bond, b.quote.as_of)?;
        let flat_yield = bond_yield(b.quote.mid_dirty()?, &cf)?;
        let curve_yield = liquid_params.yield_at(b.ttm);
        rows.push((
            Row {
                idx,
                bucket: b.bucket.name,
                spread_bps: (flat_yield - curve_yield) * 1e4,
            },
            flat_yield,
            curve_yield,
        ));
    }

    let mut excluded = Vec::new();
    let mut sigma_of_bucket: Vec<(&'static str, f64)> = Vec::new();
    for bucket in &BUCKETS {
        let spreads: Vec<f64> = rows
            .iter()
            .filter(|(r, _, _)| r.bucket == bucket.name)
            .map(|(r, _, _)| r.spread_bps)
            .collect();
        if spreads.is_empty() {
            continue;
        }
        if spreads.len() < 2 {
            excluded.push(bucket.name);
            continue;
        }
        sigma_of_bucket.push((bucket.name, population_std(&spreads)));
    }

    let mut bonds = Vec::with_capacity(rows.len());
    for (row, flat_yield, curve_yield) in rows {
        let b = &bucketed[row.idx];
        let sigma = sigma_of_bucket
            .iter()
            .find(|(name, _)| *name == row.bucket)
            .map(|&(_, s)| s);
        let Some(sigma) = sigma else {
            continue; // bucket excluded
        };
        let is_rep = representatives.contains(&b.quote.id);
        let label = if row.spread_bps > sigma {
            LiquidityLabel::Illiquid
        } else if is_rep {
            LiquidityLabel::LiquidRep
        } else {
            LiquidityLabel::Liquid
        };
        bonds.push(ClassifiedBond {
            id: b.quote.id.clone(),
            bucket: row.bucket,
            ttm: b.ttm,
            flat_yield,
            curve_yield,
            spread_bps: row.spread_bps,
            sigma_bucket_bps: sigma,
            label,
            stale: row.spread_bps < -sigma,
        });
    }
    Ok(LiquidityClassification {
        bonds,
        excluded_buckets: excluded,
    })
}

/// Full selection + fit + classification pass over raw quotes.
pub fn classify_quotes(
    quotes: &[BondQuote],
    window: VolumeWindow,
) -> Result<(LiquidityClassification, SvenssonParams, LiquidSelection)> {
    let bucketed = assign_buckets(quotes)?;
    let selection = select_liquid(&bucketed, window);
    let rep_quotes: Vec<BondQuote> = bucketed
        .iter()
        .filter(|b| selection.representatives.contains(&b.quote.id))
        .map(|b| b.quote.clone())
        .collect();
    let params = fit_svensson(&rep_quotes)?;
    let classification = classify(&bucketed, &params, &selection.representatives)?;
    Ok((classification, params, selection))
}

/// Outcome of matching the model spread to a market spread over the integer
/// probing spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CalibrationStatus {
    Matched,
    /// Market spread below the one-day model spread.
    FloorHit,
    /// Negative market spread; the model only produces nonnegative spreads.
    Unreachable,
}

impl std::fmt::Display for CalibrationStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CalibrationStatus::Matched => "MATCHED",
            CalibrationStatus::FloorHit => "FLOOR_HIT",
            CalibrationStatus::Unreachable => "UNREACHABLE",
        };
        f.write_str(s)
    }
}

/// Probing frequency implied by a market liquidity spread.
#[derive(Debug, Clone)]
pub struct FrequencyCalibration {
    pub id: String,
    pub market_spread_bps: f64,
    pub model_spread_bps: f64,
    pub dt_days: u32,
    pub status: CalibrationStatus,
}

/// Find the integer probing spacing whose model spread best matches the
/// market spread, by bisection on the (weakly monotone) spread curve with a
/// fixed master seed; ties resolve to the smaller spacing.
///
/// The search runs a single-repeat bisection first and then refines a small
/// window with the full repeat count, so the expensive passes are spent near
/// the optimum.
pub fn calibrate_frequency(
    env: &ModelEnv,
    id: &str,
    bond: &BondSpec,
    asof: NaiveDate,
    market_spread_bps: f64,
    case: CaseId,
    mc: &McConfig,
) -> Result<FrequencyCalibration> {
    let cf = to_model_cashflows(bond, asof)?;
    let payoff = Payoff::CouponBond(cf.clone());
    let dt_max = ((cf.maturity() * BUSINESS_DAYS).floor() as u32).max(1);

    let gamma_at = |dts: &[u32], repeats: usize| -> Result<Vec<(u32, LiquiditySpreadResult)>> {
        let mc_local = McConfig {
            n_repeats: repeats,
            ..*mc
        };
        solve_gamma_multi(env, &payoff, case, &mc_local, dts)
    };

    if market_spread_bps < 0.0 {
        let floor = gamma_at(&[1], mc.n_repeats)?.pop().unwrap().1;
        return Ok(FrequencyCalibration {
            id: id.to_string(),
            market_spread_bps,
            model_spread_bps: floor.gamma_bps(),
            dt_days: 1,
            status: CalibrationStatus::Unreachable,
        });
    }

    // Coarse bisection on a single repeat.
    let (mut lo, mut hi) = (1u32, dt_max);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let g = gamma_at(&[mid], 1)?.pop().unwrap().1.gamma_bps();
        if g < market_spread_bps {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Closest match with ties resolved to the smaller spacing.
    let argmin = |evaluated: &[(u32, f64)]| -> u32 {
        let mut best = evaluated[0];
        let mut best_err = (best.1 - market_spread_bps).abs();
        for &(dt, g) in &evaluated[1..] {
            let err = (g - market_spread_bps).abs();
            if err < best_err - 1e-12 || (err <= best_err + 1e-12 && dt < best.0) {
                best = (dt, g);
                best_err = err;
            }
        }
        best.0
    };

    // Full-precision scan of a window around the coarse optimum; all window
    // spacings share scenario sets. When the best spacing sits on a window
    // edge the window slides until the optimum is interior.
    let mut evaluated: Vec<(u32, f64)> = Vec::new();
    let mut w_lo = lo.saturating_sub(3).max(1);
    let mut w_hi = (lo + 3).min(dt_max);
    let dt_days = loop {
        let missing: Vec<u32> = (w_lo..=w_hi)
            .filter(|dt| !evaluated.iter().any(|(d, _)| d == dt))
            .collect();
        if !missing.is_empty() {
            for (dt, r) in gamma_at(&missing, mc.n_repeats)? {
                evaluated.push((dt, r.gamma_bps()));
            }
            evaluated.sort_unstable_by_key(|&(dt, _)| dt);
        }
        let best_dt = argmin(&evaluated);
        if best_dt == w_lo && w_lo > 1 {
            w_lo = w_lo.saturating_sub(3).max(1);
        } else if best_dt == w_hi && w_hi < dt_max {
            w_hi = (w_hi + 3).min(dt_max);
        } else {
            break best_dt;
        }
    };
    let model_spread_bps = evaluated.iter().find(|(d, _)| *d == dt_days).unwrap().1;

    let status = if dt_days == 1 && market_spread_bps < model_spread_bps - 1.0 {
        CalibrationStatus::FloorHit
    } else {
        CalibrationStatus::Matched
    };
    Ok(FrequencyCalibration {
        id: id.to_string(),
        market_spread_bps,
        model_spread_bps,
        dt_days,
        status,
    })
}

/// Probing-frequency recommendation for a bucket.
#[derive(Debug, Clone)]
pub struct FrequencyRecommendation {
    /// Mean plus one standard deviation, rounded to whole days.
    pub dt_1sd: u32,
    /// Mean plus two standard deviations, rounded to whole days.
    pub dt_2sd: u32,
    /// Largest retained spacing.
    pub dt_max: u32,
    /// Ids removed as outliers (more than two sample deviations from the
    /// whole-sample mean).
    pub removed: Vec<String>,
}

/// Distill bucket statistics from per-bond calibrations, discarding outliers
/// beyond two sample standard deviations of the whole sample.
pub fn recommend_frequency(calibrations: &[FrequencyCalibration]) -> Result<FrequencyRecommendation> {
    let usable: Vec<&FrequencyCalibration> = calibrations
        .iter()
        .filter(|c| c.status == CalibrationStatus::Matched)
        .collect();
    if usable.len() < 3 {
        return Err(Error::invalid(
            "calibrations",
            "need at least 3 matched bonds in the bucket",
        ));
    }
    let all: Vec<f64> = usable.iter().map(|c| c.dt_days as f64).collect();
    let (mean_all, std_all) = mean_and_std(&all);
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for c in &usable {
        if std_all > 0.0 && (c.dt_days as f64 - mean_all).abs() > 2.0 * std_all {
            removed.push(c.id.clone());
        } else {
            kept.push(c.dt_days as f64);
        }
    }
    if kept.len() < 3 {
        return Err(Error::invalid(
            "calibrations",
            "outlier removal left fewer than 3 bonds",
        ));
    }
    let (mean, std) = mean_and_std(&kept);
    let dt_max = kept.iter().fold(0.0f64, |a, &b| a.max(b)) as u32;
    let dt_2sd = (((mean + 2.0 * std).round() as u32).max(1)).min(dt_max);
    let dt_1sd = (((mean + std).round() as u32).max(1)).min(dt_2sd);
    Ok(FrequencyRecommendation {
        dt_1sd,
        dt_2sd,
        dt_max,
        removed,
    })
}

/// Liquidity spreads of an unquoted bond for a list of probing spacings.
pub fn price_unquoted(
    env: &ModelEnv,
    bond: &BondSpec,
    asof: NaiveDate,
    dt_choices: &[u32],
    case: CaseId,
    mc: &McConfig,
) -> Result<Vec<(u32, LiquiditySpreadResult)>> {
    if dt_choices.is_empty() {
        return Err(Error::invalid("dt_choices", "no probing spacings given"));
    }
    let cf = to_model_cashflows(bond, asof)?;
    let payoff = Payoff::CouponBond(cf);
    solve_gamma_multi(env, &payoff, case, mc, dt_choices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refdata::market_reference_date;

    #[test]
    fn bucket_boundaries() {
        assert_eq!(bucket_of(3.5).unwrap().name, "G");
        assert_eq!(bucket_of(0.2).unwrap().name, "A");
        assert_eq!(bucket_of(2.5).unwrap().name, "F"); // (lo, hi] boundary
        assert_eq!(bucket_of(55.0).unwrap().name, "R");
        assert!(bucket_of(0.0).is_err());
    }

    fn quote(id: &str, ttm: f64, spread: f64, volume: f64) -> BondQuote {
        let mut q = BondQuote::from_flat_yield(
            id,
            market_reference_date(),
            ttm,
            0.03,
            0.025,
            volume,
            spread,
        )
        .unwrap();
        q.last_trade_date = Some(market_reference_date());
        q
    }

    #[test]
    fn selection_takes_three_smallest_spreads() {
        let quotes: Vec<BondQuote> = [2.0, 3.0, 3.0, 7.0, 9.0]
            .iter()
            .enumerate()
            .map(|(i, &ticks)| quote(&format!("B{i}"), 3.0, ticks * 0.01, 100.0))
            .collect();
        let bucketed = assign_buckets(&quotes).unwrap();
        let sel = select_liquid(&bucketed, VolumeWindow::LastDay);
        assert_eq!(sel.representatives, vec!["B0", "B1", "B2"]);
    }

    #[test]
    fn selection_with_two_candidates_takes_both() {
        let quotes = vec![quote("X", 1.2, 0.02, 50.0), quote("Y", 1.3, 0.05, 10.0)];
        let bucketed = assign_buckets(&quotes).unwrap();
        let sel = select_liquid(&bucketed, VolumeWindow::LastDay);
        assert_eq!(sel.representatives.len(), 2);
    }

    #[test]
    fn untraded_bucket_is_skipped_with_a_record() {
        let quotes = vec![quote("X", 1.2, 0.02, 0.0), quote("Y", 1.3, 0.05, 0.0)];
        let bucketed = assign_buckets(&quotes).unwrap();
        let sel = select_liquid(&bucketed, VolumeWindow::LastDay);
        assert!(sel.representatives.is_empty());
        assert_eq!(sel.skipped_buckets, vec!["E"]);
    }

    #[test]
    fn selection_is_order_independent() {
        let mut quotes: Vec<BondQuote> = (0..6)
            .map(|i| quote(&format!("B{i}"), 3.0, 0.01 + 0.01 * i as f64, 100.0))
            .collect();
        let bucketed = assign_buckets(&quotes).unwrap();
        let a = select_liquid(&bucketed, VolumeWindow::LastDay);
        quotes.reverse();
        let bucketed = assign_buckets(&quotes).unwrap();
        let b = select_liquid(&bucketed, VolumeWindow::LastDay);
        let (mut ra, mut rb) = (a.representatives, b.representatives);
        ra.sort();
        rb.sort();
        assert_eq!(ra, rb);
    }

    #[test]
    fn classification_flags_the_outlier() {
        // Spreads {0, 0, 0, +30 bp}: population deviation is about 13 bp,
        // so only the wide bond is illiquid.
        let curve = SvenssonParams {
            beta0: 0.025,
            beta1: 0.0,
            beta2: 0.0,
            beta3: 0.0,
            tau1: 1.0,
            tau2: 5.0,
        };
        let asof = market_reference_date();
        let mut quotes: Vec<BondQuote> = (0..3)
            .map(|i| {
                BondQuote::priced_on_curve(&format!("ON{i}"), asof, 3.0, 0.03, &curve, 100.0, 0.0)
                    .unwrap()
            })
            .collect();
        let ttm = 1095.0 / 365.0;
        quotes.push(
            BondQuote::from_flat_yield(
                "WIDE",
                asof,
                3.0,
                0.03,
                curve.yield_at(ttm) + 0.0030,
                0.0,
                0.0,
            )
            .unwrap(),
        );
        let bucketed = assign_buckets(&quotes).unwrap();
        let result = classify(&bucketed, &curve, &[]).unwrap();
        let wide = result.bonds.iter().find(|b| b.id == "WIDE").unwrap();
        assert_eq!(wide.label, LiquidityLabel::Illiquid);
        assert!((wide.sigma_bucket_bps - 13.0).abs() < 1.0, "{}", wide.sigma_bucket_bps);
        assert!((wide.spread_bps - 30.0).abs() < 0.5);
        for b in result.bonds.iter().filter(|b| b.id != "WIDE") {
            assert_eq!(b.label, LiquidityLabel::Liquid);
        }
    }

    #[test]
    fn negative_spread_is_never_illiquid_but_stale() {
        let curve = SvenssonParams {
            beta0: 0.025,
            beta1: 0.0,
            beta2: 0.0,
            beta3: 0.0,
            tau1: 1.0,
            tau2: 5.0,
        };
        let asof = market_reference_date();
        let mut quotes: Vec<BondQuote> = (0..3)
            .map(|i| {
                BondQuote::priced_on_curve(&format!("ON{i}"), asof, 2.0, 0.03, &curve, 100.0, 0.0)
                    .unwrap()
            })
            .collect();
        let ttm = 730.0 / 365.0;
        quotes.push(
            BondQuote::from_flat_yield(
                "NEG",
                asof,
                2.0,
                0.03,
                curve.yield_at(ttm) - 0.0030,
                0.0,
                0.0,
            )
            .unwrap(),
        );
        let bucketed = assign_buckets(&quotes).unwrap();
        let result = classify(&bucketed, &curve, &[]).unwrap();
        let neg = result.bonds.iter().find(|b| b.id == "NEG").unwrap();
        assert_ne!(neg.label, LiquidityLabel::Illiquid);
        assert!(neg.stale);
    }

    #[test]
    fn sigma_is_invariant_under_a_common_yield_shift() {
        let spreads = [3.0, -1.5, 7.2, 0.4, -2.2];
        let shifted: Vec<f64> = spreads.iter().map(|s| s + 25.0).collect();
        let a = population_std(&spreads);
        let b = population_std(&shifted);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn tiny_bucket_is_excluded() {
        let curve = SvenssonParams {
            beta0: 0.025,
            beta1: 0.0,
            beta2: 0.0,
            beta3: 0.0,
            tau1: 1.0,
            tau2: 5.0,
        };
        let quotes = vec![quote("ONLY", 1.2, 0.02, 10.0)];
        let bucketed = assign_buckets(&quotes).unwrap();
        let result = classify(&bucketed, &curve, &[]).unwrap();
        assert!(result.bonds.is_empty());
        assert_eq!(result.excluded_buckets, vec!["E"]);
    }

    #[test]
    fn recommendation_reproduces_bucket_statistics() {
        // Published bucket-G spacings, including the two outliers at 175 and
        // 217 days that the two-deviation rule must discard.
        let days = [175u32, 217, 10, 11, 9, 6, 8, 9, 12, 14, 6, 19, 7, 10];
        let cals: Vec<FrequencyCalibration> = days
            .iter()
            .enumerate()
            .map(|(i, &d)| FrequencyCalibration {
                id: format!("G{i}"),
                market_spread_bps: 20.0,
                model_spread_bps: 20.0,
                dt_days: d,
                status: CalibrationStatus::Matched,
            })
            .collect();
        let rec = recommend_frequency(&cals).unwrap();
        assert_eq!(rec.removed.len(), 2);
        assert_eq!((rec.dt_1sd, rec.dt_2sd, rec.dt_max), (14, 17, 19));
    }

    #[test]
    fn recommendation_handles_zero_variance() {
        let cals: Vec<FrequencyCalibration> = (0..3)
            .map(|i| FrequencyCalibration {
                id: format!("Z{i}"),
                market_spread_bps: 10.0,
                model_spread_bps: 10.0,
                dt_days: 5,
                status: CalibrationStatus::Matched,
            })
            .collect();
        let rec = recommend_frequency(&cals).unwrap();
        assert_eq!((rec.dt_1sd, rec.dt_2sd, rec.dt_max), (5, 5, 5));
    }

    #[test]
    fn recommendation_order_is_monotone() {
        let days = [3u32, 4, 5, 9, 11, 14];
        let cals: Vec<FrequencyCalibration> = days
            .iter()
            .enumerate()
            .map(|(i, &d)| FrequencyCalibration {
                id: format!("M{i}"),
                market_spread_bps: 10.0,
                model_spread_bps: 10.0,
                dt_days: d,
                status: CalibrationStatus::Matched,
            })
            .collect();
        let rec = recommend_frequency(&cals).unwrap();
        assert!(rec.dt_1sd <= rec.dt_2sd);
        assert!(rec.dt_2sd <= rec.dt_max);
    }
}
