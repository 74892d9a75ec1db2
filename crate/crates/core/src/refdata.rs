//! Bundled reference data: the discount curves and model parameter sets used
//! by the scenario analyses and the market-calibration case study. The same
//! values ship as files under `data/` for the CLI.

use chrono::NaiveDate;

use crate::curves::{DayCount, DiscountCurve};
use crate::curves::schedule::BondSpec;
use crate::models::{CirParams, G2ppParams};

/// Risk-free curve used by the scenario analyses (dated pillars, reference
/// date 2023-12-29).
pub fn section3_curve() -> DiscountCurve {
    let pillars = [
        ((2023, 12, 29), 1.0000),
        ((2024, 1, 11), 0.9986),
        ((2024, 2, 5), 0.9959),
        ((2024, 4, 4), 0.9896),
        ((2024, 7, 4), 0.9802),
        ((2025, 1, 6), 0.9652),
        ((2026, 1, 5), 0.9452),
        ((2027, 1, 4), 0.9264),
        ((2028, 1, 4), 0.9065),
        ((2029, 1, 4), 0.8859),
        ((2034, 1, 4), 0.7799),
        ((2039, 1, 4), 0.6812),
        ((2044, 1, 4), 0.6075),
        ((2049, 1, 4), 0.5519),
        ((2054, 1, 5), 0.5070),
    ];
    let dated: Vec<(NaiveDate, f64)> = pillars
        .iter()
        .map(|&((y, m, d), df)| (NaiveDate::from_ymd_opt(y, m, d).unwrap(), df))
        .collect();
    DiscountCurve::from_dates(dated[0].0, &dated).unwrap()
}

/// Risk-free curve from BUND yields (year-fraction pillars, as of 2024-05-31).
pub fn bund_curve() -> DiscountCurve {
    let pillars = vec![
        (0.0, 1.0),
        (0.08, 0.997),
        (0.25, 0.991),
        (0.5, 0.982),
        (1.0, 0.965),
        (2.0, 0.94),
        (3.0, 0.917),
        (4.0, 0.897),
        (5.0, 0.874),
        (6.0, 0.856),
        (7.0, 0.835),
        (8.0, 0.814),
        (9.0, 0.791),
        (10.0, 0.768),
        (15.0, 0.651),
        (20.0, 0.566),
        (25.0, 0.495),
        (30.0, 0.438),
    ];
    DiscountCurve::from_times(pillars)
        .unwrap()
        .with_reference_date(NaiveDate::from_ymd_opt(2024, 5, 31).unwrap())
}

/// G2++ parameters for the scenario analyses.
pub fn g2pp_section3() -> G2ppParams {
    G2ppParams {
        a: 0.0693,
        sigma: 0.0116,
        b: 0.0531,
        eta: 0.0057,
        rho: 0.1209,
    }
}

/// G2++ parameters calibrated as of 2024-05-31 (BUND curve).
pub fn g2pp_market() -> G2ppParams {
    G2ppParams {
        a: 0.0195,
        sigma: 0.0062,
        b: 0.0193,
        eta: 0.0062,
        rho: 0.0962,
    }
}

/// CIR credit-spread parameters, BBB rating.
///
/// The published tables label the initial value `r0`; it is the initial
/// credit spread `s0` here.
pub fn cir_bbb() -> CirParams {
    CirParams {
        kappa: 0.4455,
        theta: 0.0141,
        sigma: 0.0705,
        s0: 0.0001,
    }
}

/// CIR credit-spread parameters, BB rating.
pub fn cir_bb() -> CirParams {
    CirParams {
        kappa: 0.7288,
        theta: 0.0224,
        sigma: 0.1689,
        s0: 0.0054,
    }
}

/// CIR credit-spread parameters for the sovereign case study.
pub fn cir_italy() -> CirParams {
    CirParams {
        kappa: 0.0018,
        theta: 0.01,
        sigma: 0.005,
        s0: 0.0003,
    }
}

/// The case-study bond: 4.5% semiannual bullet, 30/360 modified following,
/// issued 2023-11-15, maturing 2027-11-15.
pub fn case_bond() -> BondSpec {
    BondSpec {
        issue_date: Some(NaiveDate::from_ymd_opt(2023, 11, 15).unwrap()),
        maturity_date: NaiveDate::from_ymd_opt(2027, 11, 15).unwrap(),
        coupon_rate: 0.045,
        coupon_freq_months: 6,
        day_count: DayCount::thirty_360_modified_following(),
        notional: 100.0,
    }
}

/// Valuation date of the market case study.
pub fn market_reference_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 5, 31).unwrap()
}
