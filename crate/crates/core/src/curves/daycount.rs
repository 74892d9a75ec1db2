//! Day-count conventions and business-day adjustment.
//!
//! Only the two conventions used by the bond workflows are implemented:
//! 30/360 (US bond basis) and ACT/365 Fixed. Calendar handling is limited to
//! weekend rolling; holiday calendars are out of scope.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DayCountConvention {
    /// 30/360 US bond basis.
    #[serde(rename = "30/360")]
    Thirty360,
    /// Actual/365 Fixed.
    #[serde(rename = "act/365f")]
    Act365Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DateAdjustment {
    None,
    ModifiedFollowing,
}

/// Day-count convention together with the payment-date adjustment rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayCount {
    pub convention: DayCountConvention,
    pub adjustment: DateAdjustment,
}

impl DayCount {
    pub const fn new(convention: DayCountConvention, adjustment: DateAdjustment) -> Self {
        DayCount {
            convention,
            adjustment,
        }
    }

    /// 30/360 with modified-following rolling, the convention of the case bond.
    pub const fn thirty_360_modified_following() -> Self {
        DayCount::new(
            DayCountConvention::Thirty360,
            DateAdjustment::ModifiedFollowing,
        )
    }

    pub const fn act_365_fixed() -> Self {
        DayCount::new(DayCountConvention::Act365Fixed, DateAdjustment::None)
    }
}

/// Year fraction between `d1` and `d2` (`d1 <= d2`) under `dc.convention`.
pub fn year_fraction(d1: NaiveDate, d2: NaiveDate, dc: DayCount) -> Result<f64> {
    if d1 > d2 {
        return Err(Error::DateOrder {
            earlier: d1,
            later: d2,
        });
    }
    Ok(match dc.convention {
        DayCountConvention::Thirty360 => {
            let mut day1 = d1.day() as i64;
            let mut day2 = d2.day() as i64;
            if day1 == 31 {
                day1 = 30;
            }
            if day2 == 31 && day1 == 30 {
                day2 = 30;
            }
            let days = 360 * (d2.year() as i64 - d1.year() as i64)
                + 30 * (d2.month() as i64 - d1.month() as i64)
                + (day2 - day1);
            days as f64 / 360.0
        }
        DayCountConvention::Act365Fixed => (d2 - d1).num_days() as f64 / 365.0,
    })
}

pub fn is_business_day(date: NaiveDate) -> bool {
    !matches!(date.weekday(), Weekday::Sat | Weekday::Sun)
}

/// Roll a date according to the adjustment rule. Modified following moves to
/// the next business day unless that crosses a month end, in which case the
/// date rolls backward.
pub fn adjust_date(date: NaiveDate, adjustment: DateAdjustment) -> NaiveDate {
    match adjustment {
        DateAdjustment::None => date,
        DateAdjustment::ModifiedFollowing => {
            let mut d = date;
            while !is_business_day(d) {
                d += Duration::days(1);
            }
            if d.month() != date.month() {
                d = date;
                while !is_business_day(d) {
                    d -= Duration::days(1);
                }
            }
            d
        }
    }
}

/// Add `months` calendar months, clamping the day of month when the target
/// month is shorter (e.g. Jan 31 + 1m = Feb 28/29).
pub fn add_months(date: NaiveDate, months: i32) -> NaiveDate {
    let total = date.year() * 12 + date.month0() as i32 + months;
    let year = total.div_euclid(12);
    let month0 = total.rem_euclid(12) as u32;
    let day = date.day();
    for d in (1..=day).rev() {
        if let Some(nd) = NaiveDate::from_ymd_opt(year, month0 + 1, d) {
            return nd;
        }
    }
    unreachable!("day 1 always exists")
}
