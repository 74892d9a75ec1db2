//! Coupon schedule generation for fixed-coupon bullet bonds.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::curves::daycount::{
    add_months, adjust_date, year_fraction, DayCount,
};
use crate::error::{Error, Result};

/// Contractual description of a fixed-coupon bullet bond.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BondSpec {
    /// Optional issue date. When absent, coupon periods are rolled backward
    /// from maturity far enough to cover any valuation date.
    pub issue_date: Option<NaiveDate>,
    pub maturity_date: NaiveDate,
    /// Annual coupon rate as a decimal (0.045 = 4.5%).
    pub coupon_rate: f64,
    /// Months between coupon payments (6 = semiannual).
    pub coupon_freq_months: u32,
    pub day_count: DayCount,
    pub notional: f64,
}

impl BondSpec {
    pub fn validate(&self) -> Result<()> {
        if let Some(issue) = self.issue_date {
            if issue >= self.maturity_date {
                return Err(Error::DateOrder {
                    earlier: issue,
                    later: self.maturity_date,
                });
            }
        }
        if self.coupon_freq_months == 0 {
            return Err(Error::invalid("coupon_freq_months", "must be positive"));
        }
        if self.notional <= 0.0 {
            return Err(Error::invalid("notional", "must be positive"));
        }
        Ok(())
    }
}

/// One scheduled payment. `amount` is the coupon for the period (plus the
/// notional on the final payment), computed on unadjusted period dates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cashflow {
    pub unadjusted_date: NaiveDate,
    pub payment_date: NaiveDate,
    pub amount: f64,
}

/// Full coupon schedule of the bond, rolled backward from maturity at the
/// coupon frequency; payment dates adjusted per the bond's convention.
pub fn generate_schedule(bond: &BondSpec) -> Result<Vec<Cashflow>> {
    bond.validate()?;
    // Unadjusted period end dates, maturity included.
    let mut ends = vec![bond.maturity_date];
    let mut k = 1i32;
    loop {
        let d = add_months(bond.maturity_date, -(k * bond.coupon_freq_months as i32));
        let stop = match bond.issue_date {
            Some(issue) => d <= issue,
            // Without an issue date keep ten years of history, enough to
            // locate the accrual period of any realistic valuation date.
            None => k as u32 * bond.coupon_freq_months > 120,
        };
        if stop {
            if bond.issue_date == Some(d) {
                ends.push(d);
            }
            break;
        }
        ends.push(d);
        k += 1;
    }
    ends.reverse();
    if bond.issue_date.is_some() && ends.first() == bond.issue_date.as_ref() {
        // First entry is the issue date itself, not a payment.
    } else if let Some(issue) = bond.issue_date {
        ends.insert(0, issue);
    }

    let accrual_dc = DayCount {
        convention: bond.day_count.convention,
        adjustment: crate::curves::daycount::DateAdjustment::None,
    };
    let mut flows = Vec::with_capacity(ends.len() - 1);
    for w in ends.windows(2) {
        let (start, end) = (w[0], w[1]);
        let accrual = year_fraction(start, end, accrual_dc)?;
        let mut amount = bond.coupon_rate * bond.notional * accrual;
        if end == bond.maturity_date {
            amount += bond.notional;
        }
        flows.push(Cashflow {
            unadjusted_date: end,
            payment_date: adjust_date(end, bond.day_count.adjustment),
            amount,
        });
    }
    if flows.is_empty() {
        return Err(Error::Schedule("bond has no coupon periods".to_string()));
    }
    Ok(flows)
}

/// Accrued interest at `asof` on the running coupon period (zero outside the
/// bond's life).
pub fn accrued_interest(bond: &BondSpec, asof: NaiveDate) -> Result<f64> {
    if asof >= bond.maturity_date {
        return Ok(0.0);
    }
    let flows = generate_schedule(bond)?;
    let mut period_start = match bond.issue_date {
        Some(issue) => issue,
        None => add_months(
            flows[0].unadjusted_date,
            -(bond.coupon_freq_months as i32),
        ),
    };
    for flow in &flows {
        if asof < flow.unadjusted_date {
            if asof <= period_start {
                return Ok(0.0);
            }
            let accrual_dc = DayCount {
                convention: bond.day_count.convention,
                adjustment: crate::curves::daycount::DateAdjustment::None,
            };
            let frac = year_fraction(period_start, asof, accrual_dc)?;
            return Ok(bond.coupon_rate * bond.notional * frac);
        }
        period_start = flow.unadjusted_date;
    }
    Ok(0.0)
}

/// Cashflows mapped onto the model time axis: strictly future payments as
/// ACT/365F year fractions from `asof`, per unit of notional.
#[derive(Debug, Clone, PartialEq)]
pub struct CashflowSchedule {
    pub times: Vec<f64>,
    pub amounts: Vec<f64>,
}

impl CashflowSchedule {
    pub fn zero_coupon(maturity: f64) -> Self {
        CashflowSchedule {
            times: vec![maturity],
            amounts: vec![1.0],
        }
    }

    /// Final payment time; the model horizon of the bond.
    pub fn maturity(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Project a bond onto the model time axis at `asof`, normalizing amounts by
/// the notional. Errors when no payment remains after `asof`.
pub fn to_model_cashflows(bond: &BondSpec, asof: NaiveDate) -> Result<CashflowSchedule> {
    let yf_dc = DayCount::act_365_fixed();
    let flows = generate_schedule(bond)?;
    let mut times = Vec::new();
    let mut amounts = Vec::new();
    for flow in &flows {
        if flow.payment_date > asof {
            times.push(year_fraction(asof, flow.payment_date, yf_dc)?);
            amounts.push(flow.amount / bond.notional);
        }
    }
    if times.is_empty() {
        return Err(Error::Schedule(format!(
            "no payment after valuation date {asof}"
        )));
    }
    Ok(CashflowSchedule { times, amounts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::daycount::{DateAdjustment, DayCountConvention};
    use crate::refdata::{case_bond, market_reference_date};

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn case_bond_has_eight_semiannual_coupons() {
        let flows = generate_schedule(&case_bond()).unwrap();
        assert_eq!(flows.len(), 8);
        for flow in &flows[..7] {
            assert!((flow.amount - 2.25).abs() < 1e-12);
        }
        let last = flows.last().unwrap();
        assert_eq!(last.unadjusted_date, d(2027, 11, 15));
        assert!((last.amount - 102.25).abs() < 1e-12);
    }

    #[test]
    fn weekend_payment_rolls_forward() {
        let flows = generate_schedule(&case_bond()).unwrap();
        // 2025-11-15 falls on a Saturday.
        let rolled = flows
            .iter()
            .find(|f| f.unadjusted_date == d(2025, 11, 15))
            .unwrap();
        assert_eq!(rolled.payment_date, d(2025, 11, 17));
    }

    #[test]
    fn zero_rate_single_period_pays_notional_only() {
        let bond = BondSpec {
            issue_date: Some(d(2024, 1, 15)),
            maturity_date: d(2025, 1, 15),
            coupon_rate: 0.0,
            coupon_freq_months: 12,
            day_count: DayCount::thirty_360_modified_following(),
            notional: 100.0,
        };
        let flows = generate_schedule(&bond).unwrap();
        assert_eq!(flows.len(), 1);
        assert_eq!(flows[0].amount, 100.0);
    }

    #[test]
    fn coupon_sum_is_exact_in_thirty_360() {
        let bond = case_bond();
        let flows = generate_schedule(&bond).unwrap();
        let total: f64 = flows.iter().map(|f| f.amount).sum();
        let expected = bond.coupon_rate * bond.notional * 0.5 * flows.len() as f64 + bond.notional;
        assert!((total - expected).abs() < 1e-9);
    }

    #[test]
    fn model_cashflows_keep_only_future_payments() {
        let cf = to_model_cashflows(&case_bond(), market_reference_date()).unwrap();
        assert_eq!(cf.len(), 7); // 2024-05-15 already paid
        assert!(cf.times[0] > 0.0);
        assert!((cf.amounts[0] - 0.0225).abs() < 1e-15);
        assert!((cf.amounts[6] - 1.0225).abs() < 1e-15);
        // 2024-05-31 -> 2027-11-15 is 1263 calendar days.
        assert!((cf.maturity() - 1263.0 / 365.0).abs() < 1e-12);
    }

    #[test]
    fn valuation_after_maturity_errors() {
        assert!(matches!(
            to_model_cashflows(&case_bond(), d(2030, 1, 1)),
            Err(Error::Schedule(_))
        ));
    }

    #[test]
    fn accrued_interest_matches_hand_count() {
        // 2024-05-15 to 2024-05-31 is 16 days on the 30/360 basis.
        let accrued = accrued_interest(&case_bond(), market_reference_date()).unwrap();
        assert!((accrued - 0.045 * 100.0 * 16.0 / 360.0).abs() < 1e-12);
    }

    #[test]
    fn backward_roll_without_issue_date() {
        let bond = BondSpec {
            issue_date: None,
            maturity_date: d(2027, 11, 15),
            coupon_rate: 0.03,
            coupon_freq_months: 6,
            day_count: DayCount {
                convention: DayCountConvention::Thirty360,
                adjustment: DateAdjustment::ModifiedFollowing,
            },
            notional: 100.0,
        };
        let cf = to_model_cashflows(&bond, d(2024, 5, 31)).unwrap();
        assert_eq!(cf.len(), 7);
    }
}
