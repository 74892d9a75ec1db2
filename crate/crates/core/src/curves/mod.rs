//! Date arithmetic, discount curves, coupon schedules, yields, and the
//! Svensson curve fit.

pub mod daycount;
pub mod discount;
pub mod quotes;
pub mod schedule;
pub mod svensson;
pub mod yields;

pub use daycount::{
    add_months, adjust_date, is_business_day, year_fraction, DateAdjustment, DayCount,
    DayCountConvention,
};
pub use discount::DiscountCurve;
pub use quotes::{quotes_from_csv_path, quotes_from_csv_reader, BondQuote};
pub use schedule::{
    accrued_interest, generate_schedule, to_model_cashflows, BondSpec, Cashflow, CashflowSchedule,
};
pub use svensson::{fit_svensson, svensson_yield, SvenssonParams};
pub use yields::{bond_yield, macaulay_duration, price_from_yield};
