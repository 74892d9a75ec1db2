//! Flat-yield computations under continuous compounding.
//!
//! Continuous compounding is used uniformly for bond yields and curve yields
//! so that spread differences are convention-free.

use crate::curves::schedule::CashflowSchedule;
use crate::error::{Error, Result};
use crate::math::solve_bracketed;

/// Dirty price from a continuously compounded flat yield.
pub fn price_from_yield(cashflows: &CashflowSchedule, y: f64) -> f64 {
    cashflows
        .times
        .iter()
        .zip(&cashflows.amounts)
        .map(|(&t, &c)| c * (-y * t).exp())
        .sum()
}

fn price_derivative(cashflows: &CashflowSchedule, y: f64) -> f64 {
    cashflows
        .times
        .iter()
        .zip(&cashflows.amounts)
        .map(|(&t, &c)| -t * c * (-y * t).exp())
        .sum()
}

/// Flat continuously compounded yield solving
/// `dirty_price = sum c_i exp(-y t_i)`, bracketed on [-0.5, 2.0].
pub fn bond_yield(dirty_price: f64, cashflows: &CashflowSchedule) -> Result<f64> {
    if !(dirty_price > 0.0) {
        return Err(Error::invalid("dirty_price", "must be positive"));
    }
    if cashflows.is_empty() {
        return Err(Error::Schedule("no future cashflows".to_string()));
    }
    let f = |y: f64| price_from_yield(cashflows, y) - dirty_price;
    let df = |y: f64| price_derivative(cashflows, y);
    let result = solve_bracketed("bond_yield", f, df, -0.5, 2.0, 0.03, 1e-10, 1e-14, 200)?;
    Ok(result.root)
}

/// Macaulay duration in years at flat yield `y`.
pub fn macaulay_duration(cashflows: &CashflowSchedule, y: f64) -> f64 {
    let mut pv = 0.0;
    let mut weighted = 0.0;
    for (&t, &c) in cashflows.times.iter().zip(&cashflows.amounts) {
        let d = c * (-y * t).exp();
        pv += d;
        weighted += t * d;
    }
    weighted / pv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coupon_schedule() -> CashflowSchedule {
        CashflowSchedule {
            times: vec![0.5, 1.0, 1.5, 2.0],
            amounts: vec![2.0, 2.0, 2.0, 102.0],
        }
    }

    #[test]
    fn yield_round_trip() {
        let cf = coupon_schedule();
        let price = price_from_yield(&cf, 0.03);
        let y = bond_yield(price, &cf).unwrap();
        assert!((y - 0.03).abs() < 1e-10);
    }

    #[test]
    fn single_cashflow_closed_form() {
        let cf = CashflowSchedule::zero_coupon(1.0);
        let cf = CashflowSchedule {
            times: cf.times,
            amounts: vec![100.0],
        };
        let y = bond_yield(97.0445, &cf).unwrap();
        assert!((y - 0.03).abs() < 1e-4);
    }

    #[test]
    fn price_above_cashflow_sum_gives_negative_yield() {
        let cf = coupon_schedule();
        let undiscounted: f64 = cf.amounts.iter().sum();
        let y = bond_yield(undiscounted + 5.0, &cf).unwrap();
        assert!(y < 0.0 && y.is_finite());
        // Cross-check against a plain bisection oracle.
        let (mut lo, mut hi) = (-0.5, 2.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if price_from_yield(&cf, mid) > undiscounted + 5.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((y - 0.5 * (lo + hi)).abs() < 1e-9);
    }

    #[test]
    fn duration_of_zero_coupon_is_maturity() {
        let cf = CashflowSchedule::zero_coupon(4.0);
        assert!((macaulay_duration(&cf, 0.02) - 4.0).abs() < 1e-12);
    }
}
