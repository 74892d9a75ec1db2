//! Nelson-Siegel-Svensson zero curve and its fit to bond prices.

use serde::{Deserialize, Serialize};

use crate::curves::quotes::BondQuote;
use crate::curves::schedule::{accrued_interest, to_model_cashflows, CashflowSchedule};
use crate::curves::yields::{bond_yield, macaulay_duration};
use crate::error::{Error, Result};
use crate::math::nelder_mead;

/// Six-parameter Svensson zero-yield curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvenssonParams {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub tau1: f64,
    pub tau2: f64,
}

fn loading1(t: f64, tau: f64) -> f64 {
    let u = t / tau;
    if u.abs() < 1e-10 {
        1.0 - 0.5 * u
    } else {
        -(-u).exp_m1() / u
    }
}

fn loading2(t: f64, tau: f64) -> f64 {
    loading1(t, tau) - (-t / tau).exp()
}

impl SvenssonParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau1 > 0.0) || !(self.tau2 > 0.0) {
            return Err(Error::invalid("tau", "time constants must be positive"));
        }
        Ok(())
    }

    /// Continuously compounded zero yield at maturity `t >= 0`.
    ///
    /// Limits: `beta0 + beta1` as `t -> 0`, `beta0` as `t -> inf`.
    pub fn yield_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.beta0 + self.beta1;
        }
        self.beta0
            + self.beta1 * loading1(t, self.tau1)
            + self.beta2 * loading2(t, self.tau1)
            + self.beta3 * loading2(t, self.tau2)
    }

    /// Discount factor implied by the zero yield.
    pub fn discount(&self, t: f64) -> f64 {
        (-self.yield_at(t) * t).exp()
    }
}

/// Standalone evaluation of the Svensson zero yield.
pub fn svensson_yield(p: &SvenssonParams, t: f64) -> f64 {
    p.yield_at(t)
}

struct FitInstrument {
    cashflows: CashflowSchedule,
    ttm: f64,
    dirty_mid: f64,
    flat_yield: f64,
    weight: f64,
}

fn model_price(p: &SvenssonParams, cf: &CashflowSchedule) -> f64 {
    cf.times
        .iter()
        .zip(&cf.amounts)
        .map(|(&t, &c)| c * p.discount(t))
        .sum()
}

fn objective(p: &SvenssonParams, instruments: &[FitInstrument]) -> f64 {
    let mut sum = 0.0;
    for inst in instruments {
        let err = model_price(p, &inst.cashflows) - inst.dirty_mid;
        sum += inst.weight * err * err;
    }
    sum
}

/// Ordinary least squares for the betas at fixed time constants, run in
/// yield space against the quotes' flat yields. Used to seed the price-space
/// polish.
fn beta_ols(tau1: f64, tau2: f64, instruments: &[FitInstrument]) -> Option<[f64; 4]> {
    let n = instruments.len();
    let mut a = nalgebra::DMatrix::<f64>::zeros(n, 4);
    let mut b = nalgebra::DVector::<f64>::zeros(n);
    for (i, inst) in instruments.iter().enumerate() {
        a[(i, 0)] = 1.0;
        a[(i, 1)] = loading1(inst.ttm, tau1);
        a[(i, 2)] = loading2(inst.ttm, tau1);
        a[(i, 3)] = loading2(inst.ttm, tau2);
        b[i] = inst.flat_yield;
    }
    let svd = a.svd(true, true);
    let sol = svd.solve(&b, 1e-12).ok()?;
    Some([sol[0], sol[1], sol[2], sol[3]])
}

/// Fit a Svensson curve to bond quotes by weighted least squares on dirty
/// mid prices, weight `1/duration`.
///
/// Multi-start: a coarse grid over the two time constants seeds a
/// Nelder-Mead polish of all six parameters; the best run wins.
pub fn fit_svensson(quotes: &[BondQuote]) -> Result<SvenssonParams> {
    let mut instruments = Vec::with_capacity(quotes.len());
    for quote in quotes {
        let cashflows = to_model_cashflows(&quote.bond, quote.as_of)?;
        let accrued = accrued_interest(&quote.bond, quote.as_of)? / quote.bond.notional;
        let dirty_mid = 0.5 * (quote.bid_price + quote.ask_price) / 100.0 + accrued;
        let flat_yield = bond_yield(dirty_mid, &cashflows)?;
        let duration = macaulay_duration(&cashflows, flat_yield).max(1e-3);
        instruments.push(FitInstrument {
            ttm: cashflows.maturity(),
            cashflows,
            dirty_mid,
            flat_yield,
            weight: 1.0 / duration,
        });
    }
    if instruments.len() < 6 {
        return Err(Error::invalid(
            "quotes",
            "at least 6 quotes are required for a Svensson fit",
        ));
    }
    let mut maturities: Vec<f64> = instruments.iter().map(|q| q.ttm).collect();
    maturities.sort_by(f64::total_cmp);
    maturities.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if maturities.len() < 3 {
        return Err(Error::invalid(
            "quotes",
            "quotes must span at least 3 distinct maturities",
        ));
    }

    let mut best: Option<(SvenssonParams, f64)> = None;
    for &tau1 in &[0.5, 2.0, 5.0] {
        for &tau2 in &[5.0, 10.0, 15.0] {
            let betas = match beta_ols(tau1, tau2, &instruments) {
                Some(b) => b,
                None => continue,
            };
            // Optimize over (betas, ln tau) to keep the time constants positive.
            let start = [
                betas[0],
                betas[1],
                betas[2],
                betas[3],
                tau1.ln(),
                tau2.ln(),
            ];
            let f = |v: &[f64]| {
                let p = SvenssonParams {
                    beta0: v[0],
                    beta1: v[1],
                    beta2: v[2],
                    beta3: v[3],
                    tau1: v[4].exp(),
                    tau2: v[5].exp(),
                };
                let obj = objective(&p, &instruments);
                if obj.is_finite() {
                    obj
                } else {
                    f64::MAX
                }
            };
            let (v, _) = nelder_mead(f, &start, 0.10, 2500);
            // Second stage with a tighter simplex sharpens the optimum.
            let (v, val) = nelder_mead(f, &v, 0.01, 2500);
            if !val.is_finite() {
                continue;
            }
            let candidate = SvenssonParams {
                beta0: v[0],
                beta1: v[1],
                beta2: v[2],
                beta3: v[3],
                tau1: v[4].exp(),
                tau2: v[5].exp(),
            };
            if best.as_ref().is_none_or(|&(_, b)| val < b) {
                best = Some((candidate, val));
            }
        }
    }
    let (params, val) = best.ok_or_else(|| {
        Error::SolverDiverged {
            what: "fit_svensson".to_string(),
            iterations: 0,
            residual: f64::NAN,
        }
    })?;
    if !val.is_finite() {
        return Err(Error::SolverDiverged {
            what: "fit_svensson".to_string(),
            iterations: 0,
            residual: val,
        });
    }
    params.validate()?;
    Ok(params)
}
