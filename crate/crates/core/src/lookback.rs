//! Look-back option valuation for the know-all investor.
//!
//! Per path, the investor sells at the probing date that maximizes the
//! terminal portfolio value; in present-value form the candidate at sale
//! date `t` is
//!
//! ```text
//! sum_{t_i <= t, t_i < tau} c_i e^{-int_r(t_i)}            (coupons banked)
//! + 1{t < tau}   V(t)  e^{-int_r(t)}                       (sale proceeds)
//! + 1{t > tau}  RR V(tau) e^{-int_r(tau)}                  (recovery)
//! ```
//!
//! where `V(u)` is the liquidity-adjusted bond value of the remaining
//! coupons, evaluated in closed form at the path state. The zero-coupon
//! payoff keeps only the sale term, with no recovery: a path defaulting
//! before its first probing date contributes zero.

use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{CashflowSchedule, DiscountCurve};
use crate::error::{Error, Result};
use crate::math::mean_and_se;
use crate::models::{
    CirParams, CreditConfig, DefaultEvents, G2ppParams, SpreadDynamics,
};
use crate::simulate::{PathSlice, ScenarioSet, TimeGrid};

/// Market leg a probing schedule belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Liquid,
    Illiquid,
}

/// Admissible sale dates, uniformly spaced and closed with the maturity.
#[derive(Debug, Clone)]
pub struct ProbingSchedule {
    pub kind: ScheduleKind,
    pub times: Vec<f64>,
    /// Nominal spacing in business days for illiquid schedules.
    pub dt_days: Option<u32>,
}

const TIME_TOL: f64 = 1e-9;

/// Business days per year used to translate probing spacings into year
/// fractions on the simulation clock.
pub const BUSINESS_DAYS: f64 = 252.0;

/// Build the liquid and illiquid probing schedules for a horizon `T`:
/// the liquid leg probes every `liquid_step` years on `[0, T]`, the illiquid
/// leg every `dt_days` business days, both closed with `T`.
pub fn make_schedules(horizon: f64, dt_days: u32, liquid_step: f64) -> (ProbingSchedule, ProbingSchedule) {
    let mut liquid = Vec::new();
    let mut k = 0u64;
    loop {
        let t = k as f64 * liquid_step;
        if t >= horizon - TIME_TOL {
            break;
        }
        liquid.push(t);
        k += 1;
    }
    liquid.push(horizon);

    let mut illiquid = Vec::new();
    let step = dt_days as f64 / BUSINESS_DAYS;
    let mut k = 1u64;
    loop {
        let t = k as f64 * step;
        if t >= horizon - TIME_TOL {
            break;
        }
        illiquid.push(t);
        k += 1;
    }
    illiquid.push(horizon);

    (
        ProbingSchedule {
            kind: ScheduleKind::Liquid,
            times: liquid,
            dt_days: None,
        },
        ProbingSchedule {
            kind: ScheduleKind::Illiquid,
            times: illiquid,
            dt_days: Some(dt_days),
        },
    )
}

/// The four credit scenarios of the sensitivity analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseId {
    /// Stochastic risk-free rates only: the bond prices as a default-free
    /// instrument and nothing defaults.
    Case1,
    /// Stochastic rates and stochastic credit spread in prices, no defaults.
    Case2,
    /// Stochastic rates plus default events from the deterministic intensity
    /// (inhomogeneous Poisson on the spread mean path); prices stay
    /// default-free.
    Case3,
    /// Full model: stochastic rates, stochastic spread, default events.
    Case4,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [CaseId::Case1, CaseId::Case2, CaseId::Case3, CaseId::Case4];

    pub fn credit_config(self, recovery_rate: f64) -> CreditConfig {
        let (spread, defaults, priced) = match self {
            CaseId::Case1 => (SpreadDynamics::Deterministic, DefaultEvents::Off, false),
            CaseId::Case2 => (SpreadDynamics::Stochastic, DefaultEvents::Off, true),
            CaseId::Case3 => (SpreadDynamics::Deterministic, DefaultEvents::On, false),
            CaseId::Case4 => (SpreadDynamics::Stochastic, DefaultEvents::On, true),
        };
        let mut cfg = CreditConfig::new(recovery_rate, spread, defaults);
        cfg.spread_in_pricing = priced;
        cfg
    }
}

impl std::fmt::Display for CaseId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let n = match self {
            CaseId::Case1 => 1,
            CaseId::Case2 => 2,
            CaseId::Case3 => 3,
            CaseId::Case4 => 4,
        };
        write!(f, "case{n}")
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().trim_start_matches("case") {
            "1" => Ok(CaseId::Case1),
            "2" => Ok(CaseId::Case2),
            "3" => Ok(CaseId::Case3),
            "4" => Ok(CaseId::Case4),
            other => Err(Error::invalid("case", format!("unknown case `{other}`"))),
        }
    }
}

/// Instrument being valued.
#[derive(Debug, Clone)]
pub enum Payoff {
    /// Unit-notional zero-coupon bond; the literal payoff without recovery.
    ZeroCoupon { maturity: f64 },
    /// Fixed-coupon bond given as model-time cashflows per unit notional.
    CouponBond(CashflowSchedule),
}

impl Payoff {
    pub fn maturity(&self) -> f64 {
        match self {
            Payoff::ZeroCoupon { maturity } => *maturity,
            Payoff::CouponBond(cf) => cf.maturity(),
        }
    }

    pub fn cashflows(&self) -> CashflowSchedule {
        match self {
            Payoff::ZeroCoupon { maturity } => CashflowSchedule::zero_coupon(*maturity),
            Payoff::CouponBond(cf) => cf.clone(),
        }
    }
}

/// Monte Carlo option value: sample mean and standard error of the per-path
/// strategy values.
#[derive(Debug, Clone, Copy)]
pub struct OptionValue {
    pub value: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

/// Precomputed affine coefficients of the conditional bond value.
///
/// For every grid node `k` and remaining cashflow `t_i > t_k`, the
/// liquidity-adjusted zero-coupon price at the path state is
/// `exp(k0 - gamma (t_i - t_k) - ba x - bb y - bs s)`; the four
/// state-independent coefficients are tabulated here once per valuation.
pub struct ValuationTables {
    grid: Arc<TimeGrid>,
    offsets: Vec<usize>,
    k0: Vec<f64>,
    dtau: Vec<f64>,
    ba: Vec<f64>,
    bb: Vec<f64>,
    bs: Vec<f64>,
    amount: Vec<f64>,
    /// Grid node and amount of every cashflow, in time order.
    coupon_nodes: Vec<usize>,
    coupon_amounts: Vec<f64>,
    maturity_node: usize,
    recovery_rate: f64,
    use_defaults: bool,
}

impl ValuationTables {
    pub fn new(
        grid: &Arc<TimeGrid>,
        payoff: &Payoff,
        g2: &G2ppParams,
        cir: &CirParams,
        curve: &DiscountCurve,
        cfg: &CreditConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let cf = payoff.cashflows();
        let coupon_nodes = grid.indices_of(&cf.times)?;
        let nodes = grid.nodes();
        let n = nodes.len();

        let mut offsets = Vec::with_capacity(n + 1);
        let mut k0 = Vec::new();
        let mut dtau = Vec::new();
        let mut ba = Vec::new();
        let mut bb = Vec::new();
        let mut bs = Vec::new();
        let mut amount = Vec::new();

        // ln P(0,t) and V(0,t) per node, reused across entries.
        let mut ln_df = Vec::with_capacity(n);
        let mut v0 = Vec::with_capacity(n);
        for &t in nodes {
            ln_df.push(curve.ln_discount(t)?);
            v0.push(g2.v_integral(t));
        }
        let ln_df_cf: Vec<f64> = coupon_nodes.iter().map(|&j| ln_df[j]).collect();
        let v0_cf: Vec<f64> = coupon_nodes.iter().map(|&j| v0[j]).collect();
        let det_m: Vec<f64> = nodes.iter().map(|&t| cir.mean_integral(t)).collect();

        offsets.push(0);
        for (k, &t) in nodes.iter().enumerate() {
            for (i, &node_i) in coupon_nodes.iter().enumerate() {
                if node_i <= k {
                    continue;
                }
                let t_i = nodes[node_i];
                let tau = t_i - t;
                let mut c0 = ln_df_cf[i] - ln_df[k]
                    + 0.5 * (g2.v_integral(tau) - v0_cf[i] + v0[k]);
                let mut b_s = 0.0;
                if cfg.spread_in_pricing {
                    match cfg.spread {
                        SpreadDynamics::Stochastic => {
                            let (ln_a, b) = cir.affine_coeffs(tau);
                            c0 += ln_a;
                            b_s = b;
                        }
                        SpreadDynamics::Deterministic => {
                            c0 -= det_m[node_i] - det_m[k];
                        }
                    }
                }
                k0.push(c0);
                dtau.push(tau);
                ba.push(crate::math::decay_factor(g2.a, tau));
                bb.push(crate::math::decay_factor(g2.b, tau));
                bs.push(b_s);
                amount.push(cf.amounts[i]);
            }
            offsets.push(k0.len());
        }

        Ok(ValuationTables {
            grid: Arc::clone(grid),
            offsets,
            k0,
            dtau,
            ba,
            bb,
            bs,
            amount,
            maturity_node: *coupon_nodes.last().unwrap(),
            coupon_nodes,
            coupon_amounts: cf.amounts.clone(),
            recovery_rate: cfg.recovery_rate,
            use_defaults: cfg.defaults == DefaultEvents::On,
        })
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    /// Liquidity-adjusted value of the remaining cashflows at node `k`,
    /// conditional on the path state there.
    #[inline]
    fn remaining_value(&self, k: usize, x: f64, y: f64, s: f64, gamma: f64) -> f64 {
        let (lo, hi) = (self.offsets[k], self.offsets[k + 1]);
        let mut total = 0.0;
        for j in lo..hi {
            total += self.amount[j]
                * (self.k0[j] - gamma * self.dtau[j] - self.ba[j] * x - self.bb[j] * y
                    - self.bs[j] * s)
                    .exp();
        }
        total
    }

    fn effective_tau(&self, tau: Option<usize>) -> Option<usize> {
        if self.use_defaults {
            tau
        } else {
            None
        }
    }
}

/// State accessor: `(x, y, s, int_r)` at a grid node. Implemented by full
/// path arrays and by the solver's sparse snapshots alike.
pub trait StateAt {
    fn state(&self, node: usize) -> (f64, f64, f64, f64);
}

impl StateAt for PathSlice<'_> {
    #[inline]
    fn state(&self, node: usize) -> (f64, f64, f64, f64) {
        (self.x[node], self.y[node], self.s[node], self.int_r[node])
    }
}

/// Know-all strategy value for a zero-coupon bond over sorted probing nodes.
/// A path whose admissible set is emptied by default contributes zero.
pub fn strategy_value_zc_at<S: StateAt>(
    state: &S,
    tau: Option<usize>,
    tables: &ValuationTables,
    probe: &[usize],
    gamma: f64,
) -> f64 {
    let tau = tables.effective_tau(tau);
    let mut best = 0.0f64;
    for &k in probe {
        if let Some(tn) = tau {
            if k >= tn {
                break;
            }
        }
        let (x, y, s, int_r) = state.state(k);
        // At the maturity node the bond is worth par: P(T,T) = 1.
        let remaining = if k == tables.maturity_node {
            1.0
        } else {
            tables.remaining_value(k, x, y, s, gamma)
        };
        let v = (-int_r).exp() * remaining;
        if v > best {
            best = v;
        }
    }
    best
}

/// Know-all strategy value for a coupon bond over sorted probing nodes,
/// including banked coupons and recovery at default.
pub fn strategy_value_coupon_at<S: StateAt>(
    state: &S,
    tau: Option<usize>,
    tables: &ValuationTables,
    probe: &[usize],
    gamma: f64,
) -> f64 {
    let tau = tables.effective_tau(tau);
    let mut best = f64::NEG_INFINITY;
    let mut paid = 0.0f64;
    let mut ci = 0usize;
    let coupon_nodes = &tables.coupon_nodes;
    let mut pos = probe.len();

    for (p, &k) in probe.iter().enumerate() {
        if let Some(tn) = tau {
            if k >= tn {
                pos = p;
                break;
            }
        }
        while ci < coupon_nodes.len() && coupon_nodes[ci] <= k {
            let node = coupon_nodes[ci];
            paid += tables.coupon_amounts[ci] * (-state.state(node).3).exp();
            ci += 1;
        }
        let (x, y, s, int_r) = state.state(k);
        let v = paid + (-int_r).exp() * tables.remaining_value(k, x, y, s, gamma);
        if v > best {
            best = v;
        }
    }

    if let Some(tn) = tau {
        // Coupons paid strictly before the default.
        while ci < coupon_nodes.len() && coupon_nodes[ci] < tn {
            let node = coupon_nodes[ci];
            paid += tables.coupon_amounts[ci] * (-state.state(node).3).exp();
            ci += 1;
        }
        if pos < probe.len() {
            // Sale at the default node realizes only the banked coupons.
            if probe[pos] == tn && paid > best {
                best = paid;
            }
            let has_later = probe[pos] > tn || pos + 1 < probe.len();
            if has_later {
                let (x, y, s, int_r) = state.state(tn);
                let recovery = tables.recovery_rate
                    * (-int_r).exp()
                    * tables.remaining_value(tn, x, y, s, gamma);
                let v = paid + recovery;
                if v > best {
                    best = v;
                }
            }
        }
    }
    if best == f64::NEG_INFINITY {
        0.0
    } else {
        best
    }
}

/// Per-path strategy value for a zero-coupon bond on full path arrays.
pub fn strategy_value_zc(
    path: &PathSlice<'_>,
    tables: &ValuationTables,
    probe: &[usize],
    gamma: f64,
) -> f64 {
    strategy_value_zc_at(path, path.tau, tables, probe, gamma)
}

/// Per-path strategy value for a coupon bond on full path arrays.
pub fn strategy_value_coupon(
    path: &PathSlice<'_>,
    tables: &ValuationTables,
    probe: &[usize],
    gamma: f64,
) -> f64 {
    strategy_value_coupon_at(path, path.tau, tables, probe, gamma)
}

/// Strategy value dispatched on the payoff shape.
pub(crate) fn strategy_value_at<S: StateAt>(
    payoff: &Payoff,
    state: &S,
    tau: Option<usize>,
    tables: &ValuationTables,
    probe: &[usize],
    gamma: f64,
) -> f64 {
    match payoff {
        Payoff::ZeroCoupon { .. } => strategy_value_zc_at(state, tau, tables, probe, gamma),
        Payoff::CouponBond(_) => strategy_value_coupon_at(state, tau, tables, probe, gamma),
    }
}

pub(crate) fn strategy_value(
    payoff: &Payoff,
    path: &PathSlice<'_>,
    tables: &ValuationTables,
    probe: &[usize],
    gamma: f64,
) -> f64 {
    strategy_value_at(payoff, path, path.tau, tables, probe, gamma)
}

/// Value the look-back option on a scenario set: sample mean and standard
/// error over per-path strategy values. Default times must already be
/// sampled on the set when the configuration prices default events.
pub fn value_option(
    scn: &ScenarioSet,
    payoff: &Payoff,
    sched: &ProbingSchedule,
    gamma: f64,
    cfg: &CreditConfig,
) -> Result<OptionValue> {
    if scn.n_paths < 2 {
        return Err(Error::invalid("n_paths", "need at least 2 paths"));
    }
    if cfg.defaults == DefaultEvents::On && !scn.defaults_sampled() {
        return Err(Error::invalid(
            "scenario set",
            "default events are priced but sample_defaults was not applied",
        ));
    }
    let ctx = scn.context();
    let tables = ValuationTables::new(scn.grid(), payoff, &ctx.g2, &ctx.cir, &ctx.curve, cfg)?;
    let probe = scn.grid().indices_of(&sched.times)?;
    let mut values = vec![0.0f64; scn.n_paths];
    values
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, slot)| {
            let path = scn.path(i);
            *slot = strategy_value(payoff, &path, &tables, &probe, gamma);
        });
    let (value, std_error) = mean_and_se(&values);
    Ok(OptionValue {
        value,
        std_error,
        n_paths: scn.n_paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::risky_zcb;
    use crate::refdata::{bund_curve, cir_bb, cir_italy, g2pp_market};
    use crate::simulate::{sample_defaults, simulate, McConfig};

    fn arc_curve() -> Arc<DiscountCurve> {
        Arc::new(bund_curve())
    }

    fn mc(n_paths: usize, seed: u64) -> McConfig {
        McConfig {
            n_paths,
            n_repeats: 1,
            seed,
            ..McConfig::default()
        }
    }

    #[test]
    fn schedule_examples() {
        let (_, il) = make_schedules(1.0, 126, 1.0 / 2016.0);
        assert_eq!(il.times, vec![0.5, 1.0]);

        let (_, il) = make_schedules(0.25, 120, 1.0 / 2016.0);
        assert_eq!(il.times, vec![0.25]);

        let (liq, il) = make_schedules(3.5, 5, 1.0 / 2016.0);
        assert_eq!(il.times.len(), 177); // 176 interior dates plus maturity
        assert_eq!(*liq.times.first().unwrap(), 0.0);
        assert_eq!(*liq.times.last().unwrap(), 3.5);
        assert_eq!(*il.times.last().unwrap(), 3.5);
    }

    #[test]
    fn case_ids_map_to_credit_modes() {
        let c1 = CaseId::Case1.credit_config(0.4);
        assert_eq!(c1.spread, SpreadDynamics::Deterministic);
        assert_eq!(c1.defaults, DefaultEvents::Off);
        let c4 = CaseId::Case4.credit_config(0.4);
        assert_eq!(c4.spread, SpreadDynamics::Stochastic);
        assert_eq!(c4.defaults, DefaultEvents::On);
        assert_eq!("case3".parse::<CaseId>().unwrap(), CaseId::Case3);
        assert_eq!(CaseId::Case2.to_string(), "case2");
    }

    /// Hand-built path with a default before the first probing date: the
    /// strategy can only collect the recovery value, frozen at tau.
    #[test]
    fn default_before_first_probe_leaves_recovery_only() {
        let g2 = g2pp_market();
        let cir = cir_italy();
        let curve = bund_curve();
        let grid = Arc::new(TimeGrid::from_nodes(vec![0.0, 0.25, 0.5, 0.75, 1.0]).unwrap());
        let cf = CashflowSchedule {
            times: vec![0.5, 1.0],
            amounts: vec![0.02, 1.02],
        };
        let payoff = Payoff::CouponBond(cf.clone());
        let cfg = CaseId::Case4.credit_config(0.4);
        let tables = ValuationTables::new(&grid, &payoff, &g2, &cir, &curve, &cfg).unwrap();

        let x = [0.0, 0.004, 0.006, 0.005, 0.003];
        let y = [0.0, -0.002, -0.001, 0.0, 0.001];
        let s = [0.0003, 0.0005, 0.0006, 0.0004, 0.0005];
        let int_r = [0.0, 0.008, 0.017, 0.025, 0.034];
        let int_s = [0.0, 1e-4, 2e-4, 3e-4, 4e-4];
        let path = PathSlice {
            x: &x,
            y: &y,
            s: &s,
            int_r: &int_r,
            int_s: &int_s,
            tau: Some(1), // default at t = 0.25
        };
        let probe = vec![2, 4]; // probing at 0.5 and 1.0
        let gamma = 0.01;
        let got = strategy_value_coupon(&path, &tables, &probe, gamma);

        let vb_tau: f64 = cf
            .times
            .iter()
            .zip(&cf.amounts)
            .map(|(&t_i, &c)| {
                c * risky_zcb(&g2, &cir, &curve, &cfg, gamma, 0.25, t_i, x[1], y[1], s[1]).unwrap()
            })
            .sum();
        let expected = 0.4 * (-int_r[1]).exp() * vb_tau;
        assert!((got - expected).abs() < 1e-14, "got {got} expected {expected}");
    }

    /// Survival candidate against a direct closed-form evaluation.
    #[test]
    fn tables_match_risky_zcb() {
        let g2 = g2pp_market();
        let cir = cir_bb();
        let curve = bund_curve();
        let grid = Arc::new(TimeGrid::from_nodes(vec![0.0, 0.3, 0.6, 1.2, 2.0]).unwrap());
        let cf = CashflowSchedule {
            times: vec![0.6, 1.2, 2.0],
            amounts: vec![0.03, 0.03, 1.03],
        };
        let payoff = Payoff::CouponBond(cf.clone());
        for case in [CaseId::Case1, CaseId::Case2] {
            let cfg = case.credit_config(0.4);
            let tables = ValuationTables::new(&grid, &payoff, &g2, &cir, &curve, &cfg).unwrap();
            let x = [0.0, 0.01, 0.012, 0.008, 0.002];
            let y = [0.0, -0.004, -0.006, -0.002, 0.001];
            let s = [0.0054, 0.01, 0.02, 0.015, 0.012];
            let int_r = [0.0, 0.01, 0.02, 0.04, 0.07];
            let int_s = [0.0; 5];
            let path = PathSlice {
                x: &x,
                y: &y,
                s: &s,
                int_r: &int_r,
                int_s: &int_s,
                tau: None,
            };
            let gamma = 0.0023;
            // Single probing date at node 1 (t = 0.3), before any coupon.
            let got = strategy_value_coupon(&path, &tables, &[1], gamma);
            let expected: f64 = (-int_r[1]).exp()
                * cf.times
                    .iter()
                    .zip(&cf.amounts)
                    .map(|(&t_i, &c)| {
                        c * risky_zcb(&g2, &cir, &curve, &cfg, gamma, 0.3, t_i, x[1], y[1], s[1])
                            .unwrap()
                    })
                    .sum::<f64>();
            assert!((got - expected).abs() < 1e-14, "{case}: {got} vs {expected}");
        }
    }

    #[test]
    fn zero_coupon_payoff_reduces_to_zc_kernel() {
        let g2 = g2pp_market();
        let cir = cir_italy();
        let curve = arc_curve();
        let grid = Arc::new(TimeGrid::build(1.0, &[0.4, 0.8], 0.05).unwrap());
        let cfg = CaseId::Case4.credit_config(0.0); // zero recovery
        let scn = simulate(&g2, &cir, &curve, &grid, &mc(1000, 5)).unwrap();
        let scn = sample_defaults(scn, &cfg).unwrap();
        let zc = Payoff::ZeroCoupon { maturity: 1.0 };
        let coupon_shape = Payoff::CouponBond(CashflowSchedule::zero_coupon(1.0));
        let t_zc = ValuationTables::new(&grid, &zc, &g2, &cir, &curve.as_ref().clone(), &cfg).unwrap();
        let t_cp =
            ValuationTables::new(&grid, &coupon_shape, &g2, &cir, &curve.as_ref().clone(), &cfg)
                .unwrap();
        let probe = grid.indices_of(&[0.4, 0.8, 1.0]).unwrap();
        for i in 0..scn.n_paths {
            let p = scn.path(i);
            let a = strategy_value_zc(&p, &t_zc, &probe, 0.004);
            let b = strategy_value_coupon(&p, &t_cp, &probe, 0.004);
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn single_probe_at_maturity_pays_realized_discount() {
        let g2 = g2pp_market();
        let cir = cir_italy();
        let curve = arc_curve();
        let grid = Arc::new(TimeGrid::build(1.0, &[], 0.1).unwrap());
        let cfg = CaseId::Case2.credit_config(0.4);
        let scn = simulate(&g2, &cir, &curve, &grid, &mc(1000, 9)).unwrap();
        let zc = Payoff::ZeroCoupon { maturity: 1.0 };
        let tables =
            ValuationTables::new(&grid, &zc, &g2, &cir, &curve.as_ref().clone(), &cfg).unwrap();
        let last = grid.len() - 1;
        for i in 0..20 {
            let p = scn.path(i);
            let v = strategy_value_zc(&p, &tables, &[last], 0.03);
            assert!((v - (-p.int_r[last]).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn liquid_dominates_illiquid_pathwise() {
        let g2 = g2pp_market();
        let cir = cir_bb();
        let curve = arc_curve();
        let (liq, il) = make_schedules(2.0, 20, 1.0 / 252.0);
        let mut required = liq.times.clone();
        required.extend_from_slice(&il.times);
        let grid = Arc::new(TimeGrid::build(2.0, &required, 1.0 / 252.0).unwrap());
        let cfg = CaseId::Case4.credit_config(0.4);
        let scn = simulate(&g2, &cir, &curve, &grid, &mc(1000, 21)).unwrap();
        let scn = sample_defaults(scn, &cfg).unwrap();
        let cf = CashflowSchedule {
            times: vec![0.5, 1.0, 1.5, 2.0],
            amounts: vec![0.02, 0.02, 0.02, 1.02],
        };
        let payoff = Payoff::CouponBond(cf);
        let tables =
            ValuationTables::new(&grid, &payoff, &g2, &cir, &curve.as_ref().clone(), &cfg)
                .unwrap();
        let probe_liq = grid.indices_of(&liq.times).unwrap();
        let probe_il = grid.indices_of(&il.times).unwrap();
        for i in 0..scn.n_paths {
            let p = scn.path(i);
            let v_liq = strategy_value_coupon(&p, &tables, &probe_liq, 0.0);
            let v_il = strategy_value_coupon(&p, &tables, &probe_il, 0.0);
            assert!(v_liq >= v_il, "path {i}: {v_liq} < {v_il}");
        }
    }

    /// Zero vols and risk-free pricing make every candidate equal: the value
    /// telescopes to the dirty price with zero dispersion.
    #[test]
    fn deterministic_world_telescopes_to_dirty_price() {
        let mut g2 = g2pp_market();
        g2.sigma = 0.0;
        g2.eta = 0.0;
        let cir = cir_italy();
        let curve = arc_curve();
        let cf = CashflowSchedule {
            times: vec![0.5, 1.0, 1.5, 2.0],
            amounts: vec![0.0225, 0.0225, 0.0225, 1.0225],
        };
        let payoff = Payoff::CouponBond(cf.clone());
        let grid = Arc::new(TimeGrid::build(2.0, &cf.times, 0.05).unwrap());
        let mut cfg = CaseId::Case1.credit_config(0.4);
        cfg.spread_in_pricing = false;
        let scn = simulate(&g2, &cir, &curve, &grid, &mc(1000, 33)).unwrap();
        let tables =
            ValuationTables::new(&grid, &payoff, &g2, &cir, &curve.as_ref().clone(), &cfg)
                .unwrap();
        let dirty: f64 = cf
            .times
            .iter()
            .zip(&cf.amounts)
            .map(|(&t, &c)| c * curve.discount(t).unwrap())
            .sum();
        let p = scn.path(0);
        for &probe_time in &[0.25, 1.0, 2.0] {
            let k = grid.index_of(probe_time).unwrap();
            let v = strategy_value_coupon(&p, &tables, &[k], 0.0);
            assert!((v - dirty).abs() < 1e-12, "probe {probe_time}: {v} vs {dirty}");
        }
        // Through the full option valuation: exact value, zero error.
        let sched = ProbingSchedule {
            kind: ScheduleKind::Liquid,
            times: grid.nodes().to_vec(),
            dt_days: None,
        };
        let ov = value_option(&scn, &payoff, &sched, 0.0, &cfg).unwrap();
        assert!((ov.value - dirty).abs() < 1e-12);
        assert_eq!(ov.std_error, 0.0);
    }

    /// Full recovery with the spread feeding only the default clock: default
    /// truncation is value-neutral, so the option matches the no-default one.
    #[test]
    fn full_recovery_neutralizes_defaults() {
        let g2 = g2pp_market();
        let cir = cir_bb();
        let curve = arc_curve();
        let cf = CashflowSchedule {
            times: vec![0.5, 1.0],
            amounts: vec![0.02, 1.02],
        };
        let payoff = Payoff::CouponBond(cf.clone());
        let grid = Arc::new(TimeGrid::build(1.0, &cf.times, 1.0 / 252.0).unwrap());
        let mut with_defaults = CreditConfig::new(
            0.999_999_999,
            SpreadDynamics::Stochastic,
            DefaultEvents::On,
        );
        with_defaults.recovery_rate = 1.0 - 1e-12;
        with_defaults.spread_in_pricing = false;
        with_defaults.intensity_lgd = Some(0.2); // brisk default clock
        let mut without = with_defaults;
        without.defaults = DefaultEvents::Off;

        let scn = simulate(&g2, &cir, &curve, &grid, &mc(2000, 44)).unwrap();
        let scn = sample_defaults(scn, &with_defaults).unwrap();
        let n_defaulted = (0..scn.n_paths)
            .filter(|&i| scn.tau_time(i).is_some())
            .count();
        assert!(n_defaulted > 100, "fixture needs defaults, got {n_defaulted}");

        let sched = ProbingSchedule {
            kind: ScheduleKind::Illiquid,
            times: vec![0.25, 0.5, 0.75, 1.0],
            dt_days: None,
        };
        let a = value_option(&scn, &payoff, &sched, 0.0, &with_defaults).unwrap();
        let b = value_option(&scn, &payoff, &sched, 0.0, &without).unwrap();
        let tol = 3.0 * (a.std_error + b.std_error) + 1e-9;
        assert!(
            (a.value - b.value).abs() <= tol,
            "with {} vs without {} (tol {tol})",
            a.value,
            b.value
        );
    }

    #[test]
    fn option_value_is_nonincreasing_in_gamma() {
        let g2 = g2pp_market();
        let cir = cir_bb();
        let curve = arc_curve();
        let cf = CashflowSchedule {
            times: vec![0.5, 1.0],
            amounts: vec![0.02, 1.02],
        };
        let payoff = Payoff::CouponBond(cf);
        let grid = Arc::new(TimeGrid::build(1.0, &[0.25, 0.5, 0.75], 1.0 / 52.0).unwrap());
        let cfg = CaseId::Case4.credit_config(0.4);
        let scn = simulate(&g2, &cir, &curve, &grid, &mc(1000, 61)).unwrap();
        let scn = sample_defaults(scn, &cfg).unwrap();
        let sched = ProbingSchedule {
            kind: ScheduleKind::Illiquid,
            times: vec![0.25, 0.5, 0.75, 1.0],
            dt_days: None,
        };
        let mut prev = f64::INFINITY;
        for k in 0..8 {
            let gamma = k as f64 * 0.004;
            let v = value_option(&scn, &payoff, &sched, gamma, &cfg).unwrap().value;
            assert!(v <= prev, "gamma {gamma}: {v} > {prev}");
            prev = v;
        }
    }

    #[test]
    fn pricing_defaults_without_sampling_is_rejected() {
        let g2 = g2pp_market();
        let cir = cir_bb();
        let curve = arc_curve();
        let grid = Arc::new(TimeGrid::build(1.0, &[], 0.25).unwrap());
        let scn = simulate(&g2, &cir, &curve, &grid, &mc(1000, 3)).unwrap();
        let payoff = Payoff::ZeroCoupon { maturity: 1.0 };
        let sched = ProbingSchedule {
            kind: ScheduleKind::Illiquid,
            times: vec![0.5, 1.0],
            dt_days: None,
        };
        let cfg = CaseId::Case4.credit_config(0.4);
        assert!(value_option(&scn, &payoff, &sched, 0.0, &cfg).is_err());
        let scn = sample_defaults(scn, &cfg).unwrap();
        assert!(value_option(&scn, &payoff, &sched, 0.0, &cfg).is_ok());
    }

    #[test]
    fn option_value_dominates_dirty_price() {
        let g2 = g2pp_market();
        let cir = cir_italy();
        let curve = arc_curve();
        let cf = CashflowSchedule {
            times: vec![0.5, 1.0, 1.5, 2.0],
            amounts: vec![0.0225, 0.0225, 0.0225, 1.0225],
        };
        let payoff = Payoff::CouponBond(cf.clone());
        let cfg = CaseId::Case4.credit_config(0.4);
        let (_, il) = make_schedules(2.0, 20, 1.0 / 252.0);
        let grid = Arc::new(
            TimeGrid::build(
                2.0,
                &[cf.times.clone(), il.times.clone()].concat(),
                1.0 / 252.0,
            )
            .unwrap(),
        );
        let scn = simulate(&g2, &cir, &curve, &grid, &mc(2000, 55)).unwrap();
        let scn = sample_defaults(scn, &cfg).unwrap();
        let ov = value_option(&scn, &payoff, &il, 0.0, &cfg).unwrap();
        let dirty: f64 = cf
            .times
            .iter()
            .zip(&cf.amounts)
            .map(|(&t, &c)| {
                c * risky_zcb(&g2, &cir, &curve, &cfg, 0.0, 0.0, t, 0.0, 0.0, cir.s0).unwrap()
            })
            .sum();
        assert!(
            ov.value >= dirty - 3.0 * ov.std_error,
            "option {} dirty {dirty} se {}",
            ov.value,
            ov.std_error
        );
    }
}
