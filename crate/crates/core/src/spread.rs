//! Solving the implicit equation for the liquidity spread.
//!
//! For a probing spacing `dt` the spread `gamma` solves
//!
//! ```text
//! O_il(gamma) / O_liq = V_gamma(0,T) / V_0(0,T)
//! ```
//!
//! where the left side is the ratio of the illiquid to the liquid look-back
//! option value and the right side is the ratio of time-zero bond values with
//! and without the liquidity discount (`e^{-gamma T}` for a zero-coupon
//! bond). Every `gamma` trial reuses one scenario set (common random
//! numbers), so the ratio is smooth in `gamma` and a safeguarded Newton
//! iteration converges in a few steps. The estimation is repeated on
//! independent seeds; the reported spread is the mean of the repeat sample.
//!
//! The liquid leg probes on a fine uniform lattice and is evaluated in a
//! single streaming pass per repeat (it never depends on `gamma`); the
//! illiquid leg is re-evaluated per trial from state snapshots taken at its
//! probing dates. Memory therefore scales with the number of illiquid dates,
//! not with the lattice.

use std::sync::Arc;

use rayon::prelude::*;

use crate::curves::{to_model_cashflows, BondSpec, CashflowSchedule, DiscountCurve};
use crate::error::{Error, Result};
use crate::lookback::{
    make_schedules, strategy_value, strategy_value_at, CaseId, Payoff, ProbingSchedule, StateAt,
    ValuationTables, BUSINESS_DAYS,
};
use crate::math::{compensated_sum, derive_seed, mean_and_se, solve_bracketed};
use crate::models::{risky_zcb, CirParams, CreditConfig, G2ppParams};
use crate::simulate::{default_node, McConfig, PathBuffer, PathEngine, TimeGrid};

/// Market data and model parameters shared by all solver entry points.
#[derive(Debug, Clone)]
pub struct ModelEnv {
    pub g2: G2ppParams,
    pub cir: CirParams,
    pub curve: Arc<DiscountCurve>,
    pub recovery_rate: f64,
}

impl ModelEnv {
    pub fn new(g2: G2ppParams, cir: CirParams, curve: Arc<DiscountCurve>, recovery_rate: f64) -> Self {
        ModelEnv {
            g2,
            cir,
            curve,
            recovery_rate,
        }
    }

    pub fn credit(&self, case: CaseId) -> CreditConfig {
        case.credit_config(self.recovery_rate)
    }
}

/// Spread estimate with Monte Carlo dispersion and solver diagnostics.
#[derive(Debug, Clone)]
pub struct LiquiditySpreadResult {
    /// Mean of the per-repeat estimates (decimal per annum).
    pub gamma_mean: f64,
    /// Standard error of the mean over repeats.
    pub gamma_std: f64,
    /// Per-repeat estimates.
    pub gammas: Vec<f64>,
    /// Largest Newton iteration count across repeats.
    pub iterations: usize,
    /// Largest absolute log-ratio residual across repeats.
    pub residual: f64,
    pub n_paths: usize,
    pub n_repeats: usize,
}

impl LiquiditySpreadResult {
    pub fn gamma_bps(&self) -> f64 {
        self.gamma_mean * 1e4
    }

    pub fn gamma_std_bps(&self) -> f64 {
        self.gamma_std * 1e4
    }

    /// Sample standard deviation of the repeat estimates.
    pub fn gamma_sample_std(&self) -> f64 {
        self.gamma_std * (self.n_repeats as f64).sqrt()
    }
}

// --- snapshot data for one repeat -------------------------------------------

const NO_COL: u32 = u32::MAX;
const NO_TAU: u32 = u32::MAX;

struct RepeatData {
    n_paths: usize,
    cols: usize,
    /// Liquid-leg strategy value per path at gamma = 0.
    liquid: Vec<f64>,
    /// Grid node -> snapshot column, NO_COL where absent.
    col_of_node: Vec<u32>,
    sx: Vec<f64>,
    sy: Vec<f64>,
    ss: Vec<f64>,
    sir: Vec<f64>,
    /// Default node per path, NO_TAU when alive.
    tau: Vec<u32>,
    tau_state: Vec<[f64; 4]>,
}

/// Sparse state view for one path: snapshot columns plus the default node.
struct SnapshotView<'a> {
    data: &'a RepeatData,
    path: usize,
}

impl StateAt for SnapshotView<'_> {
    #[inline]
    fn state(&self, node: usize) -> (f64, f64, f64, f64) {
        let col = self.data.col_of_node[node];
        if col != NO_COL {
            let base = self.path * self.data.cols + col as usize;
            (
                self.data.sx[base],
                self.data.sy[base],
                self.data.ss[base],
                self.data.sir[base],
            )
        } else {
            debug_assert_eq!(self.data.tau[self.path] as usize, node);
            let st = self.data.tau_state[self.path];
            (st[0], st[1], st[2], st[3])
        }
    }
}

impl RepeatData {
    fn tau_of(&self, path: usize) -> Option<usize> {
        let t = self.tau[path];
        if t == NO_TAU {
            None
        } else {
            Some(t as usize)
        }
    }

    /// Illiquid option value at `gamma` over the snapshot set.
    fn illiquid_mean(
        &self,
        payoff: &Payoff,
        tables: &ValuationTables,
        probe: &[usize],
        gamma: f64,
    ) -> f64 {
        let mut values = vec![0.0f64; self.n_paths];
        values.par_iter_mut().enumerate().for_each(|(i, slot)| {
            let view = SnapshotView { data: self, path: i };
            *slot = strategy_value_at(payoff, &view, self.tau_of(i), tables, probe, gamma);
        });
        compensated_sum(&values) / self.n_paths as f64
    }
}

// --- the paired valuation pass ----------------------------------------------

struct SolveSetup {
    grid: Arc<TimeGrid>,
    tables: ValuationTables,
    payoff: Payoff,
    cfg: CreditConfig,
    liquid_probe: Vec<usize>,
    snapshot_nodes: Vec<usize>,
}

fn canonical_grid(
    env: &ModelEnv,
    payoff: &Payoff,
    schedules: &[&[f64]],
    liquid_step: f64,
) -> Result<Arc<TimeGrid>> {
    let horizon = payoff.maturity();
    let mut required: Vec<f64> = Vec::new();
    // Every business day, so that paths do not depend on which probing
    // spacings are being solved.
    let n_days = (horizon * BUSINESS_DAYS).floor() as u64;
    for k in 1..=n_days {
        required.push(k as f64 / BUSINESS_DAYS);
    }
    required.extend(payoff.cashflows().times.iter().copied());
    for times in schedules {
        required.extend_from_slice(times);
    }
    let grid = TimeGrid::build(horizon, &required, liquid_step)?;
    if grid.horizon() > env.curve.max_time() {
        return Err(Error::Extrapolation {
            t: grid.horizon(),
            max_t: env.curve.max_time(),
        });
    }
    Ok(Arc::new(grid))
}

fn build_setup(
    env: &ModelEnv,
    payoff: &Payoff,
    case: CaseId,
    mc: &McConfig,
    liquid_times: &[f64],
    illiquid_schedules: &[&[f64]],
) -> Result<SolveSetup> {
    let mut all: Vec<&[f64]> = vec![liquid_times];
    all.extend_from_slice(illiquid_schedules);
    let grid = canonical_grid(env, payoff, &all, mc.liquid_step)?;
    let cfg = env.credit(case);
    let tables = ValuationTables::new(&grid, payoff, &env.g2, &env.cir, &env.curve, &cfg)?;
    let liquid_probe = grid.indices_of(liquid_times)?;

    let mut snapshot_nodes: Vec<usize> = Vec::new();
    for times in illiquid_schedules {
        snapshot_nodes.extend(grid.indices_of(times)?);
    }
    snapshot_nodes.extend(grid.indices_of(&payoff.cashflows().times)?);
    snapshot_nodes.sort_unstable();
    snapshot_nodes.dedup();

    Ok(SolveSetup {
        grid,
        tables,
        payoff: payoff.clone(),
        cfg,
        liquid_probe,
        snapshot_nodes,
    })
}

fn run_repeat(env: &ModelEnv, setup: &SolveSetup, seed: u64, mc: &McConfig) -> Result<RepeatData> {
    let engine = PathEngine::new(
        &env.g2,
        &env.cir,
        &env.curve,
        Arc::clone(&setup.grid),
        seed,
        mc.antithetic,
    )?;
    let n_paths = mc.n_paths;
    let n_nodes = setup.grid.len();
    let cols = setup.snapshot_nodes.len();

    let mut col_of_node = vec![NO_COL; n_nodes];
    for (c, &node) in setup.snapshot_nodes.iter().enumerate() {
        col_of_node[node] = c as u32;
    }

    let mut liquid = vec![0.0f64; n_paths];
    let mut sx = vec![0.0f64; n_paths * cols];
    let mut sy = vec![0.0f64; n_paths * cols];
    let mut ss = vec![0.0f64; n_paths * cols];
    let mut sir = vec![0.0f64; n_paths * cols];
    let mut tau = vec![NO_TAU; n_paths];
    let mut tau_state = vec![[0.0f64; 4]; n_paths];

    let failures: Vec<usize> = liquid
        .par_iter_mut()
        .zip(tau.par_iter_mut())
        .zip(tau_state.par_iter_mut())
        .zip(sx.par_chunks_mut(cols.max(1)))
        .zip(sy.par_chunks_mut(cols.max(1)))
        .zip(ss.par_chunks_mut(cols.max(1)))
        .zip(sir.par_chunks_mut(cols.max(1)))
        .enumerate()
        .map_init(
            || PathBuffer::with_len(n_nodes),
            |buf, (i, ((((((lq, tu), ts), cx), cy), cs), cir_))| {
                if engine.fill_path(i, buf).is_err() {
                    return Some(i);
                }
                buf.tau = default_node(
                    &setup.cfg,
                    &buf.int_s,
                    &engine.det_int_s,
                    engine.default_exponential(i),
                );
                *lq = strategy_value(
                    &setup.payoff,
                    &buf.as_slice(),
                    &setup.tables,
                    &setup.liquid_probe,
                    0.0,
                );
                for (c, &node) in setup.snapshot_nodes.iter().enumerate() {
                    cx[c] = buf.x[node];
                    cy[c] = buf.y[node];
                    cs[c] = buf.s[node];
                    cir_[c] = buf.int_r[node];
                }
                if let Some(tn) = buf.tau {
                    *tu = tn as u32;
                    *ts = [buf.x[tn], buf.y[tn], buf.s[tn], buf.int_r[tn]];
                }
                None
            },
        )
        .flatten()
        .collect();
    if let Some(&path) = failures.first() {
        return Err(Error::Simulation { path });
    }

    Ok(RepeatData {
        n_paths,
        cols,
        liquid,
        col_of_node,
        sx,
        sy,
        ss,
        sir,
        tau,
        tau_state,
    })
}

// --- right-hand side of the implicit equation --------------------------------

enum RhsSpec {
    Zc { maturity: f64 },
    Coupon { times: Vec<f64>, weighted: Vec<f64> },
}

impl RhsSpec {
    fn new(env: &ModelEnv, payoff: &Payoff, cfg: &CreditConfig) -> Result<Self> {
        match payoff {
            Payoff::ZeroCoupon { maturity } => Ok(RhsSpec::Zc { maturity: *maturity }),
            Payoff::CouponBond(cf) => {
                let mut weighted = Vec::with_capacity(cf.len());
                for (&t, &c) in cf.times.iter().zip(&cf.amounts) {
                    let pbar = risky_zcb(
                        &env.g2, &env.cir, &env.curve, cfg, 0.0, 0.0, t, 0.0, 0.0, env.cir.s0,
                    )?;
                    weighted.push(c * pbar);
                }
                Ok(RhsSpec::Coupon {
                    times: cf.times.clone(),
                    weighted,
                })
            }
        }
    }

    /// `ln [V_gamma(0,T) / V_0(0,T)]`.
    fn ln_ratio(&self, gamma: f64) -> f64 {
        match self {
            RhsSpec::Zc { maturity } => -gamma * maturity,
            RhsSpec::Coupon { times, weighted } => {
                let mut num = 0.0;
                let mut den = 0.0;
                for (&t, &w) in times.iter().zip(weighted) {
                    num += w * (-gamma * t).exp();
                    den += w;
                }
                (num / den).ln()
            }
        }
    }
}

// --- solver -------------------------------------------------------------------

/// Upper end of the gamma bracket: 500 bps.
const GAMMA_MAX: f64 = 0.05;
/// Convergence tolerance on the log-ratio residual.
const G_TOL: f64 = 1e-9;
/// Central-difference step for the Newton derivative: one basis point.
const FD_STEP: f64 = 1e-4;

fn solve_repeat(
    data: &RepeatData,
    setup: &SolveSetup,
    probe: &[usize],
    rhs: &RhsSpec,
    start: f64,
) -> Result<(f64, usize, f64)> {
    let o_liq = compensated_sum(&data.liquid) / data.n_paths as f64;
    if !(o_liq > 0.0) {
        return Err(Error::SolverDiverged {
            what: "gamma (liquid leg not positive)".to_string(),
            iterations: 0,
            residual: o_liq,
        });
    }
    let ln_liq = o_liq.ln();
    let g = |gamma: f64| -> f64 {
        let o_il = data.illiquid_mean(&setup.payoff, &setup.tables, probe, gamma);
        o_il.ln() - ln_liq - rhs.ln_ratio(gamma)
    };
    let g0 = g(0.0);
    if g0.abs() <= G_TOL {
        return Ok((0.0, 0, g0.abs()));
    }
    let dg = |gamma: f64| {
        let lo = (gamma - FD_STEP).max(0.0);
        (g(gamma + FD_STEP) - g(lo)) / (gamma + FD_STEP - lo)
    };
    let root = solve_bracketed(
        "gamma",
        g,
        dg,
        0.0,
        GAMMA_MAX,
        start.clamp(1e-4, GAMMA_MAX - 1e-4),
        G_TOL,
        1e-12,
        50,
    )?;
    Ok((root.root, root.iterations, root.residual.abs()))
}

fn assemble(gammas: Vec<f64>, iterations: usize, residual: f64, mc: &McConfig) -> LiquiditySpreadResult {
    let (gamma_mean, gamma_std) = mean_and_se(&gammas);
    LiquiditySpreadResult {
        gamma_mean,
        gamma_std,
        gammas,
        iterations,
        residual,
        n_paths: mc.n_paths,
        n_repeats: mc.n_repeats,
    }
}

/// Solve for the spread on explicit probing schedules. Repeats run on seeds
/// derived from the master seed by repeat index; within a repeat all gamma
/// trials share one scenario set.
pub fn solve_gamma_for_schedules(
    env: &ModelEnv,
    payoff: &Payoff,
    case: CaseId,
    mc: &McConfig,
    liquid: &ProbingSchedule,
    illiquid: &ProbingSchedule,
) -> Result<LiquiditySpreadResult> {
    let results = solve_schedules_multi(env, payoff, case, mc, &liquid.times, &[&illiquid.times])?;
    Ok(results.into_iter().next().unwrap())
}

/// Shared-scenario solve over several illiquid schedules: one streaming pass
/// per repeat serves every schedule.
fn solve_schedules_multi(
    env: &ModelEnv,
    payoff: &Payoff,
    case: CaseId,
    mc: &McConfig,
    liquid_times: &[f64],
    illiquid: &[&[f64]],
) -> Result<Vec<LiquiditySpreadResult>> {
    mc.validate()?;
    if illiquid.is_empty() {
        return Err(Error::invalid("illiquid", "no schedules to solve"));
    }
    let setup = build_setup(env, payoff, case, mc, liquid_times, illiquid)?;
    let rhs = RhsSpec::new(env, payoff, &setup.cfg)?;
    let probes: Vec<Vec<usize>> = illiquid
        .iter()
        .map(|times| setup.grid.indices_of(times))
        .collect::<Result<_>>()?;

    let mut gammas: Vec<Vec<f64>> = vec![Vec::with_capacity(mc.n_repeats); illiquid.len()];
    let mut iterations = 0usize;
    let mut residual = 0.0f64;
    let mut warm: Vec<f64> = vec![2e-3; illiquid.len()];
    for j in 0..mc.n_repeats {
        let seed_j = derive_seed(mc.seed, j as u64);
        let data = run_repeat(env, &setup, seed_j, mc)?;
        for (d, probe) in probes.iter().enumerate() {
            let (gamma, it, res) = solve_repeat(&data, &setup, probe, &rhs, warm[d])?;
            warm[d] = gamma.max(1e-4);
            gammas[d].push(gamma);
            iterations = iterations.max(it);
            residual = residual.max(res);
        }
    }
    Ok(gammas
        .into_iter()
        .map(|g| assemble(g, iterations, residual, mc))
        .collect())
}

/// Solve for several probing spacings at once, sharing scenario sets.
pub fn solve_gamma_multi(
    env: &ModelEnv,
    payoff: &Payoff,
    case: CaseId,
    mc: &McConfig,
    dt_list: &[u32],
) -> Result<Vec<(u32, LiquiditySpreadResult)>> {
    if dt_list.is_empty() {
        return Err(Error::invalid("dt_list", "empty probing-spacing list"));
    }
    for &dt in dt_list {
        if dt == 0 {
            return Err(Error::invalid("dt_days", "must be at least 1"));
        }
    }
    let horizon = payoff.maturity();
    let mut liquid_times: Option<Vec<f64>> = None;
    let mut il_times: Vec<Vec<f64>> = Vec::with_capacity(dt_list.len());
    for &dt in dt_list {
        let (liq, il) = make_schedules(horizon, dt, mc.liquid_step);
        if liquid_times.is_none() {
            liquid_times = Some(liq.times);
        }
        il_times.push(il.times);
    }
    let liquid_times = liquid_times.unwrap();
    let il_refs: Vec<&[f64]> = il_times.iter().map(|v| v.as_slice()).collect();
    let results = solve_schedules_multi(env, payoff, case, mc, &liquid_times, &il_refs)?;
    Ok(dt_list.iter().copied().zip(results).collect())
}

/// Liquidity spread of a zero-coupon bond with maturity `T` (years) probed
/// every `dt_days` business days.
pub fn solve_gamma_zc(
    env: &ModelEnv,
    maturity: f64,
    dt_days: u32,
    case: CaseId,
    mc: &McConfig,
) -> Result<LiquiditySpreadResult> {
    if !(maturity > 0.0) {
        return Err(Error::invalid("maturity", "must be positive"));
    }
    let payoff = Payoff::ZeroCoupon { maturity };
    Ok(solve_gamma_multi(env, &payoff, case, mc, &[dt_days])?
        .pop()
        .unwrap()
        .1)
}

/// Liquidity spread of a coupon bond given as model-time cashflows.
pub fn solve_gamma_coupon(
    env: &ModelEnv,
    cashflows: &CashflowSchedule,
    dt_days: u32,
    case: CaseId,
    mc: &McConfig,
) -> Result<LiquiditySpreadResult> {
    if cashflows.is_empty() {
        return Err(Error::Schedule("bond has no future cashflows".to_string()));
    }
    let payoff = Payoff::CouponBond(cashflows.clone());
    Ok(solve_gamma_multi(env, &payoff, case, mc, &[dt_days])?
        .pop()
        .unwrap()
        .1)
}

/// Liquidity spread of a bond described contractually, valued at `asof`.
pub fn solve_gamma_bond(
    env: &ModelEnv,
    bond: &BondSpec,
    asof: chrono::NaiveDate,
    dt_days: u32,
    case: CaseId,
    mc: &McConfig,
) -> Result<LiquiditySpreadResult> {
    let cf = to_model_cashflows(bond, asof)?;
    solve_gamma_coupon(env, &cf, dt_days, case, mc)
}

// --- sweeps -------------------------------------------------------------------

/// One cell of a maturity x spacing x case sweep; failures are carried as
/// text so a sweep survives individual cells.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub maturity: f64,
    pub dt_days: u32,
    pub case: CaseId,
    pub outcome: std::result::Result<LiquiditySpreadResult, String>,
}

/// Zero-coupon sweep over maturities, probing spacings, and cases.
pub fn sweep(
    env: &ModelEnv,
    maturities: &[f64],
    dt_list: &[u32],
    cases: &[CaseId],
    mc: &McConfig,
) -> Result<Vec<SweepCell>> {
    if maturities.is_empty() || dt_list.is_empty() || cases.is_empty() {
        return Err(Error::invalid("sweep", "maturities, dt list, and cases must be nonempty"));
    }
    let mut cells = Vec::with_capacity(maturities.len() * dt_list.len() * cases.len());
    for &maturity in maturities {
        for &case in cases {
            let payoff = Payoff::ZeroCoupon { maturity };
            match solve_gamma_multi(env, &payoff, case, mc, dt_list) {
                Ok(results) => {
                    for (dt_days, result) in results {
                        cells.push(SweepCell {
                            maturity,
                            dt_days,
                            case,
                            outcome: Ok(result),
                        });
                    }
                }
                Err(err) => {
                    for &dt_days in dt_list {
                        cells.push(SweepCell {
                            maturity,
                            dt_days,
                            case,
                            outcome: Err(err.to_string()),
                        });
                    }
                }
            }
        }
    }
    Ok(cells)
}
