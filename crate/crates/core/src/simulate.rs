//! Reproducible joint simulation of G2++ factors and the CIR credit spread.
//!
//! The Gaussian factors are sampled by their exact transition law jointly
//! with their time integrals, so the accumulated `int r` carries no
//! discretization bias on any grid. The CIR spread uses full-truncation
//! Euler on the grid. Every path draws from its own counter-based RNG
//! substream, which makes results bit-identical across runs and across
//! thread counts.

use std::io::{Read, Write};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::DiscountCurve;
use crate::error::{Error, Result};
use crate::math::{decay_factor, splitmix64};
use crate::models::{CirParams, CreditConfig, DefaultEvents, G2ppParams, SpreadDynamics};

/// Strictly increasing year fractions starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

/// Nodes closer than this are collapsed when building grids, and index
/// lookups match within the same tolerance.
const NODE_TOL: f64 = 1e-9;

impl TimeGrid {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::invalid("grid", "need at least two nodes"));
        }
        if nodes[0] != 0.0 {
            return Err(Error::invalid("grid", "first node must be 0"));
        }
        for w in nodes.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::invalid("grid", "nodes must strictly increase"));
            }
        }
        Ok(TimeGrid { nodes })
    }

    /// Union of `{0, horizon}` and `required`, refined so that no gap
    /// exceeds `max_step`.
    pub fn build(horizon: f64, required: &[f64], max_step: f64) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::invalid("horizon", "must be positive"));
        }
        if !(max_step > 0.0) {
            return Err(Error::invalid("max_step", "must be positive"));
        }
        let mut anchors: Vec<f64> = Vec::with_capacity(required.len() + 2);
        anchors.push(0.0);
        anchors.push(horizon);
        for &t in required {
            if t < -NODE_TOL || t > horizon + NODE_TOL {
                return Err(Error::invalid(
                    "required",
                    format!("time {t} outside [0, {horizon}]"),
                ));
            }
            anchors.push(t.clamp(0.0, horizon));
        }
        anchors.sort_by(f64::total_cmp);
        anchors.dedup_by(|a, b| (*a - *b).abs() <= NODE_TOL);

        let mut nodes = Vec::with_capacity(anchors.len());
        nodes.push(anchors[0]);
        for w in anchors.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let gap = hi - lo;
            let subs = (gap / max_step).ceil() as usize;
            for j in 1..subs {
                nodes.push(lo + gap * j as f64 / subs as f64);
            }
            nodes.push(hi);
        }
        TimeGrid::from_nodes(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Index of the node matching `t` within tolerance.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let idx = self.nodes.partition_point(|&x| x < t - NODE_TOL);
        if idx < self.nodes.len() && (self.nodes[idx] - t).abs() <= NODE_TOL {
            Some(idx)
        } else {
            None
        }
    }

    /// Resolve a list of times to node indices; every time must be a node.
    pub fn indices_of(&self, times: &[f64]) -> Result<Vec<usize>> {
        times
            .iter()
            .map(|&t| {
                self.index_of(t).ok_or_else(|| {
                    Error::invalid("times", format!("time {t} is not a grid node"))
                })
            })
            .collect()
    }
}

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McConfig {
    pub n_paths: usize,
    /// Number of repeated estimations; the spread is reported as the mean of
    /// the repeat sample.
    pub n_repeats: usize,
    pub seed: u64,
    /// Probing-grid spacing of the liquid market, in years. The default is
    /// one trading hour (eight per business day, 252 days per year).
    pub liquid_step: f64,
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_paths: 10_000,
            n_repeats: 20,
            seed: 42,
            liquid_step: 1.0 / (252.0 * 8.0),
            antithetic: false,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 1000 {
            return Err(Error::invalid("n_paths", "must be at least 1000"));
        }
        if self.n_repeats == 0 {
            return Err(Error::invalid("n_repeats", "must be at least 1"));
        }
        if !(self.liquid_step > 0.0) {
            return Err(Error::invalid("liquid_step", "must be positive"));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Model inputs shared by a scenario set.
#[derive(Debug, Clone)]
pub struct SimContext {
    pub g2: G2ppParams,
    pub cir: CirParams,
    pub curve: Arc<DiscountCurve>,
}

// --- per-step transition coefficients -------------------------------------

#[derive(Debug, Clone, Copy)]
struct StepCoefs {
    dt: f64,
    decay_x: f64,
    decay_y: f64,
    load_x: f64, // B_a(dt): loading of x on its integral
    load_y: f64,
    chol: [[f64; 4]; 4],
    cir_kdt: f64,
    cir_sdt: f64, // sigma * sqrt(dt)
}

fn cholesky4(m: [[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut l = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..=i {
            let mut sum = m[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                l[i][j] = if sum > 1e-300 { sum.sqrt() } else { 0.0 };
            } else {
                l[i][j] = if l[j][j] > 0.0 { sum / l[j][j] } else { 0.0 };
            }
        }
    }
    l
}

fn step_coefs(g2: &G2ppParams, cir: &CirParams, dt: f64) -> StepCoefs {
    let (a, b) = (g2.a, g2.b);
    let (sig, eta, rho) = (g2.sigma, g2.eta, g2.rho);
    let ba = decay_factor(a, dt);
    let bb = decay_factor(b, dt);
    let b2a = decay_factor(2.0 * a, dt);
    let b2b = decay_factor(2.0 * b, dt);
    let bab = decay_factor(a + b, dt);
    let ea = (-a * dt).exp();
    let eb = (-b * dt).exp();

    // Joint covariance of (xi_x, xi_y, zeta_x, zeta_y): the factor
    // innovations and the innovations of their integrals over one step.
    let v_xx = sig * sig * b2a;
    let v_yy = eta * eta * b2b;
    let v_xy = rho * sig * eta * bab;
    let w_xx = sig * sig / (a * a) * (dt - 2.0 * ba + b2a);
    let w_yy = eta * eta / (b * b) * (dt - 2.0 * bb + b2b);
    let w_xy = rho * sig * eta / (a * b) * (dt - ba - bb + bab);
    let c_x_zx = sig * sig / (2.0 * a * a) * (1.0 - ea) * (1.0 - ea);
    let c_y_zy = eta * eta / (2.0 * b * b) * (1.0 - eb) * (1.0 - eb);
    let c_x_zy = rho * sig * eta / b * (ba - bab);
    let c_y_zx = rho * sig * eta / a * (bb - bab);

    let cov = [
        [v_xx, v_xy, c_x_zx, c_x_zy],
        [v_xy, v_yy, c_y_zx, c_y_zy],
        [c_x_zx, c_y_zx, w_xx, w_xy],
        [c_x_zy, c_y_zy, w_xy, w_yy],
    ];

    StepCoefs {
        dt,
        decay_x: ea,
        decay_y: eb,
        load_x: ba,
        load_y: bb,
        chol: cholesky4(cov),
        cir_kdt: cir.kappa * dt,
        cir_sdt: cir.sigma * dt.sqrt(),
    }
}

// --- per-path generation ---------------------------------------------------

/// Borrowed view of one simulated path.
#[derive(Debug, Clone, Copy)]
pub struct PathSlice<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
    /// Truncated CIR spread, nonnegative.
    pub s: &'a [f64],
    /// `int_0^{t_k} r du`.
    pub int_r: &'a [f64],
    /// `int_0^{t_k} s du` (trapezoid).
    pub int_s: &'a [f64],
    /// Grid node of the default time, when one was sampled.
    pub tau: Option<usize>,
}

/// Owned scratch arrays for one path.
#[derive(Debug, Clone, Default)]
pub struct PathBuffer {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub int_r: Vec<f64>,
    pub int_s: Vec<f64>,
    pub tau: Option<usize>,
}

impl PathBuffer {
    pub fn with_len(n: usize) -> Self {
        PathBuffer {
            x: vec![0.0; n],
            y: vec![0.0; n],
            s: vec![0.0; n],
            int_r: vec![0.0; n],
            int_s: vec![0.0; n],
            tau: None,
        }
    }

    pub fn as_slice(&self) -> PathSlice<'_> {
        PathSlice {
            x: &self.x,
            y: &self.y,
            s: &self.s,
            int_r: &self.int_r,
            int_s: &self.int_s,
            tau: self.tau,
        }
    }
}

/// Path generator bound to a grid: precomputed transition coefficients, the
/// deterministic rate integral, and the RNG key.
pub(crate) struct PathEngine {
    grid: Arc<TimeGrid>,
    steps: Vec<StepCoefs>,
    /// `-ln P(0,t_k) + V(0,t_k)/2` per node.
    int_phi: Vec<f64>,
    /// Deterministic spread integral along the CIR mean path, per node.
    pub(crate) det_int_s: Vec<f64>,
    s0: f64,
    cir_theta: f64,
    key: [u8; 32],
    antithetic: bool,
}

fn chacha_key(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

impl PathEngine {
    pub(crate) fn new(
        g2: &G2ppParams,
        cir: &CirParams,
        curve: &DiscountCurve,
        grid: Arc<TimeGrid>,
        seed: u64,
        antithetic: bool,
    ) -> Result<Self> {
        g2.validate()?;
        cir.validate()?;
        if grid.horizon() > curve.max_time() + NODE_TOL {
            return Err(Error::Extrapolation {
                t: grid.horizon(),
                max_t: curve.max_time(),
            });
        }
        let nodes = grid.nodes();
        let steps: Vec<StepCoefs> = nodes
            .windows(2)
            .map(|w| step_coefs(g2, cir, w[1] - w[0]))
            .collect();
        let mut int_phi = Vec::with_capacity(nodes.len());
        let mut det_int_s = Vec::with_capacity(nodes.len());
        for &t in nodes {
            int_phi.push(-curve.ln_discount(t)? + 0.5 * g2.v_integral(t));
            det_int_s.push(cir.mean_integral(t));
        }
        Ok(PathEngine {
            grid,
            steps,
            int_phi,
            det_int_s,
            s0: cir.s0,
            cir_theta: cir.theta,
            key: chacha_key(seed),
            antithetic,
        })
    }

    fn noise_rng(&self, path: usize) -> (ChaCha8Rng, f64) {
        let (stream_path, sign) = if self.antithetic {
            (path / 2, if path % 2 == 1 { -1.0 } else { 1.0 })
        } else {
            (path, 1.0)
        };
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(2 * stream_path as u64);
        (rng, sign)
    }

    /// Exp(1) draw of the path's default clock, from a dedicated substream.
    pub(crate) fn default_exponential(&self, path: usize) -> f64 {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(2 * path as u64 + 1);
        Exp1.sample(&mut rng)
    }

    /// Fill the buffer with path `path`. Draw order per step is fixed:
    /// four factor normals, then the CIR normal.
    pub(crate) fn fill_path(&self, path: usize, buf: &mut PathBuffer) -> Result<()> {
        let n = self.grid.len();
        buf.x.resize(n, 0.0);
        buf.y.resize(n, 0.0);
        buf.s.resize(n, 0.0);
        buf.int_r.resize(n, 0.0);
        buf.int_s.resize(n, 0.0);
        buf.tau = None;

        let (mut rng, sign) = self.noise_rng(path);
        let (mut x, mut y) = (0.0f64, 0.0f64);
        let mut int_xy = 0.0f64;
        let mut cir_raw = self.s0;
        let mut int_s = 0.0f64;

        buf.x[0] = 0.0;
        buf.y[0] = 0.0;
        buf.s[0] = self.s0;
        buf.int_r[0] = 0.0;
        buf.int_s[0] = 0.0;

        for (k, c) in self.steps.iter().enumerate() {
            let z0: f64 = StandardNormal.sample(&mut rng);
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            let z3: f64 = StandardNormal.sample(&mut rng);
            let zc: f64 = StandardNormal.sample(&mut rng);
            let (z0, z1, z2, z3, zc) = (sign * z0, sign * z1, sign * z2, sign * z3, sign * zc);

            let l = &c.chol;
            let e_x = l[0][0] * z0;
            let e_y = l[1][0] * z0 + l[1][1] * z1;
            let e_ix = l[2][0] * z0 + l[2][1] * z1 + l[2][2] * z2;
            let e_iy = l[3][0] * z0 + l[3][1] * z1 + l[3][2] * z2 + l[3][3] * z3;

            int_xy += x * c.load_x + y * c.load_y + e_ix + e_iy;
            x = x * c.decay_x + e_x;
            y = y * c.decay_y + e_y;

            let s_plus = cir_raw.max(0.0);
            cir_raw += c.cir_kdt * (self.cir_theta - s_plus) + c.cir_sdt * s_plus.sqrt() * zc;
            let s_next = cir_raw.max(0.0);
            int_s += 0.5 * (s_plus + s_next) * c.dt;

            buf.x[k + 1] = x;
            buf.y[k + 1] = y;
            buf.s[k + 1] = s_next;
            buf.int_r[k + 1] = int_xy + self.int_phi[k + 1];
            buf.int_s[k + 1] = int_s;
        }

        if !(x.is_finite() && y.is_finite() && int_xy.is_finite() && cir_raw.is_finite()) {
            return Err(Error::Simulation { path });
        }
        Ok(())
    }
}

/// First node index at which a nondecreasing accumulator reaches the
/// threshold.
pub(crate) fn first_crossing(values: &[f64], threshold: f64) -> Option<usize> {
    let idx = values.partition_point(|&v| v < threshold);
    if idx < values.len() {
        Some(idx)
    } else {
        None
    }
}

/// Default node for one path under the configured spread dynamics; `None` in
/// NO-DEFAULTS mode or when the intensity never accumulates to the draw.
pub(crate) fn default_node(
    cfg: &CreditConfig,
    int_s: &[f64],
    det_int_s: &[f64],
    exp_draw: f64,
) -> Option<usize> {
    if cfg.defaults == DefaultEvents::Off {
        return None;
    }
    let threshold = exp_draw * cfg.lgd_for_intensity();
    match cfg.spread {
        SpreadDynamics::Stochastic => first_crossing(int_s, threshold),
        SpreadDynamics::Deterministic => first_crossing(det_int_s, threshold),
    }
}

/// Simulated factor paths with integrated accumulators on a shared grid.
#[derive(Debug, Clone)]
pub struct ScenarioSet {
    ctx: SimContext,
    grid: Arc<TimeGrid>,
    pub n_paths: usize,
    pub seed: u64,
    pub antithetic: bool,
    /// Whether default times have been sampled onto the set.
    defaults_sampled: bool,
    x: Vec<f64>,
    y: Vec<f64>,
    s: Vec<f64>,
    int_r: Vec<f64>,
    int_s: Vec<f64>,
    tau: Vec<Option<u32>>,
}

impl ScenarioSet {
    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn context(&self) -> &SimContext {
        &self.ctx
    }

    pub fn n_nodes(&self) -> usize {
        self.grid.len()
    }

    pub fn path(&self, i: usize) -> PathSlice<'_> {
        let n = self.n_nodes();
        let range = i * n..(i + 1) * n;
        PathSlice {
            x: &self.x[range.clone()],
            y: &self.y[range.clone()],
            s: &self.s[range.clone()],
            int_r: &self.int_r[range.clone()],
            int_s: &self.int_s[range],
            tau: self.tau[i].map(|k| k as usize),
        }
    }

    /// Integrated default intensity `int lambda = int s / lgd` at a node.
    pub fn int_lambda(&self, path: usize, node: usize, cfg: &CreditConfig) -> f64 {
        self.path(path).int_s[node] / cfg.lgd_for_intensity()
    }

    /// Default time in years, when a default was sampled.
    pub fn tau_time(&self, path: usize) -> Option<f64> {
        self.tau[path].map(|k| self.grid.nodes()[k as usize])
    }

    /// True once `sample_defaults` has populated default times.
    pub fn defaults_sampled(&self) -> bool {
        self.defaults_sampled
    }
}

/// Generate a scenario set. Deterministic in `(seed, grid, n_paths)`
/// regardless of the number of worker threads.
pub fn simulate(
    g2: &G2ppParams,
    cir: &CirParams,
    curve: &Arc<DiscountCurve>,
    grid: &Arc<TimeGrid>,
    mc: &McConfig,
) -> Result<ScenarioSet> {
    mc.validate()?;
    let engine = PathEngine::new(g2, cir, curve, Arc::clone(grid), mc.seed, mc.antithetic)?;
    let n = grid.len();
    let n_paths = mc.n_paths;

    let mut x = vec![0.0; n_paths * n];
    let mut y = vec![0.0; n_paths * n];
    let mut s = vec![0.0; n_paths * n];
    let mut int_r = vec![0.0; n_paths * n];
    let mut int_s = vec![0.0; n_paths * n];

    let failures: Vec<usize> = x
        .par_chunks_mut(n)
        .zip(y.par_chunks_mut(n))
        .zip(s.par_chunks_mut(n))
        .zip(int_r.par_chunks_mut(n))
        .zip(int_s.par_chunks_mut(n))
        .enumerate()
        .map_init(
            || PathBuffer::with_len(n),
            |buf, (i, ((((cx, cy), cs), cir_), cis))| {
                if engine.fill_path(i, buf).is_err() {
                    return Some(i);
                }
                cx.copy_from_slice(&buf.x);
                cy.copy_from_slice(&buf.y);
                cs.copy_from_slice(&buf.s);
                cir_.copy_from_slice(&buf.int_r);
                cis.copy_from_slice(&buf.int_s);
                None
            },
        )
        .flatten()
        .collect();
    if let Some(&path) = failures.first() {
        return Err(Error::Simulation { path });
    }

    Ok(ScenarioSet {
        ctx: SimContext {
            g2: *g2,
            cir: *cir,
            curve: Arc::clone(curve),
        },
        grid: Arc::clone(grid),
        n_paths,
        seed: mc.seed,
        antithetic: mc.antithetic,
        defaults_sampled: false,
        x,
        y,
        s,
        int_r,
        int_s,
        tau: vec![None; n_paths],
    })
}

/// Fill default times from the Cox process implied by the credit
/// configuration: one Exp(1) draw per path against the integrated intensity.
/// NO-DEFAULTS modes leave every path alive by contract.
pub fn sample_defaults(mut scn: ScenarioSet, cfg: &CreditConfig) -> Result<ScenarioSet> {
    cfg.validate()?;
    if cfg.defaults == DefaultEvents::Off {
        scn.tau = vec![None; scn.n_paths];
        scn.defaults_sampled = false;
        return Ok(scn);
    }
    let engine = PathEngine::new(
        &scn.ctx.g2,
        &scn.ctx.cir,
        &scn.ctx.curve,
        Arc::clone(&scn.grid),
        scn.seed,
        scn.antithetic,
    )?;
    let n = scn.n_nodes();
    let tau: Vec<Option<u32>> = (0..scn.n_paths)
        .map(|i| {
            let draw = engine.default_exponential(i);
            let int_s = &scn.int_s[i * n..(i + 1) * n];
            default_node(cfg, int_s, &engine.det_int_s, draw).map(|k| k as u32)
        })
        .collect();
    scn.tau = tau;
    scn.defaults_sampled = true;
    Ok(scn)
}

/// Stream paths without materializing a scenario set: applies `f` to each
/// path (in parallel) and returns the per-path results in path order.
///
/// When `cfg` is given, the default time is sampled and exposed on the
/// slice; otherwise `tau` is `None`.
pub fn map_paths<T, F>(
    g2: &G2ppParams,
    cir: &CirParams,
    curve: &Arc<DiscountCurve>,
    grid: &Arc<TimeGrid>,
    mc: &McConfig,
    cfg: Option<&CreditConfig>,
    f: F,
) -> Result<Vec<T>>
where
    T: Send + Default + Clone,
    F: Fn(usize, PathSlice<'_>) -> T + Sync,
{
    mc.validate()?;
    let engine = PathEngine::new(g2, cir, curve, Arc::clone(grid), mc.seed, mc.antithetic)?;
    let n = grid.len();
    let mut out: Vec<T> = vec![T::default(); mc.n_paths];
    let results: Result<Vec<()>> = out
        .par_iter_mut()
        .enumerate()
        .map_init(
            || PathBuffer::with_len(n),
            |buf, (i, slot)| -> Result<()> {
                engine.fill_path(i, buf)?;
                buf.tau = cfg.and_then(|c| {
                    default_node(c, &buf.int_s, &engine.det_int_s, engine.default_exponential(i))
                });
                *slot = f(i, buf.as_slice());
                Ok(())
            },
        )
        .collect();
    results?;
    Ok(out)
}

// --- binary dump ------------------------------------------------------------

const DUMP_MAGIC: &[u8; 4] = b"BLSC";
const DUMP_VERSION: u32 = 1;

impl ScenarioSet {
    /// Versioned binary dump: header (seed, paths, grid) plus row-major
    /// arrays. Model parameters are not serialized; supply them on load.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&[self.antithetic as u8, self.defaults_sampled as u8])?;
        w.write_all(&(self.n_paths as u64).to_le_bytes())?;
        w.write_all(&(self.n_nodes() as u64).to_le_bytes())?;
        let write_f64s = |w: &mut W, data: &[f64]| -> Result<()> {
            for &v in data {
                w.write_all(&v.to_le_bytes())?;
            }
            Ok(())
        };
        write_f64s(&mut w, self.grid.nodes())?;
        write_f64s(&mut w, &self.x)?;
        write_f64s(&mut w, &self.y)?;
        write_f64s(&mut w, &self.s)?;
        write_f64s(&mut w, &self.int_r)?;
        write_f64s(&mut w, &self.int_s)?;
        for t in &self.tau {
            let v: u64 = t.map_or(u64::MAX, |k| k as u64);
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R, ctx: SimContext) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(Error::Data("scenario dump: bad magic".to_string()));
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        let version = u32::from_le_bytes(u32buf);
        if version != DUMP_VERSION {
            return Err(Error::Data(format!(
                "scenario dump: unsupported version {version}"
            )));
        }
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let seed = u64::from_le_bytes(u64buf);
        let mut flags = [0u8; 2];
        r.read_exact(&mut flags)?;
        let antithetic = flags[0] != 0;
        let defaults_sampled = flags[1] != 0;
        r.read_exact(&mut u64buf)?;
        let n_paths = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut u64buf)?;
        let n_nodes = u64::from_le_bytes(u64buf) as usize;

        let read_f64s = |r: &mut R, len: usize| -> Result<Vec<f64>> {
            let mut out = vec![0.0; len];
            let mut buf = [0u8; 8];
            for slot in out.iter_mut() {
                r.read_exact(&mut buf)?;
                *slot = f64::from_le_bytes(buf);
            }
            Ok(out)
        };
        let nodes = read_f64s(&mut r, n_nodes)?;
        let total = n_paths * n_nodes;
        let x = read_f64s(&mut r, total)?;
        let y = read_f64s(&mut r, total)?;
        let s = read_f64s(&mut r, total)?;
        let int_r = read_f64s(&mut r, total)?;
        let int_s = read_f64s(&mut r, total)?;
        let mut tau = Vec::with_capacity(n_paths);
        let mut buf = [0u8; 8];
        for _ in 0..n_paths {
            r.read_exact(&mut buf)?;
            let v = u64::from_le_bytes(buf);
            tau.push(if v == u64::MAX { None } else { Some(v as u32) });
        }
        Ok(ScenarioSet {
            ctx,
            grid: Arc::new(TimeGrid::from_nodes(nodes)?),
            n_paths,
            seed,
            antithetic,
            defaults_sampled,
            x,
            y,
            s,
            int_r,
            int_s,
            tau,
        })
    }
}
