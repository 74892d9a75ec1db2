//! Closed-form affine bond pricing under the two-factor Gaussian short-rate
//! model (G2++) and the CIR credit-spread model.
//!
//! Notation for the G2++ conditional bond price:
//!
//! ```text
//! P(t,T | x,y) = [P(0,T)/P(0,t)] * exp( 0.5 [V(t,T) - V(0,T) + V(0,t)]
//!                                       - B_a(t,T) x - B_b(t,T) y )
//! B_k(t,T) = (1 - e^{-k (T-t)}) / k
//! ```
//!
//! with `V` the variance of the integrated factors. The deterministic shift
//! of the model is never materialized: the curve-ratio form absorbs it and
//! makes the fit to the input curve exact.

use serde::{Deserialize, Serialize};

use crate::curves::DiscountCurve;
use crate::error::{Error, Result};
use crate::math::decay_factor;

/// G2++ parameters: mean reversions `a`, `b`, volatilities `sigma`, `eta`,
/// factor correlation `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2ppParams {
    pub a: f64,
    pub sigma: f64,
    pub b: f64,
    pub eta: f64,
    pub rho: f64,
}

impl G2ppParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) || !(self.b > 0.0) {
            return Err(Error::invalid("a/b", "mean reversions must be positive"));
        }
        if self.sigma < 0.0 || self.eta < 0.0 {
            return Err(Error::invalid("sigma/eta", "volatilities must be nonnegative"));
        }
        if self.rho.abs() > 1.0 {
            return Err(Error::invalid("rho", "correlation must lie in [-1, 1]"));
        }
        Ok(())
    }

    /// Variance of the integrated factor sum over `[t, t+tau]`:
    /// `Var(int (x+y) du)`, a function of the window length only.
    pub fn v_integral(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        let (a, b) = (self.a, self.b);
        let ba = decay_factor(a, tau);
        let bb = decay_factor(b, tau);
        let b2a = decay_factor(2.0 * a, tau);
        let b2b = decay_factor(2.0 * b, tau);
        let bab = decay_factor(a + b, tau);
        let term_x = self.sigma * self.sigma / (a * a) * (tau - 2.0 * ba + b2a);
        let term_y = self.eta * self.eta / (b * b) * (tau - 2.0 * bb + b2b);
        let cross =
            2.0 * self.rho * self.sigma * self.eta / (a * b) * (tau - ba - bb + bab);
        term_x + term_y + cross
    }
}

/// Log of the state-independent part of the G2++ bond price, plus the two
/// factor loadings. `ln P(t,T|x,y) = k - ba*x - bb*y`.
pub(crate) fn g2pp_log_coeffs(
    g2: &G2ppParams,
    curve: &DiscountCurve,
    t: f64,
    maturity: f64,
) -> Result<(f64, f64, f64)> {
    if maturity < t {
        return Err(Error::TimeOrder {
            t,
            horizon: maturity,
        });
    }
    let tau = maturity - t;
    let k = curve.ln_discount(maturity)? - curve.ln_discount(t)?
        + 0.5 * (g2.v_integral(tau) - g2.v_integral(maturity) + g2.v_integral(t));
    Ok((k, decay_factor(g2.a, tau), decay_factor(g2.b, tau)))
}

/// G2++ zero-coupon bond price `P(t,T | x,y)`.
pub fn g2pp_zcb(
    g2: &G2ppParams,
    curve: &DiscountCurve,
    t: f64,
    maturity: f64,
    x: f64,
    y: f64,
) -> Result<f64> {
    let (k, ba, bb) = g2pp_log_coeffs(g2, curve, t, maturity)?;
    Ok((k - ba * x - bb * y).exp())
}

/// CIR credit-spread parameters. The spread is the LGD-rescaled default
/// intensity `s = lambda * LGD`; published tables label the initial value
/// `r0`, read here as the initial spread `s0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirParams {
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    #[serde(alias = "r0")]
    pub s0: f64,
}

impl CirParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) || !(self.theta > 0.0) {
            return Err(Error::invalid("kappa/theta", "must be positive"));
        }
        if self.sigma < 0.0 {
            return Err(Error::invalid("sigma", "must be nonnegative"));
        }
        if self.s0 < 0.0 {
            return Err(Error::invalid("s0", "initial spread must be nonnegative"));
        }
        Ok(())
    }

    /// `(ln A(tau), B(tau))` of the affine transform
    /// `E[e^{-int s}] = A e^{-B s}`.
    pub fn affine_coeffs(&self, tau: f64) -> (f64, f64) {
        if tau <= 0.0 {
            return (0.0, 0.0);
        }
        let (kappa, sigma) = (self.kappa, self.sigma);
        if sigma == 0.0 {
            // sigma -> 0 limit: deterministic mean reversion conditional on s.
            let b = decay_factor(kappa, tau);
            let ln_a = -self.theta * (tau - b);
            return (ln_a, b);
        }
        let h = (kappa * kappa + 2.0 * sigma * sigma).sqrt();
        let e = (h * tau).exp_m1();
        let denom = 2.0 * h + (kappa + h) * e;
        let b = 2.0 * e / denom;
        let ln_a = (2.0 * kappa * self.theta / (sigma * sigma))
            * ((2.0 * h).ln() + 0.5 * (kappa + h) * tau - denom.ln());
        (ln_a, b)
    }

    /// Mean path `s̄(t) = theta + (s0 - theta) e^{-kappa t}`.
    pub fn mean_path(&self, t: f64) -> f64 {
        self.theta + (self.s0 - self.theta) * (-self.kappa * t).exp()
    }

    /// `int_0^t s̄(u) du` along the mean path.
    pub fn mean_integral(&self, t: f64) -> f64 {
        self.theta * t + (self.s0 - self.theta) * decay_factor(self.kappa, t)
    }
}

/// Survival-discount factor `E[e^{-int_t^T s du} | s_t = s]` under CIR.
pub fn cir_zcb(cir: &CirParams, t: f64, maturity: f64, s: f64) -> Result<f64> {
    if maturity < t {
        return Err(Error::TimeOrder {
            t,
            horizon: maturity,
        });
    }
    let (ln_a, b) = cir.affine_coeffs(maturity - t);
    Ok((ln_a - b * s).exp())
}

/// Feller margin `2 kappa theta - sigma^2`; positive means the origin is
/// unattainable for the spread process.
pub fn feller_margin(cir: &CirParams) -> f64 {
    2.0 * cir.kappa * cir.theta - cir.sigma * cir.sigma
}

/// Credit-spread dynamics entering bond prices and default intensities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadDynamics {
    /// Spread follows the deterministic CIR mean path.
    Deterministic,
    /// Spread follows the simulated CIR process.
    Stochastic,
}

/// Whether default events are simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefaultEvents {
    Off,
    On,
}

/// Credit configuration: recovery, spread dynamics, and default handling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CreditConfig {
    /// Recovery rate on the pre-default market value, in [0, 1).
    pub recovery_rate: f64,
    pub spread: SpreadDynamics,
    pub defaults: DefaultEvents,
    /// When false, the credit spread is excluded from bond prices while the
    /// default intensity keeps running. Diagnostic switch used to isolate
    /// default-truncation effects; leave true for pricing.
    #[serde(default = "default_true")]
    pub spread_in_pricing: bool,
    /// Overrides the LGD used to rescale the spread into an intensity
    /// (`lambda = s / lgd`). Defaults to `1 - recovery_rate`.
    #[serde(default)]
    pub intensity_lgd: Option<f64>,
}

fn default_true() -> bool {
    true
}

impl CreditConfig {
    pub fn new(recovery_rate: f64, spread: SpreadDynamics, defaults: DefaultEvents) -> Self {
        CreditConfig {
            recovery_rate,
            spread,
            defaults,
            spread_in_pricing: true,
            intensity_lgd: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.recovery_rate) {
            return Err(Error::invalid("recovery_rate", "must lie in [0, 1)"));
        }
        if let Some(lgd) = self.intensity_lgd {
            if !(lgd > 0.0) {
                return Err(Error::invalid("intensity_lgd", "must be positive"));
            }
        }
        Ok(())
    }

    /// Loss given default, the complement of the recovery rate.
    pub fn lgd(&self) -> f64 {
        1.0 - self.recovery_rate
    }

    /// LGD used for the intensity rescaling `lambda = s / lgd`.
    pub fn lgd_for_intensity(&self) -> f64 {
        self.intensity_lgd.unwrap_or_else(|| self.lgd())
    }
}

/// A dated liquidity-adjusted defaultable zero-coupon price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskyZcQuote {
    pub t: f64,
    pub maturity: f64,
    pub value: f64,
}

impl RiskyZcQuote {
    /// Evaluate the closed form at a factor state and wrap it with its dates.
    #[allow(clippy::too_many_arguments)]
    pub fn evaluate(
        g2: &G2ppParams,
        cir: &CirParams,
        curve: &DiscountCurve,
        cfg: &CreditConfig,
        gamma: f64,
        t: f64,
        maturity: f64,
        x: f64,
        y: f64,
        s: f64,
    ) -> Result<Self> {
        Ok(RiskyZcQuote {
            t,
            maturity,
            value: risky_zcb(g2, cir, curve, cfg, gamma, t, maturity, x, y, s)?,
        })
    }
}

/// Liquidity-adjusted defaultable zero-coupon bond price
/// `e^{-gamma (T-t)} P(t,T|x,y) * spread factor`.
///
/// In stochastic-spread mode the spread factor is the CIR affine transform at
/// the current spread `s`; in deterministic mode it is the integral of the
/// CIR mean path over `[t, T]`.
#[allow(clippy::too_many_arguments)]
pub fn risky_zcb(
    g2: &G2ppParams,
    cir: &CirParams,
    curve: &DiscountCurve,
    cfg: &CreditConfig,
    gamma: f64,
    t: f64,
    maturity: f64,
    x: f64,
    y: f64,
    s: f64,
) -> Result<f64> {
    let rate_part = g2pp_zcb(g2, curve, t, maturity, x, y)?;
    let spread_part = if !cfg.spread_in_pricing {
        1.0
    } else {
        match cfg.spread {
            SpreadDynamics::Stochastic => cir_zcb(cir, t, maturity, s)?,
            SpreadDynamics::Deterministic => {
                (-(cir.mean_integral(maturity) - cir.mean_integral(t))).exp()
            }
        }
    };
    Ok((-gamma * (maturity - t)).exp() * rate_part * spread_part)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refdata::{bund_curve, cir_bb, cir_bbb, cir_italy, g2pp_section3, section3_curve};

    #[test]
    fn g2pp_price_at_maturity_is_one() {
        let curve = bund_curve();
        let p = g2pp_zcb(&g2pp_section3(), &curve, 3.0, 3.0, 0.01, -0.02).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn g2pp_fits_input_curve_exactly() {
        let g2 = g2pp_section3();
        for curve in [bund_curve(), section3_curve()] {
            for (t, df) in curve.pillars() {
                let p = g2pp_zcb(&g2, &curve, 0.0, t, 0.0, 0.0).unwrap();
                assert!((p - df).abs() < 1e-12, "t = {t}");
            }
        }
    }

    /// Independent route: assemble the bond price from quadrature of the
    /// variance integrand and of the deterministic-shift variance terms.
    #[test]
    fn g2pp_against_quadrature_oracle() {
        let g2 = g2pp_section3();
        let curve = bund_curve();
        let (t, maturity, x, y) = (1.0, 5.0, 0.01, -0.005);

        // 64-point Gauss-Legendre on [lo, hi].
        let gauss = |f: &dyn Fn(f64) -> f64, lo: f64, hi: f64| -> f64 {
            let n = 64;
            let mut sum = 0.0;
            // Nodes of the Legendre polynomial via Newton from Chebyshev guesses.
            for i in 0..n {
                let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut p_deriv;
                let mut iter = 0;
                loop {
                    let (mut p0, mut p1) = (1.0, 0.0);
                    for j in 0..n {
                        let p2 = p1;
                        p1 = p0;
                        p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
                    }
                    p_deriv = n as f64 * (z * p0 - p1) / (z * z - 1.0);
                    let dz = p0 / p_deriv;
                    z -= dz;
                    iter += 1;
                    if dz.abs() < 1e-15 || iter > 100 {
                        break;
                    }
                }
                let w = 2.0 / ((1.0 - z * z) * p_deriv * p_deriv);
                let u = 0.5 * (hi - lo) * z + 0.5 * (hi + lo);
                sum += w * f(u);
            }
            0.5 * (hi - lo) * sum
        };

        // V(t,T) = int_t^T [sigma B_a(T-u)]^2 + [eta B_b(T-u)]^2
        //        + 2 rho sigma eta B_a B_b du
        let v_quad = gauss(
            &|u: f64| {
                let ba = decay_factor(g2.a, maturity - u);
                let bb = decay_factor(g2.b, maturity - u);
                g2.sigma * g2.sigma * ba * ba
                    + g2.eta * g2.eta * bb * bb
                    + 2.0 * g2.rho * g2.sigma * g2.eta * ba * bb
            },
            t,
            maturity,
        );
        // int_t^T phi(u) du with the forward part taken exactly from the
        // curve logs and the variance part integrated numerically.
        let phi_var = gauss(
            &|u: f64| {
                let ca = 1.0 - (-g2.a * u).exp();
                let cb = 1.0 - (-g2.b * u).exp();
                g2.sigma * g2.sigma / (2.0 * g2.a * g2.a) * ca * ca
                    + g2.eta * g2.eta / (2.0 * g2.b * g2.b) * cb * cb
                    + g2.rho * g2.sigma * g2.eta / (g2.a * g2.b) * ca * cb
            },
            t,
            maturity,
        );
        let int_phi =
            curve.ln_discount(t).unwrap() - curve.ln_discount(maturity).unwrap() + phi_var;
        let ba = decay_factor(g2.a, maturity - t);
        let bb = decay_factor(g2.b, maturity - t);
        let oracle = (-x * ba - y * bb - int_phi + 0.5 * v_quad).exp();

        let price = g2pp_zcb(&g2, &curve, t, maturity, x, y).unwrap();
        assert!(
            (price - oracle).abs() < 1e-10,
            "price {price} vs oracle {oracle}"
        );
    }

    #[test]
    fn cir_price_at_maturity_is_one() {
        let p = cir_zcb(&cir_bb(), 2.0, 2.0, 0.03).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn cir_small_sigma_matches_deterministic_integral() {
        let mut cir = cir_bb();
        cir.sigma = 1e-5;
        let (t, maturity, s) = (0.0, 4.0, 0.01);
        let price = cir_zcb(&cir, t, maturity, s).unwrap();
        // Deterministic limit conditional on s_t = s.
        let tau = maturity - t;
        let b = decay_factor(cir.kappa, tau);
        let oracle = (-(cir.theta * (tau - b) + s * b)).exp();
        assert!((price - oracle).abs() < 1e-6);
    }

    #[test]
    fn cir_decreasing_in_spread_and_maturity() {
        let cir = cir_italy();
        let p1 = cir_zcb(&cir, 0.0, 3.0, 0.001).unwrap();
        let p2 = cir_zcb(&cir, 0.0, 3.0, 0.01).unwrap();
        let p3 = cir_zcb(&cir, 0.0, 5.0, 0.001).unwrap();
        assert!(p2 < p1);
        assert!(p3 < p1);
    }

    #[test]
    fn feller_margins_of_published_parameter_sets() {
        assert!((feller_margin(&cir_bb()) - 0.0041).abs() < 5e-4);
        assert!((feller_margin(&cir_bbb()) - 0.0076).abs() < 5e-4);
        let unit = CirParams {
            kappa: 1.0,
            theta: 1.0,
            sigma: 1.0,
            s0: 0.0,
        };
        assert_eq!(feller_margin(&unit), 1.0);
    }

    #[test]
    fn risky_zcb_gamma_scaling() {
        let g2 = g2pp_section3();
        let cir = cir_bb();
        let curve = section3_curve();
        let cfg = CreditConfig::new(0.4, SpreadDynamics::Stochastic, DefaultEvents::On);
        let base = risky_zcb(&g2, &cir, &curve, &cfg, 0.0, 1.0, 2.0, 0.004, -0.002, 0.01).unwrap();
        let bumped =
            risky_zcb(&g2, &cir, &curve, &cfg, 0.01, 1.0, 2.0, 0.004, -0.002, 0.01).unwrap();
        assert!((bumped - base * (-0.01f64).exp()).abs() < 1e-15);

        // Monotone decreasing over a gamma grid.
        let mut prev = f64::INFINITY;
        for k in 0..10 {
            let gamma = k as f64 * 0.005;
            let p =
                risky_zcb(&g2, &cir, &curve, &cfg, gamma, 1.0, 2.0, 0.004, -0.002, 0.01).unwrap();
            assert!(p < prev);
            prev = p;
        }
    }

    #[test]
    fn risky_quote_wraps_the_closed_form() {
        let g2 = g2pp_section3();
        let cir = cir_bb();
        let curve = section3_curve();
        let cfg = CreditConfig::new(0.4, SpreadDynamics::Stochastic, DefaultEvents::On);
        let q = RiskyZcQuote::evaluate(&g2, &cir, &curve, &cfg, 0.01, 1.0, 4.0, 0.0, 0.0, 0.01)
            .unwrap();
        assert_eq!(q.t, 1.0);
        assert_eq!(q.maturity, 4.0);
        assert!(q.value > 0.0 && q.value <= 1.0);
    }

    #[test]
    fn risky_zcb_log_additivity() {
        let g2 = g2pp_section3();
        let cir = cir_bb();
        let curve = section3_curve();
        let cfg = CreditConfig::new(0.4, SpreadDynamics::Stochastic, DefaultEvents::On);
        let (gamma, t, maturity, x, y, s) = (0.013, 0.7, 4.2, 0.006, -0.004, 0.018);
        let combined =
            risky_zcb(&g2, &cir, &curve, &cfg, gamma, t, maturity, x, y, s).unwrap();
        let lhs = combined.ln();
        let rhs = -gamma * (maturity - t)
            + g2pp_zcb(&g2, &curve, t, maturity, x, y).unwrap().ln()
            + cir_zcb(&cir, t, maturity, s).unwrap().ln();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn prices_stay_in_unit_interval_for_nonnegative_states() {
        let g2 = g2pp_section3();
        let cir = cir_bb();
        let curve = bund_curve();
        let cfg = CreditConfig::new(0.4, SpreadDynamics::Stochastic, DefaultEvents::On);
        for &t in &[0.0, 1.0, 5.0] {
            for &tau in &[0.5, 2.0, 10.0] {
                for &x in &[0.0, 0.01, 0.05] {
                    for &s in &[0.0, 0.01, 0.1] {
                        let p = risky_zcb(
                            &g2, &cir, &curve, &cfg, 0.002, t, t + tau, x, 0.5 * x, s,
                        )
                        .unwrap();
                        assert!(p > 0.0 && p <= 1.0, "p = {p}");
                    }
                }
            }
        }
    }

    #[test]
    fn deterministic_mode_uses_mean_path_integral() {
        let g2 = g2pp_section3();
        let cir = cir_bb();
        let curve = section3_curve();
        let cfg = CreditConfig::new(0.4, SpreadDynamics::Deterministic, DefaultEvents::Off);
        let p = risky_zcb(&g2, &cir, &curve, &cfg, 0.0, 0.0, 3.0, 0.0, 0.0, 99.0).unwrap();
        // The simulated spread argument must be ignored.
        let expected =
            g2pp_zcb(&g2, &curve, 0.0, 3.0, 0.0, 0.0).unwrap() * (-cir.mean_integral(3.0)).exp();
        assert!((p - expected).abs() < 1e-15);
    }

    #[test]
    fn time_ordering_is_enforced() {
        let curve = bund_curve();
        assert!(g2pp_zcb(&g2pp_section3(), &curve, 2.0, 1.0, 0.0, 0.0).is_err());
        assert!(cir_zcb(&cir_bb(), 2.0, 1.0, 0.0).is_err());
    }
}
