//! Small numerical utilities shared across the crate: compensated summation,
//! bracketed root finding, Nelder-Mead, and seed derivation.

use crate::error::{Error, Result};

/// Neumaier-compensated sum over a slice, in slice order.
///
/// Summation order is fixed so that results do not depend on how work was
/// scheduled upstream.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sample mean and standard error of the mean.
///
/// A sample of bit-identical values reports exactly zero error, without the
/// rounding noise a naive mean subtraction would introduce.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    if values.windows(2).all(|w| w[0] == w[1]) {
        return (values[0], 0.0);
    }
    let mean = compensated_sum(values) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let mut sq = Vec::with_capacity(n);
    for &v in values {
        let d = v - mean;
        sq.push(d * d);
    }
    let var = compensated_sum(&sq) / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Sample mean and sample standard deviation (n-1 denominator).
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let (mean, se) = mean_and_se(values);
    (mean, se * (values.len() as f64).sqrt())
}

/// Population standard deviation (n denominator).
pub fn population_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    let mean = compensated_sum(values) / n as f64;
    let mut sq = Vec::with_capacity(n);
    for &v in values {
        let d = v - mean;
        sq.push(d * d);
    }
    (compensated_sum(&sq) / n as f64).sqrt()
}

/// `(1 - e^{-k tau}) / k`, stable for small `k`.
pub fn decay_factor(k: f64, tau: f64) -> f64 {
    if k.abs() < 1e-14 {
        tau
    } else {
        -(-k * tau).exp_m1() / k
    }
}

/// Safeguarded Newton iteration inside a bracket, falling back to bisection
/// whenever the Newton step leaves the bracket or the derivative degenerates.
///
/// `f` must have opposite signs at `lo` and `hi`. Converges on
/// `|f| <= f_tol` or when the bracket shrinks below `x_tol`.
#[allow(clippy::too_many_arguments)]
pub fn solve_bracketed<F, D>(
    what: &str,
    f: F,
    df: D,
    lo: f64,
    hi: f64,
    x0: f64,
    f_tol: f64,
    x_tol: f64,
    max_iter: usize,
) -> Result<RootResult>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    if f_lo.abs() <= f_tol {
        return Ok(RootResult {
            root: lo,
            residual: f_lo,
            iterations: 0,
        });
    }
    let f_hi = f(hi);
    if f_hi.abs() <= f_tol {
        return Ok(RootResult {
            root: hi,
            residual: f_hi,
            iterations: 0,
        });
    }
    if f_lo * f_hi > 0.0 {
        return Err(Error::NoBracket {
            what: what.to_string(),
            lo,
            hi,
            f_lo,
            f_hi,
        });
    }
    let sign_lo = f_lo.signum();
    let mut x = x0.clamp(lo, hi);
    for it in 1..=max_iter {
        let fx = f(x);
        if fx.abs() <= f_tol {
            return Ok(RootResult {
                root: x,
                residual: fx,
                iterations: it,
            });
        }
        if fx.signum() == sign_lo {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
        }
        if (hi - lo).abs() <= x_tol {
            let root = 0.5 * (lo + hi);
            return Ok(RootResult {
                root,
                residual: f(root),
                iterations: it,
            });
        }
        let d = df(x);
        let newton = x - fx / d;
        x = if d.is_finite() && d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let _ = f_lo;
    Err(Error::SolverDiverged {
        what: what.to_string(),
        iterations: max_iter,
        residual: f(x),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct RootResult {
    pub root: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Nelder-Mead simplex minimizer.
///
/// Good enough for the low-dimensional, smooth objectives in this crate
/// (curve fitting). Returns the best vertex found.
pub fn nelder_mead<F>(f: F, start: &[f64], initial_step: f64, max_iter: usize) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut v = start.to_vec();
        let step = if v[i].abs() > 1e-8 {
            initial_step * v[i].abs()
        } else {
            initial_step
        };
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        if (values[worst] - values[best]).abs()
            <= 1e-14 * (1.0 + values[best].abs())
        {
            break;
        }

        let mut centroid = vec![0.0; n];
        for &i in order.iter().take(n) {
            for (c, &xi) in centroid.iter_mut().zip(&simplex[i]) {
                *c += xi / n as f64;
            }
        }

        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&simplex[worst])
            .map(|(&c, &w)| c + alpha * (c - w))
            .collect();
        let f_reflect = f(&reflect);

        if f_reflect < values[best] {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&reflect)
                .map(|(&c, &r)| c + gamma * (r - c))
                .collect();
            let f_expand = f(&expand);
            if f_expand < f_reflect {
                simplex[worst] = expand;
                values[worst] = f_expand;
            } else {
                simplex[worst] = reflect;
                values[worst] = f_reflect;
            }
        } else if f_reflect < values[second_worst] {
            simplex[worst] = reflect;
            values[worst] = f_reflect;
        } else {
            let contract: Vec<f64> = centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(&c, &w)| c + rho * (w - c))
                .collect();
            let f_contract = f(&contract);
            if f_contract < values[worst] {
                simplex[worst] = contract;
                values[worst] = f_contract;
            } else {
                let best_point = simplex[best].clone();
                for i in 0..=n {
                    if i == best {
                        continue;
                    }
                    let shrunk: Vec<f64> = best_point
                        .iter()
                        .zip(&simplex[i])
                        .map(|(&b, &x)| b + sigma * (x - b))
                        .collect();
                    simplex[i] = shrunk;
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    (simplex[best].clone(), values[best])
}

/// SplitMix64 step, used to derive independent seeds.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for repeat `index`, derived from the master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_matches_naive_on_small_input() {
        let v = [1.0, 2.0, 3.0, 4.5];
        assert_eq!(compensated_sum(&v), 10.5);
    }

    #[test]
    fn compensated_sum_handles_cancellation() {
        let v = [1e16, 1.0, -1e16];
        assert_eq!(compensated_sum(&v), 1.0);
    }

    #[test]
    fn mean_and_se_of_constant_sample_is_exact() {
        let v = [2.5; 100];
        let (m, se) = mean_and_se(&v);
        assert_eq!(m, 2.5);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn decay_factor_small_k_limit() {
        assert!((decay_factor(1e-16, 3.0) - 3.0).abs() < 1e-12);
        let k = 0.5f64;
        let tau = 2.0f64;
        let exact = (1.0 - (-k * tau).exp()) / k;
        assert!((decay_factor(k, tau) - exact).abs() < 1e-15);
    }

    #[test]
    fn bracketed_solver_finds_quadratic_root() {
        let f = |x: f64| x * x - 2.0;
        let df = |x: f64| 2.0 * x;
        let r = solve_bracketed("sqrt2", f, df, 0.0, 2.0, 1.0, 1e-14, 1e-15, 100).unwrap();
        assert!((r.root - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bracketed_solver_reports_missing_bracket() {
        let f = |x: f64| x * x + 1.0;
        let err = solve_bracketed("none", f, |x| 2.0 * x, -1.0, 1.0, 0.0, 1e-12, 1e-15, 50);
        assert!(matches!(err, Err(Error::NoBracket { .. })));
    }

    #[test]
    fn nelder_mead_minimizes_rosenbrock() {
        let f = |v: &[f64]| {
            let (x, y) = (v[0], v[1]);
            (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2)
        };
        let (best, val) = nelder_mead(f, &[-1.2, 1.0], 0.5, 4000);
        assert!(val < 1e-8, "val = {val}, best = {best:?}");
    }

    #[test]
    fn derive_seed_changes_with_index() {
        assert_ne!(derive_seed(42, 0), derive_seed(42, 1));
        assert_eq!(derive_seed(42, 3), derive_seed(42, 3));
    }
}
