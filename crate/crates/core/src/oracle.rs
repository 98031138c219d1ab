//! Reference maximizers for tiny instances, sharing no code with the power
//! iteration: an exhaustive grid on the positive part of the `r`-sphere and
//! multistart projected gradient ascent.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::{lq_norm, psi};
use crate::matrix::SymMatrix;
use crate::params::NormParams;
use crate::rng::keyed_rng;

pub const GRID_MAX_N: usize = 3;
pub const MULTISTART_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Grid,
    MultistartGradient,
    Analytic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub method: Method,
}

fn norm_value(a: &SymMatrix, params: &NormParams, x: &[f64]) -> f64 {
    let n = a.n();
    let ax: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a.get(i, j) * x[j]).sum()).collect();
    lq_norm(params.p(), &ax) / lq_norm(params.r(), x)
}

/// Point on the positive `r`-sphere with `x_i = w_i^(1/r)` for simplex weights `w`.
fn from_simplex(w: &[f64], r: f64) -> Vec<f64> {
    w.iter().map(|&t| t.max(0.0).powf(1.0 / r)).collect()
}

/// Exhaustive search over the simplex grid `w = k / resolution` (`n ≤ 3`),
/// followed by a polish that re-grids ever smaller boxes around the incumbent.
/// Ties keep the lexicographically smallest point.
pub fn maximize_grid(a: &SymMatrix, params: &NormParams, resolution: usize) -> Result<OracleResult> {
    let n = a.n();
    if n > GRID_MAX_N {
        return Err(Error::TooLarge { n, limit: GRID_MAX_N });
    }
    if resolution < 1000 {
        return Err(invalid(format!("resolution must be at least 1000 (got {resolution})")));
    }
    let r = params.r();
    let eval = |w: &[f64]| norm_value(a, params, &from_simplex(w, r));

    let res = resolution as f64;
    let mut best_w = vec![0.0; n];
    best_w[n - 1] = 1.0;
    let mut best = f64::NEG_INFINITY;
    let consider = |w: Vec<f64>, best: &mut f64, best_w: &mut Vec<f64>| {
        let value = eval(&w);
        if value > *best {
            *best = value;
            *best_w = w;
        }
    };
    match n {
        1 => consider(vec![1.0], &mut best, &mut best_w),
        2 => {
            for i in 0..=resolution {
                let w0 = i as f64 / res;
                consider(vec![w0, 1.0 - w0], &mut best, &mut best_w);
            }
        }
        _ => {
            for i in 0..=resolution {
                for j in 0..=resolution - i {
                    let (w0, w1) = (i as f64 / res, j as f64 / res);
                    consider(vec![w0, w1, (1.0 - w0 - w1).max(0.0)], &mut best, &mut best_w);
                }
            }
        }
    }

    // Polish: 21-point sub-grids on a box shrinking by 10× per round.
    let mut half_width = 1.0 / res;
    for _ in 0..8 {
        let center = best_w.clone();
        let steps: Vec<f64> = (-10..=10).map(|k| k as f64 * half_width / 10.0).collect();
        let free = n.saturating_sub(1);
        let mut idx = vec![0usize; free];
        loop {
            let mut w = center.clone();
            let mut ok = true;
            for (d, &k) in idx.iter().enumerate() {
                w[d] = center[d] + steps[k];
                ok &= w[d] >= 0.0;
            }
            if free > 0 {
                let rest: f64 = w[..free].iter().sum();
                w[free] = 1.0 - rest;
                ok &= w[free] >= 0.0;
            }
            if ok {
                consider(w, &mut best, &mut best_w);
            }
            let mut d = 0;
            while d < free {
                idx[d] += 1;
                if idx[d] < steps.len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == free {
                break;
            }
        }
        half_width /= 10.0;
    }
    Ok(OracleResult { value: best, argmax: from_simplex(&best_w, r), method: Method::Grid })
}

/// Projected gradient ascent of `f(x) = ‖Ax‖_p / ‖x‖_r` from random positive
/// starts; each step backtracks by halving from 1.0 and is projected back to
/// the positive `r`-sphere. A step is accepted only when it gains at least half
/// of the first-order prediction, which keeps the ascent from zig-zagging
/// across the ridge of the sphere.
pub fn maximize_multistart(
    a: &SymMatrix,
    params: &NormParams,
    starts: usize,
    tol: f64,
    seed: u64,
) -> Result<OracleResult> {
    let n = a.n();
    if n > MULTISTART_MAX_N {
        return Err(Error::TooLarge { n, limit: MULTISTART_MAX_N });
    }
    if starts < 20 {
        return Err(invalid(format!("need at least 20 starts (got {starts})")));
    }
    let (r, p) = (params.r(), params.p());
    let f = |x: &[f64]| norm_value(a, params, x);
    // On the sphere, ∇f = ‖Ax‖_p^(1−p) A Ψ_p(Ax) − f Ψ_r(x).
    let grad = |x: &[f64]| -> Vec<f64> {
        let ax: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a.get(i, j) * x[j]).sum()).collect();
        let norm = lq_norm(p, &ax);
        let value = norm / lq_norm(r, x);
        let w: Vec<f64> = ax.iter().map(|&t| psi(p, t)).collect();
        (0..n)
            .map(|i| {
                let g: f64 = (0..n).map(|j| a.get(i, j) * w[j]).sum::<f64>() * norm.powf(1.0 - p);
                g - value * psi(r, x[i])
            })
            .collect()
    };
    let project = |y: Vec<f64>| -> Vec<f64> {
        let y: Vec<f64> = y.into_iter().map(f64::abs).collect();
        let s = lq_norm(r, &y);
        y.into_iter().map(|t| t / s).collect()
    };
    ascend_multistart(n, starts, seed, tol, true, f, grad, project, Method::MultistartGradient)
}

/// `max xᵀAx` over `‖x‖_r ≤ 1` by multistart projected gradient ascent with
/// signed starts; no positivity of the maximizer is assumed.
pub fn maximize_quadratic_form(a: &SymMatrix, r: f64, starts: usize, tol: f64, seed: u64) -> Result<OracleResult> {
    let n = a.n();
    if n > MULTISTART_MAX_N {
        return Err(Error::TooLarge { n, limit: MULTISTART_MAX_N });
    }
    if !(r > 1.0) {
        return Err(invalid(format!("r must exceed 1 (r = {r})")));
    }
    let quad = |x: &[f64]| -> f64 {
        let s: f64 = (0..n).map(|i| x[i] * (0..n).map(|j| a.get(i, j) * x[j]).sum::<f64>()).sum();
        s / lq_norm(r, x).powi(2)
    };
    let grad = |x: &[f64]| -> Vec<f64> {
        let q = quad(x);
        (0..n)
            .map(|i| 2.0 * (0..n).map(|j| a.get(i, j) * x[j]).sum::<f64>() - 2.0 * q * psi(r, x[i]))
            .collect()
    };
    let project = |y: Vec<f64>| -> Vec<f64> {
        let s = lq_norm(r, &y);
        y.into_iter().map(|t| t / s).collect()
    };
    ascend_multistart(n, starts, seed, tol, false, quad, grad, project, Method::MultistartGradient)
}

#[allow(clippy::too_many_arguments)]
fn ascend_multistart(
    n: usize,
    starts: usize,
    seed: u64,
    tol: f64,
    positive: bool,
    f: impl Fn(&[f64]) -> f64,
    grad: impl Fn(&[f64]) -> Vec<f64>,
    project: impl Fn(Vec<f64>) -> Vec<f64>,
    method: Method,
) -> Result<OracleResult> {
    const MAX_STEPS: usize = 200_000;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for s in 0..starts {
        let mut rng = keyed_rng(seed, s as u64);
        let start: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.random_range(0.05..1.0);
                if positive || rng.random_bool(0.5) {
                    u
                } else {
                    -u
                }
            })
            .collect();
        let mut x = project(start);
        let mut fx = f(&x);
        let mut converged = false;
        for _ in 0..MAX_STEPS {
            let g = grad(&x);
            if g.iter().fold(0.0_f64, |m, t| m.max(t.abs())) < tol {
                converged = true;
                break;
            }
            let slope: f64 = g.iter().map(|t| t * t).sum();
            let mut step = 1.0;
            let mut moved = false;
            while step > 1e-20 {
                let y = project(x.iter().zip(&g).map(|(xi, gi)| xi + step * gi).collect());
                let fy = f(&y);
                if fy > fx && fy >= fx + 0.5 * step * slope {
                    x = y;
                    fx = fy;
                    moved = true;
                    break;
                }
                step /= 2.0;
            }
            if !moved {
                // No ascent direction left at working precision.
                converged = true;
                break;
            }
        }
        if converged && best.as_ref().is_none_or(|(v, _)| fx > *v) {
            best = Some((fx, x));
        }
    }
    match best {
        Some((value, argmax)) => Ok(OracleResult { value, argmax, method }),
        None => Err(Error::NoConvergence { iterations: MAX_STEPS, residual: f64::NAN }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticKind {
    /// A permutation matrix.
    Perm,
    /// `μ(J − I)`.
    MeanMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticNorm {
    pub value: f64,
    /// False when `value` is only the uniform-vector lower bound.
    pub exact: bool,
}

/// Closed forms. For `μ(J − I)` the uniform vector is a fixed point of the
/// iteration for every `(r, p)`, so `μ(n−1) n^(1/p−1/r)` is exact; it is
/// flagged as a lower bound except at `r = p = 2`, where the eigenvalue
/// argument alone settles it.
pub fn analytic_norm(kind: AnalyticKind, n: usize, mu: f64, params: &NormParams) -> Result<AnalyticNorm> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let scale = (n as f64).powf(params.scale_exponent());
    match kind {
        AnalyticKind::Perm => Ok(AnalyticNorm { value: scale, exact: true }),
        AnalyticKind::MeanMatrix => {
            if !(mu > 0.0) {
                return Err(invalid(format!("mu must be positive (mu = {mu})")));
            }
            let exact = params.r() == 2.0 && params.p() == 2.0;
            Ok(AnalyticNorm { value: mu * (n as f64 - 1.0) * scale, exact })
        }
    }
}
