//! Second-order spectral quantities.
//!
//! `Λ₂` is the largest singular value of `A` on `𝟏^⊥` and `λ₂` the second
//! eigenvalue of the linearized iteration `B`. Both come from a Lanczos
//! process with full reorthogonalization against a set of locked vectors,
//! which is how `𝟏` (for `Λ₂`) and the top eigenvector (for `λ₂`) are deflated.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::boyd::{b_weights, PowerResult};
use crate::error::{invalid, Error, Result};
use crate::linalg::{check_len, check_positive, dot, lq_norm};
use crate::matrix::SymMatrix;
use crate::params::NormParams;
use crate::report::FlatReport;
use crate::rng::{keyed_rng, uniform01};

pub const DEFAULT_TOL: f64 = 1e-8;
const MAX_STEPS: usize = 50_000;

/// Extreme Ritz pair of a symmetric operator restricted to the orthogonal
/// complement of `locked`.
#[derive(Debug, Clone)]
pub struct RitzPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Largest,
    /// Largest in absolute value.
    Magnitude,
}

/// Lanczos on `op` restricted to `span(locked)^⊥`. The locked vectors must be
/// orthonormal. Converges when the Ritz residual `|β_k s_k|` drops below
/// `tol · |θ|`; every basis vector is reorthogonalized twice.
pub fn lanczos(
    n: usize,
    op: impl Fn(&[f64], &mut [f64]),
    locked: &[Vec<f64>],
    which: Extreme,
    tol: f64,
) -> Result<RitzPair> {
    if !(tol > 0.0) {
        return Err(invalid(format!("tol must be positive (tol = {tol})")));
    }
    let dim = n.saturating_sub(locked.len());
    if dim == 0 {
        return Ok(RitzPair { value: 0.0, vector: vec![0.0; n] });
    }
    let mut rng = keyed_rng(0x1a2c_2051, n as u64);
    let mut q: Vec<f64> = (0..n).map(|_| uniform01(&mut rng) + 0.5).collect();
    orthogonalize(&mut q, locked);
    orthogonalize(&mut q, locked);
    let norm = dot(&q, &q).sqrt();
    if norm == 0.0 {
        return Ok(RitzPair { value: 0.0, vector: vec![0.0; n] });
    }
    q.iter_mut().for_each(|t| *t /= norm);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let max_steps = dim.min(MAX_STEPS);
    loop {
        let k = basis.len();
        op(&basis[k - 1], &mut w);
        let alpha = dot(&w, &basis[k - 1]);
        alphas.push(alpha);
        for _ in 0..2 {
            orthogonalize(&mut w, locked);
            orthogonalize(&mut w, &basis);
        }
        let beta = dot(&w, &w).sqrt();

        let (theta, s) = ritz(&alphas, &betas, which);
        let scale = theta.abs().max(alphas.iter().fold(0.0_f64, |m, a| m.max(a.abs())));
        let converged = beta * s[k - 1].abs() <= tol * theta.abs().max(f64::MIN_POSITIVE)
            || beta <= 1e-14 * scale.max(f64::MIN_POSITIVE)
            || k == max_steps;
        if converged {
            let mut vector = vec![0.0; n];
            for (coef, b) in s.iter().zip(&basis) {
                for (v, x) in vector.iter_mut().zip(b) {
                    *v += coef * x;
                }
            }
            return Ok(RitzPair { value: theta, vector });
        }
        betas.push(beta);
        basis.push(w.iter().map(|t| t / beta).collect());
    }
}

fn orthogonalize(x: &mut [f64], against: &[Vec<f64>]) {
    for u in against {
        let c = dot(x, u);
        for (xi, ui) in x.iter_mut().zip(u) {
            *xi -= c * ui;
        }
    }
}

/// Extreme eigenpair of the tridiagonal matrix with diagonal `alphas` and
/// off-diagonal `betas`.
fn ritz(alphas: &[f64], betas: &[f64], which: Extreme) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let key = |x: f64| match which {
        Extreme::Largest => x,
        Extreme::Magnitude => x.abs(),
    };
    let best = (0..k)
        .max_by(|&i, &j| key(eig.eigenvalues[i]).total_cmp(&key(eig.eigenvalues[j])))
        .unwrap_or(0);
    (eig.eigenvalues[best], eig.eigenvectors.column(best).iter().copied().collect())
}

/// `Λ₂ = max_{x ⊥ 𝟏} ‖A x‖₂ / ‖x‖₂`.
///
/// Since `A` is symmetric this is the largest `|θ|` over eigenvalues of
/// `P A P`, found by Lanczos with `𝟏/√n` locked.
pub fn lambda_big2(a: &SymMatrix, tol: f64) -> Result<f64> {
    let n = a.n();
    if n < 2 {
        return Err(invalid("Λ₂ needs n ≥ 2"));
    }
    let ones = vec![1.0 / (n as f64).sqrt(); n];
    let pair = lanczos(n, |x, y| a.matvec_into(x, y), &[ones], Extreme::Magnitude, tol)?;
    Ok(pair.value.abs())
}

/// Second eigenpair of `B`, the linearization of the iteration at `v`.
#[derive(Debug, Clone)]
pub struct SecondEigen {
    pub value: f64,
    /// Eigenvector of `B`, orthogonal to `v` in the `v`-inner product.
    pub vector: Vec<f64>,
}

/// `λ₂(B)` for the converged maximizer `v`.
///
/// `B` is similar to the symmetric `C = D⁻¹ A G A D⁻¹` with
/// `D = diag(v^((r−2)/2))` and `G = diag(|A v|^(p−2))`; the top eigenvector of
/// `C` is `D v`, which is locked before running Lanczos.
pub fn lambda2_b(a: &SymMatrix, params: &NormParams, v: &[f64], tol: f64) -> Result<SecondEigen> {
    let n = a.n();
    check_len(n, v.len())?;
    check_positive(v)?;
    let g = b_weights(a, params, v)?;
    let half = (params.r() - 2.0) / 2.0;
    let d: Vec<f64> = v.iter().map(|&x| x.powf(half)).collect();
    let mut top: Vec<f64> = d.iter().zip(v).map(|(di, vi)| di * vi).collect();
    let norm = lq_norm(2.0, &top);
    top.iter_mut().for_each(|t| *t /= norm);

    let mut tmp = vec![0.0; n];
    let mut tmp2 = vec![0.0; n];
    let tmp_cell = std::cell::RefCell::new((&mut tmp, &mut tmp2));
    let op = |x: &[f64], y: &mut [f64]| {
        let mut guard = tmp_cell.borrow_mut();
        let (t1, t2) = &mut *guard;
        for ((t, xi), di) in t1.iter_mut().zip(x).zip(&d) {
            *t = xi / di;
        }
        a.matvec_into(t1, t2);
        for (t, gi) in t2.iter_mut().zip(&g) {
            *t *= gi;
        }
        a.matvec_into(t2, y);
        for (yi, di) in y.iter_mut().zip(&d) {
            *yi /= di;
        }
    };
    let pair = lanczos(n, op, &[top], Extreme::Largest, tol)?;
    let vector = pair.vector.iter().zip(&d).map(|(y, di)| y / di).collect();
    Ok(SecondEigen { value: pair.value.max(0.0), vector })
}

/// Dense symmetric matrix `C` from [`lambda2_b`], for cross-checks on small inputs.
pub fn symmetrized_b(a: &SymMatrix, params: &NormParams, v: &[f64]) -> Result<DMatrix<f64>> {
    let n = a.n();
    check_len(n, v.len())?;
    check_positive(v)?;
    let g = b_weights(a, params, v)?;
    let half = (params.r() - 2.0) / 2.0;
    let d: Vec<f64> = v.iter().map(|&x| x.powf(half)).collect();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let s: f64 = (0..n).map(|k| a.get(i, k) * g[k] * a.get(k, j)).sum();
        s / (d[i] * d[j])
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub lambda_big2: f64,
    pub lambda2_b: f64,
    pub gamma_p: f64,
    /// `(p−1) λ₂ / ((r−1) γ^p)`, the asymptotic contraction factor of the iteration.
    pub contraction_ratio: f64,
    /// `λ₂ ≤ 2 μ^(p−2) n^(p(r−1)/r − 1) Λ₂²`.
    pub lambda2_bound: f64,
    pub lambda2_bound_ok: bool,
    /// `3√n σ + μ`, plus `√(2n(ζ² + ρ²))` when the diagonal is nonzero.
    pub big_lambda2_bound: f64,
    pub big_lambda2_bound_ok: bool,
    /// `λ₂` within 1e-6 (relative) of `γ^p`.
    pub gap_warning: bool,
}

impl FlatReport for SpectralReport {
    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("lambda_big2", self.lambda_big2.to_string()),
            ("lambda2_b", self.lambda2_b.to_string()),
            ("gamma_p", self.gamma_p.to_string()),
            ("contraction_ratio", self.contraction_ratio.to_string()),
            ("lambda2_bound", self.lambda2_bound.to_string()),
            ("lambda2_bound_ok", self.lambda2_bound_ok.to_string()),
            ("big_lambda2_bound", self.big_lambda2_bound.to_string()),
            ("big_lambda2_bound_ok", self.big_lambda2_bound_ok.to_string()),
            ("gap_warning", self.gap_warning.to_string()),
        ]
    }
}

/// Entry statistics the bounds are evaluated against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryMoments {
    pub mu: f64,
    pub sigma2: f64,
    pub diag_mean: f64,
    pub diag_var: f64,
}

impl EntryMoments {
    pub fn off_diagonal(mu: f64, sigma2: f64) -> Self {
        EntryMoments { mu, sigma2, diag_mean: 0.0, diag_var: 0.0 }
    }
}

pub fn check_bounds(
    a: &SymMatrix,
    params: &NormParams,
    result: &PowerResult,
    moments: EntryMoments,
) -> Result<SpectralReport> {
    let EntryMoments { mu, sigma2, diag_mean, diag_var } = moments;
    if !(mu > 0.0) {
        return Err(invalid(format!("mu must be positive (mu = {mu})")));
    }
    if !(sigma2 >= 0.0 && diag_var >= 0.0) {
        return Err(invalid("variances must be nonnegative"));
    }
    let n = a.n();
    let nf = n as f64;
    let (r, p) = (params.r(), params.p());
    let big = lambda_big2(a, DEFAULT_TOL)?;
    let second = lambda2_b(a, params, &result.v, DEFAULT_TOL)?;
    let gamma_p = result.gamma.powf(p);
    if gamma_p == 0.0 {
        return Err(Error::Degenerate("γ = 0".into()));
    }
    let contraction_ratio = (p - 1.0) * second.value / ((r - 1.0) * gamma_p);
    let lambda2_bound = 2.0 * mu.powf(p - 2.0) * nf.powf(p * (r - 1.0) / r - 1.0) * big * big;
    let mut big_lambda2_bound = 3.0 * nf.sqrt() * sigma2.sqrt() + mu;
    if !a.zero_diagonal() {
        big_lambda2_bound += (2.0 * nf * (diag_mean * diag_mean + diag_var)).sqrt();
    }
    // Rounding slack so that exact equality cases do not flip.
    let slack = 1e-9;
    Ok(SpectralReport {
        lambda_big2: big,
        lambda2_b: second.value,
        gamma_p,
        contraction_ratio,
        lambda2_bound,
        lambda2_bound_ok: second.value <= lambda2_bound * (1.0 + slack) + slack,
        big_lambda2_bound,
        big_lambda2_bound_ok: big <= big_lambda2_bound * (1.0 + slack),
        gap_warning: second.value >= gamma_p * (1.0 - 1e-6),
    })
}
