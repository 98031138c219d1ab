//! Nonlinear power iteration for `‖A‖_{r→p}`.
//!
//! With `S x = Ψ_{r*}(Aᵀ Ψ_p(A x))` and `W x = S x / ‖S x‖_r`, the iterates
//! `v ← W v` converge from any positive start to the unique positive maximizer
//! whenever `AᵀA` is irreducible, and `γ = ‖A v‖_p` is the norm.

use crate::diagnostics::check_irreducible;
use crate::error::{invalid, Error, Result};
use crate::linalg::{big_psi_in_place, check_len, check_positive, lq_norm, psi, scale_in_place};
use crate::matrix::SymMatrix;
use crate::params::NormParams;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Positive start vector; `None` means `n^(−1/r) 𝟏`.
    pub start: Option<Vec<f64>>,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions { tol: 1e-10, max_iter: 10_000, start: None }
    }
}

impl PowerOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_start(mut self, start: Vec<f64>) -> Self {
        self.start = Some(start);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(invalid(format!("tol must be positive (tol = {})", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter must be at least 1"));
        }
        if let Some(start) = &self.start {
            check_positive(start)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    /// `‖A‖_{r→p}`, reported as `‖A v‖_p`.
    pub gamma: f64,
    /// Positive maximizer with `‖v‖_r = 1`.
    pub v: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// `S x`.
pub fn apply_s(a: &SymMatrix, params: &NormParams, x: &[f64]) -> Result<Vec<f64>> {
    check_len(a.n(), x.len())?;
    if x.iter().all(|&t| t == 0.0) {
        return Err(Error::ZeroVector);
    }
    let mut ax = vec![0.0; a.n()];
    let mut sx = vec![0.0; a.n()];
    s_into(a, params, x, &mut ax, &mut sx);
    Ok(sx)
}

/// `S x / ‖S x‖_r`.
pub fn apply_w(a: &SymMatrix, params: &NormParams, x: &[f64]) -> Result<Vec<f64>> {
    let mut sx = apply_s(a, params, x)?;
    let norm = lq_norm(params.r(), &sx);
    if norm == 0.0 {
        return Err(Error::Degenerate("S x is the zero vector".into()));
    }
    scale_in_place(&mut sx, 1.0 / norm);
    Ok(sx)
}

/// Writes `A x` into `ax` and `S x` into `sx`.
fn s_into(a: &SymMatrix, params: &NormParams, x: &[f64], ax: &mut [f64], sx: &mut [f64]) {
    a.matvec_into(x, ax);
    let g: Vec<f64> = ax.iter().map(|&t| psi(params.p(), t)).collect();
    a.matvec_into(&g, sx);
    big_psi_in_place(params.r_star(), sx);
}

/// `‖S v − γ(v)^(p(r*−1)) v‖_∞ / ‖S v‖_∞` with `γ(v) = ‖A v‖_p`.
///
/// The normalization makes the defect invariant under scaling of `A`, so one
/// tolerance serves every matrix size.
pub fn fixed_point_residual(a: &SymMatrix, params: &NormParams, v: &[f64]) -> Result<f64> {
    check_len(a.n(), v.len())?;
    if v.iter().all(|&t| t == 0.0) {
        return Err(Error::ZeroVector);
    }
    let mut ax = vec![0.0; a.n()];
    let mut sx = vec![0.0; a.n()];
    s_into(a, params, v, &mut ax, &mut sx);
    Ok(residual_from(params, v, &ax, &sx))
}

fn residual_from(params: &NormParams, v: &[f64], ax: &[f64], sx: &[f64]) -> f64 {
    let gamma = lq_norm(params.p(), ax);
    let lambda = gamma.powf(params.eigen_exponent());
    let scale = sx.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let defect = sx.iter().zip(v).fold(0.0_f64, |m, (s, x)| m.max((s - lambda * x).abs()));
    defect / scale
}

/// Objective `‖A x‖_p / ‖x‖_r`.
pub fn objective(a: &SymMatrix, params: &NormParams, x: &[f64]) -> Result<f64> {
    let norm = lq_norm(params.r(), x);
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(lq_norm(params.p(), &a.matvec(x)?) / norm)
}

/// Linearization of `S` at `v`:
/// `B x = v^(2−r) ⋆ Aᵀ(|A v|^(p−2) ⋆ A x)`.
pub fn apply_b(a: &SymMatrix, params: &NormParams, v: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    check_len(a.n(), v.len())?;
    check_len(a.n(), x.len())?;
    check_positive(v)?;
    let g = b_weights(a, params, v)?;
    let mut out = a.matvec(x)?;
    for (o, w) in out.iter_mut().zip(&g) {
        *o *= w;
    }
    let mut out = a.matvec(&out)?;
    let r = params.r();
    for (o, vi) in out.iter_mut().zip(v) {
        *o *= vi.powf(2.0 - r);
    }
    Ok(out)
}

/// `|A v|^(p−2)`; infinite weights (a zero entry of `A v` with `p < 2`) are rejected.
pub(crate) fn b_weights(a: &SymMatrix, params: &NormParams, v: &[f64]) -> Result<Vec<f64>> {
    let av = a.matvec(v)?;
    let p = params.p();
    av.iter()
        .map(|&t| {
            let w = if p == 2.0 { 1.0 } else { t.abs().powf(p - 2.0) };
            if w.is_finite() {
                Ok(w)
            } else {
                Err(Error::Degenerate("A v has a zero entry and p < 2".into()))
            }
        })
        .collect()
}

/// Endless sequence of iterates `x, W x, W² x, …`, starting at `x / ‖x‖_r`.
pub struct Iterates<'a> {
    a: &'a SymMatrix,
    params: NormParams,
    current: Option<Vec<f64>>,
}

impl Iterator for Iterates<'_> {
    type Item = Result<Vec<f64>>;

    fn next(&mut self) -> Option<Self::Item> {
        let x = self.current.take()?;
        match apply_w(self.a, &self.params, &x) {
            Ok(next) => self.current = Some(next),
            Err(e) => return Some(Err(e)),
        }
        Some(Ok(x))
    }
}

pub fn iterates<'a>(a: &'a SymMatrix, params: &NormParams, start: &[f64]) -> Result<Iterates<'a>> {
    check_len(a.n(), start.len())?;
    check_positive(start)?;
    let mut x = start.to_vec();
    scale_in_place(&mut x, 1.0 / lq_norm(params.r(), start));
    Ok(Iterates { a, params: *params, current: Some(x) })
}

pub fn uniform_start(n: usize, r: f64) -> Vec<f64> {
    vec![(n as f64).powf(-1.0 / r); n]
}

/// Computes `‖A‖_{r→p}` and its positive maximizer.
///
/// Stops once both the relative change of `‖A v‖_p` between successive
/// iterates and [`fixed_point_residual`] fall below `tol`.
///
/// A reducible `AᵀA` is refused with a witness, except when `A` has constant
/// positive row sums: then `𝟏` is an exact maximizer and the iteration is run
/// from the uniform start, where it stays.
pub fn compute_norm(a: &SymMatrix, params: &NormParams, opts: &PowerOptions) -> Result<PowerResult> {
    opts.validate()?;
    let n = a.n();
    if a.as_slice().iter().all(|&t| t == 0.0) {
        return Err(Error::Degenerate("zero matrix".into()));
    }
    let mut start = match &opts.start {
        Some(s) => {
            check_len(n, s.len())?;
            s.clone()
        }
        None => uniform_start(n, params.r()),
    };
    if let Err(witness) = check_irreducible(a) {
        if a.has_constant_row_sums(1e-12) {
            start = uniform_start(n, params.r());
        } else {
            return Err(Error::Reducible(witness));
        }
    }
    let norm = lq_norm(params.r(), &start);
    scale_in_place(&mut start, 1.0 / norm);

    let mut v = start;
    let mut ax = vec![0.0; n];
    let mut sx = vec![0.0; n];
    let mut prev_gamma = f64::NAN;
    let mut residual = f64::INFINITY;
    for iterations in 0..=opts.max_iter {
        s_into(a, params, &v, &mut ax, &mut sx);
        let gamma = lq_norm(params.p(), &ax);
        if gamma == 0.0 {
            return Err(Error::Degenerate("iterate mapped to zero".into()));
        }
        residual = residual_from(params, &v, &ax, &sx);
        let change = ((gamma - prev_gamma) / gamma).abs();
        if residual < opts.tol && change < opts.tol {
            return Ok(PowerResult { gamma, v, iterations, residual });
        }
        if iterations == opts.max_iter {
            break;
        }
        prev_gamma = gamma;
        let norm = lq_norm(params.r(), &sx);
        if norm == 0.0 {
            return Err(Error::Degenerate("iterate mapped to zero".into()));
        }
        for (vi, si) in v.iter_mut().zip(&sx) {
            *vi = si / norm;
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual })
}
