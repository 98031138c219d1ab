//! Centering, the one-step approximation `η`, and Monte Carlo experiments on
//! the fluctuations of `‖A‖_{r→p}` for random matrices.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boyd::{apply_s, compute_norm, PowerOptions, PowerResult};
use crate::diagnostics::check_irreducible;
use crate::ensembles::EnsembleSpec;
use crate::error::{invalid, Error, Result};
use crate::ks::{ks_distance, ks_pvalue, normal_cdf};
use crate::linalg::lq_norm;
use crate::matrix::SymMatrix;
use crate::params::NormParams;
use crate::report::FlatReport;
use crate::rng::derive_seed;
use crate::spectral::lambda_big2;

/// Variance of the limiting normal law of the statistic.
pub const LIMIT_VARIANCE: f64 = 2.0;

/// Extra draws allowed for a replicate whose matrix is reducible.
pub const MAX_RESAMPLES: usize = 3;

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("mu must be positive (mu = {mu})")))
    }
}

/// `α_n = (n−1)μ + ζ + (p − 1 + 1/(r−1)) σ²/(2μ)`.
pub fn alpha_n(n: usize, mu: f64, sigma2: f64, params: &NormParams, zeta: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok((n as f64 - 1.0) * mu + zeta + params.shift_factor() * sigma2 / (2.0 * mu))
}

/// `(n−1)μ + (p − 1 + 1/(r−1)) Σ_{i<j} σ²(i,j) / (n²μ)`.
pub fn alpha_n_inhom(n: usize, mu: f64, sigma2_sum: f64, params: &NormParams) -> Result<f64> {
    check_mu(mu)?;
    let nf = n as f64;
    Ok((nf - 1.0) * mu + params.shift_factor() * sigma2_sum / (nf * nf * mu))
}

/// One power step from `𝟏`: `‖A S𝟏‖_p / ‖S𝟏‖_r`.
pub fn eta(a: &SymMatrix, params: &NormParams) -> Result<f64> {
    let s1 = apply_s(a, params, &vec![1.0; a.n()])?;
    let norm = lq_norm(params.r(), &s1);
    if norm == 0.0 {
        return Err(Error::Degenerate("S𝟏 is the zero vector".into()));
    }
    Ok(lq_norm(params.p(), &a.matvec(&s1)?) / norm)
}

/// Natural size of `|γ − η|`: `σ n^(1/p−1/r) (σ²/μ) √(ln n / (nμ))`.
pub fn eta_error_scale(n: usize, mu: f64, sigma2: f64, params: &NormParams) -> Result<f64> {
    check_mu(mu)?;
    let nf = n as f64;
    Ok(sigma2.sqrt() * nf.powf(params.scale_exponent()) * (sigma2 / mu) * (nf.ln() / (nf * mu)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Common entry variance σ².
    #[default]
    Hom,
    /// Entry variances σ²(i,j) from a profile.
    Inhom,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hom" => Ok(Mode::Hom),
            "inhom" => Ok(Mode::Inhom),
            other => Err(invalid(format!("mode must be hom or inhom (got {other})"))),
        }
    }
}

/// Everything the centering and scaling depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltModel {
    pub n: usize,
    pub mu: f64,
    pub sigma2: f64,
    /// Mean of the diagonal entries, added to the centering.
    pub zeta: f64,
    pub sigma2_sum: f64,
    pub mode: Mode,
}

impl CltModel {
    pub fn hom(n: usize, mu: f64, sigma2: f64) -> Self {
        let sigma2_sum = sigma2 * (n * n.saturating_sub(1)) as f64 / 2.0;
        CltModel { n, mu, sigma2, zeta: 0.0, sigma2_sum, mode: Mode::Hom }
    }

    pub fn from_spec(spec: &EnsembleSpec, mode: Mode) -> Result<Self> {
        spec.validate()?;
        Ok(CltModel {
            n: spec.n,
            mu: spec.mu,
            sigma2: spec.sigma2()?,
            zeta: spec.diagonal.map_or(0.0, |d| d.mean),
            sigma2_sum: spec.sigma2_sum()?,
            mode,
        })
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn centering(&self, params: &NormParams) -> Result<f64> {
        match self.mode {
            Mode::Hom => alpha_n(self.n, self.mu, self.sigma2, params, self.zeta),
            Mode::Inhom => Ok(alpha_n_inhom(self.n, self.mu, self.sigma2_sum, params)? + self.zeta),
        }
    }

    /// `1/σ` (hom) or `n / √(2 Σ σ²(i,j))` (inhom).
    pub fn scaling(&self) -> Result<f64> {
        check_mu(self.mu)?;
        let (num, den) = match self.mode {
            Mode::Hom => (1.0, self.sigma2.sqrt()),
            Mode::Inhom => (self.n as f64, (2.0 * self.sigma2_sum).sqrt()),
        };
        if !(den > 0.0) {
            return Err(invalid("statistic undefined: mu ≤ 0 or sigma 0"));
        }
        Ok(num / den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltValue {
    pub gamma: f64,
    /// `n^(−(1/p−1/r)) γ`.
    pub gamma_scaled: f64,
    pub centering: f64,
    pub statistic: f64,
}

/// Standardizes an already computed norm.
pub fn statistic_from_gamma(gamma: f64, params: &NormParams, model: &CltModel) -> Result<CltValue> {
    let scaling = model.scaling()?;
    let centering = model.centering(params)?;
    let gamma_scaled = (model.n as f64).powf(-params.scale_exponent()) * gamma;
    Ok(CltValue { gamma, gamma_scaled, centering, statistic: scaling * (gamma_scaled - centering) })
}

/// Computes the norm of `a` and standardizes it.
pub fn clt_statistic(
    a: &SymMatrix,
    params: &NormParams,
    model: &CltModel,
    opts: &PowerOptions,
) -> Result<(CltValue, PowerResult)> {
    model.scaling()?;
    if model.n != a.n() {
        return Err(Error::DimensionMismatch { expected: model.n, found: a.n() });
    }
    let result = compute_norm(a, params, opts)?;
    Ok((statistic_from_gamma(result.gamma, params, model)?, result))
}

/// One row of the experiment CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub seed: u64,
    pub n: usize,
    pub r: f64,
    pub p: f64,
    pub mu: f64,
    pub sigma2: f64,
    pub gamma: f64,
    pub gamma_scaled: f64,
    pub alpha_n: f64,
    pub statistic: f64,
    pub eta: f64,
    pub eta_gap: f64,
    pub linf_dist: f64,
    /// NaN when the spectral column is switched off.
    pub lambda_big2: f64,
    pub irreducible: bool,
    pub iterations: usize,
    pub resamples: usize,
}

impl FlatReport for ReplicateRecord {
    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("replicate", self.replicate.to_string()),
            ("seed", self.seed.to_string()),
            ("n", self.n.to_string()),
            ("r", self.r.to_string()),
            ("p", self.p.to_string()),
            ("mu", self.mu.to_string()),
            ("sigma2", self.sigma2.to_string()),
            ("gamma_scaled", self.gamma_scaled.to_string()),
            ("alpha_n", self.alpha_n.to_string()),
            ("statistic", self.statistic.to_string()),
            ("eta_gap", self.eta_gap.to_string()),
            ("linf_dist", self.linf_dist.to_string()),
            ("lambda_big2", self.lambda_big2.to_string()),
            ("irreducible", self.irreducible.to_string()),
        ]
    }
}

pub const CSV_COLUMNS: [&str; 14] = [
    "replicate",
    "seed",
    "n",
    "r",
    "p",
    "mu",
    "sigma2",
    "gamma_scaled",
    "alpha_n",
    "statistic",
    "eta_gap",
    "linf_dist",
    "lambda_big2",
    "irreducible",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltSummary {
    pub replicates: usize,
    pub samples: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub ks_distance: f64,
    pub ks_pvalue: f64,
    pub centering: f64,
    pub scaling: f64,
    /// Sample mean of `n^(−(1/p−1/r)) γ − (n−1)μ − ζ`.
    pub observed_shift: f64,
    /// The shift predicted by the centering.
    pub predicted_shift: f64,
    pub max_eta_gap: f64,
    pub resamples: usize,
}

#[derive(Debug, Clone)]
pub struct CltOptions {
    pub power: PowerOptions,
    /// Fill the `lambda_big2` column (one Lanczos run per replicate).
    pub lambda_big2: bool,
    pub spectral_tol: f64,
}

impl Default for CltOptions {
    fn default() -> Self {
        CltOptions { power: PowerOptions::default(), lambda_big2: true, spectral_tol: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct CltRun {
    pub summary: CltSummary,
    pub records: Vec<ReplicateRecord>,
}

fn run_replicate(
    spec: &EnsembleSpec,
    params: &NormParams,
    model: &CltModel,
    opts: &CltOptions,
    index: usize,
) -> Result<ReplicateRecord> {
    let mut attempt = 0;
    let (seed, a) = loop {
        let seed = derive_seed(spec.seed, index as u64, attempt as u64);
        let a = spec.sample_with_seed(seed)?;
        if check_irreducible(&a).is_ok() {
            break (seed, a);
        }
        if attempt == MAX_RESAMPLES {
            return Err(Error::ReplicateReducible { replicate: index, attempts: attempt + 1 });
        }
        attempt += 1;
    };
    let (value, result) = clt_statistic(&a, params, model, &opts.power)?;
    let eta = eta(&a, params)?;
    let uniform = (a.n() as f64).powf(-1.0 / params.r());
    let linf_dist = result.v.iter().fold(0.0_f64, |m, x| m.max((x - uniform).abs()));
    let lambda_big2 = if opts.lambda_big2 { lambda_big2(&a, opts.spectral_tol)? } else { f64::NAN };
    Ok(ReplicateRecord {
        replicate: index,
        seed,
        n: a.n(),
        r: params.r(),
        p: params.p(),
        mu: model.mu,
        sigma2: model.sigma2,
        gamma: value.gamma,
        gamma_scaled: value.gamma_scaled,
        alpha_n: value.centering,
        statistic: value.statistic,
        eta,
        eta_gap: (value.gamma - eta).abs(),
        linf_dist,
        lambda_big2,
        irreducible: true,
        iterations: result.iterations,
        resamples: attempt,
    })
}

/// Runs `replicates` independent draws of `spec` in parallel. Replicate `k`
/// uses the seed derived from `(spec.seed, k, attempt)`, so the output does
/// not depend on scheduling or on the number of worker threads.
pub fn run_clt_experiment(
    spec: &EnsembleSpec,
    params: &NormParams,
    replicates: usize,
    mode: Mode,
    opts: &CltOptions,
) -> Result<CltRun> {
    if replicates < 2 {
        return Err(invalid(format!("need at least 2 replicates (got {replicates})")));
    }
    let model = CltModel::from_spec(spec, mode)?;
    let scaling = model.scaling()?;
    let centering = model.centering(params)?;
    opts.power.validate()?;

    let results: Vec<Result<ReplicateRecord>> =
        (0..replicates).into_par_iter().map(|k| run_replicate(spec, params, &model, opts, k)).collect();
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;

    let samples: Vec<f64> = records.iter().map(|r| r.statistic).collect();
    let (mean, variance) = mean_and_variance(&samples);
    let ks_distance = ks_distance(&samples, |x| normal_cdf(x, LIMIT_VARIANCE));
    let base = (model.n as f64 - 1.0) * model.mu + model.zeta;
    let shifts: Vec<f64> = records.iter().map(|r| r.gamma_scaled - base).collect();
    let summary = CltSummary {
        replicates,
        mean,
        variance,
        ks_distance,
        ks_pvalue: ks_pvalue(ks_distance, replicates),
        centering,
        scaling,
        observed_shift: mean_and_variance(&shifts).0,
        predicted_shift: centering - base,
        max_eta_gap: records.iter().fold(0.0_f64, |m, r| m.max(r.eta_gap)),
        resamples: records.iter().map(|r| r.resamples).sum(),
        samples,
    };
    Ok(CltRun { summary, records })
}

/// Sample mean and unbiased variance, summed in index order.
pub fn mean_and_variance(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = x.iter().map(|t| (t - mean) * (t - mean)).sum();
    (mean, ss / (n - 1.0))
}

pub fn write_csv<W: Write>(records: &[ReplicateRecord], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{}", CSV_COLUMNS.join(","))?;
    for rec in records {
        writeln!(w, "{}", rec.csv_row())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivCheckReport {
    pub grad_fd: f64,
    pub grad_theory: f64,
    pub hess_diag_fd: f64,
    pub hess_diag_theory: f64,
    pub rel_err_grad: f64,
    pub rel_err_hess: f64,
    /// Step used for the second difference.
    pub hess_step: f64,
}

impl FlatReport for DerivCheckReport {
    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("grad_fd", self.grad_fd.to_string()),
            ("grad_theory", self.grad_theory.to_string()),
            ("hess_diag_fd", self.hess_diag_fd.to_string()),
            ("hess_diag_theory", self.hess_diag_theory.to_string()),
            ("rel_err_grad", self.rel_err_grad.to_string()),
            ("rel_err_hess", self.rel_err_hess.to_string()),
            ("hess_step", self.hess_step.to_string()),
        ]
    }
}

/// `η` at `μ(J−I)` with the entry pair `(0,1)`, `(1,0)` moved by `t`.
pub fn eta_along_entry(n: usize, mu: f64, params: &NormParams, t: f64) -> Result<f64> {
    let a = SymMatrix::mean_matrix(n, mu)?.with_entry(0, 1, mu + t)?;
    eta(&a, params)
}

/// `2 n^(1/p−1/r−1)`, the limit of `∂η/∂a_αβ` at the mean matrix.
pub fn grad_theory(n: usize, params: &NormParams) -> f64 {
    2.0 * (n as f64).powf(params.scale_exponent() - 1.0)
}

/// `2(p − 1 + 1/(r−1)) n^(1/p−1/r−1) / (nμ)`.
pub fn hess_theory(n: usize, mu: f64, params: &NormParams) -> f64 {
    let nf = n as f64;
    2.0 * params.shift_factor() * nf.powf(params.scale_exponent() - 1.0) / (nf * mu)
}

/// Central differences of `η` in one off-diagonal coordinate at `μ(J−I)`.
///
/// The gradient uses step `h`. The second difference divides rounding noise by
/// the squared step, so it uses `√h` instead, the usual balance point between
/// truncation and cancellation. Both are repeated at twice the step and
/// rejected when the two estimates differ by more than 10%.
pub fn derivative_check(n: usize, mu: f64, params: &NormParams, h: f64) -> Result<DerivCheckReport> {
    check_mu(mu)?;
    if n < 2 {
        return Err(invalid("derivative check needs n ≥ 2"));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(invalid(format!("h must be positive (h = {h})")));
    }
    let hh = h.sqrt();
    if 2.0 * hh >= mu {
        return Err(invalid(format!("step too large for mu = {mu} (h = {h})")));
    }
    let f = |t: f64| eta_along_entry(n, mu, params, t);
    let f0 = f(0.0)?;
    let grad = |s: f64| -> Result<f64> { Ok((f(s)? - f(-s)?) / (2.0 * s)) };
    let hess = |s: f64| -> Result<f64> { Ok((f(s)? - 2.0 * f0 + f(-s)?) / (s * s)) };
    let (g1, g2) = (grad(h)?, grad(2.0 * h)?);
    let (h1, h2) = (hess(hh)?, hess(2.0 * hh)?);
    let disagree = |a: f64, b: f64| (a - b).abs() > 0.1 * a.abs().max(b.abs());
    if disagree(g1, g2) || disagree(h1, h2) {
        return Err(Error::Degenerate(format!(
            "finite differences unstable at h = {h}: gradient {g1} vs {g2}, second difference {h1} vs {h2}"
        )));
    }
    let gt = grad_theory(n, params);
    let ht = hess_theory(n, mu, params);
    Ok(DerivCheckReport {
        grad_fd: g1,
        grad_theory: gt,
        hess_diag_fd: h1,
        hess_diag_theory: ht,
        rel_err_grad: ((g1 - gt) / gt).abs(),
        rel_err_hess: ((h1 - ht) / ht).abs(),
        hess_step: hh,
    })
}

/// `M_r(A) = max_{‖x‖_r ≤ 1} xᵀAx`, computed as `‖A‖_{r→r*}`.
pub fn grothendieck_mr(a: &SymMatrix, r: f64, opts: &PowerOptions) -> Result<f64> {
    if !(r >= 2.0) || !r.is_finite() {
        return Err(invalid(format!("r must be ≥ 2 (r = {r})")));
    }
    let params = NormParams::new(r, crate::linalg::holder_conjugate(r))?;
    Ok(compute_norm(a, &params, opts)?.gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(r: f64, p: f64) -> NormParams {
        NormParams::new(r, p).unwrap()
    }

    #[test]
    fn alpha_examples() {
        assert_relative_eq!(alpha_n(100, 0.3, 0.21, &p(2.0, 2.0), 0.0).unwrap(), 30.4, epsilon = 1e-12);
        assert_relative_eq!(alpha_n(100, 0.3, 0.21, &p(3.0, 3.0), 0.0).unwrap(), 30.575, epsilon = 1e-12);
        assert_relative_eq!(alpha_n(10, 0.3, 0.0, &p(3.0, 2.0), 0.2).unwrap(), 2.9, epsilon = 1e-12);
        assert!(alpha_n(10, 0.0, 0.1, &p(2.0, 2.0), 0.0).is_err());
        let s = 100.0 * 99.0 * 0.21 / 2.0;
        assert_relative_eq!(alpha_n_inhom(100, 0.3, s, &p(2.0, 2.0)).unwrap(), 30.393, epsilon = 1e-12);
        assert_relative_eq!(alpha_n_inhom(100, 0.3, 0.0, &p(2.0, 2.0)).unwrap(), 29.7, epsilon = 1e-12);
    }

    #[test]
    fn eta_examples() {
        let perm = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_relative_eq!(eta(&perm, &p(2.0, 2.0)).unwrap(), 1.0, epsilon = 1e-15);
        let m = SymMatrix::mean_matrix(3, 0.4).unwrap();
        let g = compute_norm(&m, &p(3.0, 2.0), &PowerOptions::default()).unwrap().gamma;
        assert_relative_eq!(eta(&m, &p(3.0, 2.0)).unwrap(), g, max_relative = 1e-14);
    }

    #[test]
    fn statistic_needs_variance() {
        let m = SymMatrix::mean_matrix(5, 0.2).unwrap();
        let model = CltModel::hom(5, 0.2, 0.0);
        assert!(clt_statistic(&m, &p(2.0, 2.0), &model, &PowerOptions::default()).is_err());
    }

    #[test]
    fn inhom_statistic_tracks_hom() {
        let spec = EnsembleSpec::er(300, 0.3, 5);
        let a = spec.sample().unwrap();
        let model = CltModel::from_spec(&spec, Mode::Hom).unwrap();
        let params = p(2.0, 2.0);
        let (hom, res) = clt_statistic(&a, &params, &model, &PowerOptions::default()).unwrap();
        let inhom = statistic_from_gamma(res.gamma, &params, &model.with_mode(Mode::Inhom)).unwrap();
        let n = 300.0;
        assert!((inhom.statistic - hom.statistic).abs() <= 2.0 / n * hom.statistic.abs().max(1.0));
    }

    #[test]
    fn experiment_is_deterministic() {
        let spec = EnsembleSpec::er(40, 0.4, 17);
        let params = p(3.0, 2.0);
        let run1 = run_clt_experiment(&spec, &params, 2, Mode::Hom, &CltOptions::default()).unwrap();
        let run2 = run_clt_experiment(&spec, &params, 2, Mode::Hom, &CltOptions::default()).unwrap();
        assert_eq!(run1.summary.samples.len(), 2);
        assert_eq!(run1.records, run2.records);
        let mut buf = Vec::new();
        write_csv(&run1.records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(text.lines().count(), 3);
        assert_eq!(run1.records[0].csv_header(), CSV_COLUMNS.join(","));
        assert!(run_clt_experiment(&spec, &params, 1, Mode::Hom, &CltOptions::default()).is_err());
    }

    #[test]
    fn sparse_ensemble_exhausts_resamples() {
        let spec = EnsembleSpec::er(30, 0.001, 1);
        let err = run_clt_experiment(&spec, &p(2.0, 2.0), 2, Mode::Hom, &CltOptions::default()).unwrap_err();
        assert!(matches!(err, Error::ReplicateReducible { attempts: 4, .. }));
    }

    #[test]
    fn theory_constants() {
        let params = p(3.0, 2.0);
        assert_relative_eq!(grad_theory(200, &params), 2.0 * 200f64.powf(0.5 - 1.0 / 3.0 - 1.0), epsilon = 1e-18);
        assert_relative_eq!(hess_theory(200, 0.5, &p(2.0, 2.0)), 2e-4, epsilon = 1e-18);
    }

    #[test]
    fn grothendieck_examples() {
        let perm = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let opts = PowerOptions::default();
        assert_relative_eq!(grothendieck_mr(&perm, 2.0, &opts).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(grothendieck_mr(&perm, 4.0, &opts).unwrap(), 2f64.sqrt(), epsilon = 1e-12);
        assert!(grothendieck_mr(&perm, 1.5, &opts).is_err());
    }

    #[test]
    fn mean_and_variance_basics() {
        assert_eq!(mean_and_variance(&[1.0, 3.0]), (2.0, 2.0));
    }
}
