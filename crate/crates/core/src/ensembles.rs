//! Seeded random symmetric matrices.
//!
//! Entry `(i, j)` with `i < j` is the `(j − i − 1)`-th draw of stream `i` of
//! the keyed generator, and diagonal entry `i` is the first draw of stream
//! `2⁶³ + i`. Rows can therefore be generated in parallel, and adding or
//! removing a diagonal law leaves the off-diagonal entries untouched.

use std::path::PathBuf;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::SymMatrix;
use crate::mtx::read_matrix_market_file;
use crate::rng::{keyed_rng, uniform01};

const DIAGONAL_STREAM: u64 = 1 << 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Bernoulli(μ) adjacency.
    Er,
    /// `b · Bernoulli(q)` with `bq = μ` and `b²q(1−q) = σ²`.
    BernoulliScaled,
    /// Uniform on `μ ± √(3σ²)`.
    Uniform,
    /// Exponential with mean μ, so `σ² = μ²`.
    Exponential,
    /// Finite support with given probabilities.
    CustomIid,
}

/// A scalar law matched to a mean and variance.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarLaw {
    Constant(f64),
    Bernoulli { q: f64, b: f64 },
    Uniform { lo: f64, hi: f64 },
    Exponential { mean: f64 },
    Table { support: Vec<f64>, cdf: Vec<f64> },
}

impl ScalarLaw {
    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let u = uniform01(rng);
        match self {
            ScalarLaw::Constant(c) => *c,
            ScalarLaw::Bernoulli { q, b } => {
                if u < *q {
                    *b
                } else {
                    0.0
                }
            }
            ScalarLaw::Uniform { lo, hi } => lo + (hi - lo) * u,
            ScalarLaw::Exponential { mean } => -mean * (-u).ln_1p(),
            ScalarLaw::Table { support, cdf } => {
                let k = cdf.partition_point(|&c| c <= u);
                support[k.min(support.len() - 1)]
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            ScalarLaw::Constant(c) => *c,
            ScalarLaw::Bernoulli { q, b } => q * b,
            ScalarLaw::Uniform { lo, hi } => (lo + hi) / 2.0,
            ScalarLaw::Exponential { mean } => *mean,
            ScalarLaw::Table { support, cdf } => table_moments(support, cdf).0,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            ScalarLaw::Constant(_) => 0.0,
            ScalarLaw::Bernoulli { q, b } => b * b * q * (1.0 - q),
            ScalarLaw::Uniform { lo, hi } => (hi - lo) * (hi - lo) / 12.0,
            ScalarLaw::Exponential { mean } => mean * mean,
            ScalarLaw::Table { support, cdf } => table_moments(support, cdf).1,
        }
    }

    /// The law of `family` with the given mean and variance.
    pub fn matched(family: Family, mu: f64, sigma2: f64) -> Result<ScalarLaw> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(invalid(format!("mu must be positive (mu = {mu})")));
        }
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(invalid(format!("sigma2 must be nonnegative (sigma2 = {sigma2})")));
        }
        match family {
            Family::Er => {
                if mu >= 1.0 {
                    return Err(invalid(format!("er needs mu < 1 (mu = {mu})")));
                }
                check_matches("sigma2", sigma2, mu * (1.0 - mu))?;
                Ok(ScalarLaw::Bernoulli { q: mu, b: 1.0 })
            }
            Family::BernoulliScaled => {
                let second = sigma2 + mu * mu;
                Ok(ScalarLaw::Bernoulli { q: mu * mu / second, b: second / mu })
            }
            Family::Uniform => {
                let half = (3.0 * sigma2).sqrt();
                if half > mu {
                    return Err(invalid(format!(
                        "uniform law μ ± √(3σ²) has negative lower end (mu = {mu}, sigma2 = {sigma2})"
                    )));
                }
                Ok(ScalarLaw::Uniform { lo: mu - half, hi: mu + half })
            }
            Family::Exponential => {
                check_matches("sigma2", sigma2, mu * mu)?;
                Ok(ScalarLaw::Exponential { mean: mu })
            }
            Family::CustomIid => Err(invalid("custom_iid takes its law from a support/probability table")),
        }
    }
}

fn table_moments(support: &[f64], cdf: &[f64]) -> (f64, f64) {
    let mut prev = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (x, c) in support.iter().zip(cdf) {
        let w = c - prev;
        prev = *c;
        m1 += w * x;
        m2 += w * x * x;
    }
    (m1, m2 - m1 * m1)
}

fn check_matches(name: &str, given: f64, implied: f64) -> Result<()> {
    if (given - implied).abs() <= 1e-12 * implied.abs().max(1.0) {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {given} does not match the family value {implied}")))
    }
}

/// Finite law for `custom_iid`. The tail condition is the user's responsibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomTable {
    pub support: Vec<f64>,
    pub probs: Vec<f64>,
}

impl CustomTable {
    pub fn law(&self) -> Result<ScalarLaw> {
        if self.support.is_empty() || self.support.len() != self.probs.len() {
            return Err(invalid("custom table needs matching, nonempty support and probs"));
        }
        if self.support.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(invalid("custom support must be finite and nonnegative"));
        }
        if self.probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(invalid("custom probabilities must be nonnegative"));
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("custom probabilities sum to {total}, not 1")));
        }
        let mut acc = 0.0;
        let cdf = self.probs.iter().map(|p| {
            acc += p / total;
            acc
        });
        let mut cdf: Vec<f64> = cdf.collect();
        *cdf.last_mut().unwrap() = 1.0;
        Ok(ScalarLaw::Table { support: self.support.clone(), cdf })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalFamily {
    Constant,
    BernoulliScaled,
    Uniform,
    Exponential,
}

/// Law of the diagonal entries: mean ζ and variance ρ².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalLaw {
    pub family: DiagonalFamily,
    pub mean: f64,
    #[serde(default)]
    pub variance: f64,
}

impl DiagonalLaw {
    pub fn law(&self) -> Result<ScalarLaw> {
        match self.family {
            DiagonalFamily::Constant => {
                if !(self.mean >= 0.0) || self.variance != 0.0 {
                    return Err(invalid("constant diagonal needs mean ≥ 0 and variance 0"));
                }
                Ok(ScalarLaw::Constant(self.mean))
            }
            DiagonalFamily::BernoulliScaled => ScalarLaw::matched(Family::BernoulliScaled, self.mean, self.variance),
            DiagonalFamily::Uniform => ScalarLaw::matched(Family::Uniform, self.mean, self.variance),
            DiagonalFamily::Exponential => ScalarLaw::matched(Family::Exponential, self.mean, self.variance),
        }
    }
}

/// Symmetric grid of standard-deviation multipliers: entry `(i, j)` has
/// variance `m_ij² σ²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileSource", into = "ProfileSource")]
pub struct VarianceProfile {
    multipliers: SymMatrix,
    source: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum ProfileSource {
    Path { path: PathBuf },
    Inline { matrix: Vec<Vec<f64>> },
}

impl TryFrom<ProfileSource> for VarianceProfile {
    type Error = Error;
    fn try_from(src: ProfileSource) -> Result<Self> {
        match src {
            ProfileSource::Path { path } => {
                let mut profile = VarianceProfile::load(&path)?;
                profile.source = Some(path);
                Ok(profile)
            }
            ProfileSource::Inline { matrix } => VarianceProfile::new(SymMatrix::from_rows(&matrix)?),
        }
    }
}

impl From<VarianceProfile> for ProfileSource {
    fn from(profile: VarianceProfile) -> Self {
        match profile.source {
            Some(path) => ProfileSource::Path { path },
            None => {
                let n = profile.multipliers.n();
                ProfileSource::Inline { matrix: (0..n).map(|i| profile.multipliers.row(i).to_vec()).collect() }
            }
        }
    }
}

impl VarianceProfile {
    /// Off-diagonal multipliers must be strictly positive.
    pub fn new(multipliers: SymMatrix) -> Result<Self> {
        let n = multipliers.n();
        for i in 0..n {
            for j in i + 1..n {
                if !(multipliers.get(i, j) > 0.0) {
                    return Err(invalid(format!("profile multiplier at ({i}, {j}) must be positive")));
                }
            }
        }
        Ok(VarianceProfile { multipliers, source: None })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::new(read_matrix_market_file(path)?)
    }

    /// Two diagonal blocks `[0, split)` and `[split, n)` with multipliers `inner`
    /// and `outer` inside, and `cross` between them.
    pub fn two_block(n: usize, split: usize, inner: f64, outer: f64, cross: f64) -> Result<Self> {
        let m = SymMatrix::from_upper_fn(n, |i, j| match (i < split, j < split) {
            (true, true) => inner,
            (false, false) => outer,
            _ => cross,
        })?;
        Self::new(m)
    }

    pub fn multiplier(&self, i: usize, j: usize) -> f64 {
        self.multipliers.get(i, j)
    }

    pub fn n(&self) -> usize {
        self.multipliers.n()
    }

    /// `(min, max)` over off-diagonal multipliers.
    pub fn range(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let m = self.multipliers.get(i, j);
                lo = lo.min(m);
                hi = hi.max(m);
            }
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub family: Family,
    pub n: usize,
    pub mu: f64,
    /// Required for `bernoulli_scaled` and `uniform`; implied by the other families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<VarianceProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<DiagonalLaw>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomTable>,
    #[serde(default)]
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(family: Family, n: usize, mu: f64, seed: u64) -> Self {
        EnsembleSpec { family, n, mu, sigma2: None, profile: None, diagonal: None, custom: None, seed }
    }

    pub fn er(n: usize, mu: f64, seed: u64) -> Self {
        Self::new(Family::Er, n, mu, seed)
    }

    pub fn with_sigma2(mut self, sigma2: f64) -> Self {
        self.sigma2 = Some(sigma2);
        self
    }

    pub fn with_profile(mut self, profile: VarianceProfile) -> Self {
        self.profile = Some(profile);
        self
    }

    pub fn with_diagonal(mut self, diagonal: DiagonalLaw) -> Self {
        self.diagonal = Some(diagonal);
        self
    }

    pub fn with_custom(mut self, table: CustomTable) -> Self {
        self.custom = Some(table);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Entry variance σ² (the base variance σ̄² when a profile is present).
    pub fn sigma2(&self) -> Result<f64> {
        match (self.family, self.sigma2) {
            (Family::Er, s) => {
                let implied = self.mu * (1.0 - self.mu);
                if let Some(s) = s {
                    check_matches("sigma2", s, implied)?;
                }
                Ok(implied)
            }
            (Family::Exponential, s) => {
                let implied = self.mu * self.mu;
                if let Some(s) = s {
                    check_matches("sigma2", s, implied)?;
                }
                Ok(implied)
            }
            (Family::CustomIid, s) => {
                let law = self.custom.as_ref().ok_or_else(|| invalid("custom_iid needs a custom table"))?.law()?;
                let implied = law.variance();
                if let Some(s) = s {
                    check_matches("sigma2", s, implied)?;
                }
                Ok(implied)
            }
            (_, Some(s)) => Ok(s),
            (family, None) => Err(invalid(format!("sigma2 is required for family {family:?}"))),
        }
    }

    /// `Σ_{i<j} σ²(i, j)`.
    pub fn sigma2_sum(&self) -> Result<f64> {
        let s2 = self.sigma2()?;
        let n = self.n;
        Ok(match &self.profile {
            None => s2 * (n * n.saturating_sub(1)) as f64 / 2.0,
            Some(p) => {
                let mut total = 0.0;
                for i in 0..n {
                    for j in i + 1..n {
                        let m = p.multiplier(i, j);
                        total += m * m * s2;
                    }
                }
                total
            }
        })
    }

    /// Law of an off-diagonal entry without a profile.
    pub fn entry_law(&self) -> Result<ScalarLaw> {
        self.entry_law_scaled(1.0)
    }

    fn entry_law_scaled(&self, multiplier: f64) -> Result<ScalarLaw> {
        if self.family == Family::CustomIid {
            return self.custom.as_ref().ok_or_else(|| invalid("custom_iid needs a custom table"))?.law();
        }
        ScalarLaw::matched(self.family, self.mu, multiplier * multiplier * self.sigma2()?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n must be positive"));
        }
        self.entry_law()?;
        if self.family == Family::CustomIid {
            let law = self.entry_law()?;
            check_matches("mu", self.mu, law.mean())?;
        }
        if let Some(profile) = &self.profile {
            if !matches!(self.family, Family::BernoulliScaled | Family::Uniform) {
                return Err(invalid("a variance profile needs family bernoulli_scaled or uniform"));
            }
            if profile.n() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, found: profile.n() });
            }
            let (_, hi) = profile.range();
            self.entry_law_scaled(hi)?;
        }
        if let Some(d) = &self.diagonal {
            d.law()?;
        }
        Ok(())
    }

    /// Draws the matrix for `self.seed`.
    pub fn sample(&self) -> Result<SymMatrix> {
        self.sample_with_seed(self.seed)
    }

    pub fn sample_with_seed(&self, seed: u64) -> Result<SymMatrix> {
        self.validate()?;
        let n = self.n;
        let base = self.entry_law()?;
        let laws: Option<Vec<Vec<ScalarLaw>>> = match &self.profile {
            None => None,
            Some(p) => Some(
                (0..n)
                    .map(|i| (i + 1..n).map(|j| self.entry_law_scaled(p.multiplier(i, j))).collect::<Result<_>>())
                    .collect::<Result<_>>()?,
            ),
        };
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = keyed_rng(seed, i as u64);
                match &laws {
                    None => (i + 1..n).map(|_| base.draw(&mut rng)).collect(),
                    Some(l) => l[i].iter().map(|law| law.draw(&mut rng)).collect(),
                }
            })
            .collect();
        let diag: Vec<f64> = match &self.diagonal {
            None => vec![0.0; n],
            Some(d) => {
                let law = d.law()?;
                (0..n).map(|i| law.draw(&mut keyed_rng(seed, DIAGONAL_STREAM + i as u64))).collect()
            }
        };
        SymMatrix::from_upper_fn(n, |i, j| if i == j { diag[i] } else { rows[i][j - i - 1] })
    }
}

/// `A − μJ + μI`, which may have negative entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CenteredMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row_means(&self) -> Vec<f64> {
        self.data.chunks_exact(self.n).map(|r| r.iter().sum::<f64>() / self.n as f64).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        crate::linalg::check_len(self.n, x.len())?;
        Ok(self.data.chunks_exact(self.n).map(|r| crate::linalg::dot(r, x)).collect())
    }
}

pub fn center(a: &SymMatrix, mu: f64) -> Result<CenteredMatrix> {
    if !(mu > 0.0) {
        return Err(invalid(format!("mu must be positive (mu = {mu})")));
    }
    let n = a.n();
    let data = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            a.as_slice()[k] - if i == j { 0.0 } else { mu }
        })
        .collect();
    Ok(CenteredMatrix { n, data })
}

/// `ε_n = √(5K ln n / (nμ))`, natural logarithm.
pub fn epsilon_n(n: usize, mu: f64, k: f64) -> f64 {
    (5.0 * k * (n as f64).ln() / (n as f64 * mu)).sqrt()
}
