//! Structural checks: almost regularity, well-balancedness, irreducibility of
//! `AᵀA`, and the distance of the maximizer from the uniform vector.

use std::collections::VecDeque;

use rand::Rng;

use crate::boyd::PowerResult;
use crate::error::{invalid, Error, ReducibleWitness, Result};
use crate::matrix::SymMatrix;
use crate::params::NormParams;
use crate::report::FlatReport;
use crate::rng::keyed_rng;

/// Partial row sum `d(i, V) = Σ_{j ∈ V} a_ij`.
pub fn degree(a: &SymMatrix, i: usize, set: &[usize]) -> Result<f64> {
    let n = a.n();
    if i >= n {
        return Err(invalid(format!("row index {i} out of range for n = {n}")));
    }
    let row = a.row(i);
    set.iter()
        .map(|&j| {
            if j < n {
                Ok(row[j])
            } else {
                Err(invalid(format!("set element {j} out of range for n = {n}")))
            }
        })
        .sum()
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("mu must be positive (mu = {mu})")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlmostRegularity {
    /// Smallest ε with `max_i |d(i) − nμ| ≤ nμε`.
    pub eps_achieved: f64,
    pub eps_target: f64,
    pub almost_regular: bool,
}

pub fn almost_regular(a: &SymMatrix, mu: f64, eps_target: f64) -> Result<AlmostRegularity> {
    check_mu(mu)?;
    let target = a.n() as f64 * mu;
    let worst = a.row_sums().iter().fold(0.0_f64, |m, d| m.max((d - target).abs()));
    let eps_achieved = worst / target;
    Ok(AlmostRegularity { eps_achieved, eps_target, almost_regular: eps_achieved <= eps_target })
}

/// Default exception-set budget `δ_n = μ δ₂`, with `δ₁ = exp(−nε²μ/(4.9K))`
/// and `δ₂ = δ₁ ln n / √μ`.
pub fn default_delta(n: usize, mu: f64, eps: f64, k: f64) -> f64 {
    let nf = n as f64;
    let delta1 = (-nf * eps * eps * mu / (4.9 * k)).exp();
    let delta2 = delta1 * nf.ln() / mu.sqrt();
    mu * delta2
}

/// `max(σ̂²/μ̂, 1)` over the strictly upper-triangular entries.
pub fn k_hat(a: &SymMatrix) -> f64 {
    let (mean, var) = a.off_diagonal_moments();
    if mean > 0.0 {
        (var / mean).max(1.0)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetStrategy {
    /// Exhaustive when `n ≤ 15`, sampled otherwise.
    Auto,
    Exhaustive,
    Sampled,
}

pub const EXHAUSTIVE_LIMIT: usize = 15;

#[derive(Debug, Clone, PartialEq)]
pub struct WellBalancedReport {
    pub subsets_checked: usize,
    pub violations: usize,
    pub exhaustive: bool,
    /// Every subset that failed, as sorted index lists.
    pub violating_subsets: Vec<Vec<usize>>,
}

/// Sampled well-balancedness check: `num_subsets` random subsets of uniformly
/// random size plus the `n` prefixes of the vertices sorted by decreasing
/// degree. For `n ≤ 15` all `2ⁿ` subsets are enumerated instead.
pub fn well_balanced_sampled(
    a: &SymMatrix,
    mu: f64,
    eps: f64,
    delta: f64,
    num_subsets: usize,
    seed: u64,
) -> Result<WellBalancedReport> {
    well_balanced(a, mu, eps, delta, SubsetStrategy::Auto, num_subsets, seed)
}

pub fn well_balanced(
    a: &SymMatrix,
    mu: f64,
    eps: f64,
    delta: f64,
    strategy: SubsetStrategy,
    num_subsets: usize,
    seed: u64,
) -> Result<WellBalancedReport> {
    check_mu(mu)?;
    let n = a.n();
    let exhaustive = match strategy {
        SubsetStrategy::Auto => n <= EXHAUSTIVE_LIMIT,
        SubsetStrategy::Exhaustive => {
            if n > 30 {
                return Err(Error::TooLarge { n, limit: 30 });
            }
            true
        }
        SubsetStrategy::Sampled => false,
    };
    if !exhaustive && num_subsets == 0 {
        return Err(invalid("num_subsets must be at least 1"));
    }
    let checker = SubsetChecker { a, mu, eps, delta };
    let mut report = WellBalancedReport {
        subsets_checked: 0,
        violations: 0,
        exhaustive,
        violating_subsets: Vec::new(),
    };
    let mut record = |member: &[bool], degrees: &[f64]| {
        report.subsets_checked += 1;
        if checker.violates(member, degrees) {
            report.violations += 1;
            report.violating_subsets.push((0..n).filter(|&i| member[i]).collect());
        }
    };

    let mut member = vec![false; n];
    let mut degrees = vec![0.0; n];
    if exhaustive {
        for mask in 0u64..(1u64 << n) {
            for (i, m) in member.iter_mut().enumerate() {
                *m = mask >> i & 1 == 1;
            }
            checker.degrees_into(&member, &mut degrees);
            record(&member, &degrees);
        }
        return Ok(report);
    }

    let mut rng = keyed_rng(seed, 0);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..num_subsets {
        let size = rng.random_range(1..=n);
        // Partial Fisher–Yates: the first `size` slots form the subset.
        for k in 0..size {
            let j = rng.random_range(k..n);
            order.swap(k, j);
        }
        member.iter_mut().for_each(|m| *m = false);
        for &i in &order[..size] {
            member[i] = true;
        }
        checker.degrees_into(&member, &mut degrees);
        record(&member, &degrees);
    }

    let row_sums = a.row_sums();
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by(|&i, &j| row_sums[j].total_cmp(&row_sums[i]).then(i.cmp(&j)));
    member.iter_mut().for_each(|m| *m = false);
    degrees.iter_mut().for_each(|d| *d = 0.0);
    for &j in &by_degree {
        member[j] = true;
        for (i, d) in degrees.iter_mut().enumerate() {
            *d += a.get(i, j);
        }
        record(&member, &degrees);
    }
    Ok(report)
}

struct SubsetChecker<'a> {
    a: &'a SymMatrix,
    mu: f64,
    eps: f64,
    delta: f64,
}

impl SubsetChecker<'_> {
    fn degrees_into(&self, member: &[bool], out: &mut [f64]) {
        for (i, d) in out.iter_mut().enumerate() {
            *d = self.a.row(i).iter().zip(member).filter(|(_, &m)| m).map(|(x, _)| x).sum();
        }
    }

    /// The exception set is every `i ∉ V` whose partial degree strays more than
    /// `nμε` from `μ|V|`; the subset fails if some row puts more than `nδ`
    /// mass on it.
    fn violates(&self, member: &[bool], degrees: &[f64]) -> bool {
        let n = self.a.n();
        let size = member.iter().filter(|&&m| m).count() as f64;
        let center = self.mu * size;
        let slack = n as f64 * self.mu * self.eps;
        let exceptions: Vec<usize> = (0..n)
            .filter(|&i| !member[i] && (degrees[i] - center).abs() > slack)
            .collect();
        if exceptions.is_empty() {
            return false;
        }
        let budget = n as f64 * self.delta;
        (0..n).any(|i| {
            let row = self.a.row(i);
            exceptions.iter().map(|&j| row[j]).sum::<f64>() > budget
        })
    }
}

/// Full regularity summary for one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub eps_achieved: f64,
    pub eps_target: f64,
    pub almost_regular: bool,
    pub wb_samples: usize,
    pub wb_violations: usize,
    pub k_hat: f64,
}

impl RegularityReport {
    pub fn new(regularity: AlmostRegularity, balance: &WellBalancedReport, k_hat: f64) -> Self {
        RegularityReport {
            eps_achieved: regularity.eps_achieved,
            eps_target: regularity.eps_target,
            almost_regular: regularity.almost_regular,
            wb_samples: balance.subsets_checked,
            wb_violations: balance.violations,
            k_hat,
        }
    }
}

impl FlatReport for RegularityReport {
    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("eps_achieved", self.eps_achieved.to_string()),
            ("eps_target", self.eps_target.to_string()),
            ("almost_regular", self.almost_regular.to_string()),
            ("wb_samples", self.wb_samples.to_string()),
            ("wb_violations", self.wb_violations.to_string()),
            ("k_hat", self.k_hat.to_string()),
        ]
    }
}

/// Checks whether the support graph of `A` (edge `i–j` iff `a_ij > 0`, self
/// loops included) is connected and non-bipartite, which is exactly when
/// `AᵀA` is irreducible.
pub fn check_irreducible(a: &SymMatrix) -> std::result::Result<(), ReducibleWitness> {
    let n = a.n();
    let mut colour: Vec<Option<bool>> = vec![None; n];
    let mut components = Vec::new();
    let mut odd_cycle = false;
    for root in 0..n {
        if colour[root].is_some() {
            continue;
        }
        let mut component = vec![root];
        colour[root] = Some(false);
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            let ci = colour[i].unwrap();
            for (j, &aij) in a.row(i).iter().enumerate() {
                if aij <= 0.0 {
                    continue;
                }
                match colour[j] {
                    None => {
                        colour[j] = Some(!ci);
                        component.push(j);
                        queue.push_back(j);
                    }
                    Some(cj) if cj == ci => odd_cycle = true,
                    Some(_) => {}
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    if components.len() > 1 {
        return Err(ReducibleWitness::Disconnected(components));
    }
    if !odd_cycle {
        let (left, right): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| colour[i] == Some(false));
        return Err(ReducibleWitness::Bipartite(left, right));
    }
    Ok(())
}

pub fn irreducible(a: &SymMatrix) -> bool {
    check_irreducible(a).is_ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    PLessThanR,
    PEqualsR,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::PLessThanR => "p_lt_r",
            Regime::PEqualsR => "p_eq_r",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximizerReport {
    /// `‖v − n^(−1/r) 𝟏‖_∞`.
    pub linf_dist: f64,
    pub bound: f64,
    pub within_bound: bool,
    pub regime: Regime,
}

impl FlatReport for MaximizerReport {
    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("linf_dist", self.linf_dist.to_string()),
            ("bound", self.bound.to_string()),
            ("within_bound", self.within_bound.to_string()),
            ("regime", self.regime.as_str().to_string()),
        ]
    }
}

/// Theoretical ℓ∞ radius around `n^(−1/r) 𝟏`:
/// `√(20K) p/(r−p)` (for `p < r`) or `√(80K)(4 + 1/(r−1))` (for `p = r`),
/// times `n^(−1/r) √(ln n/(nμ))`.
pub fn maximizer_radius(n: usize, mu: f64, params: &NormParams, k: f64) -> (f64, Regime) {
    let (r, p) = (params.r(), params.p());
    let nf = n as f64;
    let tail = nf.powf(-1.0 / r) * (nf.ln() / (nf * mu)).sqrt();
    if p < r {
        ((20.0 * k).sqrt() * p / (r - p) * tail, Regime::PLessThanR)
    } else {
        ((80.0 * k).sqrt() * (4.0 + 1.0 / (r - 1.0)) * tail, Regime::PEqualsR)
    }
}

pub fn maximizer_bound(
    a: &SymMatrix,
    params: &NormParams,
    result: &PowerResult,
    mu: f64,
    k: f64,
) -> Result<MaximizerReport> {
    check_mu(mu)?;
    let n = a.n();
    if result.v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: result.v.len() });
    }
    let uniform = (n as f64).powf(-1.0 / params.r());
    let linf_dist = result.v.iter().fold(0.0_f64, |m, x| m.max((x - uniform).abs()));
    let (bound, regime) = maximizer_radius(n, mu, params, k);
    Ok(MaximizerReport { linf_dist, bound, within_bound: linf_dist <= bound, regime })
}
