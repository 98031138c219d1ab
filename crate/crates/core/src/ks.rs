//! One-sample Kolmogorov–Smirnov test.

use statrs::function::erf::erf;

/// CDF of Normal(0, `variance`).
pub fn normal_cdf(x: f64, variance: f64) -> f64 {
    0.5 * (1.0 + erf(x / (2.0 * variance).sqrt()))
}

/// `sup_x |F_n(x) − F(x)|` for the empirical CDF of `samples`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Asymptotic p-value `Q(√n · d)` with
/// `Q(λ) = 2 Σ_{k≥1} (−1)^(k−1) exp(−2k²λ²)`.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let lambda = (n as f64).sqrt() * d;
    if lambda < 0.2 {
        // The series converges too slowly here and Q is 1 to double precision.
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-300 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
