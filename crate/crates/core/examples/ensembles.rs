//! Every ensemble family, a variance profile and a random diagonal.
//!
//! cargo run --release --example ensembles

use opnorm::ensembles::{center, CustomTable, DiagonalFamily, DiagonalLaw, EnsembleSpec, Family, VarianceProfile};

fn main() -> opnorm::Result<()> {
    let n = 400;
    let specs = [
        EnsembleSpec::er(n, 0.3, 1),
        EnsembleSpec::new(Family::BernoulliScaled, n, 0.3, 1).with_sigma2(0.5),
        EnsembleSpec::new(Family::Uniform, n, 0.3, 1).with_sigma2(0.02),
        EnsembleSpec::new(Family::Exponential, n, 0.3, 1),
        EnsembleSpec::new(Family::CustomIid, n, 0.55, 1)
            .with_custom(CustomTable { support: vec![0.0, 0.5, 2.0], probs: vec![0.5, 0.3, 0.2] }),
    ];
    println!("{:<18} {:>8} {:>8} {:>10} {:>10}", "family", "mu", "sigma2", "mean", "var");
    for spec in &specs {
        let a = spec.sample()?;
        let (m, v) = a.off_diagonal_moments();
        println!("{:<18} {:>8.4} {:>8.4} {m:>10.4} {v:>10.4}", format!("{:?}", spec.family), spec.mu, spec.sigma2()?);
    }

    // Two communities with different spreads; the mean stays flat. The
    // multipliers scale the standard deviation, so variances are m² σ².
    let profile = VarianceProfile::two_block(n, n / 2, 1.5, 0.5, 1.0)?;
    let spec = EnsembleSpec::new(Family::BernoulliScaled, n, 0.3, 2).with_sigma2(0.2).with_profile(profile);
    let a = spec.sample()?;
    let block_var = |lo: usize, hi: usize| {
        let vals: Vec<f64> = (lo..hi).flat_map(|i| (i + 1..hi).map(move |j| (i, j))).map(|(i, j)| a.get(i, j)).collect();
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        vals.iter().map(|x| (x - m).powi(2)).sum::<f64>() / vals.len() as f64
    };
    println!(
        "\ntwo-block profile: variance {:.4} in block 1 (expect {:.4}), {:.4} in block 2 (expect {:.4})",
        block_var(0, n / 2),
        1.5f64.powi(2) * 0.2,
        block_var(n / 2, n),
        0.5f64.powi(2) * 0.2
    );

    let diag = DiagonalLaw { family: DiagonalFamily::Uniform, mean: 0.4, variance: 0.01 };
    let a = EnsembleSpec::er(n, 0.3, 3).with_diagonal(diag).sample()?;
    let mean_diag = (0..n).map(|i| a.get(i, i)).sum::<f64>() / n as f64;
    println!("random diagonal: mean {mean_diag:.4}");

    let centered = center(&a, 0.3)?;
    let drift = centered.row_means().iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    println!("centered A − μ(J − I): largest row mean {drift:.4}");
    Ok(())
}
