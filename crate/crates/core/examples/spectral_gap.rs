//! Second eigenvalues behind the convergence rate of the iteration.
//!
//! cargo run --release --example spectral_gap

use opnorm::ensembles::EnsembleSpec;
use opnorm::spectral::{check_bounds, lambda2_b, lambda_big2, EntryMoments, DEFAULT_TOL};
use opnorm::{compute_norm, FlatReport, NormParams, PowerOptions, SymMatrix};

fn main() -> opnorm::Result<()> {
    // μ(J − I) has spectrum {(n−1)μ, −μ, …, −μ}, so Λ₂ = μ exactly.
    let flat = SymMatrix::mean_matrix(40, 0.25)?;
    println!("Λ₂ of 0.25(J − I): {:.12}", lambda_big2(&flat, 1e-12)?);

    let (n, mu) = (300, 0.3);
    let a = EnsembleSpec::er(n, mu, 3).sample()?;
    let params = NormParams::new(3.0, 2.0)?;
    let res = compute_norm(&a, &params, &PowerOptions::default())?;
    let second = lambda2_b(&a, &params, &res.v, DEFAULT_TOL)?;
    println!("ER(n={n}, μ={mu}), r=3 p=2: γ = {:.6}, λ₂(B) = {:.6}", res.gamma, second.value);

    let report = check_bounds(&a, &params, &res, EntryMoments::off_diagonal(mu, mu * (1.0 - mu)))?;
    print!("{}", report.to_kv_block());
    Ok(())
}
