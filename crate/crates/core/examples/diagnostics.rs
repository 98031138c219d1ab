//! Structural checks on one ER draw plus two toy graphs.
//!
//! cargo run --release --example diagnostics

use opnorm::diagnostics::{
    almost_regular, check_irreducible, default_delta, k_hat, maximizer_bound, well_balanced_sampled, RegularityReport,
};
use opnorm::ensembles::{epsilon_n, EnsembleSpec};
use opnorm::{compute_norm, FlatReport, NormParams, PowerOptions, SymMatrix};

fn main() -> opnorm::Result<()> {
    let path = SymMatrix::from_rows(&[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]])?;
    let two_edges = SymMatrix::from_rows(&[
        vec![0.0, 1.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
        vec![0.0, 0.0, 1.0, 0.0],
    ])?;
    for (name, m) in [("path", &path), ("two edges", &two_edges)] {
        match check_irreducible(m) {
            Ok(()) => println!("{name}: irreducible"),
            Err(w) => println!("{name}: {w}"),
        }
    }

    let (n, mu) = (800, 0.5);
    let a = EnsembleSpec::er(n, mu, 12).sample()?;
    let k = k_hat(&a);
    let eps = epsilon_n(n, mu, k);
    let regular = almost_regular(&a, mu, eps)?;
    let balance = well_balanced_sampled(&a, mu, eps, default_delta(n, mu, eps, k), 300, 12)?;
    println!("\nER(n={n}, μ={mu})");
    print!("{}", RegularityReport::new(regular, &balance, k).to_kv_block());

    for (r, p) in [(3.0, 2.0), (2.0, 2.0)] {
        let params = NormParams::new(r, p)?;
        let res = compute_norm(&a, &params, &PowerOptions::default())?;
        println!("\nmaximizer, r={r} p={p}");
        print!("{}", maximizer_bound(&a, &params, &res, mu, k)?.to_kv_block());
    }
    Ok(())
}
