//! Cross-checks the power iteration against brute-force maximizers.
//!
//! cargo run --release --example oracles

use opnorm::oracle::{maximize_grid, maximize_multistart};
use opnorm::rng::keyed_rng;
use opnorm::{compute_norm, NormParams, PowerOptions, SymMatrix};
use rand::Rng;

fn main() -> opnorm::Result<()> {
    let mut rng = keyed_rng(7, 0);
    println!("{:>3} {:>5} {:>5} {:>14} {:>10} {:>10}", "n", "r", "p", "gamma", "grid gap", "multi gap");
    for trial in 0..8u64 {
        let n = 2 + (trial % 2) as usize;
        let a = SymMatrix::from_upper_fn(n, |_, _| 0.1 + rng.random::<f64>())?;
        let p = 1.1 + 2.0 * rng.random::<f64>();
        let r = p + (4.0 - p) * rng.random::<f64>();
        let params = NormParams::new(r, p)?;

        let gamma = compute_norm(&a, &params, &PowerOptions::default())?.gamma;
        let grid = maximize_grid(&a, &params, 1000)?;
        let multi = maximize_multistart(&a, &params, 20, 1e-12, trial)?;
        println!(
            "{n:>3} {r:>5.2} {p:>5.2} {gamma:>14.10} {:>10.1e} {:>10.1e}",
            (gamma - grid.value).abs(),
            (gamma - multi.value).abs()
        );
    }
    Ok(())
}
