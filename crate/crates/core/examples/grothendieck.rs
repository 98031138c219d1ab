//! M_r(A) = max xᵀAx over ‖x‖_r ≤ 1, computed as the r → r* norm.
//!
//! cargo run --release --example grothendieck

use opnorm::ensembles::EnsembleSpec;
use opnorm::oracle::maximize_quadratic_form;
use opnorm::stats::grothendieck_mr;
use opnorm::{PowerOptions, SymMatrix};

fn main() -> opnorm::Result<()> {
    let swap = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])?;
    for r in [2.0, 3.0, 4.0] {
        let m = grothendieck_mr(&swap, r, &PowerOptions::default())?;
        println!("swap, r={r}: M_r = {m:.10}   (2^(1−2/r) = {:.10})", 2f64.powf(1.0 - 2.0 / r));
    }

    let a = EnsembleSpec::er(6, 0.7, 42).sample()?;
    println!();
    for r in [2.0, 2.5, 3.0, 4.0] {
        let m = grothendieck_mr(&a, r, &PowerOptions::default())?;
        let direct = maximize_quadratic_form(&a, r, 20, 1e-12, 1)?;
        println!("ER(6), r={r}: M_r = {m:.10}   direct ascent = {:.10}", direct.value);
    }

    if let Err(e) = grothendieck_mr(&swap, 1.5, &PowerOptions::default()) {
        println!("\nr = 1.5 is refused: {e}");
    }
    Ok(())
}
