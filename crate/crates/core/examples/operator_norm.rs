//! ‖A‖_{r→p} on a few small matrices, with the power iteration unrolled.
//!
//! cargo run --example operator_norm

use opnorm::boyd::{fixed_point_residual, iterates, objective, uniform_start};
use opnorm::oracle::{analytic_norm, AnalyticKind};
use opnorm::{compute_norm, NormParams, PowerOptions, SymMatrix};

fn main() -> opnorm::Result<()> {
    let swap = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])?;
    for (r, p) in [(2.0, 2.0), (3.0, 2.0), (4.0, 1.5), (3.0, 3.0)] {
        let params = NormParams::new(r, p)?;
        let res = compute_norm(&swap, &params, &PowerOptions::default())?;
        let exact = analytic_norm(AnalyticKind::Perm, 2, 0.0, &params)?.value;
        println!("swap  r={r} p={p}  gamma={:.10}  closed form={exact:.10}", res.gamma);
    }

    // A weighted triangle with a heavy edge: the maximizer leans toward it.
    let a = SymMatrix::from_rows(&[vec![0.0, 3.0, 1.0], vec![3.0, 0.0, 1.0], vec![1.0, 1.0, 0.5]])?;
    let params = NormParams::new(3.0, 2.0)?;
    println!("\nweighted triangle, r=3 p=2: objective along the iteration");
    for (k, x) in iterates(&a, &params, &uniform_start(3, 3.0))?.take(6).enumerate() {
        let x = x?;
        println!("  step {k}: {:.12}  x = {x:.5?}", objective(&a, &params, &x)?);
    }
    let res = compute_norm(&a, &params, &PowerOptions::default())?;
    println!(
        "converged: gamma={:.12} after {} iterations, residual {:.1e} (recomputed {:.1e})",
        res.gamma,
        res.iterations,
        res.residual,
        fixed_point_residual(&a, &params, &res.v)?
    );

    // Reducible input is refused with a witness instead of a wrong answer.
    let path = SymMatrix::from_rows(&[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]])?;
    match compute_norm(&path, &NormParams::new(2.0, 2.0)?, &PowerOptions::default()) {
        Ok(r) => println!("\npath graph: {}", r.gamma),
        Err(e) => println!("\npath graph: {e}"),
    }
    Ok(())
}
