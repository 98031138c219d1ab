//! Finite-difference derivatives of the one-step estimate η at μ(J − I),
//! compared with their closed forms.
//!
//! cargo run --release --example derivatives

use opnorm::stats::derivative_check;
use opnorm::NormParams;

fn main() -> opnorm::Result<()> {
    println!("{:>4} {:>4} {:>12} {:>12} {:>9} {:>12} {:>12} {:>9}", "r", "p", "grad fd", "grad", "rel", "hess fd", "hess", "rel");
    for (r, p) in [(2.0, 2.0), (3.0, 2.0), (3.0, 3.0), (4.0, 1.5)] {
        let d = derivative_check(200, 0.5, &NormParams::new(r, p)?, 1e-4)?;
        println!(
            "{r:>4} {p:>4} {:>12.6e} {:>12.6e} {:>9.2e} {:>12.6e} {:>12.6e} {:>9.2e}",
            d.grad_fd, d.grad_theory, d.rel_err_grad, d.hess_diag_fd, d.hess_diag_theory, d.rel_err_hess
        );
    }

    println!("\ngradient error as the step shrinks, r=3 p=2");
    let params = NormParams::new(3.0, 2.0)?;
    for h in [1e-2, 5e-3, 2.5e-3, 1.25e-3] {
        let d = derivative_check(100, 0.5, &params, h)?;
        println!("  h={h:<8} |fd − theory| = {:.3e}", (d.grad_fd - d.grad_theory).abs());
    }
    Ok(())
}
