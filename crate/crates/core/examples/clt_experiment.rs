//! Monte Carlo fluctuations of the norm of a dense ER matrix.
//!
//! The standardized norm should look like Normal(0, 2). Use at least a few
//! hundred replicates before reading anything into the KS p-value.
//!
//! cargo run --release --example clt_experiment -- [replicates]

use opnorm::ensembles::EnsembleSpec;
use opnorm::stats::{run_clt_experiment, write_csv, CltOptions, Mode};
use opnorm::NormParams;

fn main() -> opnorm::Result<()> {
    let replicates = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let spec = EnsembleSpec::er(300, 0.3, 2024);
    let params = NormParams::new(3.0, 2.0)?;
    let run = run_clt_experiment(&spec, &params, replicates, Mode::Hom, &CltOptions::default())?;

    let s = &run.summary;
    println!("replicates      {}", s.replicates);
    println!("mean            {:+.4}   (limit 0)", s.mean);
    println!("variance        {:.4}    (limit 2)", s.variance);
    println!("KS distance     {:.4}    p = {:.3}", s.ks_distance, s.ks_pvalue);
    println!("mean shift      {:.4}    predicted {:.4}", s.observed_shift, s.predicted_shift);
    println!("max |γ − η|     {:.2e}", s.max_eta_gap);

    let path = std::env::temp_dir().join("opnorm_clt_example.csv");
    write_csv(&run.records, &mut std::fs::File::create(&path)?)?;
    println!("per-replicate rows in {}", path.display());
    Ok(())
}
