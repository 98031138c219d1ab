//! Writes a matrix in both Matrix Market layouts and reads it back.
//!
//! cargo run --example matrix_market

use opnorm::mtx::{read_matrix_market, read_matrix_market_file, write_matrix_market, write_matrix_market_file, Layout};
use opnorm::{compute_norm, NormParams, PowerOptions, SymMatrix};

fn main() -> opnorm::Result<()> {
    let a = SymMatrix::from_rows(&[vec![0.0, 2.0, 0.5], vec![2.0, 0.0, 1.0], vec![0.5, 1.0, 0.0]])?;

    let mut text = Vec::new();
    write_matrix_market(&a, &mut text, Layout::Coordinate)?;
    println!("{}", String::from_utf8_lossy(&text));

    let back = read_matrix_market(text.as_slice())?;
    assert_eq!(back, a);

    let path = std::env::temp_dir().join("opnorm_example.mtx");
    write_matrix_market_file(&a, &path, Layout::Array)?;
    let from_disk = read_matrix_market_file(&path)?;
    let gamma = compute_norm(&from_disk, &NormParams::new(3.0, 2.0)?, &PowerOptions::default())?.gamma;
    println!("array layout round trip ok; ‖A‖_(3→2) = {gamma:.10}");
    println!("try: opnorm norm --matrix {} --r 3 --p 2", path.display());
    Ok(())
}
