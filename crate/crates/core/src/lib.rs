//! `r → p` operator norms of symmetric nonnegative matrices.
//!
//! The norm `‖A‖_{r→p} = sup_{‖x‖_r ≤ 1} ‖A x‖_p` is computed by a nonlinear
//! power iteration ([`boyd`]). Around it sit the tools used to study the norm
//! of large random matrices: spectral gaps ([`spectral`]), brute-force
//! maximizers for tiny instances ([`oracle`]), seeded ensembles
//! ([`ensembles`]), structural checks ([`diagnostics`]) and Monte Carlo
//! experiments for the fluctuations of the norm ([`stats`]).

// `!(x > 0.0)` is how validation rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boyd;
pub mod cli;
pub mod diagnostics;
pub mod ensembles;
pub mod error;
pub mod ks;
pub mod linalg;
pub mod matrix;
pub mod mtx;
pub mod oracle;
pub mod params;
pub mod report;
pub mod rng;
pub mod spectral;
pub mod stats;

pub use boyd::{compute_norm, PowerOptions, PowerResult};
pub use error::{Error, ReducibleWitness, Result};
pub use matrix::SymMatrix;
pub use params::NormParams;
pub use report::FlatReport;
