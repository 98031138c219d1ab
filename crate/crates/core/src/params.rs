use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::holder_conjugate;

/// Exponent pair for the `r → p` norm, restricted to `1 < p ≤ r < ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct NormParams {
    r: f64,
    p: f64,
    r_star: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    r: f64,
    p: f64,
}

impl TryFrom<RawParams> for NormParams {
    type Error = crate::Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        NormParams::new(raw.r, raw.p)
    }
}

impl From<NormParams> for RawParams {
    fn from(params: NormParams) -> Self {
        RawParams { r: params.r, p: params.p }
    }
}

impl NormParams {
    pub fn new(r: f64, p: f64) -> Result<Self> {
        if !(r.is_finite() && p.is_finite()) {
            return Err(invalid(format!("r and p must be finite (r = {r}, p = {p})")));
        }
        if !(p > 1.0) {
            return Err(invalid(format!("p must be > 1 (p = {p})")));
        }
        if !(p <= r) {
            return Err(invalid(format!("p must not exceed r (r = {r}, p = {p})")));
        }
        Ok(NormParams { r, p, r_star: holder_conjugate(r) })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn r_star(&self) -> f64 {
        self.r_star
    }

    /// `1/p − 1/r`; the norm of an `n × n` matrix with unit row sums grows like `n^(1/p − 1/r)`.
    pub fn scale_exponent(&self) -> f64 {
        1.0 / self.p - 1.0 / self.r
    }

    /// Exponent `p(r* − 1)` in the fixed-point relation `Sv = γ^(p(r*−1)) v`.
    pub fn eigen_exponent(&self) -> f64 {
        self.p * (self.r_star - 1.0)
    }

    /// `p − 1 + 1/(r − 1)`, the curvature factor of the centering shift.
    pub fn shift_factor(&self) -> f64 {
        self.p - 1.0 + 1.0 / (self.r - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_valid_pairs() {
        let params = NormParams::new(3.0, 2.0).unwrap();
        assert_eq!(params.r_star(), 1.5);
        assert_eq!(params.eigen_exponent(), 1.0);
        assert_eq!(params.shift_factor(), 1.5);
        assert!(NormParams::new(2.0, 2.0).is_ok());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(NormParams::new(2.0, 1.0).is_err());
        assert!(NormParams::new(2.0, 3.0).is_err());
        assert!(NormParams::new(f64::INFINITY, 2.0).is_err());
        assert!(NormParams::new(f64::NAN, 2.0).is_err());
    }

    #[test]
    fn deserialization_validates() {
        let ok: NormParams = serde_json::from_str(r#"{"r": 4, "p": 1.5}"#).unwrap();
        assert_eq!(ok.r_star(), 4.0 / 3.0);
        assert!(serde_json::from_str::<NormParams>(r#"{"r": 1.5, "p": 2}"#).is_err());
    }
}
