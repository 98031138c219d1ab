//! Scalar and vector maps shared by the iteration and the diagnostics.

use crate::error::{Error, Result};

/// Signed power `|t|^(q-1) sgn(t)`, with `sgn(0) = 0`.
///
/// `q = 1` yields `sgn(t)`; `q = 2` is the identity.
#[inline]
pub fn psi(q: f64, t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if q == 2.0 {
        t
    } else {
        t.abs().powf(q - 1.0).copysign(t)
    }
}

/// Entrywise [`psi`].
pub fn big_psi(q: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|&t| psi(q, t)).collect()
}

pub(crate) fn big_psi_in_place(q: f64, x: &mut [f64]) {
    for t in x.iter_mut() {
        *t = psi(q, *t);
    }
}

/// The ℓ_q norm. The largest magnitude is factored out before raising to
/// the power `q`, so large exponents do not overflow.
pub fn lq_norm(q: f64, x: &[f64]) -> f64 {
    debug_assert!(q >= 1.0);
    if q == 1.0 {
        return x.iter().map(|t| t.abs()).sum();
    }
    let m = x.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    if q == 2.0 {
        let s: f64 = x.iter().map(|t| t * t).sum();
        if s.is_finite() && s >= f64::MIN_POSITIVE {
            return s.sqrt();
        }
        let s: f64 = x.iter().map(|t| (t / m) * (t / m)).sum();
        return m * s.sqrt();
    }
    let s: f64 = x.iter().map(|t| (t.abs() / m).powf(q)).sum();
    m * s.powf(1.0 / q)
}

/// `r / (r - 1)`, the exponent dual to `r`.
pub fn holder_conjugate(r: f64) -> f64 {
    r / (r - 1.0)
}

/// Weighted ℓ₂ norm `(Σ v_i^(r-2) x_i²)^(1/2)` for a positive weight vector `v`.
pub fn v_norm(v: &[f64], x: &[f64], r: f64) -> Result<f64> {
    v_inner(v, x, x, r).map(f64::sqrt)
}

/// Inner product `Σ v_i^(r-2) x_i y_i` that makes the linearized iteration self-adjoint.
pub fn v_inner(v: &[f64], x: &[f64], y: &[f64], r: f64) -> Result<f64> {
    check_len(v.len(), x.len())?;
    check_len(v.len(), y.len())?;
    check_positive(v)?;
    Ok(v.iter()
        .zip(x.iter().zip(y))
        .map(|(&vi, (&xi, &yi))| weight(vi, r) * xi * yi)
        .sum())
}

#[inline]
fn weight(vi: f64, r: f64) -> f64 {
    if r == 2.0 {
        1.0
    } else {
        vi.powf(r - 2.0)
    }
}

pub(crate) fn check_positive(v: &[f64]) -> Result<()> {
    match v.iter().position(|&t| !(t > 0.0)) {
        Some(i) => Err(Error::NonPositive(i)),
        None => Ok(()),
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn linf_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
}

pub(crate) fn scale_in_place(x: &mut [f64], c: f64) {
    for t in x.iter_mut() {
        *t *= c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn psi_examples() {
        assert_eq!(psi(2.0, -3.0), -3.0);
        assert_eq!(psi(3.0, -2.0), -4.0);
        assert_eq!(psi(1.5, 0.0), 0.0);
        assert_eq!(psi(1.0, -0.3), -1.0);
    }

    #[test]
    fn big_psi_examples() {
        assert_eq!(big_psi(2.0, &[1.0, -2.0, 0.0]), vec![1.0, -2.0, 0.0]);
        assert_eq!(big_psi(3.0, &[1.0, 2.0]), vec![1.0, 4.0]);
        let y = big_psi(1.5, &[4.0, 9.0]);
        assert_relative_eq!(y[0], 2.0, epsilon = 1e-15);
        assert_relative_eq!(y[1], 3.0, epsilon = 1e-15);
    }

    #[test]
    fn lq_norm_examples() {
        assert_eq!(lq_norm(2.0, &[3.0, 4.0]), 5.0);
        assert_eq!(lq_norm(1.0, &[1.0, -1.0, 1.0]), 3.0);
        assert_relative_eq!(lq_norm(4.0, &[1.0, 1.0]), 2f64.powf(0.25), epsilon = 1e-15);
        assert_eq!(lq_norm(3.0, &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn lq_norm_large_exponent_does_not_overflow() {
        let x = [1e200, 1e200];
        let got = lq_norm(50.0, &x);
        assert!(got.is_finite());
        assert_relative_eq!(got, 1e200 * 2f64.powf(1.0 / 50.0), max_relative = 1e-14);
    }

    #[test]
    fn holder_conjugate_examples() {
        assert_eq!(holder_conjugate(2.0), 2.0);
        assert_eq!(holder_conjugate(3.0), 1.5);
        assert_relative_eq!(holder_conjugate(1.5), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn v_norm_examples() {
        assert_eq!(v_norm(&[1.0, 1.0], &[3.0, 4.0], 2.0).unwrap(), 5.0);
        assert_eq!(v_norm(&[1.0, 1.0], &[3.0, 4.0], 4.0).unwrap(), 5.0);
        assert_relative_eq!(
            v_norm(&[4.0, 1.0], &[1.0, 1.0], 3.0).unwrap(),
            5f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn v_norm_rejects_nonpositive_weights() {
        assert!(matches!(
            v_norm(&[1.0, 0.0], &[1.0, 1.0], 3.0),
            Err(Error::NonPositive(1))
        ));
        assert!(matches!(
            v_norm(&[1.0], &[1.0, 1.0], 3.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn psi_is_odd(q in 1.0001f64..8.0, t in -1e3f64..1e3) {
            prop_assert_eq!(psi(q, -t), -psi(q, t));
        }

        #[test]
        fn lq_norm_is_absolutely_homogeneous(
            q in 1.0f64..12.0,
            c in -1e3f64..1e3,
            x in proptest::collection::vec(-1e3f64..1e3, 1..20),
        ) {
            let lhs = lq_norm(q, &x.iter().map(|t| c * t).collect::<Vec<_>>());
            let rhs = c.abs() * lq_norm(q, &x);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn holder_conjugate_is_an_involution(r in 1.001f64..1e3) {
            let back = holder_conjugate(holder_conjugate(r));
            prop_assert!((back - r).abs() <= 1e-12 * r);
        }

        #[test]
        fn v_norm_at_ones_is_euclidean(x in proptest::collection::vec(-1e3f64..1e3, 1..20)) {
            let ones = vec![1.0; x.len()];
            prop_assert_eq!(v_norm(&ones, &x, 2.0).unwrap(), lq_norm(2.0, &x));
        }
    }
}
