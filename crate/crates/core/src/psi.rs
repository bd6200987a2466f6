//! The momentum map `psi(s) = s / sqrt(1 + s^2)` and its inverse.
//!
//! `psi` sends finite slopes into the open interval (-1, 1); `|psi| = 1` encodes an
//! infinite slope.

use crate::error::CoreError;

/// `s / sqrt(1 + s^2)`, evaluated without overflow for large `|s|`.
pub fn psi(s: f64) -> f64 {
    if s.abs() > 1e150 {
        // 1 / sqrt(1 + 1/s^2) with 1/s^2 underflowing is exactly sign(s)
        return s.signum() / (1.0 + (1.0 / s).powi(2)).sqrt();
    }
    s / (1.0 + s * s).sqrt()
}

/// `p / sqrt(1 - p^2)`, the slope carrying momentum `p`.
pub fn psi_inv(p: f64) -> Result<f64, CoreError> {
    if !(p.abs() < 1.0) {
        return Err(CoreError::SlopeInfinite(p));
    }
    // (1 - p)(1 + p) keeps the relative accuracy of 1 - p^2 near |p| = 1
    Ok(p / ((1.0 - p) * (1.0 + p)).sqrt())
}

/// Derivative of `psi`: `(1 + s^2)^(-3/2)`.
pub fn psi_prime(s: f64) -> f64 {
    (1.0 + s * s).powf(-1.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn psi_examples() {
        assert_eq!(psi(0.0), 0.0);
        assert!((psi(1.0) - std::f64::consts::FRAC_1_SQRT_2).abs() <= f64::EPSILON);
        assert!((psi(-3.0) + 3.0 / 10f64.sqrt()).abs() <= f64::EPSILON);
    }

    #[test]
    fn psi_inv_examples() {
        assert_eq!(psi_inv(0.0).unwrap(), 0.0);
        assert!((psi_inv(std::f64::consts::FRAC_1_SQRT_2).unwrap() - 1.0).abs() < 1e-15);
        // 0.9999 / sqrt(1 - 0.9999^2) = 0.9999 / sqrt(0.00019999)
        let expected = 0.9999 / 0.000_199_99f64.sqrt();
        let got = psi_inv(0.9999).unwrap();
        assert!((got - expected).abs() < 1e-9 * expected, "{got} vs {expected}");
        assert!((70.70..70.72).contains(&got));
        assert!((psi(got) - 0.9999).abs() < 1e-15);
    }

    #[test]
    fn psi_inv_rejects_saturated() {
        assert_eq!(psi_inv(1.0), Err(CoreError::SlopeInfinite(1.0)));
        assert!(psi_inv(-1.5).is_err());
        assert!(psi_inv(f64::NAN).is_err());
    }

    #[test]
    fn psi_tends_to_one_monotonically() {
        let mut prev = 0.0;
        for k in 1..=7 {
            let s = 10f64.powi(k);
            let v = psi(s);
            assert!(v < 1.0 && v >= prev, "k = {k}: {v}");
            assert_eq!(psi(-s), -v);
            prev = v;
        }
        // past |s| ~ 1e8 the value rounds to 1, which the solver reads as saturation
        assert!(psi(1e12) <= 1.0);
        assert!(psi(1e200) <= 1.0);
    }

    proptest! {
        #[test]
        fn psi_strictly_increasing(a in -1e3f64..1e3, b in -1e3f64..1e3) {
            prop_assume!(a < b);
            prop_assert!(psi(a) < psi(b));
        }

        #[test]
        fn psi_bounded(s in -1e7f64..1e7, big in -1e300f64..1e300) {
            prop_assert!(psi(s).abs() < 1.0);
            prop_assert!(psi(big).abs() <= 1.0);
        }

        #[test]
        fn psi_round_trip(s in -50f64..50.0) {
            let back = psi_inv(psi(s)).unwrap();
            prop_assert!((back - s).abs() <= 1e-12 * s.abs() + 1e-300, "{} -> {}", s, back);
        }

        // psi_inv amplifies the rounding of psi(s) by (1 + s^2)^(3/2); beyond |s| ~ 50
        // the round trip is limited by that conditioning, not by the formula.
        #[test]
        fn psi_round_trip_conditioned(s in -1e3f64..1e3) {
            let back = psi_inv(psi(s)).unwrap();
            let bound = 4.0 * f64::EPSILON * (1.0 + s * s) * s.abs() + 1e-300;
            prop_assert!((back - s).abs() <= bound.max(1e-12 * s.abs()), "{} -> {}", s, back);
        }
    }
}
