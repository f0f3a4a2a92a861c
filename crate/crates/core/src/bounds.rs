//! The pointwise volume bound `F` and the two-sided sandwich estimates.
//!
//! `F(s)` is the least value of `dist^2(A, SO2)` over matrices with
//! `det A = s`:
//!
//! ```text
//! F(s) = 1 - 2s             for 0 <= s <= 1/4
//! F(s) = 2 (sqrt(s) - 1)^2  for s >= 1/4
//! ```
//!
//! Below `1/4` the minimizers form the well `K`, above it they are conformal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::{self, Mat2};

/// Phase transition point of `F`.
pub const THRESHOLD: f64 = 0.25;

fn check_ratio(s: f64) -> Result<()> {
    if s >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeRatio(s))
    }
}

/// `F(s)`.
pub fn volume_bound(s: f64) -> Result<f64> {
    check_ratio(s)?;
    Ok(if s <= THRESHOLD {
        1.0 - 2.0 * s
    } else {
        2.0 * (s.sqrt() - 1.0).powi(2)
    })
}

/// `F'(s)`; continuous with value `-2` at the threshold.
pub fn volume_bound_deriv(s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::NegativeRatio(s));
    }
    Ok(if s <= THRESHOLD {
        -2.0
    } else {
        2.0 * (1.0 - 1.0 / s.sqrt())
    })
}

/// `F(s)^{p/2}`, the bound for `E_p`.
pub fn volume_bound_pow(s: f64, p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(Error::PowerBelowTwo(p));
    }
    Ok(volume_bound(s)?.powf(0.5 * p))
}

/// `F` and `F'` at one ratio, with the `p`-power applied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundProfile {
    pub s: f64,
    pub p: f64,
    pub value: f64,
    /// `None` at `s = 0`, where `F'` is one-sided.
    pub derivative: Option<f64>,
    pub powered: f64,
}

impl BoundProfile {
    pub fn at(s: f64, p: f64) -> Result<Self> {
        let value = volume_bound(s)?;
        let powered = volume_bound_pow(s, p)?;
        let derivative = if s > 0.0 { Some(volume_bound_deriv(s)?) } else { None };
        Ok(Self {
            s,
            p,
            value,
            derivative,
            powered,
        })
    }
}

/// `lower <= mid <= upper` triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub lower: f64,
    pub mid: f64,
    pub upper: f64,
}

impl Sandwich {
    pub fn is_ordered(&self, tol: f64) -> bool {
        self.lower <= self.mid + tol && self.mid <= self.upper + tol
    }

    /// Smallest of `mid - lower` and `upper - mid`; negative on violation.
    pub fn margin(&self) -> f64 {
        (self.mid - self.lower).min(self.upper - self.mid)
    }
}

/// `(dist^2(A,K), dist^2(A,SO2) - (1 - 2 det A), 2 dist^2(A,K))`.
///
/// The middle member equals `(s1 + s2 - 1)^2`.
pub fn sandwich_k(a: &Mat2) -> Result<Sandwich> {
    let det = a.det();
    let dk = mat2::dist_k(a)?;
    let dso = mat2::dist_so2(a)?;
    let lower = dk * dk;
    Ok(Sandwich {
        lower,
        mid: dso * dso - (1.0 - 2.0 * det),
        upper: 2.0 * lower,
    })
}

/// Conformal sandwich.
///
/// `lower = (sqrt(s2) - sqrt(s1))^4` is only a valid lower member for
/// `det A >= 1/4` and is `None` below that; `mid <= upper` holds for all
/// `det A >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalSandwich {
    pub lower: Option<f64>,
    pub mid: f64,
    pub upper: f64,
}

impl ConformalSandwich {
    pub fn is_ordered(&self, tol: f64) -> bool {
        let right = self.mid <= self.upper + tol;
        match self.lower {
            Some(l) => right && l <= self.mid + tol,
            None => right,
        }
    }

    pub fn margin(&self) -> f64 {
        let right = self.upper - self.mid;
        match self.lower {
            Some(l) => right.min(self.mid - l),
            None => right,
        }
    }
}

pub fn sandwich_co(a: &Mat2) -> Result<ConformalSandwich> {
    let det = a.det();
    let dso = mat2::dist_so2(a)?;
    let dco = mat2::dist_co2(a)?;
    let sv = mat2::singular_values(a);
    let lower = (det >= THRESHOLD).then(|| (sv.sigma2.sqrt() - sv.sigma1.sqrt()).powi(4));
    Ok(ConformalSandwich {
        lower,
        mid: dso * dso - 2.0 * (det.sqrt() - 1.0).powi(2),
        upper: 2.0 * dco * dco,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn f_examples() {
        assert_abs_diff_eq!(volume_bound(0.25).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(volume_bound(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(volume_bound(1.0 / 9.0).unwrap(), 7.0 / 9.0, epsilon = 1e-15);
        // both branch formulas agree at the threshold
        assert_abs_diff_eq!(1.0 - 2.0 * 0.25, 2.0 * (0.5f64 - 1.0).powi(2));
        assert!(matches!(volume_bound(-1e-3), Err(Error::NegativeRatio(_))));
    }

    #[test]
    fn f_prime_examples() {
        assert_abs_diff_eq!(volume_bound_deriv(0.25).unwrap(), -2.0);
        assert_abs_diff_eq!(volume_bound_deriv(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(volume_bound_deriv(4.0).unwrap(), 1.0);
        assert!(volume_bound_deriv(0.0).is_err());
        // continuity from the right of the threshold
        assert_abs_diff_eq!(volume_bound_deriv(0.25 + 1e-12).unwrap(), -2.0, epsilon = 1e-10);
    }

    #[test]
    fn f_prime_matches_central_difference() {
        let h = 1e-5;
        for &s in &[0.05, 0.1, 0.2, 0.3, 0.5, 0.9, 1.0, 1.7, 4.0, 9.0] {
            let fd = (volume_bound(s + h).unwrap() - volume_bound(s - h).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(volume_bound_deriv(s).unwrap(), fd, epsilon = 1e-8);
        }
    }

    #[test]
    fn f_pow_examples() {
        assert_eq!(volume_bound_pow(1.0, 3.0).unwrap(), 0.0);
        assert_abs_diff_eq!(volume_bound_pow(0.25, 2.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(volume_bound_pow(0.25, 4.0).unwrap(), 0.25, epsilon = 1e-15);
        assert!(matches!(volume_bound_pow(0.5, 1.5), Err(Error::PowerBelowTwo(_))));
    }

    #[test]
    fn bound_profile_fields() {
        let b = BoundProfile::at(0.25, 4.0).unwrap();
        assert_abs_diff_eq!(b.value, 0.5);
        assert_abs_diff_eq!(b.powered, 0.25, epsilon = 1e-15);
        assert_eq!(b.derivative, Some(-2.0));
        assert_eq!(BoundProfile::at(0.0, 2.0).unwrap().derivative, None);
    }

    #[test]
    fn sandwich_k_examples() {
        let s = sandwich_k(&Mat2::diag(0.3, 0.7)).unwrap();
        assert_abs_diff_eq!(s.lower, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mid, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.upper, 0.0, epsilon = 1e-15);

        let s = sandwich_k(&Mat2::IDENTITY).unwrap();
        assert_abs_diff_eq!(s.lower, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mid, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.upper, 1.0, epsilon = 1e-15);

        let s = sandwich_k(&Mat2::diag(0.0, 2.0)).unwrap();
        assert_abs_diff_eq!(s.lower, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mid, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.upper, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn sandwich_k_mid_is_sigma_sum_defect() {
        let a = Mat2::new(0.9, -0.4, 1.3, 0.2);
        let sv = mat2::singular_values(&a);
        assert_abs_diff_eq!(sandwich_k(&a).unwrap().mid, (sv.sum() - 1.0).powi(2), epsilon = 1e-13);
    }

    #[test]
    fn sandwich_co_examples() {
        let s = sandwich_co(&(0.8 * Mat2::rotation(0.3))).unwrap();
        assert_abs_diff_eq!(s.lower.unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.mid, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.upper, 0.0, epsilon = 1e-14);

        let s = sandwich_co(&Mat2::diag(1.0, 4.0)).unwrap();
        assert_abs_diff_eq!(s.lower.unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.mid, 7.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.upper, 9.0, epsilon = 1e-14);
        assert!(s.is_ordered(0.0));

        let s = sandwich_co(&Mat2::scalar(0.5)).unwrap();
        assert_abs_diff_eq!(s.lower.unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mid, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.upper, 0.0, epsilon = 1e-15);

        let s = sandwich_co(&Mat2::diag(0.1, 0.5)).unwrap();
        assert_eq!(s.lower, None);
        assert!(s.mid <= s.upper);
    }

    #[test]
    fn sandwiches_reject_negative_det() {
        assert!(sandwich_k(&Mat2::diag(-1.0, 1.0)).is_err());
        assert!(sandwich_co(&Mat2::diag(-1.0, 1.0)).is_err());
    }
}
