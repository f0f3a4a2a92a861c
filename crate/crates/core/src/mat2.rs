//! Closed-form analysis of real 2x2 matrices.
//!
//! Everything here is derived from two invariants, the squared Frobenius norm
//! `|A|^2` and the determinant. In two dimensions they determine the singular
//! values exactly:
//!
//! ```text
//! s1 + s2 = sqrt(|A|^2 + 2|det A|)
//! s2 - s1 = sqrt(|A|^2 - 2|det A|)
//! ```
//!
//! so no iterative SVD is needed. The well distances (to `SO(2)`, the
//! conformal matrices `CO(2)`, the well `K = {s1 + s2 = 1}` and its slices)
//! are closed-form functions of the singular values. They are only defined
//! for `det A >= 0` and return [`Error::NegativeDeterminant`] otherwise.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance used by [`classify_cof_relation`].
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// A real 2x2 matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Self = Self::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);

    #[inline]
    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    #[inline]
    pub const fn diag(d1: f64, d2: f64) -> Self {
        Self::new(d1, 0.0, 0.0, d2)
    }

    #[inline]
    pub fn scalar(lambda: f64) -> Self {
        Self::diag(lambda, lambda)
    }

    /// Counter-clockwise rotation by `angle` radians.
    #[inline]
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c, -s, s, c)
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// Squared Frobenius norm `|A|^2`.
    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.a11 * self.a11 + self.a12 * self.a12 + self.a21 * self.a21 + self.a22 * self.a22
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn transpose(&self) -> Self {
        Self::new(self.a11, self.a21, self.a12, self.a22)
    }

    /// Cofactor matrix: `Cof [[a, b], [c, d]] = [[d, -c], [-b, a]]`.
    ///
    /// Satisfies `A * Cof(A)^T = det(A) * Id`.
    #[inline]
    pub fn cofactor(&self) -> Self {
        Self::new(self.a22, -self.a21, -self.a12, self.a11)
    }

    pub fn singular_values(&self) -> SingularPair {
        singular_values(self)
    }

    /// Rows as arrays, `[[a11, a12], [a21, a22]]`.
    pub fn rows(&self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.a11 - other.a11)
            .abs()
            .max((self.a12 - other.a12).abs())
            .max((self.a21 - other.a21).abs())
            .max((self.a22 - other.a22).abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2::new(-self.a11, -self.a12, -self.a21, -self.a22)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

impl Mul<Mat2> for f64 {
    type Output = Mat2;
    fn mul(self, m: Mat2) -> Mat2 {
        Mat2::new(self * m.a11, self * m.a12, self * m.a21, self * m.a22)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, k: f64) -> Mat2 {
        k * self
    }
}

/// Ordered singular values `sigma1 <= sigma2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularPair {
    pub sigma1: f64,
    pub sigma2: f64,
}

impl SingularPair {
    /// Validated constructor; requires `0 <= sigma1 <= sigma2`.
    pub fn new(sigma1: f64, sigma2: f64) -> Result<Self> {
        if !(sigma1 >= 0.0) {
            return Err(Error::ParameterOutOfRange {
                name: "sigma1",
                value: sigma1,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if !(sigma2 >= sigma1) {
            return Err(Error::ParameterOutOfRange {
                name: "sigma2",
                value: sigma2,
                lo: sigma1,
                hi: f64::INFINITY,
            });
        }
        Ok(Self { sigma1, sigma2 })
    }

    /// The point of the segment `K` with determinant `s`, `s in [0, 1/4]`.
    pub fn on_k_slice(s: f64) -> Result<Self> {
        check_slice_param(s)?;
        let half_gap = 0.5 * (1.0 - 4.0 * s).max(0.0).sqrt();
        Ok(Self {
            sigma1: 0.5 - half_gap,
            sigma2: 0.5 + half_gap,
        })
    }

    pub fn sum(&self) -> f64 {
        self.sigma1 + self.sigma2
    }

    pub fn product(&self) -> f64 {
        self.sigma1 * self.sigma2
    }

    /// `diag(sigma1, sigma2)`.
    pub fn to_diag(&self) -> Mat2 {
        Mat2::diag(self.sigma1, self.sigma2)
    }
}

/// The matrix wells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WellTag {
    SO2,
    CO2,
    K,
    /// `K_s = {A in K : det A = s}`, `s in [0, 1/4]`.
    Ks(f64),
    /// Fixed singular-value orbit.
    KSigma(SingularPair),
}

/// Result of [`classify_cof_relation`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CofRelation {
    /// `A + Cof A` is a rotation, i.e. `A` lies in `K`.
    InK,
    /// `A` is `sigma` times a rotation.
    Conformal(f64),
    Neither,
}

fn check_nonnegative_det(a: &Mat2) -> Result<f64> {
    let det = a.det();
    if det < 0.0 {
        Err(Error::NegativeDeterminant(det))
    } else {
        Ok(det)
    }
}

fn check_slice_param(s: f64) -> Result<()> {
    if (0.0..=0.25).contains(&s) {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name: "s",
            value: s,
            lo: 0.0,
            hi: 0.25,
        })
    }
}

/// Singular values from `(|A|^2, det A)`.
///
/// Radicands are clamped at zero. The smaller value is recovered as
/// `|det A| / sigma2` to avoid cancellation when `sigma1 << sigma2`.
pub fn singular_values(a: &Mat2) -> SingularPair {
    let n2 = a.norm_sq();
    let d = a.det().abs();
    let sum = (n2 + 2.0 * d).max(0.0).sqrt();
    let diff = (n2 - 2.0 * d).max(0.0).sqrt();
    let sigma2 = 0.5 * (sum + diff);
    let sigma1 = if sigma2 > 0.0 { (d / sigma2).min(sigma2) } else { 0.0 };
    SingularPair { sigma1, sigma2 }
}

pub fn cofactor(a: &Mat2) -> Mat2 {
    a.cofactor()
}

/// Rotation nearest to `A` in the Frobenius norm, `(A + Cof A) / (s1 + s2)`.
///
/// For `det A > 0` this is the orthogonal factor of the polar decomposition.
/// For `det A = 0, A != 0` the nearest rotation is not unique; this returns
/// `(A + Cof A) / sigma2`, one of the minimizers.
pub fn polar_factor(a: &Mat2) -> Result<Mat2> {
    check_nonnegative_det(a)?;
    let sum = singular_values(a).sum();
    if sum <= 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok((1.0 / sum) * (*a + a.cofactor()))
}

pub fn dist_so2(a: &Mat2) -> Result<f64> {
    check_nonnegative_det(a)?;
    let sv = singular_values(a);
    Ok(((sv.sigma1 - 1.0).powi(2) + (sv.sigma2 - 1.0).powi(2)).sqrt())
}

pub fn dist_co2(a: &Mat2) -> Result<f64> {
    check_nonnegative_det(a)?;
    let sv = singular_values(a);
    Ok((sv.sigma2 - sv.sigma1) / std::f64::consts::SQRT_2)
}

pub fn dist_k_sigma(a: &Mat2, target: SingularPair) -> Result<f64> {
    check_nonnegative_det(a)?;
    let sv = singular_values(a);
    Ok(((sv.sigma1 - target.sigma1).powi(2) + (sv.sigma2 - target.sigma2).powi(2)).sqrt())
}

pub fn dist_ks(a: &Mat2, s: f64) -> Result<f64> {
    check_slice_param(s)?;
    dist_k_sigma(a, SingularPair::on_k_slice(s)?)
}

/// Distance to `K = {s1 + s2 = 1, det >= 0}`.
///
/// Orthogonal projection onto the segment when `s2 <= s1 + 1`, otherwise the
/// nearest point is the endpoint `(0, 1)`.
pub fn dist_k(a: &Mat2) -> Result<f64> {
    check_nonnegative_det(a)?;
    let SingularPair { sigma1, sigma2 } = singular_values(a);
    if sigma2 <= sigma1 + 1.0 {
        Ok((sigma1 + sigma2 - 1.0).abs() / std::f64::consts::SQRT_2)
    } else {
        Ok((sigma1 * sigma1 + (sigma2 - 1.0).powi(2)).sqrt())
    }
}

pub fn dist_to_well(a: &Mat2, well: &WellTag) -> Result<f64> {
    match *well {
        WellTag::SO2 => dist_so2(a),
        WellTag::CO2 => dist_co2(a),
        WellTag::K => dist_k(a),
        WellTag::Ks(s) => dist_ks(a, s),
        WellTag::KSigma(pair) => dist_k_sigma(a, pair),
    }
}

/// `|A + Cof A - O(A)|`, which vanishes exactly on `K`.
pub fn cof_sum_defect(a: &Mat2) -> Result<f64> {
    let o = polar_factor(a)?;
    Ok((*a + a.cofactor() - o).norm())
}

/// Classifies `A` (with `det A > 0`) as lying in `K`, conformal, or neither.
///
/// `InK` takes precedence when both hold (`A = Id / 2` up to rotation).
pub fn classify_cof_relation(a: &Mat2, tol: f64) -> Result<CofRelation> {
    let det = a.det();
    if det <= 0.0 {
        return Err(Error::NonpositiveDeterminant(det));
    }
    let sv = singular_values(a);
    if (sv.sum() - 1.0).abs() <= tol {
        return Ok(CofRelation::InK);
    }
    if sv.sigma2 - sv.sigma1 <= tol {
        return Ok(CofRelation::Conformal(0.5 * sv.sum()));
    }
    Ok(CofRelation::Neither)
}
