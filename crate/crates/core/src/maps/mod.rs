//! Explicit planar maps and their differentials.
//!
//! Maps are described in polar coordinates by profiles,
//! `(r, theta) -> (psi(r), theta + h(r))`. With respect to the orthonormal
//! polar frames at source and image the differential is
//!
//! ```text
//! [[psi',      0    ],
//!  [h' psi,  psi / r]]
//! ```
//!
//! and the Cartesian differential is `R(theta + h) * frame * R(theta)^T`.
//! Singular values do not depend on which of the two is used.

mod radial;
mod shape;
mod twist;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mat2::Mat2;

pub use radial::{build_ode_minimizer, HermiteTable, OdeParams, Profile, RadialMap, ODE_TABLE_POINTS};
pub use shape::{boundary_polyline, export_shape, polygon_area, ShapeDomain, ShapeExport, ShapeFormat};
pub use twist::{build_twist_minimizer, twist_lambda, TwistMap};

/// Smallest radius at which polar formulas are evaluated.
pub const RADIUS_EPS: f64 = 1e-12;

/// Differential expressed in the orthonormal polar frames, at `(r, theta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameDifferential {
    pub matrix: Mat2,
    pub r: f64,
    pub theta: f64,
}

impl FrameDifferential {
    pub fn jacobian(&self) -> f64 {
        self.matrix.det()
    }
}

/// A planar map that can be evaluated with its differential.
pub trait PlanarMap: Send + Sync {
    fn label(&self) -> String;

    /// Points with `r <= inner_radius()` are outside the domain (`0` when the
    /// origin belongs to it).
    fn inner_radius(&self) -> f64 {
        0.0
    }

    /// `Some(R)` when the map is only defined on `r <= R`.
    fn outer_radius(&self) -> Option<f64> {
        None
    }

    /// The map is singular at the origin and represents a punctured-disk map.
    fn is_punctured(&self) -> bool {
        false
    }

    /// Image of the Cartesian point `(x, y)`.
    fn eval(&self, x: f64, y: f64) -> Result<[f64; 2]>;

    /// Cartesian differential at `(x, y)`.
    fn differential(&self, x: f64, y: f64) -> Result<Mat2>;
}

pub(crate) fn check_radius(r: f64, inner: f64, outer: Option<f64>) -> Result<()> {
    let lo = inner.max(RADIUS_EPS);
    let inside_outer = outer.is_none_or(|o| r <= o * (1.0 + 1e-12));
    if r > lo && inside_outer {
        Ok(())
    } else {
        Err(Error::RadiusOutOfDomain { r, inner })
    }
}

/// Polar point evaluation for maps that are polar-profile based.
pub fn evaluate_polar<M: PlanarMap + ?Sized>(m: &M, r: f64, theta: f64) -> Result<[f64; 2]> {
    m.eval(r * theta.cos(), r * theta.sin())
}

/// `x -> lambda x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homothety {
    pub lambda: f64,
}

impl Homothety {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::ParameterOutOfRange {
                name: "lambda",
                value: lambda,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        Ok(Self { lambda })
    }

    pub fn frame_differential(&self, r: f64, theta: f64) -> FrameDifferential {
        FrameDifferential {
            matrix: Mat2::scalar(self.lambda),
            r,
            theta,
        }
    }
}

impl PlanarMap for Homothety {
    fn label(&self) -> String {
        format!("homothety(lambda={})", self.lambda)
    }

    fn eval(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        Ok([self.lambda * x, self.lambda * y])
    }

    fn differential(&self, _x: f64, _y: f64) -> Result<Mat2> {
        Ok(Mat2::scalar(self.lambda))
    }
}

/// `x -> A x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub matrix: Mat2,
}

impl PlanarMap for AffineMap {
    fn label(&self) -> String {
        let m = self.matrix;
        format!("affine([[{}, {}], [{}, {}]])", m.a11, m.a12, m.a21, m.a22)
    }

    fn eval(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        Ok(self.matrix.apply([x, y]))
    }

    fn differential(&self, _x: f64, _y: f64) -> Result<Mat2> {
        Ok(self.matrix)
    }
}

type PointFn = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;
type JacobianFn = Arc<dyn Fn(f64, f64) -> Mat2 + Send + Sync>;

/// A map given by closures for the value and its Jacobian.
#[derive(Clone)]
pub struct FnMap {
    pub name: String,
    value: PointFn,
    jacobian: JacobianFn,
}

impl FnMap {
    pub fn new<F, J>(name: impl Into<String>, value: F, jacobian: J) -> Self
    where
        F: Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
        J: Fn(f64, f64) -> Mat2 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            value: Arc::new(value),
            jacobian: Arc::new(jacobian),
        }
    }
}

impl fmt::Debug for FnMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnMap").field("name", &self.name).finish()
    }
}

impl PlanarMap for FnMap {
    fn label(&self) -> String {
        self.name.clone()
    }

    fn eval(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        Ok((self.value)(x, y))
    }

    fn differential(&self, x: f64, y: f64) -> Result<Mat2> {
        Ok((self.jacobian)(x, y))
    }
}

/// `phi` followed by the homothety `lambda`.
#[derive(Clone, Debug)]
pub struct Scaled<M> {
    pub inner: M,
    pub lambda: f64,
}

impl<M: PlanarMap> PlanarMap for Scaled<M> {
    fn label(&self) -> String {
        format!("{} scaled by {}", self.inner.label(), self.lambda)
    }
    fn inner_radius(&self) -> f64 {
        self.inner.inner_radius()
    }
    fn outer_radius(&self) -> Option<f64> {
        self.inner.outer_radius()
    }
    fn is_punctured(&self) -> bool {
        self.inner.is_punctured()
    }
    fn eval(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        let [u, v] = self.inner.eval(x, y)?;
        Ok([self.lambda * u, self.lambda * v])
    }
    fn differential(&self, x: f64, y: f64) -> Result<Mat2> {
        Ok(self.lambda * self.inner.differential(x, y)?)
    }
}

impl<M: PlanarMap + ?Sized> PlanarMap for Box<M> {
    fn label(&self) -> String {
        (**self).label()
    }
    fn inner_radius(&self) -> f64 {
        (**self).inner_radius()
    }
    fn outer_radius(&self) -> Option<f64> {
        (**self).outer_radius()
    }
    fn is_punctured(&self) -> bool {
        (**self).is_punctured()
    }
    fn eval(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        (**self).eval(x, y)
    }
    fn differential(&self, x: f64, y: f64) -> Result<Mat2> {
        (**self).differential(x, y)
    }
}

impl<M: PlanarMap + ?Sized> PlanarMap for &M {
    fn label(&self) -> String {
        (**self).label()
    }
    fn inner_radius(&self) -> f64 {
        (**self).inner_radius()
    }
    fn outer_radius(&self) -> Option<f64> {
        (**self).outer_radius()
    }
    fn is_punctured(&self) -> bool {
        (**self).is_punctured()
    }
    fn eval(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        (**self).eval(x, y)
    }
    fn differential(&self, x: f64, y: f64) -> Result<Mat2> {
        (**self).differential(x, y)
    }
}

/// Cartesian differential from a polar frame matrix.
pub(crate) fn frame_to_cartesian(frame: Mat2, theta: f64, image_angle: f64) -> Mat2 {
    Mat2::rotation(image_angle) * frame * Mat2::rotation(theta).transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homothety_basics() {
        let h = Homothety::new(0.6).unwrap();
        assert_eq!(h.eval(1.0, -2.0).unwrap(), [0.6, -1.2]);
        assert_eq!(h.differential(0.0, 0.0).unwrap(), Mat2::scalar(0.6));
        assert_eq!(h.frame_differential(0.5, 1.0).matrix, Mat2::scalar(0.6));
        assert!(Homothety::new(0.0).is_err());
    }

    #[test]
    fn scaled_composes() {
        let a = AffineMap {
            matrix: Mat2::new(1.0, 2.0, 0.0, 1.0),
        };
        let s = Scaled { inner: a, lambda: 0.5 };
        assert_eq!(s.eval(1.0, 1.0).unwrap(), [1.5, 0.5]);
        assert_eq!(s.differential(0.3, 0.3).unwrap(), Mat2::new(0.5, 1.0, 0.0, 0.5));
    }

    #[test]
    fn radius_check() {
        assert!(check_radius(0.5, 0.0, Some(1.0)).is_ok());
        assert!(check_radius(0.0, 0.0, None).is_err());
        assert!(check_radius(1.1, 0.0, Some(1.0)).is_err());
        assert!(check_radius(0.05, 0.1, None).is_err());
    }
}
