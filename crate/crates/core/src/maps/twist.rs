use crate::error::{Error, Result};
use crate::mat2::Mat2;

use super::{check_radius, frame_to_cartesian, FrameDifferential, PlanarMap};

/// `(r, theta) -> (scale * r, theta + c log r)`.
///
/// The unscaled map is an area-preserving self-map of the punctured disk with
/// constant frame differential `[[1, 0], [c, 1]]`; it is not differentiable
/// at the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwistMap {
    pub c: f64,
    pub scale: f64,
}

impl TwistMap {
    pub fn new(c: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() || !c.is_finite() {
            return Err(Error::ParameterOutOfRange {
                name: "scale",
                value: scale,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        Ok(Self { c, scale })
    }

    /// Constant differential in polar frames, `scale * [[1, 0], [c, 1]]`.
    pub fn frame_matrix(&self) -> Mat2 {
        self.scale * Mat2::new(1.0, 0.0, self.c, 1.0)
    }

    pub fn frame_differential(&self, r: f64, theta: f64) -> Result<FrameDifferential> {
        check_radius(r, 0.0, None)?;
        Ok(FrameDifferential {
            matrix: self.frame_matrix(),
            r,
            theta,
        })
    }

    /// `phi_c^{-1} = phi_{-c}` (for unit scale).
    pub fn inverse(&self) -> Self {
        Self {
            c: -self.c,
            scale: 1.0 / self.scale,
        }
    }
}

/// Scale placing the twist differential in `K`: `1 / sqrt(4 + c^2)`.
pub fn twist_lambda(c: f64) -> f64 {
    1.0 / (4.0 + c * c).sqrt()
}

/// Twist map whose differential lies in `K_{lambda^2}`: `c = sqrt(1/lambda^2 - 4)`.
pub fn build_twist_minimizer(lambda: f64) -> Result<TwistMap> {
    if !(lambda > 0.0 && lambda <= 0.5) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    let c = (1.0 / (lambda * lambda) - 4.0).max(0.0).sqrt();
    TwistMap::new(c, lambda)
}

impl PlanarMap for TwistMap {
    fn label(&self) -> String {
        format!("twist(c={}, scale={})", self.c, self.scale)
    }

    fn is_punctured(&self) -> bool {
        true
    }

    fn eval(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        let r = x.hypot(y);
        check_radius(r, 0.0, None)?;
        let angle = y.atan2(x) + self.c * r.ln();
        let rho = self.scale * r;
        Ok([rho * angle.cos(), rho * angle.sin()])
    }

    fn differential(&self, x: f64, y: f64) -> Result<Mat2> {
        let r = x.hypot(y);
        check_radius(r, 0.0, None)?;
        let theta = y.atan2(x);
        Ok(frame_to_cartesian(self.frame_matrix(), theta, theta + self.c * r.ln()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat2::singular_values;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frame_differential_of_half_twist() {
        let m = TwistMap::new(0.5, 1.0).unwrap();
        let d = m.frame_differential(0.3, 1.0).unwrap();
        assert_eq!(d.matrix, Mat2::new(1.0, 0.0, 0.5, 1.0));
        assert_abs_diff_eq!(d.jacobian(), 1.0);
        assert!(m.frame_differential(0.0, 0.0).is_err());
    }

    #[test]
    fn twist_lambda_examples() {
        assert_abs_diff_eq!(twist_lambda(0.0), 0.5);
        assert_abs_diff_eq!(twist_lambda(5f64.sqrt()), 1.0 / 3.0, epsilon = 1e-15);
        let l = twist_lambda(1e3);
        assert!(l > 0.0 && l < twist_lambda(1e2));
    }

    #[test]
    fn build_twist_examples() {
        let m = build_twist_minimizer(0.5).unwrap();
        assert_eq!(m.c, 0.0);
        let m = build_twist_minimizer(1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(m.c, 5f64.sqrt(), epsilon = 1e-14);
        let m = build_twist_minimizer(0.1).unwrap();
        assert_abs_diff_eq!(m.c, 96f64.sqrt(), epsilon = 1e-12);
        let sv = singular_values(&m.frame_matrix());
        assert_abs_diff_eq!(sv.sum(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.frame_matrix().det(), 0.01, epsilon = 1e-15);
        assert!(matches!(build_twist_minimizer(0.7), Err(Error::LambdaOutOfRange(_))));
        assert!(build_twist_minimizer(0.0).is_err());
    }

    #[test]
    fn singular_values_even_in_c() {
        for c in [0.1, 0.5, 1.0, 3.0, 10.0] {
            let p = singular_values(&TwistMap::new(c, 1.0).unwrap().frame_matrix());
            let m = singular_values(&TwistMap::new(-c, 1.0).unwrap().frame_matrix());
            assert_abs_diff_eq!(p.sigma1, m.sigma1, epsilon = 1e-15);
            assert_abs_diff_eq!(p.sigma2, m.sigma2, epsilon = 1e-15);
            assert_abs_diff_eq!(p.product(), 1.0, epsilon = 1e-13);
            assert_abs_diff_eq!(p.sigma1.powi(2) + p.sigma2.powi(2), 2.0 + c * c, epsilon = 1e-12);
        }
    }

    #[test]
    fn evaluate_examples() {
        let m = TwistMap::new(0.5, 0.4).unwrap();
        let p = m.eval(1.0, 0.0).unwrap();
        assert_abs_diff_eq!(p[0], 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-15);

        let e = std::f64::consts::E;
        let p = m.eval(e, 0.0).unwrap();
        assert_abs_diff_eq!(p[0], 0.4 * e * 0.5f64.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(p[1], 0.4 * e * 0.5f64.sin(), epsilon = 1e-14);
        assert!(m.eval(0.0, 0.0).is_err());
    }

    #[test]
    fn inverse_is_negative_twist() {
        let fwd = TwistMap::new(1.3, 1.0).unwrap();
        let inv = TwistMap::new(-1.3, 1.0).unwrap();
        assert_eq!(fwd.inverse(), inv);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let r: f64 = rng.random_range(0.05..1.0);
            let t: f64 = rng.random_range(-3.0..3.0);
            let [u, v] = fwd.eval(r * t.cos(), r * t.sin()).unwrap();
            let [x, y] = inv.eval(u, v).unwrap();
            assert_abs_diff_eq!(x, r * t.cos(), epsilon = 1e-10);
            assert_abs_diff_eq!(y, r * t.sin(), epsilon = 1e-10);
        }
    }

    #[test]
    fn cartesian_differential_matches_finite_differences() {
        let m = TwistMap::new(2.0, 0.3).unwrap();
        let (x, y, h) = (0.4, -0.3, 1e-6);
        let d = m.differential(x, y).unwrap();
        let px = m.eval(x + h, y).unwrap();
        let mx = m.eval(x - h, y).unwrap();
        let py = m.eval(x, y + h).unwrap();
        let my = m.eval(x, y - h).unwrap();
        let fd = Mat2::new(
            (px[0] - mx[0]) / (2.0 * h),
            (py[0] - my[0]) / (2.0 * h),
            (px[1] - mx[1]) / (2.0 * h),
            (py[1] - my[1]) / (2.0 * h),
        );
        assert!(d.max_abs_diff(&fd) < 1e-8, "{d:?} vs {fd:?}");
    }
}
