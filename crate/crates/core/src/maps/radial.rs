use std::fmt;
use std::sync::Arc;

use crate::costfn::ScalarFn;
use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::numeric::{adaptive_simpson, adaptive_simpson_depth, bisect, lin_space, KahanSum};

/// Depth cap for per-interval table integration.
const TABLE_SIMPSON_DEPTH: u32 = 8;

use super::{check_radius, frame_to_cartesian, FrameDifferential, PlanarMap, RADIUS_EPS};

/// Number of table nodes used for sampled profiles.
pub const ODE_TABLE_POINTS: usize = 4096;

/// Cubic Hermite interpolant on a uniform grid over `[a, b]`.
///
/// Outside `[a, b]` the table extends linearly using the end slopes.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteTable {
    a: f64,
    b: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl HermiteTable {
    pub fn new(a: f64, b: f64, values: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 2 || slopes.len() != n {
            return Err(Error::TooFewSamples(n.min(slopes.len()), 2));
        }
        if !(b > a) {
            return Err(Error::ParameterOutOfRange {
                name: "table end",
                value: b,
                lo: a,
                hi: f64::INFINITY,
            });
        }
        Ok(Self {
            a,
            b,
            step: (b - a) / (n - 1) as f64,
            values,
            slopes,
        })
    }

    /// Node slopes estimated by second-order differences.
    pub fn from_values(a: f64, b: f64, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 3 {
            return Err(Error::TooFewSamples(n, 3));
        }
        let h = (b - a) / (n - 1) as f64;
        let slopes = (0..n)
            .map(|i| {
                if i == 0 {
                    (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
                } else if i == n - 1 {
                    (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h)
                } else {
                    (values[i + 1] - values[i - 1]) / (2.0 * h)
                }
            })
            .collect();
        Self::new(a, b, values, slopes)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn nodes(&self) -> Vec<f64> {
        lin_space(self.a, self.b, self.values.len())
    }

    pub fn node_values(&self) -> &[f64] {
        &self.values
    }

    fn locate(&self, r: f64) -> (usize, f64) {
        let n = self.values.len();
        let pos = ((r - self.a) / self.step).clamp(0.0, (n - 1) as f64);
        let i = (pos.floor() as usize).min(n - 2);
        (i, pos - i as f64)
    }

    pub fn value(&self, r: f64) -> f64 {
        let n = self.values.len();
        if r <= self.a {
            return self.values[0] + self.slopes[0] * (r - self.a);
        }
        if r >= self.b {
            return self.values[n - 1] + self.slopes[n - 1] * (r - self.b);
        }
        let (i, t) = self.locate(r);
        let h = self.step;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.values[i] + h10 * h * self.slopes[i] + h01 * self.values[i + 1] + h11 * h * self.slopes[i + 1]
    }

    pub fn deriv(&self, r: f64) -> f64 {
        let n = self.values.len();
        if r <= self.a {
            return self.slopes[0];
        }
        if r >= self.b {
            return self.slopes[n - 1];
        }
        let (i, t) = self.locate(r);
        let h = self.step;
        let t2 = t * t;
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -6.0 * t2 + 6.0 * t;
        let d11 = 3.0 * t2 - 2.0 * t;
        (d00 * self.values[i] + d01 * self.values[i + 1]) / h + d10 * self.slopes[i] + d11 * self.slopes[i + 1]
    }
}

/// A radial profile `r -> value` with derivative.
#[derive(Clone)]
pub enum Profile {
    Zero,
    /// `slope * r`
    Linear {
        slope: f64,
    },
    /// `coef * log r`
    Log {
        coef: f64,
    },
    /// Closed-form value and derivative.
    Analytic {
        value: ScalarFn,
        deriv: ScalarFn,
    },
    /// Tabulated values; `deriv` overrides the interpolant derivative.
    Sampled {
        table: Arc<HermiteTable>,
        deriv: Option<ScalarFn>,
    },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Zero => write!(f, "Zero"),
            Profile::Linear { slope } => write!(f, "Linear({slope})"),
            Profile::Log { coef } => write!(f, "Log({coef})"),
            Profile::Analytic { .. } => write!(f, "Analytic"),
            Profile::Sampled { table, deriv } => write!(
                f,
                "Sampled({} nodes on {:?}, analytic deriv: {})",
                table.len(),
                table.domain(),
                deriv.is_some()
            ),
        }
    }
}

impl Profile {
    pub fn analytic<V, D>(value: V, deriv: D) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Profile::Analytic {
            value: Arc::new(value),
            deriv: Arc::new(deriv),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Linear { slope } => slope * r,
            Profile::Log { coef } => coef * r.ln(),
            Profile::Analytic { value, .. } => value(r),
            Profile::Sampled { table, .. } => table.value(r),
        }
    }

    pub fn deriv(&self, r: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Linear { slope } => *slope,
            Profile::Log { coef } => coef / r,
            Profile::Analytic { deriv, .. } => deriv(r),
            Profile::Sampled { table, deriv } => match deriv {
                Some(d) => d(r),
                None => table.deriv(r),
            },
        }
    }

    fn is_sampled(&self) -> bool {
        matches!(self, Profile::Sampled { .. })
    }
}

/// Parameters of a map produced by [`build_ode_minimizer`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeParams {
    /// Constant sum of singular values.
    pub alpha: f64,
    /// End of the linear core, `psi = alpha r / 2` on `[0, t0]`.
    pub t0: f64,
    /// Decay rate of `psi'` found by shooting.
    pub beta: f64,
}

/// `(r, theta) -> scale * (psi(r), theta + h(r))` on the disk of radius
/// `outer_radius`, minus the disk of radius `inner_radius`.
#[derive(Clone, Debug)]
pub struct RadialMap {
    pub psi: Profile,
    pub h: Profile,
    pub inner_radius: f64,
    pub outer_radius: Option<f64>,
    pub scale: f64,
    /// `psi` linear and `h` constant near the origin, so the origin belongs
    /// to the domain.
    pub regular_at_origin: bool,
    pub label: String,
    pub ode: Option<OdeParams>,
}

impl RadialMap {
    /// Validates `psi' > 0` on a sample grid and `psi(1) <= 1`.
    pub fn new(psi: Profile, h: Profile, inner_radius: f64) -> Result<Self> {
        let outer = if psi.is_sampled() || h.is_sampled() {
            Some(1.0)
        } else {
            None
        };
        let map = Self {
            psi,
            h,
            inner_radius,
            outer_radius: outer,
            scale: 1.0,
            regular_at_origin: false,
            label: "radial".into(),
            ode: None,
        };
        map.validate()?;
        Ok(map)
    }

    fn validate(&self) -> Result<()> {
        let lo = self.inner_radius.max(1e-6);
        for r in lin_space(lo, 1.0, 257) {
            let d = self.psi.deriv(r);
            if !(d > 0.0) {
                return Err(Error::ParameterOutOfRange {
                    name: "psi'",
                    value: d,
                    lo: 0.0,
                    hi: f64::INFINITY,
                });
            }
        }
        let end = self.psi.value(1.0);
        if !(end <= 1.0 + 1e-10) {
            return Err(Error::ParameterOutOfRange {
                name: "psi(1)",
                value: end,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(())
    }

    pub fn identity() -> Self {
        Self {
            psi: Profile::Linear { slope: 1.0 },
            h: Profile::Zero,
            inner_radius: 0.0,
            outer_radius: None,
            scale: 1.0,
            regular_at_origin: true,
            label: "identity".into(),
            ode: None,
        }
    }

    /// `psi = lambda r`, `h = 0`, with `0 < lambda <= 1`.
    pub fn homothety(lambda: f64) -> Result<Self> {
        let mut m = Self::new(Profile::Linear { slope: lambda }, Profile::Zero, 0.0)?;
        m.regular_at_origin = true;
        m.label = format!("radial homothety(lambda={lambda})");
        Ok(m)
    }

    /// `psi = r`, `h = c log r` on the punctured disk.
    pub fn twist(c: f64) -> Self {
        Self {
            psi: Profile::Linear { slope: 1.0 },
            h: Profile::Log { coef: c },
            inner_radius: 0.0,
            outer_radius: None,
            scale: 1.0,
            regular_at_origin: c == 0.0,
            label: format!("radial twist(c={c})"),
            ode: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The same map followed by the homothety `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut m = self.clone();
        m.scale *= lambda;
        m
    }

    /// Frame matrix `scale * [[psi', 0], [h' psi, psi / r]]` at radius `r`.
    pub fn frame_matrix(&self, r: f64) -> Mat2 {
        let psi = self.psi.value(r);
        let dpsi = self.psi.deriv(r);
        let dh = self.h.deriv(r);
        self.scale * Mat2::new(dpsi, 0.0, dh * psi, psi / r)
    }

    pub fn frame_differential(&self, r: f64, theta: f64) -> Result<FrameDifferential> {
        check_radius(r, self.inner_radius, self.outer_radius)?;
        Ok(FrameDifferential {
            matrix: self.frame_matrix(r),
            r,
            theta,
        })
    }

    fn at_origin(&self, r: f64) -> bool {
        r <= RADIUS_EPS && self.regular_at_origin && self.inner_radius == 0.0
    }
}

impl PlanarMap for RadialMap {
    fn label(&self) -> String {
        if self.scale == 1.0 {
            self.label.clone()
        } else {
            format!("{} scaled by {}", self.label, self.scale)
        }
    }

    fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    fn outer_radius(&self) -> Option<f64> {
        self.outer_radius
    }

    fn is_punctured(&self) -> bool {
        !self.regular_at_origin
    }

    fn eval(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        let r = x.hypot(y);
        if self.at_origin(r) {
            return Ok([0.0, 0.0]);
        }
        check_radius(r, self.inner_radius, self.outer_radius)?;
        let angle = y.atan2(x) + self.h.value(r);
        let rho = self.scale * self.psi.value(r);
        Ok([rho * angle.cos(), rho * angle.sin()])
    }

    fn differential(&self, x: f64, y: f64) -> Result<Mat2> {
        let r = x.hypot(y);
        if self.at_origin(r) {
            let d = self.psi.deriv(0.0);
            return Ok(self.scale * d * Mat2::rotation(self.h.value(0.0)));
        }
        check_radius(r, self.inner_radius, self.outer_radius)?;
        let theta = y.atan2(x);
        Ok(frame_to_cartesian(self.frame_matrix(r), theta, theta + self.h.value(r)))
    }
}

/// `S(u) = 3u^2 - 2u^3`.
fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

/// `psi'(r)` of the ODE family.
fn ode_dpsi(alpha: f64, t0: f64, beta: f64, r: f64) -> f64 {
    if r <= t0 {
        0.5 * alpha
    } else {
        0.5 * alpha * (-beta * smoothstep((r - t0) / (1.0 - t0))).exp()
    }
}

/// `int_0^1 exp(-beta S(u)) du`.
fn decay_integral(beta: f64) -> f64 {
    adaptive_simpson(&|u: f64| (-beta * smoothstep(u)).exp(), 0.0, 1.0, 1e-15)
}

/// Disk self-map with `s1 + s2 = alpha` everywhere.
///
/// `psi' = alpha / 2` on `[0, t0]` and `alpha/2 * exp(-beta S((r - t0)/(1 - t0)))`
/// beyond, with `beta` chosen by bisection so that `psi(1) = 1`. The phase
/// solves `(psi' + psi/r)^2 + (h' psi)^2 = alpha^2` with `h = 0` on `[0, t0]`.
/// `t0` defaults to `1 / alpha` and must lie in `(0, 2 / alpha)`.
///
/// `psi` is C^2 at `t0`, not smooth; `h'` is continuous with a kink there.
pub fn build_ode_minimizer(alpha: f64, t0: Option<f64>) -> Result<RadialMap> {
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(Error::AlphaTooSmall(alpha));
    }
    let t0 = t0.unwrap_or(1.0 / alpha);
    if !(t0 > 0.0 && t0 < 2.0 / alpha) {
        return Err(Error::ParameterOutOfRange {
            name: "t0",
            value: t0,
            lo: 0.0,
            hi: 2.0 / alpha,
        });
    }

    // psi(1) = alpha/2 (t0 + (1 - t0) I(beta)) = 1
    let target = (2.0 / alpha - t0) / (1.0 - t0);
    let mut beta_hi = 1.0;
    while decay_integral(beta_hi) > target {
        beta_hi *= 2.0;
        if beta_hi > 1e12 {
            return Err(Error::BisectionFailed(format!(
                "no decay rate brackets psi(1) = 1 for alpha = {alpha}"
            )));
        }
    }
    let beta = bisect(|b| decay_integral(b) - target, 0.0, beta_hi, 1e-15 * beta_hi, 400)
        .ok_or_else(|| Error::BisectionFailed("psi(1) = 1 not bracketed".into()))?;

    let n = ODE_TABLE_POINTS;
    let nodes = lin_space(t0, 1.0, n);
    let dpsi = move |r: f64| ode_dpsi(alpha, t0, beta, r);

    let mut psi_vals = Vec::with_capacity(n);
    let mut acc = KahanSum::new();
    acc.add(0.5 * alpha * t0);
    psi_vals.push(acc.value());
    for w in nodes.windows(2) {
        acc.add(adaptive_simpson_depth(&dpsi, w[0], w[1], 1e-17, TABLE_SIMPSON_DEPTH));
        psi_vals.push(acc.value());
    }
    let end = psi_vals[n - 1];
    if (end - 1.0).abs() > 1e-10 {
        return Err(Error::BisectionFailed(format!("psi(1) = {end}, expected 1")));
    }
    let psi_slopes: Vec<f64> = nodes.iter().map(|&r| dpsi(r)).collect();
    let psi_table = Arc::new(HermiteTable::new(t0, 1.0, psi_vals, psi_slopes)?);

    let dh = {
        let table = Arc::clone(&psi_table);
        move |r: f64| {
            if r <= t0 {
                return 0.0;
            }
            let psi = table.value(r);
            let g = dpsi(r) + psi / r;
            (alpha * alpha - g * g).max(0.0).sqrt() / psi
        }
    };

    let mut h_vals = Vec::with_capacity(n);
    let mut acc = KahanSum::new();
    h_vals.push(0.0);
    for w in nodes.windows(2) {
        acc.add(adaptive_simpson_depth(&dh, w[0], w[1], 1e-15, TABLE_SIMPSON_DEPTH));
        h_vals.push(acc.value());
    }
    let h_slopes: Vec<f64> = nodes.iter().map(|&r| dh(r)).collect();
    let h_table = Arc::new(HermiteTable::new(t0, 1.0, h_vals, h_slopes)?);

    let psi = Profile::Sampled {
        table: psi_table,
        deriv: Some(Arc::new(dpsi)),
    };
    let h = Profile::Sampled {
        table: h_table,
        deriv: Some(Arc::new(dh)),
    };
    Ok(RadialMap {
        psi,
        h,
        inner_radius: 0.0,
        outer_radius: Some(1.0),
        scale: 1.0,
        regular_at_origin: true,
        label: format!("ode(alpha={alpha}, t0={t0})"),
        ode: Some(OdeParams { alpha, t0, beta }),
    })
}
