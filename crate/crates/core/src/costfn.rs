//! Scalar cost functions `f` for the energies `E_f = avg f(s1) + f(s2)` and
//! the reduced problem `F_f(s) = min_{xy = s} f(x) + f(y)`.
//!
//! Whether the conformal pair `(sqrt(s), sqrt(s))` minimizes `F_f` is governed
//! by the convexity of `g(x) = f(e^x)` on `(-inf, 0]`: midpoint convexity at
//! `log(s) / 2` is equivalent to the conformal pair being a minimizer. When `f`
//! stays bounded at `0` the conformal pair stops being a minimizer for small
//! `s`, which is the phase transition [`phase_threshold`] locates.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect, golden_section, lin_space, log_space};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied cost. Must be thread-safe.
#[derive(Clone)]
pub struct CustomCost {
    pub name: String,
    pub func: ScalarFn,
    pub deriv: Option<ScalarFn>,
    /// Set when two-sided monotonicity was not enforced at construction.
    pub relaxed: bool,
}

impl fmt::Debug for CustomCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomCost")
            .field("name", &self.name)
            .field("has_deriv", &self.deriv.is_some())
            .field("relaxed", &self.relaxed)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum CostKind {
    /// `(x - 1)^2`
    Quadratic,
    /// `(log x)^2`
    LogSquare,
    /// `|x - 1|^3`
    CubicAbs,
    /// `(x - 1)^4`
    Quartic,
    /// `|x - 1|^p`, `p >= 1`
    PowerP(f64),
    Custom(CustomCost),
}

/// A cost `f: (0, inf) -> [0, inf)` with `f(1) = 0`, decreasing on `(0, 1]`
/// and increasing on `[1, inf)`.
#[derive(Clone, Debug)]
pub struct CostFunction {
    kind: CostKind,
}

/// Sample grid used to spot-check monotonicity at construction.
fn validation_grid() -> (Vec<f64>, Vec<f64>) {
    (log_space(1e-4, 1.0, 64), log_space(1.0, 16.0, 64))
}

impl CostFunction {
    pub fn quadratic() -> Self {
        Self {
            kind: CostKind::Quadratic,
        }
    }

    pub fn log_square() -> Self {
        Self {
            kind: CostKind::LogSquare,
        }
    }

    pub fn cubic_abs() -> Self {
        Self {
            kind: CostKind::CubicAbs,
        }
    }

    pub fn quartic() -> Self {
        Self {
            kind: CostKind::Quartic,
        }
    }

    pub fn power(p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidCost(format!("power exponent {p} must be >= 1")));
        }
        Ok(Self {
            kind: CostKind::PowerP(p),
        })
    }

    /// Custom cost, spot-checked for `f(1) = 0` and two-sided monotonicity.
    pub fn custom<F>(name: impl Into<String>, func: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let cost = Self {
            kind: CostKind::Custom(CustomCost {
                name: name.into(),
                func: Arc::new(func),
                deriv: None,
                relaxed: false,
            }),
        };
        cost.validate()?;
        Ok(cost)
    }

    /// Custom cost with a derivative. Diagnostics never require it.
    pub fn custom_with_deriv<F, D>(name: impl Into<String>, func: F, deriv: D) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let cost = Self {
            kind: CostKind::Custom(CustomCost {
                name: name.into(),
                func: Arc::new(func),
                deriv: Some(Arc::new(deriv)),
                relaxed: false,
            }),
        };
        cost.validate()?;
        Ok(cost)
    }

    /// Custom cost admitted without the monotonicity check (e.g. Ogden-type
    /// sums `sum a_k (x^{alpha_k} - 1)`). Only `f(1) = 0` is enforced; the
    /// flag is carried into every report.
    pub fn custom_relaxed<F>(name: impl Into<String>, func: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let func: ScalarFn = Arc::new(func);
        let at_one = func(1.0);
        if at_one.abs() > 1e-12 {
            return Err(Error::InvalidCost(format!("f(1) = {at_one}, expected 0")));
        }
        Ok(Self {
            kind: CostKind::Custom(CustomCost {
                name: name.into(),
                func,
                deriv: None,
                relaxed: true,
            }),
        })
    }

    fn validate(&self) -> Result<()> {
        let at_one = self.raw(1.0);
        if !(at_one.abs() <= 1e-12) {
            return Err(Error::InvalidCost(format!("f(1) = {at_one}, expected 0")));
        }
        let (left, right) = validation_grid();
        let vals: Vec<f64> = left.iter().map(|&x| self.raw(x)).collect();
        if let Some(w) = vals.windows(2).position(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidCost(format!(
                "not strictly decreasing on (0, 1] near x = {}",
                left[w]
            )));
        }
        let vals: Vec<f64> = right.iter().map(|&x| self.raw(x)).collect();
        if let Some(w) = vals.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidCost(format!(
                "not strictly increasing on [1, inf) near x = {}",
                right[w]
            )));
        }
        Ok(())
    }

    pub fn kind(&self) -> &CostKind {
        &self.kind
    }

    pub fn is_relaxed(&self) -> bool {
        matches!(&self.kind, CostKind::Custom(c) if c.relaxed)
    }

    pub fn name(&self) -> String {
        match &self.kind {
            CostKind::Quadratic => "quadratic".into(),
            CostKind::LogSquare => "logsq".into(),
            CostKind::CubicAbs => "cubic".into(),
            CostKind::Quartic => "quartic".into(),
            CostKind::PowerP(p) => format!("power:{p}"),
            CostKind::Custom(c) => c.name.clone(),
        }
    }

    #[inline]
    fn raw(&self, x: f64) -> f64 {
        match &self.kind {
            CostKind::Quadratic => (x - 1.0).powi(2),
            CostKind::LogSquare => x.ln().powi(2),
            CostKind::CubicAbs => (x - 1.0).abs().powi(3),
            CostKind::Quartic => (x - 1.0).powi(4),
            CostKind::PowerP(p) => (x - 1.0).abs().powf(*p),
            CostKind::Custom(c) => (c.func)(x),
        }
    }

    /// `f(x)` for `x > 0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::NonpositiveArgument(x));
        }
        Ok(self.raw(x))
    }

    /// `f'(x)` when available in closed form.
    pub fn deriv(&self, x: f64) -> Option<f64> {
        if !(x > 0.0) {
            return None;
        }
        Some(match &self.kind {
            CostKind::Quadratic => 2.0 * (x - 1.0),
            CostKind::LogSquare => 2.0 * x.ln() / x,
            CostKind::CubicAbs => 3.0 * (x - 1.0) * (x - 1.0).abs(),
            CostKind::Quartic => 4.0 * (x - 1.0).powi(3),
            CostKind::PowerP(p) => p * (x - 1.0).signum() * (x - 1.0).abs().powf(p - 1.0),
            CostKind::Custom(c) => return c.deriv.as_ref().map(|d| d(x)),
        })
    }

    /// Limit `f(0+)` when finite. `None` for costs that diverge at zero.
    pub fn value_at_zero(&self) -> Option<f64> {
        match &self.kind {
            CostKind::LogSquare => None,
            CostKind::Custom(c) => {
                let v = (c.func)(0.0);
                v.is_finite().then_some(v)
            }
            _ => Some(self.raw(0.0)),
        }
    }

    /// `g(x) = f(e^x)`.
    pub fn g(&self, x: f64) -> f64 {
        self.raw(x.exp())
    }
}

impl FromStr for CostFunction {
    type Err = Error;

    /// `quadratic`, `logsq`, `cubic`, `quartic`, `power:<p>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quadratic" | "quad" => Ok(Self::quadratic()),
            "logsq" | "logsquare" | "log" => Ok(Self::log_square()),
            "cubic" | "cubicabs" => Ok(Self::cubic_abs()),
            "quartic" => Ok(Self::quartic()),
            other => {
                if let Some(p) = other.strip_prefix("power:") {
                    let p: f64 = p
                        .parse()
                        .map_err(|_| Error::InvalidCost(format!("bad exponent in '{other}'")))?;
                    Self::power(p)
                } else {
                    Err(Error::InvalidCost(format!("unknown cost '{other}'")))
                }
            }
        }
    }
}

/// Solution of the reduced problem at one ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FMinResult {
    pub s: f64,
    pub value: f64,
    /// Best pair, ordered `x <= y`, with `x * y = s`.
    pub argmin: (f64, f64),
    /// The conformal pair attains the minimum (within the tie tolerance).
    pub conformal: bool,
    /// All distinct pairs attaining the minimum within the tie tolerance.
    pub candidates: Vec<(f64, f64)>,
    pub relaxed_cost: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct ReducedMinOptions {
    /// Log-spaced seeds before golden-section refinement.
    pub seeds: usize,
    /// Golden-section tolerance in `log x`.
    pub xtol: f64,
    /// Values within this of the best are treated as ties.
    pub tie_tol: f64,
}

impl Default for ReducedMinOptions {
    fn default() -> Self {
        Self {
            seeds: 512,
            xtol: 1e-11,
            tie_tol: 1e-12,
        }
    }
}

/// `F_f(s)` with default options.
pub fn reduced_min(f: &CostFunction, s: f64) -> Result<FMinResult> {
    reduced_min_with(f, s, &ReducedMinOptions::default())
}

/// `F_f(s) = min_{xy = s} f(x) + f(y)`.
///
/// For `s <= 1` both factors of a minimizing pair lie in `[s, 1]`, for
/// `s >= 1` in `[1, s]`; the search runs over `u = log x` on that interval.
/// Seeds are scanned for local basins, each basin is refined with golden
/// section, and the conformal pair and interval endpoints are always
/// included as candidates.
pub fn reduced_min_with(f: &CostFunction, s: f64, opts: &ReducedMinOptions) -> Result<FMinResult> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::NonpositiveRatio(s));
    }
    let objective = |u: f64| f.raw(u.exp()) + f.raw(s * (-u).exp());
    let ls = s.ln();
    let (lo, hi) = if ls <= 0.0 { (ls, 0.0) } else { (0.0, ls) };
    let root = s.sqrt();
    let conformal_value = 2.0 * f.raw(root);

    // (u, value)
    let mut found: Vec<(f64, f64)> = vec![(0.5 * ls, conformal_value)];
    if hi > lo {
        let seeds = opts.seeds.max(3);
        let us = lin_space(lo, hi, seeds);
        let vals: Vec<f64> = us.iter().map(|&u| objective(u)).collect();
        found.push((lo, vals[0]));
        found.push((hi, vals[seeds - 1]));
        for i in 0..seeds {
            let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
            let right = if i + 1 == seeds { f64::INFINITY } else { vals[i + 1] };
            if vals[i] <= left && vals[i] <= right {
                let a = us[i.saturating_sub(1)];
                let b = us[(i + 1).min(seeds - 1)];
                let (u, v) = golden_section(objective, a, b, opts.xtol, 400);
                found.push(if v <= vals[i] { (u, v) } else { (us[i], vals[i]) });
            }
        }
    }

    let best = found.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::InvalidCost(format!("F_f({s}) is not finite")));
    }
    let conformal = conformal_value <= best + opts.tie_tol;

    let mut candidates: Vec<(f64, f64)> = Vec::new();
    let mut ordered = found.clone();
    ordered.sort_by(|a, b| a.1.total_cmp(&b.1));
    for &(u, v) in &ordered {
        if v > best + opts.tie_tol {
            break;
        }
        let x = u.exp();
        let y = s / x;
        let pair = if x <= y { (x, y) } else { (y, x) };
        if !candidates.iter().any(|c| (c.0.ln() - pair.0.ln()).abs() < 1e-6) {
            candidates.push(pair);
        }
    }
    let argmin = if conformal { (root, root) } else { candidates[0] };
    Ok(FMinResult {
        s,
        value: if conformal { conformal_value.min(best) } else { best },
        argmin,
        conformal,
        candidates,
        relaxed_cost: f.is_relaxed(),
    })
}

fn check_unit_ratio(s: f64) -> Result<()> {
    if !(s > 0.0) {
        return Err(Error::NonpositiveRatio(s));
    }
    if s > 1.0 {
        return Err(Error::ParameterOutOfRange {
            name: "s",
            value: s,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

/// Whether `(sqrt(s), sqrt(s))` minimizes the reduced problem, i.e.
/// `F_f(s) >= 2 f(sqrt(s)) - tol`.
pub fn conformal_is_minimizer(f: &CostFunction, s: f64, tol: f64) -> Result<bool> {
    check_unit_ratio(s)?;
    let res = reduced_min(f, s)?;
    Ok(res.value >= 2.0 * f.raw(s.sqrt()) - tol)
}

/// Smallest ratio scanned by [`phase_threshold`].
pub const PHASE_SCAN_FLOOR: f64 = 1e-6;

/// Largest `s*` such that the conformal pair fails to minimize just below it.
///
/// Scans a log-spaced grid downward from `1` to [`PHASE_SCAN_FLOOR`], then
/// bisects the first flip. `None` when no flip is found.
pub fn phase_threshold(f: &CostFunction, tol: f64) -> Result<Option<f64>> {
    let grid = log_space(PHASE_SCAN_FLOOR, 1.0, 241);
    let mut prev_true: Option<f64> = None;
    for &s in grid.iter().rev() {
        if conformal_is_minimizer(f, s, tol)? {
            prev_true = Some(s);
            continue;
        }
        let Some(upper) = prev_true else {
            // Not a minimizer already at s = 1 cannot happen for a valid cost.
            return Ok(Some(1.0));
        };
        let indicator = |t: f64| {
            if conformal_is_minimizer(f, t.exp(), tol).unwrap_or(false) {
                1.0
            } else {
                -1.0
            }
        };
        let root = bisect(indicator, s.ln(), upper.ln(), 1e-12, 200)
            .ok_or_else(|| Error::BisectionFailed("phase threshold bracket lost".into()))?;
        return Ok(Some(root.exp()));
    }
    Ok(None)
}

/// Discrete convexity report for `g(x) = f(e^x)` on `[x_lo, 0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexityScan {
    pub x_lo: f64,
    pub n: usize,
    /// Minimum of `(g(x-h) - 2 g(x) + g(x+h)) / h^2` over interior samples.
    pub min_second_difference: f64,
    /// Interior sample points where `g(x) > (g(x-h) + g(x+h)) / 2`.
    pub violations: Vec<f64>,
    /// Every second difference is strictly positive.
    pub strictly_convex: bool,
}

pub fn g_convexity_scan(f: &CostFunction, x_lo: f64, n: usize) -> Result<ConvexityScan> {
    if !(x_lo < 0.0) {
        return Err(Error::ParameterOutOfRange {
            name: "x_lo",
            value: x_lo,
            lo: f64::NEG_INFINITY,
            hi: 0.0,
        });
    }
    if n < 3 {
        return Err(Error::TooFewSamples(n, 3));
    }
    let xs = lin_space(x_lo, 0.0, n);
    let gs: Vec<f64> = xs.iter().map(|&x| f.g(x)).collect();
    let h = -x_lo / (n - 1) as f64;
    let mut min_d2 = f64::INFINITY;
    let mut violations = Vec::new();
    let mut strictly = true;
    for i in 1..n - 1 {
        let d2 = gs[i - 1] - 2.0 * gs[i] + gs[i + 1];
        let scale = gs[i - 1].abs().max(gs[i + 1].abs()).max(1.0);
        min_d2 = min_d2.min(d2 / (h * h));
        if d2 < -4.0 * f64::EPSILON * scale {
            violations.push(xs[i]);
        }
        if !(d2 > 0.0) {
            strictly = false;
        }
    }
    Ok(ConvexityScan {
        x_lo,
        n,
        min_second_difference: min_d2,
        violations,
        strictly_convex: strictly,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::volume_bound;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eval_examples() {
        assert_abs_diff_eq!(CostFunction::quadratic().eval(2.0).unwrap(), 1.0);
        assert_abs_diff_eq!(
            CostFunction::log_square().eval(std::f64::consts::E).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(CostFunction::quartic().eval(0.5).unwrap(), 0.0625);
        assert!(matches!(
            CostFunction::quadratic().eval(0.0),
            Err(Error::NonpositiveArgument(_))
        ));
    }

    #[test]
    fn custom_validation() {
        assert!(CostFunction::custom("shifted", |x: f64| (x - 1.0).powi(2) + 0.1).is_err());
        assert!(CostFunction::custom("wrong side", |x: f64| x - 1.0).is_err());
        let ok = CostFunction::custom("sq", |x: f64| (x - 1.0).powi(2)).unwrap();
        assert!(!ok.is_relaxed());
        // Ogden-like sum: f(x) = (x^2 - 1) - 2 (x - 1) = (x - 1)^2 passes,
        // but x^3 - 1 alone does not.
        assert!(CostFunction::custom("ogden", |x: f64| x.powi(3) - 1.0).is_err());
        let relaxed = CostFunction::custom_relaxed("ogden", |x: f64| x.powi(3) - 1.0).unwrap();
        assert!(relaxed.is_relaxed());
        assert!(reduced_min(&relaxed, 0.5).unwrap().relaxed_cost);
    }

    #[test]
    fn parse_names() {
        for name in ["quadratic", "logsq", "cubic", "quartic", "power:3"] {
            let c: CostFunction = name.parse().unwrap();
            assert_eq!(c.name(), name);
        }
        assert!("power:0.5".parse::<CostFunction>().is_err());
        assert!("nope".parse::<CostFunction>().is_err());
    }

    #[test]
    fn reduced_min_quadratic_below_threshold() {
        let r = reduced_min(&CostFunction::quadratic(), 0.1).unwrap();
        assert_abs_diff_eq!(r.value, 0.8, epsilon = 1e-12);
        assert!(!r.conformal);
        let (x, y) = r.argmin;
        assert_abs_diff_eq!(x + y, 1.0, epsilon = 1e-8);
        assert!((x * y - 0.1).abs() <= 1e-10);
        // x(1 - x) = 0.1
        assert_abs_diff_eq!(x, 0.5 - (0.25f64 - 0.1).sqrt(), epsilon = 1e-8);
    }

    #[test]
    fn reduced_min_quadratic_above_threshold() {
        let r = reduced_min(&CostFunction::quadratic(), 0.49).unwrap();
        assert_abs_diff_eq!(r.value, 0.18, epsilon = 1e-14);
        assert!(r.conformal);
        assert_abs_diff_eq!(r.argmin.0, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(r.argmin.1, 0.7, epsilon = 1e-15);
    }

    #[test]
    fn reduced_min_log_square_quarter() {
        let r = reduced_min(&CostFunction::log_square(), 0.25).unwrap();
        assert_abs_diff_eq!(r.value, 0.5 * 0.25f64.ln().powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!(r.value, 0.960906, epsilon = 1e-6);
        assert!(r.conformal);
        assert_eq!(r.argmin, (0.5, 0.5));
    }

    #[test]
    fn reduced_min_tie_at_threshold_reports_conformal() {
        let r = reduced_min(&CostFunction::quadratic(), 0.25).unwrap();
        assert!(r.conformal);
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-15);
        assert!(!r.candidates.is_empty());
    }

    #[test]
    fn reduced_min_above_one() {
        let r = reduced_min(&CostFunction::quadratic(), 2.25).unwrap();
        assert_abs_diff_eq!(r.value, volume_bound(2.25).unwrap(), epsilon = 1e-12);
        let r = reduced_min(&CostFunction::quadratic(), 1.0).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(reduced_min(&CostFunction::quadratic(), 0.0).is_err());
    }

    #[test]
    fn conformal_minimizer_examples() {
        let q = CostFunction::quadratic();
        assert!(conformal_is_minimizer(&q, 0.5, 1e-12).unwrap());
        assert!(!conformal_is_minimizer(&q, 0.1, 1e-12).unwrap());
        let l = CostFunction::log_square();
        for s in [1e-4, 0.01, 0.1, 0.25, 0.5, 0.9, 1.0] {
            assert!(conformal_is_minimizer(&l, s, 1e-12).unwrap());
        }
        assert!(conformal_is_minimizer(&q, 1.5, 1e-12).is_err());
    }

    #[test]
    fn phase_threshold_examples() {
        let s = phase_threshold(&CostFunction::quadratic(), 1e-9).unwrap().unwrap();
        assert!((s - 0.25).abs() <= 0.01, "{s}");
        assert_eq!(phase_threshold(&CostFunction::log_square(), 1e-9).unwrap(), None);
        let s = phase_threshold(&CostFunction::quartic(), 1e-9).unwrap().unwrap();
        assert!(s > 0.0 && s < 1.0);
    }

    #[test]
    fn convexity_scan_log_square() {
        let r = g_convexity_scan(&CostFunction::log_square(), -3.0, 61).unwrap();
        assert!(r.strictly_convex);
        assert!(r.violations.is_empty());
        assert_abs_diff_eq!(r.min_second_difference, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn convexity_scan_quadratic_changes_sign_at_minus_log_two() {
        // g = (e^x - 1)^2, g'' = e^x (4 e^x - 2) changes sign at x = -ln 2.
        let q = CostFunction::quadratic();
        let r = g_convexity_scan(&q, -2f64.ln(), 101).unwrap();
        assert!(r.violations.is_empty());
        let r = g_convexity_scan(&q, -1.0, 101).unwrap();
        assert!(!r.violations.is_empty());
        assert!(r.violations.iter().all(|&x| x < -2f64.ln() + 0.02));
    }

    #[test]
    fn convexity_scan_quartic_has_violations() {
        let r = g_convexity_scan(&CostFunction::quartic(), -5.0, 201).unwrap();
        assert!(!r.violations.is_empty());
        assert!(r.min_second_difference < 0.0);
    }

    #[test]
    fn convexity_scan_rejects_bad_input() {
        assert!(g_convexity_scan(&CostFunction::quartic(), 0.5, 10).is_err());
        assert!(g_convexity_scan(&CostFunction::quartic(), -1.0, 2).is_err());
    }
}
