//! Seeded random-matrix property suites.
//!
//! Samples have entries uniform in `[-3, 3]`, rejected until the determinant
//! clears the suite's floor. A run is deterministic given `(suite, n, seed)`.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{sandwich_co, sandwich_k, volume_bound, THRESHOLD};
use crate::error::{Error, Result};
use crate::mat2::{self, cof_sum_defect, polar_factor, singular_values, Mat2};

pub const DEFAULT_SEED: u64 = 0x5EED_1729;

/// Half-width of the entry distribution.
pub const ENTRY_RANGE: f64 = 3.0;

/// Absolute tolerance for inequality and identity checks.
pub const PROPERTY_TOL: f64 = 1e-12;

/// Oracle tolerance at the default grid size.
pub const ORACLE_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    SandwichK,
    SandwichCo,
    PointwiseBound,
    PolarIdentity,
    DistKOracle,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::SandwichK,
        Suite::SandwichCo,
        Suite::PointwiseBound,
        Suite::PolarIdentity,
        Suite::DistKOracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::SandwichK => "sandwich_k",
            Suite::SandwichCo => "sandwich_co",
            Suite::PointwiseBound => "pointwise_bound",
            Suite::PolarIdentity => "polar_identity",
            Suite::DistKOracle => "dist_k_oracle",
        }
    }

    fn min_det(&self) -> f64 {
        match self {
            Suite::SandwichCo => THRESHOLD,
            _ => 0.0,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL.into_iter().find(|suite| suite.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Suite::ALL.iter().map(Suite::name).collect();
            format!("unknown suite '{s}' (expected one of {})", names.join(", "))
        })
    }
}

/// Random matrix with entries in `[-3, 3]` and `det >= min_det`.
pub fn random_matrix<R: Rng>(rng: &mut R, min_det: f64) -> Mat2 {
    loop {
        let mut e = || rng.random_range(-ENTRY_RANGE..=ENTRY_RANGE);
        let a = Mat2::new(e(), e(), e(), e());
        if a.det() >= min_det {
            return a;
        }
    }
}

/// `R(t1) diag(s1, s2) R(t2)`.
fn with_singular_values<R: Rng>(rng: &mut R, s1: f64, s2: f64) -> Mat2 {
    let t1 = rng.random_range(0.0..TAU);
    let t2 = rng.random_range(0.0..TAU);
    Mat2::rotation(t1) * Mat2::diag(s1, s2) * Mat2::rotation(t2)
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Slice parameters in the `dist_k_oracle` grid.
    pub oracle_points: usize,
    /// Tolerance for `dist_k_oracle`.
    pub oracle_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            oracle_points: 1024,
            oracle_tol: ORACLE_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub n_samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub violations: usize,
    /// Smallest slack over all checks; below `-tolerance` is a violation.
    /// Identity checks contribute `-error`.
    pub worst_margin: f64,
    pub worst_sample: Option<Mat2>,
    /// Largest deviation in identity checks (equality cases, oracle error).
    pub max_error: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

struct Tally {
    tol: f64,
    violations: usize,
    worst_margin: f64,
    worst_sample: Option<Mat2>,
    max_error: f64,
}

impl Tally {
    fn new(tol: f64) -> Self {
        Self {
            tol,
            violations: 0,
            worst_margin: f64::INFINITY,
            worst_sample: None,
            max_error: 0.0,
        }
    }

    /// Inequality with slack `margin >= -tol`.
    fn margin(&mut self, a: Mat2, margin: f64) {
        if !(margin >= -self.tol) {
            self.violations += 1;
        }
        if margin < self.worst_margin || margin.is_nan() {
            self.worst_margin = margin;
            self.worst_sample = Some(a);
        }
    }

    /// Identity with deviation `err <= tol`.
    fn error(&mut self, a: Mat2, err: f64) {
        if err > self.max_error || err.is_nan() {
            self.max_error = err;
        }
        self.margin(a, -err);
    }
}

/// Minimum of `dist(A, K_s)` over `n` evenly spaced `s` in `[0, 1/4]`.
pub fn dist_k_grid_oracle(a: &Mat2, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::TooFewSamples(n, 2));
    }
    let mut best = f64::INFINITY;
    for i in 0..n {
        let s = if i == n - 1 {
            THRESHOLD
        } else {
            THRESHOLD * i as f64 / (n - 1) as f64
        };
        best = best.min(mat2::dist_ks(a, s)?);
    }
    Ok(best)
}

pub fn run_suite(suite: Suite, n_samples: usize, seed: u64) -> Result<VerifyReport> {
    run_suite_with(suite, n_samples, seed, &VerifyOptions::default())
}

pub fn run_suite_with(suite: Suite, n_samples: usize, seed: u64, opts: &VerifyOptions) -> Result<VerifyReport> {
    if n_samples == 0 {
        return Err(Error::TooFewSamples(0, 1));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = match suite {
        Suite::DistKOracle => opts.oracle_tol,
        _ => PROPERTY_TOL,
    };
    let mut t = Tally::new(tol);
    for _ in 0..n_samples {
        let a = random_matrix(&mut rng, suite.min_det());
        match suite {
            Suite::SandwichK => {
                let s = sandwich_k(&a)?;
                t.margin(a, s.margin());
            }
            Suite::SandwichCo => {
                let s = sandwich_co(&a)?;
                t.margin(a, s.margin());
            }
            Suite::PointwiseBound => {
                let d = mat2::dist_so2(&a)?;
                t.margin(a, d * d - volume_bound(a.det())?);
                // equality: conformal above the threshold, K-valued below
                let lambda = rng.random_range(0.5..=3.0);
                let c = with_singular_values(&mut rng, lambda, lambda);
                let d = mat2::dist_so2(&c)?;
                t.error(c, (d * d - volume_bound(c.det())?).abs());
                let s1 = rng.random_range(0.0..=0.5);
                let k = with_singular_values(&mut rng, s1, 1.0 - s1);
                let d = mat2::dist_so2(&k)?;
                t.error(k, (d * d - volume_bound(k.det().max(0.0))?).abs());
            }
            Suite::PolarIdentity => {
                let o = polar_factor(&a)?;
                // independent rotation angle of the polar factor
                let angle = (a.a21 - a.a12).atan2(a.a11 + a.a22);
                t.error(a, o.max_abs_diff(&Mat2::rotation(angle)) / a.norm().max(1.0));
                let sum = singular_values(&a).sum();
                t.error(a, (a + a.cofactor() - sum * o).norm() / a.norm().max(1.0));
                t.error(a, ((a - o).norm() - mat2::dist_so2(&a)?).abs());
                let s1 = rng.random_range(1e-3..=0.5);
                let k = with_singular_values(&mut rng, s1, 1.0 - s1);
                t.error(k, cof_sum_defect(&k)?);
            }
            Suite::DistKOracle => {
                let oracle = dist_k_grid_oracle(&a, opts.oracle_points)?;
                let closed = mat2::dist_k(&a)?;
                t.error(a, (closed - oracle).abs());
            }
        }
    }
    Ok(VerifyReport {
        suite,
        n_samples,
        seed,
        tolerance: tol,
        violations: t.violations,
        worst_margin: t.worst_margin,
        worst_sample: t.worst_sample,
        max_error: t.max_error,
    })
}
