//! Discrete Piola and Euler-Lagrange residuals on Cartesian lattices.
//!
//! A [`FieldGrid`] is the lattice `{-L + i h}^2` with nodes closer than
//! `exclusion` to the origin removed, carrying one 2x2 matrix per node. The
//! divergence is taken row-wise with central differences, so only nodes
//! whose four neighbours are active contribute.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::PlanarMap;
use crate::mat2::{self, polar_factor, singular_values, Mat2};
use crate::numeric::{loglog_slope, KahanSum};

/// Default radius of the excluded neighbourhood of the origin.
pub const DEFAULT_EXCLUSION: f64 = 0.1;

/// Nodes with `sigma1` below this are rejected by [`el_residual`].
pub const SINGULAR_SIGMA1: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldMode {
    Analytic,
    /// Central differences of the map values, step `h`.
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldGrid {
    pub half_width: f64,
    pub h: f64,
    pub exclusion: f64,
    /// Nodes per side.
    n: usize,
    active: Vec<bool>,
    values: Vec<Mat2>,
}

impl FieldGrid {
    /// Lattice over `[-half_width, half_width]^2`; `2 half_width / h` must be
    /// an integer (up to round-off).
    pub fn new(half_width: f64, h: f64, exclusion: f64) -> Result<Self> {
        if !(half_width > 0.0 && h > 0.0 && h < half_width) {
            return Err(Error::GridTooSmall);
        }
        let cells = 2.0 * half_width / h;
        if (cells - cells.round()).abs() > 1e-9 * cells {
            return Err(Error::ParameterOutOfRange {
                name: "h",
                value: h,
                lo: 0.0,
                hi: half_width,
            });
        }
        let n = cells.round() as usize + 1;
        let mut g = Self {
            half_width,
            h,
            exclusion,
            n,
            active: vec![false; n * n],
            values: vec![Mat2::ZERO; n * n],
        };
        for j in 0..n {
            for i in 0..n {
                let (x, y) = g.coords(i, j);
                g.active[j * n + i] = x.hypot(y) >= exclusion;
            }
        }
        Ok(g)
    }

    pub fn nodes_per_side(&self) -> usize {
        self.n
    }

    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (
            -self.half_width + i as f64 * self.h,
            -self.half_width + j as f64 * self.h,
        )
    }

    pub fn is_active(&self, i: usize, j: usize) -> bool {
        self.active[j * self.n + i]
    }

    pub fn value(&self, i: usize, j: usize) -> Option<Mat2> {
        self.is_active(i, j).then(|| self.values[j * self.n + i])
    }

    fn is_interior(&self, i: usize, j: usize) -> bool {
        i > 0
            && j > 0
            && i + 1 < self.n
            && j + 1 < self.n
            && self.is_active(i, j)
            && self.is_active(i - 1, j)
            && self.is_active(i + 1, j)
            && self.is_active(i, j - 1)
            && self.is_active(i, j + 1)
    }

    pub fn interior_count(&self) -> usize {
        (0..self.n)
            .flat_map(|j| (0..self.n).map(move |i| (i, j)))
            .filter(|&(i, j)| self.is_interior(i, j))
            .count()
    }

    /// Same lattice with each active value replaced by `f(A, x, y)`.
    pub fn map_values<F>(&self, f: F) -> Result<FieldGrid>
    where
        F: Fn(&Mat2, f64, f64) -> Result<Mat2> + Sync,
    {
        let n = self.n;
        let values = (0..n * n)
            .into_par_iter()
            .map(|k| {
                if !self.active[k] {
                    return Ok(Mat2::ZERO);
                }
                let (x, y) = self.coords(k % n, k / n);
                f(&self.values[k], x, y)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FieldGrid { values, ..self.clone() })
    }
}

/// Per-node differential of `m` on the active nodes of `grid`.
pub fn differential_field<M: PlanarMap + ?Sized>(m: &M, grid: &FieldGrid, mode: FieldMode) -> Result<FieldGrid> {
    let h = grid.h;
    grid.map_values(|_, x, y| {
        let margin = || Error::EvaluationMargin { x, y, h };
        match mode {
            FieldMode::Analytic => m.differential(x, y).map_err(|_| margin()),
            FieldMode::FiniteDifference => {
                let at = |u: f64, v: f64| m.eval(u, v).map_err(|_| margin());
                let (px, mx) = (at(x + h, y)?, at(x - h, y)?);
                let (py, my) = (at(x, y + h)?, at(x, y - h)?);
                let d = 2.0 * h;
                Ok(Mat2::new(
                    (px[0] - mx[0]) / d,
                    (py[0] - my[0]) / d,
                    (px[1] - mx[1]) / d,
                    (py[1] - my[1]) / d,
                ))
            }
        }
    })
}

/// Row-wise central-difference divergence at one interior node.
fn divergence_at(field: &FieldGrid, i: usize, j: usize) -> [f64; 2] {
    let n = field.n;
    let v = |i: usize, j: usize| field.values[j * n + i];
    let d = 2.0 * field.h;
    let (e, w, no, s) = (v(i + 1, j), v(i - 1, j), v(i, j + 1), v(i, j - 1));
    [
        (e.a11 - w.a11) / d + (no.a12 - s.a12) / d,
        (e.a21 - w.a21) / d + (no.a22 - s.a22) / d,
    ]
}

/// Divergence at one interior node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeResidual {
    pub x: f64,
    pub y: f64,
    pub div: [f64; 2],
}

/// Divergence of the field at every interior node, in lattice order.
pub fn divergence(field: &FieldGrid) -> Result<Vec<NodeResidual>> {
    divergence_strided(field, 1)
}

/// Divergence at the interior nodes whose indices are multiples of
/// `stride`, i.e. the nodes shared with the lattice of spacing `stride * h`.
pub fn divergence_strided(field: &FieldGrid, stride: usize) -> Result<Vec<NodeResidual>> {
    let n = field.n;
    let stride = stride.max(1);
    let out: Vec<NodeResidual> = (0..n * n)
        .filter_map(|k| {
            let (i, j) = (k % n, k / n);
            (i % stride == 0 && j % stride == 0 && field.is_interior(i, j)).then(|| {
                let (x, y) = field.coords(i, j);
                NodeResidual {
                    x,
                    y,
                    div: divergence_at(field, i, j),
                }
            })
        })
        .collect();
    if out.is_empty() {
        return Err(Error::GridTooSmall);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualNorms {
    /// Max over interior nodes of the Euclidean norm of the divergence.
    pub sup: f64,
    /// Discrete L2 norm, `sqrt(sum |div|^2 h^2)`.
    pub l2: f64,
    pub interior_nodes: usize,
}

pub fn residual_norms(field: &FieldGrid) -> Result<ResidualNorms> {
    residual_norms_strided(field, 1)
}

/// Norms over the nodes shared with the lattice of spacing `stride * h`;
/// the L2 weight is the coarse cell area.
pub fn residual_norms_strided(field: &FieldGrid, stride: usize) -> Result<ResidualNorms> {
    let nodes = divergence_strided(field, stride)?;
    let cell = field.h * stride.max(1) as f64;
    let mut sup = 0.0f64;
    let mut acc = KahanSum::new();
    for r in &nodes {
        let sq = r.div[0] * r.div[0] + r.div[1] * r.div[1];
        sup = sup.max(sq.sqrt());
        acc.add(sq * cell * cell);
    }
    Ok(ResidualNorms {
        sup,
        l2: acc.value().sqrt(),
        interior_nodes: nodes.len(),
    })
}

/// `Cof A` at every node.
pub fn cofactor_field(field: &FieldGrid) -> Result<FieldGrid> {
    field.map_values(|a, _, _| Ok(a.cofactor()))
}

/// `dist^{p-2}(A, SO2) (A - O(A))` at every node.
pub fn el_stress_field(field: &FieldGrid, p: f64) -> Result<FieldGrid> {
    if !(p >= 2.0) {
        return Err(Error::PowerBelowTwo(p));
    }
    field.map_values(|a, x, y| {
        let sv = singular_values(a);
        if a.det() <= 0.0 || sv.sigma1 < SINGULAR_SIGMA1 {
            return Err(Error::SingularNode {
                x,
                y,
                sigma1: sv.sigma1,
            });
        }
        let o = polar_factor(a)?;
        let scale = if p == 2.0 {
            1.0
        } else {
            mat2::dist_so2(a)?.powf(p - 2.0)
        };
        Ok(scale * (*a - o))
    })
}

pub fn piola_residual_norms(field: &FieldGrid) -> Result<ResidualNorms> {
    residual_norms(&cofactor_field(field)?)
}

/// Sup norm of the discrete divergence of `Cof A`.
pub fn piola_residual(field: &FieldGrid) -> Result<f64> {
    Ok(piola_residual_norms(field)?.sup)
}

pub fn el_residual_norms(field: &FieldGrid, p: f64) -> Result<ResidualNorms> {
    residual_norms(&el_stress_field(field, p)?)
}

/// Sup norm of the discrete divergence of `dist^{p-2} (A - O(A))`.
pub fn el_residual(field: &FieldGrid, p: f64) -> Result<f64> {
    Ok(el_residual_norms(field, p)?.sup)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResidualKind {
    Piola,
    EulerLagrange { p: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub h: f64,
    pub residual: f64,
    pub l2: f64,
    /// Log-log slope against the previous (coarser) level.
    pub slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub map: String,
    pub kind: ResidualKind,
    pub mode: FieldMode,
    pub rows: Vec<RefinementRow>,
    /// Least-squares slope of `log residual` against `log h` over all rows.
    pub fitted_slope: f64,
}

impl RefinementStudy {
    /// Columns `h,residual,slope`, 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,residual,slope\n");
        for r in &self.rows {
            let slope = r.slope.map(|s| format!("{s:.8e}")).unwrap_or_default();
            out.push_str(&format!("{:.8e},{:.8e},{}\n", r.h, r.residual, slope));
        }
        out
    }
}

pub struct RefinementOptions {
    pub half_width: f64,
    pub exclusion: f64,
    pub mode: FieldMode,
}

impl Default for RefinementOptions {
    fn default() -> Self {
        Self {
            half_width: 0.5,
            exclusion: DEFAULT_EXCLUSION,
            mode: FieldMode::Analytic,
        }
    }
}

/// Residual of `m` at each spacing in `hs` (coarse to fine).
///
/// Every spacing must divide `hs[0]`; norms are taken over the nodes of the
/// coarsest lattice so that all levels are measured at the same points.
pub fn refinement_study<M: PlanarMap + ?Sized>(
    m: &M,
    kind: ResidualKind,
    hs: &[f64],
    opts: &RefinementOptions,
) -> Result<RefinementStudy> {
    if hs.len() < 2 {
        return Err(Error::TooFewSamples(hs.len(), 2));
    }
    let mut rows: Vec<RefinementRow> = Vec::with_capacity(hs.len());
    for &h in hs {
        let grid = FieldGrid::new(opts.half_width, h, opts.exclusion)?;
        let field = differential_field(m, &grid, opts.mode)?;
        let ratio = hs[0] / h;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio || ratio < 0.5 {
            return Err(Error::ParameterOutOfRange {
                name: "h",
                value: h,
                lo: 0.0,
                hi: hs[0],
            });
        }
        let stress = match kind {
            ResidualKind::Piola => cofactor_field(&field)?,
            ResidualKind::EulerLagrange { p } => el_stress_field(&field, p)?,
        };
        let norms = residual_norms_strided(&stress, ratio.round() as usize)?;
        let slope = rows
            .last()
            .map(|prev| (norms.sup / prev.residual).ln() / (h / prev.h).ln());
        rows.push(RefinementRow {
            h,
            residual: norms.sup,
            l2: norms.l2,
            slope,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.residual).collect();
    Ok(RefinementStudy {
        map: m.label(),
        kind,
        mode: opts.mode,
        rows,
        fitted_slope: loglog_slope(&xs, &ys),
    })
}
