//! Midpoint quadrature of distortion energies over disks, annuli and squares.
//!
//! All averages are normalized by the total quadrature weight, so a punctured
//! domain `Annulus(eps)` is averaged over its own area. Integrand values may
//! be computed in parallel; the reduction is a compensated sum in node order.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{volume_bound, volume_bound_pow, Sandwich, THRESHOLD};
use crate::costfn::{g_convexity_scan, reduced_min, CostFunction};
use crate::error::{Error, Result};
use crate::maps::PlanarMap;
use crate::mat2::{self, singular_values, Mat2};
use crate::numeric::KahanSum;

/// Inner radius used for maps that are singular at the origin.
pub const PUNCTURE_EPS: f64 = 1e-6;

/// Tolerance used when checking sandwich orderings and gaps.
pub const QUADRATURE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GridDomain {
    /// Unit disk.
    Disk,
    /// `inner < r < 1`.
    Annulus(f64),
    /// `[-a, a]^2`.
    Square(f64),
}

impl GridDomain {
    pub fn area(&self) -> f64 {
        match *self {
            GridDomain::Disk => PI,
            GridDomain::Annulus(r0) => PI * (1.0 - r0 * r0),
            GridDomain::Square(a) => 4.0 * a * a,
        }
    }

    /// Area of the unit disk not covered (the puncture of an annulus).
    pub fn omitted_area(&self) -> f64 {
        match *self {
            GridDomain::Annulus(r0) => PI * r0 * r0,
            _ => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadNode {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub domain: GridDomain,
    /// `(n_r, n_theta)` for polar domains, `(n_x, n_y)` for squares.
    pub resolution: (usize, usize),
    pub nodes: Vec<QuadNode>,
}

impl QuadratureGrid {
    /// Sum of the weights, compensated.
    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).collect::<KahanSum>().value()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Midpoint rule in each coordinate. Polar nodes carry weight
/// `r dr dtheta`, square nodes `dx dy`.
pub fn build_grid(domain: GridDomain, n1: usize, n2: usize) -> Result<QuadratureGrid> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::ResolutionTooLow(n1.min(n2), 2));
    }
    let nodes = match domain {
        GridDomain::Disk => polar_nodes(0.0, n1, n2),
        GridDomain::Annulus(r0) => {
            if !(r0 > 0.0 && r0 < 1.0) {
                return Err(Error::UnsupportedDomain(format!("annulus inner radius {r0}")));
            }
            polar_nodes(r0, n1, n2)
        }
        GridDomain::Square(a) => {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::UnsupportedDomain(format!("square half-width {a}")));
            }
            let (dx, dy) = (2.0 * a / n1 as f64, 2.0 * a / n2 as f64);
            let mut nodes = Vec::with_capacity(n1 * n2);
            for j in 0..n2 {
                let y = -a + (j as f64 + 0.5) * dy;
                for i in 0..n1 {
                    let x = -a + (i as f64 + 0.5) * dx;
                    nodes.push(QuadNode { x, y, weight: dx * dy });
                }
            }
            nodes
        }
    };
    Ok(QuadratureGrid {
        domain,
        resolution: (n1, n2),
        nodes,
    })
}

fn polar_nodes(r0: f64, n_r: usize, n_t: usize) -> Vec<QuadNode> {
    let dr = (1.0 - r0) / n_r as f64;
    let dt = TAU / n_t as f64;
    let mut nodes = Vec::with_capacity(n_r * n_t);
    for i in 0..n_r {
        let r = r0 + (i as f64 + 0.5) * dr;
        for j in 0..n_t {
            let t = (j as f64 + 0.5) * dt;
            nodes.push(QuadNode {
                x: r * t.cos(),
                y: r * t.sin(),
                weight: r * dr * dt,
            });
        }
    }
    nodes
}

/// Grid adapted to the map's domain: the unit disk, or `Annulus(eps)` when
/// the map is punctured (or has a hole).
pub fn grid_for<M: PlanarMap + ?Sized>(m: &M, n_r: usize, n_theta: usize) -> Result<QuadratureGrid> {
    let inner = m.inner_radius();
    if inner > 0.0 || m.is_punctured() {
        build_grid(GridDomain::Annulus(inner.max(PUNCTURE_EPS)), n_r, n_theta)
    } else {
        build_grid(GridDomain::Disk, n_r, n_theta)
    }
}

/// What was integrated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnergyDescriptor {
    Power { p: f64 },
    Cost { name: String },
}

/// Both rigidity sandwiches for one map (`p = 2` semantics).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidityResiduals {
    pub e2: f64,
    pub volume_ratio: f64,
    /// `(K_defect, E2 - F(volume_ratio), 2 K_defect)`.
    pub sandwich: Sandwich,
    /// The sandwich is a theorem only for `volume_ratio <= 1/4`.
    pub applicable: bool,
    pub ordered: bool,
    /// `2 (V_N - V_image) / V_M`, when a target area `V_N` was given.
    pub deficit: Option<f64>,
    /// `(K_defect + deficit, E2 - F(V_N / V_M), 2 K_defect + deficit)`.
    pub deficit_sandwich: Option<Sandwich>,
    pub deficit_applicable: Option<bool>,
    pub deficit_ordered: Option<bool>,
}

/// Which equality case of the bound a report sits in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqualityCase {
    /// `gap > tol`.
    Strict,
    /// Volume ratio at least `1/4` and the map is conformal.
    Conformal,
    /// Volume ratio at most `1/4` and `d phi` lies in `K`.
    WellK,
    /// Zero gap without either characterization; should not happen.
    Unclassified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub map: String,
    pub descriptor: EnergyDescriptor,
    pub energy: f64,
    /// Average Jacobian.
    pub volume_ratio: f64,
    /// `F^{p/2}(volume_ratio)` or `F_f(volume_ratio)`.
    pub bound: f64,
    pub gap: f64,
    /// Average of `dist^2(d phi, K)`.
    pub k_defect: f64,
    /// Average of `dist^2(d phi, CO2)`.
    pub co_defect: f64,
    pub rigidity: RigidityResiduals,
    pub domain: GridDomain,
    pub resolution: (usize, usize),
    pub nodes: usize,
    /// Total quadrature weight, the normalizing area.
    pub area: f64,
    /// Area of the unit disk left out by the puncture.
    pub omitted_area: f64,
    /// For cost energies: `g(x) = f(e^x)` is strictly convex on the sampled
    /// part of `(-inf, 0]`, the hypothesis under which `gap >= 0` is known.
    pub convexity_hypothesis: Option<bool>,
}

impl EnergyReport {
    pub fn equality_case(&self, tol: f64) -> EqualityCase {
        if self.gap > tol {
            EqualityCase::Strict
        } else if self.volume_ratio >= THRESHOLD - tol && self.co_defect <= tol {
            EqualityCase::Conformal
        } else if self.volume_ratio <= THRESHOLD + tol && self.k_defect <= tol {
            EqualityCase::WellK
        } else {
            EqualityCase::Unclassified
        }
    }

    pub fn csv_header() -> &'static str {
        "map,descriptor,energy,volume_ratio,bound,gap,k_defect,co_defect,area,omitted_area"
    }

    /// One CSV row, 9 significant digits.
    pub fn csv_row(&self) -> String {
        let desc = match &self.descriptor {
            EnergyDescriptor::Power { p } => format!("p={p}"),
            EnergyDescriptor::Cost { name } => format!("f={name}"),
        };
        format!(
            "\"{}\",{},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}",
            self.map.replace('"', "'"),
            desc,
            self.energy,
            self.volume_ratio,
            self.bound,
            self.gap,
            self.k_defect,
            self.co_defect,
            self.area,
            self.omitted_area
        )
    }
}

/// Per-node values, weighted later.
#[derive(Clone, Copy, Debug)]
struct NodeValues {
    density: f64,
    jacobian: f64,
    dist_so2_sq: f64,
    dist_k_sq: f64,
    dist_co2_sq: f64,
    sigma1: f64,
}

fn node_values<M, D>(m: &M, node: &QuadNode, density: &D) -> Result<NodeValues>
where
    M: PlanarMap + ?Sized,
    D: Fn(&Mat2, f64, f64) -> Result<f64> + Sync,
{
    let a = m
        .differential(node.x, node.y)
        .ok()
        .filter(Mat2::is_finite)
        .ok_or(Error::MapEvaluationFailure { x: node.x, y: node.y })?;
    let dso = mat2::dist_so2(&a)?;
    let dk = mat2::dist_k(&a)?;
    let dco = mat2::dist_co2(&a)?;
    Ok(NodeValues {
        density: density(&a, node.x, node.y)?,
        jacobian: a.det(),
        dist_so2_sq: dso * dso,
        dist_k_sq: dk * dk,
        dist_co2_sq: dco * dco,
        sigma1: singular_values(&a).sigma1,
    })
}

struct Averages {
    area: f64,
    density: f64,
    jacobian: f64,
    dist_so2_sq: f64,
    dist_k_sq: f64,
    dist_co2_sq: f64,
    min_sigma1: f64,
}

fn integrate<M, D>(m: &M, grid: &QuadratureGrid, density: D) -> Result<Averages>
where
    M: PlanarMap + ?Sized,
    D: Fn(&Mat2, f64, f64) -> Result<f64> + Sync,
{
    if grid.is_empty() {
        return Err(Error::GridTooSmall);
    }
    let values: Vec<NodeValues> = grid
        .nodes
        .par_iter()
        .map(|n| node_values(m, n, &density))
        .collect::<Result<_>>()?;

    let mut sums = [KahanSum::new(); 6];
    let mut min_sigma1 = f64::INFINITY;
    for (n, v) in grid.nodes.iter().zip(&values) {
        let w = n.weight;
        sums[0].add(w);
        sums[1].add(w * v.density);
        sums[2].add(w * v.jacobian);
        sums[3].add(w * v.dist_so2_sq);
        sums[4].add(w * v.dist_k_sq);
        sums[5].add(w * v.dist_co2_sq);
        min_sigma1 = min_sigma1.min(v.sigma1);
    }
    let area = sums[0].value();
    Ok(Averages {
        area,
        density: sums[1].value() / area,
        jacobian: sums[2].value() / area,
        dist_so2_sq: sums[3].value() / area,
        dist_k_sq: sums[4].value() / area,
        dist_co2_sq: sums[5].value() / area,
        min_sigma1,
    })
}

fn rigidity_from(avg: &Averages, v_n: Option<f64>) -> Result<RigidityResiduals> {
    let vr = avg.jacobian;
    let e2 = avg.dist_so2_sq;
    let k = avg.dist_k_sq;
    let sandwich = Sandwich {
        lower: k,
        mid: e2 - volume_bound(vr.max(0.0))?,
        upper: 2.0 * k,
    };
    let applicable = vr <= THRESHOLD;
    let mut out = RigidityResiduals {
        e2,
        volume_ratio: vr,
        sandwich,
        applicable,
        ordered: sandwich.is_ordered(QUADRATURE_TOL),
        deficit: None,
        deficit_sandwich: None,
        deficit_applicable: None,
        deficit_ordered: None,
    };
    if let Some(v_n) = v_n {
        let v_image = vr * avg.area;
        if v_n < v_image - QUADRATURE_TOL * avg.area.max(1.0) {
            return Err(Error::VolumeInconsistent { v_n, v_image });
        }
        let deficit = 2.0 * (v_n - v_image) / avg.area;
        let ratio = v_n / avg.area;
        let s = Sandwich {
            lower: k + deficit,
            mid: e2 - volume_bound(ratio)?,
            upper: 2.0 * k + deficit,
        };
        out.deficit = Some(deficit);
        out.deficit_sandwich = Some(s);
        out.deficit_applicable = Some(ratio <= THRESHOLD);
        out.deficit_ordered = Some(s.is_ordered(QUADRATURE_TOL));
    }
    Ok(out)
}

/// `E_p(phi) = avg dist^p(d phi, SO2)` with the bound `F^{p/2}(avg J phi)`.
pub fn energy_p<M: PlanarMap + ?Sized>(m: &M, grid: &QuadratureGrid, p: f64) -> Result<EnergyReport> {
    if !(p >= 2.0) {
        return Err(Error::PowerBelowTwo(p));
    }
    let avg = integrate(m, grid, |a, _, _| Ok(mat2::dist_so2(a)?.powf(p)))?;
    let bound = volume_bound_pow(avg.jacobian.max(0.0), p)?;
    report(m, grid, EnergyDescriptor::Power { p }, &avg, bound, None)
}

/// `E_f(phi) = avg f(s1) + f(s2)` with the bound `F_f(avg J phi)`.
pub fn energy_f<M: PlanarMap + ?Sized>(m: &M, grid: &QuadratureGrid, f: &CostFunction) -> Result<EnergyReport> {
    let at_zero = f.value_at_zero();
    let avg = integrate(m, grid, |a, x, y| {
        let sv = singular_values(a);
        let lo = if sv.sigma1 > 0.0 {
            f.eval(sv.sigma1)?
        } else {
            at_zero.ok_or(Error::NonpositiveSingularValue { x, y })?
        };
        Ok(lo + f.eval(sv.sigma2)?)
    })?;
    let vr = avg.jacobian;
    if !(vr > 0.0) {
        return Err(Error::NonpositiveRatio(vr));
    }
    let bound = reduced_min(f, vr)?.value;
    let x_lo = avg.min_sigma1.min(vr).ln().clamp(-30.0, -1e-3);
    let convex = g_convexity_scan(f, x_lo, 401)?.strictly_convex;
    report(
        m,
        grid,
        EnergyDescriptor::Cost { name: f.name() },
        &avg,
        bound,
        Some(convex),
    )
}

fn report<M: PlanarMap + ?Sized>(
    m: &M,
    grid: &QuadratureGrid,
    descriptor: EnergyDescriptor,
    avg: &Averages,
    bound: f64,
    convexity_hypothesis: Option<bool>,
) -> Result<EnergyReport> {
    Ok(EnergyReport {
        map: m.label(),
        descriptor,
        energy: avg.density,
        volume_ratio: avg.jacobian,
        bound,
        gap: avg.density - bound,
        k_defect: avg.dist_k_sq,
        co_defect: avg.dist_co2_sq,
        rigidity: rigidity_from(avg, None)?,
        domain: grid.domain,
        resolution: grid.resolution,
        nodes: grid.len(),
        area: avg.area,
        omitted_area: grid.domain.omitted_area(),
        convexity_hypothesis,
    })
}

/// Rigidity sandwiches; `v_n` is the area of the target domain, if any.
pub fn rigidity_residuals<M: PlanarMap + ?Sized>(
    m: &M,
    grid: &QuadratureGrid,
    v_n: Option<f64>,
) -> Result<RigidityResiduals> {
    let avg = integrate(m, grid, |_, _, _| Ok(0.0))?;
    rigidity_from(&avg, v_n)
}

/// Which constructed map has the lower energy at a given scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Twist,
    Homothety,
    Tie,
}

/// Energies at one scale `lambda` of the homothety and of the best
/// constructed map (the twist minimizer for `lambda <= 1/2`, otherwise the
/// homothety itself).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub lambda: f64,
    pub p: f64,
    pub homothety_energy: f64,
    pub constructed_energy: f64,
    /// `F^{p/2}(lambda^2)`.
    pub bound: f64,
    pub winner: Winner,
}

/// Energies closer than this count as a tie.
pub const TIE_TOL: f64 = 1e-9;

pub fn phase_row(lambda: f64, p: f64, n_r: usize, n_theta: usize) -> Result<PhaseRow> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "lambda",
            value: lambda,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let hom = crate::maps::Homothety::new(lambda)?;
    let homothety_energy = energy_p(&hom, &build_grid(GridDomain::Disk, n_r, n_theta)?, p)?.energy;
    let constructed_energy = if lambda <= 0.5 {
        let twist = crate::maps::build_twist_minimizer(lambda)?;
        energy_p(&twist, &grid_for(&twist, n_r, n_theta)?, p)?.energy
    } else {
        homothety_energy
    };
    let winner = if lambda > 0.5 {
        Winner::Homothety
    } else if (homothety_energy - constructed_energy).abs() <= TIE_TOL {
        Winner::Tie
    } else if constructed_energy < homothety_energy {
        Winner::Twist
    } else {
        Winner::Homothety
    };
    Ok(PhaseRow {
        lambda,
        p,
        homothety_energy,
        constructed_energy,
        bound: volume_bound_pow(lambda * lambda, p)?,
        winner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{build_twist_minimizer, FnMap, Homothety, RadialMap};
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_weights_sum_to_area() {
        let g = build_grid(GridDomain::Disk, 64, 64).unwrap();
        assert_abs_diff_eq!(g.total_weight(), PI, epsilon = 1e-10);
        let g = build_grid(GridDomain::Annulus(0.5), 32, 32).unwrap();
        assert_abs_diff_eq!(g.total_weight(), 0.75 * PI, epsilon = 1e-10);
        let g = build_grid(GridDomain::Square(1.0), 10, 10).unwrap();
        assert_abs_diff_eq!(g.total_weight(), 4.0, epsilon = 1e-12);
        assert!(g.nodes.iter().all(|n| n.weight > 0.0));
        assert_eq!(g.len(), 100);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(
            build_grid(GridDomain::Disk, 1, 8),
            Err(Error::ResolutionTooLow(1, 2))
        ));
        assert!(build_grid(GridDomain::Annulus(1.5), 8, 8).is_err());
        assert!(build_grid(GridDomain::Square(0.0), 8, 8).is_err());
    }

    #[test]
    fn homothety_energies() {
        let g = build_grid(GridDomain::Disk, 16, 16).unwrap();
        let r = energy_p(&Homothety::new(0.6).unwrap(), &g, 2.0).unwrap();
        assert_abs_diff_eq!(r.energy, 0.32, epsilon = 1e-12);
        assert_abs_diff_eq!(r.volume_ratio, 0.36, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bound, 0.32, epsilon = 1e-12);
        assert_abs_diff_eq!(r.gap, 0.0, epsilon = 1e-12);
        assert_eq!(r.equality_case(1e-10), EqualityCase::Conformal);

        let r = energy_p(&Homothety::new(1.0 / 3.0).unwrap(), &g, 2.0).unwrap();
        assert_abs_diff_eq!(r.energy, 8.0 / 9.0, epsilon = 1e-12);
        assert_eq!(r.equality_case(1e-10), EqualityCase::Strict);
    }

    #[test]
    fn twist_minimizer_is_in_k() {
        let m = build_twist_minimizer(1.0 / 3.0).unwrap();
        let g = grid_for(&m, 64, 64).unwrap();
        assert_eq!(g.domain, GridDomain::Annulus(PUNCTURE_EPS));
        let r = energy_p(&m, &g, 2.0).unwrap();
        assert_abs_diff_eq!(r.energy, 7.0 / 9.0, epsilon = 1e-9);
        assert!(r.gap.abs() <= 1e-9);
        assert!(r.k_defect <= 1e-20);
        assert_eq!(r.equality_case(1e-9), EqualityCase::WellK);
        assert_abs_diff_eq!(r.omitted_area, PI * 1e-12);
    }

    #[test]
    fn cost_energies() {
        let g = build_grid(GridDomain::Disk, 16, 16).unwrap();
        let lambda: f64 = 0.3;
        let r = energy_f(&Homothety::new(lambda).unwrap(), &g, &CostFunction::log_square()).unwrap();
        assert_abs_diff_eq!(r.energy, 2.0 * lambda.ln().powi(2), epsilon = 1e-12);
        assert_abs_diff_eq!(r.gap, 0.0, epsilon = 1e-9);
        assert_eq!(r.convexity_hypothesis, Some(true));

        let id = RadialMap::identity();
        for f in [
            CostFunction::quadratic(),
            CostFunction::log_square(),
            CostFunction::quartic(),
        ] {
            assert_abs_diff_eq!(energy_f(&id, &g, &f).unwrap().energy, 0.0, epsilon = 1e-15);
        }

        let twist = build_twist_minimizer(1.0 / 3.0).unwrap();
        let g = grid_for(&twist, 32, 32).unwrap();
        let r = energy_f(&twist, &g, &CostFunction::log_square()).unwrap();
        assert!(r.gap > 0.1, "{r:?}");
    }

    #[test]
    fn log_square_rejects_singular_nodes() {
        // s1 = x^2 vanishes on the column of nodes at x = 0
        let m = FnMap::new(
            "cubic shear",
            |x, y| [x.powi(3) / 3.0, y],
            |x, _| Mat2::diag(x * x, 1.0),
        );
        let g = build_grid(GridDomain::Square(1.0), 5, 5).unwrap();
        assert!(matches!(
            energy_f(&m, &g, &CostFunction::log_square()),
            Err(Error::NonpositiveSingularValue { .. })
        ));
        assert!(energy_f(&m, &g, &CostFunction::quadratic()).is_ok());
    }

    #[test]
    fn power_below_two_rejected() {
        let g = build_grid(GridDomain::Disk, 4, 4).unwrap();
        assert!(matches!(
            energy_p(&Homothety::new(0.5).unwrap(), &g, 1.5),
            Err(Error::PowerBelowTwo(_))
        ));
    }

    #[test]
    fn phase_examples() {
        let r = phase_row(0.6, 2.0, 16, 16).unwrap();
        assert_eq!(r.winner, Winner::Homothety);
        assert_abs_diff_eq!(r.homothety_energy, 0.32, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bound, 0.32, epsilon = 1e-12);
        let r = phase_row(1.0 / 3.0, 2.0, 16, 16).unwrap();
        assert_eq!(r.winner, Winner::Twist);
        assert_abs_diff_eq!(r.constructed_energy, 7.0 / 9.0, epsilon = 1e-9);
        let r = phase_row(0.5, 2.0, 16, 16).unwrap();
        assert_eq!(r.winner, Winner::Tie);
        assert_abs_diff_eq!(r.constructed_energy, 0.5, epsilon = 1e-9);
        assert!(phase_row(1.2, 2.0, 16, 16).is_err());
    }

    #[test]
    fn rigidity_examples() {
        let g = build_grid(GridDomain::Disk, 8, 8).unwrap();
        let r = rigidity_residuals(&Homothety::new(0.4).unwrap(), &g, None).unwrap();
        assert_abs_diff_eq!(r.sandwich.lower, 0.02, epsilon = 1e-12);
        assert_abs_diff_eq!(r.sandwich.mid, 0.04, epsilon = 1e-12);
        assert_abs_diff_eq!(r.sandwich.upper, 0.04, epsilon = 1e-12);
        assert!(r.applicable && r.ordered);

        let m = build_twist_minimizer(0.3).unwrap();
        let g = grid_for(&m, 32, 32).unwrap();
        let v_n = 0.12 * g.total_weight();
        let r = rigidity_residuals(&m, &g, Some(v_n)).unwrap();
        assert_abs_diff_eq!(r.deficit.unwrap(), 0.06, epsilon = 1e-10);
        let s = r.deficit_sandwich.unwrap();
        assert_abs_diff_eq!(s.lower, 0.06, epsilon = 1e-10);
        assert_abs_diff_eq!(s.upper, 0.06, epsilon = 1e-10);
        assert_abs_diff_eq!(s.mid, 0.06, epsilon = 1e-10);
        assert_eq!(r.deficit_ordered, Some(true));

        assert!(matches!(
            rigidity_residuals(&m, &g, Some(0.01)),
            Err(Error::VolumeInconsistent { .. })
        ));
    }

    #[test]
    fn reports_are_bit_reproducible() {
        let m = build_twist_minimizer(0.2).unwrap();
        let g = grid_for(&m, 48, 40).unwrap();
        let a = energy_p(&m, &g, 3.0).unwrap();
        let b = energy_p(&m, &g, 3.0).unwrap();
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        assert_eq!(a, b);
    }
}
