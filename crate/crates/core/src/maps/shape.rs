//! Boundary polylines of image shapes, exported as SVG or CSV.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::PlanarMap;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ShapeDomain {
    /// `[-a, a]^2`
    Square { half_width: f64 },
    /// Unit disk.
    Disk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapeFormat {
    Svg,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeExport {
    pub domain: ShapeDomain,
    /// Points per boundary side (square) or on the whole circle (disk);
    /// also points per slice spoke.
    pub samples: usize,
    pub format: ShapeFormat,
    /// Number of radial spokes dividing the domain into equal-angle slices.
    pub slices: usize,
}

impl ShapeExport {
    pub fn new(domain: ShapeDomain, samples: usize, format: ShapeFormat) -> Self {
        Self {
            domain,
            samples,
            format,
            slices: 0,
        }
    }

    pub fn with_slices(mut self, slices: usize) -> Self {
        self.slices = slices;
        self
    }
}

pub const MIN_SAMPLES: usize = 16;

/// A source point `(x, y)` with its image.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Sample {
    x: f64,
    y: f64,
    image: [f64; 2],
}

fn domain_boundary(domain: ShapeDomain, samples: usize) -> Result<Vec<[f64; 2]>> {
    match domain {
        ShapeDomain::Square { half_width: a } => {
            if !(a > 0.0) {
                return Err(Error::UnsupportedDomain(format!("square half-width {a}")));
            }
            let corners = [[-a, -a], [a, -a], [a, a], [-a, a]];
            let mut pts = Vec::with_capacity(4 * samples);
            for k in 0..4 {
                let p = corners[k];
                let q = corners[(k + 1) % 4];
                for j in 0..samples {
                    let t = j as f64 / samples as f64;
                    pts.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
                }
            }
            Ok(pts)
        }
        ShapeDomain::Disk => Ok((0..samples)
            .map(|j| {
                let t = TAU * j as f64 / samples as f64;
                [t.cos(), t.sin()]
            })
            .collect()),
    }
}

/// Distance from the origin to the domain boundary in direction `theta`.
fn boundary_radius(domain: ShapeDomain, theta: f64) -> f64 {
    match domain {
        ShapeDomain::Square { half_width } => half_width / theta.cos().abs().max(theta.sin().abs()),
        ShapeDomain::Disk => 1.0,
    }
}

fn map_points<M: PlanarMap + ?Sized>(m: &M, pts: &[[f64; 2]]) -> Result<Vec<Sample>> {
    pts.iter()
        .map(|&[x, y]| {
            m.eval(x, y).map(|image| Sample { x, y, image }).map_err(|e| match e {
                Error::RadiusOutOfDomain { .. } => {
                    Error::UnsupportedDomain(format!("point ({x}, {y}) lies outside the domain of {}", m.label()))
                }
                other => other,
            })
        })
        .collect()
}

/// Image of the domain boundary, counter-clockwise.
pub fn boundary_polyline<M: PlanarMap + ?Sized>(m: &M, domain: ShapeDomain, samples: usize) -> Result<Vec<[f64; 2]>> {
    if samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples(samples, MIN_SAMPLES));
    }
    let pts = domain_boundary(domain, samples)?;
    Ok(map_points(m, &pts)?.into_iter().map(|s| s.image).collect())
}

/// Signed shoelace area of a closed polygon.
pub fn polygon_area(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let p = pts[i];
            let q = pts[(i + 1) % n];
            p[0] * q[1] - q[0] * p[1]
        })
        .sum();
    0.5 * twice
}

fn spokes<M: PlanarMap + ?Sized>(m: &M, opts: &ShapeExport) -> Result<Vec<Vec<Sample>>> {
    let r_start = (m.inner_radius() + 1e-3).max(1e-3);
    (0..opts.slices)
        .map(|k| {
            let theta = TAU * k as f64 / opts.slices as f64;
            let r_end = boundary_radius(opts.domain, theta);
            let n = opts.samples.max(2);
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|j| {
                    let r = r_start + (r_end - r_start) * j as f64 / (n - 1) as f64;
                    [r * theta.cos(), r * theta.sin()]
                })
                .collect();
            map_points(m, &pts)
        })
        .collect()
}

fn svg_path(points: &[Sample], closed: bool) -> String {
    let mut d = String::new();
    for (i, s) in points.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        let _ = write!(d, "{cmd}{:.4} {:.4} ", 100.0 * s.image[0], -100.0 * s.image[1]);
    }
    if closed {
        d.push('Z');
    }
    d.trim_end().to_string()
}

/// Renders the image of the domain boundary (and optional slice spokes).
///
/// SVG: one `<path>` per curve, coordinates scaled by 100 with the y axis
/// pointing up. CSV: columns `r,theta,x,y,image_x,image_y`, boundary rows
/// first, then the spokes in order.
pub fn export_shape<M: PlanarMap + ?Sized>(m: &M, opts: &ShapeExport) -> Result<String> {
    if opts.samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples(opts.samples, MIN_SAMPLES));
    }
    let boundary = map_points(m, &domain_boundary(opts.domain, opts.samples)?)?;
    let spokes = spokes(m, opts)?;
    match opts.format {
        ShapeFormat::Csv => {
            let mut out = String::from("r,theta,x,y,image_x,image_y\n");
            for s in boundary.iter().chain(spokes.iter().flatten()) {
                let _ = writeln!(
                    out,
                    "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}",
                    s.x.hypot(s.y),
                    s.y.atan2(s.x),
                    s.x,
                    s.y,
                    s.image[0],
                    s.image[1]
                );
            }
            Ok(out)
        }
        ShapeFormat::Svg => {
            let all = boundary.iter().chain(spokes.iter().flatten());
            let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
            for s in all {
                xmin = xmin.min(100.0 * s.image[0]);
                xmax = xmax.max(100.0 * s.image[0]);
                ymin = ymin.min(-100.0 * s.image[1]);
                ymax = ymax.max(-100.0 * s.image[1]);
            }
            let pad = 0.05 * (xmax - xmin).max(ymax - ymin).max(1e-9);
            let (vx, vy) = (xmin - pad, ymin - pad);
            let (vw, vh) = (xmax - xmin + 2.0 * pad, ymax - ymin + 2.0 * pad);
            let stroke = 0.004 * vw.max(vh);
            let mut out = String::new();
            let _ = writeln!(
                out,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{vx:.4} {vy:.4} {vw:.4} {vh:.4}\">"
            );
            let _ = writeln!(out, "<!-- {} -->", m.label().replace("--", "- -"));
            let _ = writeln!(
                out,
                "<path d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{stroke:.4}\"/>",
                svg_path(&boundary, true)
            );
            for spoke in &spokes {
                let _ = writeln!(
                    out,
                    "<path d=\"{}\" fill=\"none\" stroke=\"gray\" stroke-width=\"{:.4}\"/>",
                    svg_path(spoke, false),
                    0.5 * stroke
                );
            }
            out.push_str("</svg>\n");
            Ok(out)
        }
    }
}
