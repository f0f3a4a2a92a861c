use std::path::{Path, PathBuf};

use serde::Serialize;

use distortion_core::costfn::{reduced_min, FMinResult};
use distortion_core::criticality::{refinement_study, FieldMode, RefinementOptions, RefinementStudy, ResidualKind};
use distortion_core::energy::{energy_p, grid_for, phase_row, EnergyReport, PhaseRow};
use distortion_core::maps::{
    build_ode_minimizer, build_twist_minimizer, export_shape, twist_lambda, FnMap, Homothety, PlanarMap, RadialMap,
    Scaled, ShapeDomain, ShapeExport, ShapeFormat, TwistMap,
};
use distortion_core::mat2::singular_values;
use distortion_core::numeric::{lin_space, log_space};
use distortion_core::verify::{run_suite_with, Suite, VerifyOptions, ORACLE_TOL};
use distortion_core::{volume_bound, volume_bound_pow, CostFunction, Mat2};

use crate::error::{classify, CliError};
use crate::output::{csv_line, emit, ensure_dir, num, to_json};
use crate::scan::ScanFile;
use crate::{BoundArgs, ConstructArgs, ConstructKind, CriticalArgs, Format, MapSpec, ModeArg, PhaseArgs, VerifyArgs};

#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn range(lo: f64, hi: f64, n: usize, log: bool) -> Result<Vec<f64>, CliError> {
    if n == 0 || !(lo <= hi) {
        return Err(CliError::Usage(format!("empty range [{lo}, {hi}] with {n} points")));
    }
    if log && !(lo > 0.0) {
        return Err(CliError::Usage("log spacing needs a positive lower end".into()));
    }
    Ok(if log {
        log_space(lo, hi, n)
    } else {
        lin_space(lo, hi, n)
    })
}

#[derive(Serialize)]
struct BoundRow {
    s: f64,
    f: f64,
    f_pow: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    reduced: Option<FMinResult>,
}

pub fn bound(a: BoundArgs) -> Result<(), CliError> {
    let scan = ScanFile::load(a.scan.as_deref())?;
    let p = a.p.or(scan.p).unwrap_or(2.0);
    let cost = a
        .cost
        .or(scan.cost)
        .map(|c| c.parse::<CostFunction>())
        .transpose()
        .map_err(classify)?;
    let ss = if !a.s.is_empty() {
        a.s
    } else {
        match (a.s_min.or(scan.s_min), a.s_max.or(scan.s_max)) {
            (Some(lo), Some(hi)) => range(
                lo,
                hi,
                a.n.or(scan.n).unwrap_or(101),
                a.log || scan.log.unwrap_or(false),
            )?,
            _ => return Err(CliError::Usage("give --s, or --s-min and --s-max".into())),
        }
    };
    let mut rows = Vec::with_capacity(ss.len());
    for s in ss {
        let f = volume_bound(s).map_err(classify)?;
        let f_pow = volume_bound_pow(s, p).map_err(classify)?;
        let reduced = cost.as_ref().map(|c| reduced_min(c, s)).transpose().map_err(classify)?;
        rows.push(BoundRow { s, f, f_pow, reduced });
    }
    let text = match a.out.format.unwrap_or_default() {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut out = String::from(if cost.is_some() {
                "s,F,F_pow,F_f,argmin_x,argmin_y,conformal\n"
            } else {
                "s,F,F_pow\n"
            });
            for r in &rows {
                let mut cells = vec![num(r.s), num(r.f), num(r.f_pow)];
                if let Some(m) = &r.reduced {
                    cells.extend([num(m.value), num(m.argmin.0), num(m.argmin.1), m.conformal.to_string()]);
                }
                out.push_str(&csv_line(&cells));
            }
            out
        }
    };
    emit(a.out.output.as_deref(), &text)
}

pub fn phase(a: PhaseArgs) -> Result<(), CliError> {
    let scan = ScanFile::load(a.scan.as_deref())?;
    let p = a.p.or(scan.p).unwrap_or(2.0);
    let grid = a.grid.or(scan.grid).unwrap_or(64);
    let lambdas = if !a.lambda.is_empty() {
        a.lambda
    } else {
        let lo = a.lambda_min.or(scan.lambda_min).unwrap_or(0.05);
        let hi = a.lambda_max.or(scan.lambda_max).unwrap_or(0.95);
        range(lo, hi, a.n.or(scan.n).unwrap_or(19), false)?
    };
    let rows: Vec<PhaseRow> = lambdas
        .into_iter()
        .map(|l| phase_row(l, p, grid, grid))
        .collect::<Result<_, _>>()
        .map_err(classify)?;
    let text = match a.out.format.unwrap_or_default() {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut out = String::from("lambda,p,homothety_energy,constructed_energy,bound,winner\n");
            for r in &rows {
                let winner = serde_json::to_value(r.winner).expect("unit enum");
                out.push_str(&csv_line(&[
                    num(r.lambda),
                    num(r.p),
                    num(r.homothety_energy),
                    num(r.constructed_energy),
                    num(r.bound),
                    winner.as_str().unwrap_or_default().to_string(),
                ]));
            }
            out
        }
    };
    emit(a.out.output.as_deref(), &text)
}

pub fn verify(a: VerifyArgs) -> Result<(), CliError> {
    let suite: Suite = a.suite.parse().map_err(CliError::Usage)?;
    let opts = VerifyOptions {
        oracle_points: a.oracle_points,
        oracle_tol: a.oracle_tol.unwrap_or(ORACLE_TOL),
    };
    let report = run_suite_with(suite, a.n, a.seed, &opts).map_err(classify)?;
    emit(a.output.as_deref(), &to_json(&report)?)?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Violation(format!(
            "{} of {} samples violate {suite}",
            report.violations, report.n_samples
        )))
    }
}

fn profile_csv(m: &RadialMap, n: usize) -> String {
    let mut out = String::from("r,psi,dpsi,h,dh,sigma1,sigma2,jacobian\n");
    let lo = m.inner_radius.max(1e-6);
    let hi = m.outer_radius.unwrap_or(1.0);
    for r in lin_space(lo, hi, n.max(2)) {
        let frame = m.frame_matrix(r);
        let sv = singular_values(&frame);
        out.push_str(&csv_line(&[
            num(r),
            num(m.scale * m.psi.value(r)),
            num(m.scale * m.psi.deriv(r)),
            num(m.h.value(r)),
            num(m.h.deriv(r)),
            num(sv.sigma1),
            num(sv.sigma2),
            num(frame.det()),
        ]));
    }
    out
}

fn write_svg<M: PlanarMap + ?Sized>(m: &M, path: &Path, a: &ConstructArgs) -> Result<(), CliError> {
    let opts = ShapeExport::new(ShapeDomain::Disk, a.samples, ShapeFormat::Svg).with_slices(a.slices);
    let svg = export_shape(m, &opts).map_err(classify)?;
    emit(Some(path), &svg)
}

pub fn construct(a: ConstructArgs) -> Result<(), CliError> {
    let (map, profile): (Box<dyn PlanarMap>, RadialMap) = match a.kind {
        ConstructKind::Twist => {
            let lambda = a
                .lambda
                .ok_or_else(|| CliError::Usage("twist construction needs --lambda".into()))?;
            let m = build_twist_minimizer(lambda).map_err(classify)?;
            (Box::new(m), RadialMap::twist(m.c).scaled(m.scale))
        }
        ConstructKind::Ode => {
            let alpha = a
                .alpha
                .ok_or_else(|| CliError::Usage("ode construction needs --alpha".into()))?;
            let m = build_ode_minimizer(alpha, a.t0).map_err(classify)?;
            let scaled = m.scaled(a.lambda.unwrap_or(1.0 / alpha));
            (Box::new(scaled.clone()), scaled)
        }
    };
    let grid = grid_for(&map, a.n_r, a.n_theta).map_err(classify)?;
    let report: EnergyReport = energy_p(&map, &grid, a.p).map_err(classify)?;
    let json = to_json(&report)?;

    let wants_files = a.svg || !a.shape_c.is_empty();
    let dir: Option<PathBuf> = match (&a.out_dir, wants_files) {
        (Some(d), _) => Some(ensure_dir(d)?),
        (None, true) => Some(PathBuf::from(".")),
        (None, false) => None,
    };
    if let Some(dir) = &dir {
        emit(Some(&dir.join("report.json")), &json)?;
        emit(Some(&dir.join("profile.csv")), &profile_csv(&profile, a.profile_points))?;
        if a.svg {
            write_svg(&map, &dir.join("shape.svg"), &a)?;
        }
        for &c in &a.shape_c {
            let m = TwistMap::new(c, twist_lambda(c)).map_err(classify)?;
            write_svg(&m, &dir.join(format!("shape_c{c}.svg")), &a)?;
        }
    }
    emit(None, &json)
}

fn poly_a() -> FnMap {
    FnMap::new(
        "(x^3 y, x + x y^3)",
        |x, y| [x.powi(3) * y, x + x * y.powi(3)],
        |x, y| Mat2::new(3.0 * x * x * y, x.powi(3), 1.0 + y.powi(3), 3.0 * x * y * y),
    )
}

fn poly_b() -> FnMap {
    FnMap::new(
        "(x^4 + y, x^2 y^3)",
        |x, y| [x.powi(4) + y, x * x * y.powi(3)],
        |x, y| Mat2::new(4.0 * x.powi(3), 1.0, 2.0 * x * y.powi(3), 3.0 * x * x * y * y),
    )
}

pub fn critical(a: CriticalArgs) -> Result<(), CliError> {
    let map: Box<dyn PlanarMap> = match a.map {
        MapSpec::Twist => Box::new(TwistMap::new(a.c, twist_lambda(a.c)).map_err(classify)?),
        MapSpec::Ode => {
            let m = build_ode_minimizer(a.alpha, None).map_err(classify)?;
            Box::new(Scaled {
                inner: m,
                lambda: a.lambda.unwrap_or(1.0 / a.alpha),
            })
        }
        MapSpec::Homothety => Box::new(Homothety::new(a.lambda.unwrap_or(0.5)).map_err(classify)?),
        MapSpec::PolyA => Box::new(poly_a()),
        MapSpec::PolyB => Box::new(poly_b()),
    };
    if a.levels < 2 {
        return Err(CliError::Usage("--levels must be at least 2".into()));
    }
    let hs: Vec<f64> = (0..a.levels).map(|k| 1.0 / (32.0 * 2f64.powi(k as i32))).collect();
    let opts = RefinementOptions {
        half_width: a.half_width,
        exclusion: a.exclusion,
        mode: match a.mode {
            ModeArg::Analytic => FieldMode::Analytic,
            ModeArg::Fd => FieldMode::FiniteDifference,
        },
    };
    let poly = matches!(a.map, MapSpec::PolyA | MapSpec::PolyB);
    let ps = match (a.p.is_empty(), poly) {
        (true, true) => vec![],
        (true, false) => vec![2.0],
        (false, _) => a.p.clone(),
    };
    let mut kinds: Vec<ResidualKind> = ps.iter().map(|&p| ResidualKind::EulerLagrange { p }).collect();
    if a.piola || poly {
        kinds.push(ResidualKind::Piola);
    }
    let studies: Vec<RefinementStudy> = kinds
        .iter()
        .map(|&k| refinement_study(&map, k, &hs, &opts))
        .collect::<Result<_, _>>()
        .map_err(classify)?;

    if let Some(d) = &a.out_dir {
        let dir = ensure_dir(d)?;
        for s in &studies {
            let name = match s.kind {
                ResidualKind::Piola => "refinement_piola.csv".to_string(),
                ResidualKind::EulerLagrange { p } => format!("refinement_el_p{p}.csv"),
            };
            emit(Some(&dir.join(name)), &s.to_csv())?;
        }
    }
    let text = match a.out.format.unwrap_or_default() {
        Format::Json => to_json(&studies)?,
        Format::Csv => {
            let mut out = String::from("kind,p,h,residual,slope,fitted_slope\n");
            for s in &studies {
                let (kind, p) = match s.kind {
                    ResidualKind::Piola => ("piola", String::new()),
                    ResidualKind::EulerLagrange { p } => ("euler_lagrange", num(p)),
                };
                for r in &s.rows {
                    out.push_str(&csv_line(&[
                        kind.to_string(),
                        p.clone(),
                        num(r.h),
                        num(r.residual),
                        r.slope.map(num).unwrap_or_default(),
                        num(s.fitted_slope),
                    ]));
                }
            }
            out
        }
    };
    emit(a.out.output.as_deref(), &text)
}
