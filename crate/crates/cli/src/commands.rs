use std::f64::consts::PI;
use std::fs;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use heunsym::josephson::{
    alpha_for_phi0, integrate_period, phi_from_basis, to_unit_frame, trajectory_constants, HalfPeriod, HeunMapping,
    TRAJECTORY_HEADER,
};
use heunsym::laurent::{build_series_with, monodromy_eigen, SeriesOptions};
use heunsym::monodromy::{Continuator, MonodromyData};
use heunsym::polys::{delta_pm, PolySetExport};
use heunsym::solver::scaled_diff;
use heunsym::{
    build_polys, build_polys_exact, extend_phase, integrate_phase, params_to_heun, verify_poly_system, Complex64 as C,
    CoverPoint, EigenBasis, Error, JosephsonParams, Matrix2, ThetaPhaseConstants,
};

use crate::args::{c64_pair, CommonArgs, ContinueArgs, Format, JosephsonArgs, LaurentArgs, PolysArgs, Resolved};
use crate::output::{csv_string, emit, json_string, num, numeric_rows, write_file};
use crate::CliError;

fn validated(c: &CommonArgs) -> Result<(), CliError> {
    c.validate().map_err(CliError::Usage)
}

type Mat = [[[f64; 2]; 2]; 2];

fn matrix_rows(name: &str, m: &Matrix2) -> Vec<Vec<String>> {
    let a = m.to_array();
    let mut rows = Vec::new();
    for (i, row) in a.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            rows.push(vec![name.to_string(), (i + 1).to_string(), (j + 1).to_string(), num(z[0]), num(z[1])]);
        }
    }
    rows
}

#[derive(Serialize)]
struct PolysOutput {
    exact: bool,
    pass: bool,
    polys: PolySetExport,
    identities: heunsym::polys::IdentityReport,
}

pub fn polys(args: &PolysArgs) -> Result<(), CliError> {
    let c = &args.common;
    validated(c)?;
    let exact = match c.resolve()? {
        Resolved::Heun { exact, .. } if !args.float => exact,
        _ => None,
    };
    let params = c.heun()?;
    let out = match exact {
        Some((lam, mu)) => {
            let ps = build_polys_exact(params.ell, lam, mu)?;
            let dpm = delta_pm(&ps, params.two_omega)?;
            let report = verify_poly_system(&ps, true);
            PolysOutput {
                exact: true,
                pass: report.passes(0.0),
                polys: PolySetExport::new(&ps, &dpm),
                identities: report,
            }
        }
        None => {
            let ps = build_polys(&params)?;
            let dpm = delta_pm(&ps, params.two_omega)?;
            let report = verify_poly_system(&ps, false);
            PolysOutput {
                exact: false,
                pass: report.passes(c.budget),
                polys: PolySetExport::new(&ps, &dpm),
                identities: report,
            }
        }
    };
    let text = match c.format {
        Format::Json => json_string(&out)?,
        Format::Csv => {
            let e = &out.polys;
            let mut rows = Vec::new();
            for (name, coeffs) in [("p", &e.p), ("q", &e.q), ("r", &e.r), ("s", &e.s)] {
                for (k, z) in coeffs.iter().enumerate() {
                    rows.push(vec![name.to_string(), k.to_string(), num(z[0]), num(z[1])]);
                }
            }
            for (name, z) in [("delta", e.delta), ("delta_plus", e.delta_plus), ("delta_minus", e.delta_minus)] {
                rows.push(vec![name.to_string(), String::new(), num(z[0]), num(z[1])]);
            }
            csv_string(&["name", "power", "re", "im"], &rows)?
        }
    };
    emit(c.out.as_deref(), &text)?;
    if out.pass {
        Ok(())
    } else {
        Err(CliError::Failed)
    }
}

#[derive(Serialize)]
struct MonodromyOutput {
    ell: u32,
    lambda: [f64; 2],
    mu: [f64; 2],
    #[serde(rename = "A")]
    a: Mat,
    #[serde(rename = "B")]
    b: Mat,
    #[serde(rename = "M")]
    m: Mat,
    delta: [f64; 2],
    delta_plus: [f64; 2],
    delta_minus: [f64; 2],
    det_m_minus_one: f64,
    lambda_plus: [f64; 2],
    lambda_minus: [f64; 2],
    generic: bool,
}

pub fn monodromy(c: &CommonArgs) -> Result<(), CliError> {
    validated(c)?;
    let params = c.heun()?;
    let basis = EigenBasis::new(params, c.tol)?;
    let md = MonodromyData::new(&basis)?;
    let (lp, lm) = md.m.eigenvalues();
    let out = MonodromyOutput {
        ell: params.ell,
        lambda: c64_pair(params.lambda),
        mu: c64_pair(params.mu),
        a: md.a.to_array(),
        b: md.b.to_array(),
        m: md.m.to_array(),
        delta: c64_pair(md.boundary.delta),
        delta_plus: c64_pair(md.boundary.delta_plus),
        delta_minus: c64_pair(md.boundary.delta_minus),
        det_m_minus_one: (md.m.det() - 1.0).norm(),
        lambda_plus: c64_pair(lp),
        lambda_minus: c64_pair(lm),
        generic: md.generic,
    };
    let text = match c.format {
        Format::Json => json_string(&out)?,
        Format::Csv => {
            let mut rows = matrix_rows("A", &md.a);
            rows.extend(matrix_rows("B", &md.b));
            rows.extend(matrix_rows("M", &md.m));
            csv_string(&["matrix", "row", "col", "re", "im"], &rows)?
        }
    };
    emit(c.out.as_deref(), &text)
}

#[derive(Serialize)]
struct ContinuationRow {
    index: usize,
    point: CoverPoint,
    algebraic: [[f64; 2]; 2],
    ode: [[f64; 2]; 2],
    abs_diff: f64,
}

#[derive(Serialize)]
struct ContinuationOutput {
    threshold: f64,
    max_abs_diff: f64,
    max_scaled_diff: f64,
    pass: bool,
    points: Vec<ContinuationRow>,
}

pub fn continuation(args: &ContinueArgs) -> Result<(), CliError> {
    let c = &args.common;
    validated(c)?;
    if args.sheets < 0 {
        return Err(CliError::Usage("--sheets must be non-negative".into()));
    }
    let params = c.heun()?;
    let md = MonodromyData::new(&EigenBasis::new(params, c.tol)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let points: Vec<CoverPoint> = (0..args.points)
        .map(|_| {
            let k = rng.gen_range(-args.sheets..=args.sheets) as f64;
            let lr: f64 = rng.gen_range(-std::f64::consts::LN_2..std::f64::consts::LN_2);
            CoverPoint::new(lr.exp(), rng.gen_range(-PI..PI) + 2.0 * PI * k)
        })
        .collect();
    let results: Vec<([C; 2], [C; 2])> = points
        .par_iter()
        .map(|&at| {
            let b = EigenBasis::new(params, c.tol)?;
            let alg = Continuator::with_data(&b, md)?.eval(at)?;
            let ode = EigenBasis::new(params, c.tol)?.values(at)?;
            Ok((alg, ode))
        })
        .collect::<Result<_, Error>>()?;
    let mut rows = Vec::with_capacity(points.len());
    let (mut max_abs, mut max_scaled) = (0.0f64, 0.0f64);
    for (index, (&point, (alg, ode))) in points.iter().zip(&results).enumerate() {
        let abs_diff = (alg[0] - ode[0]).norm().max((alg[1] - ode[1]).norm());
        max_abs = max_abs.max(abs_diff);
        max_scaled = max_scaled.max(scaled_diff(alg[0], ode[0])).max(scaled_diff(alg[1], ode[1]));
        rows.push(ContinuationRow {
            index,
            point,
            algebraic: [c64_pair(alg[0]), c64_pair(alg[1])],
            ode: [c64_pair(ode[0]), c64_pair(ode[1])],
            abs_diff,
        });
    }
    let threshold = 10.0 * c.budget;
    let out = ContinuationOutput {
        threshold,
        max_abs_diff: max_abs,
        max_scaled_diff: max_scaled,
        pass: max_scaled < threshold,
        points: rows,
    };
    let text = match c.format {
        Format::Json => json_string(&out)?,
        Format::Csv => {
            let rows: Vec<[f64; 12]> = out
                .points
                .iter()
                .map(|r| {
                    [
                        r.index as f64,
                        r.point.rho,
                        r.point.phi,
                        r.algebraic[0][0],
                        r.algebraic[0][1],
                        r.algebraic[1][0],
                        r.algebraic[1][1],
                        r.ode[0][0],
                        r.ode[0][1],
                        r.ode[1][0],
                        r.ode[1][1],
                        r.abs_diff,
                    ]
                })
                .collect();
            let mut formatted = numeric_rows(&rows);
            for (r, src) in formatted.iter_mut().zip(&out.points) {
                r[0] = src.index.to_string();
            }
            csv_string(
                &[
                    "point",
                    "rho",
                    "phi",
                    "re_Ep_alg",
                    "im_Ep_alg",
                    "re_Em_alg",
                    "im_Em_alg",
                    "re_Ep_ode",
                    "im_Ep_ode",
                    "re_Em_ode",
                    "im_Em_ode",
                    "abs_diff",
                ],
                &formatted,
            )?
        }
    };
    emit(c.out.as_deref(), &text)?;
    if out.pass {
        Ok(())
    } else {
        Err(CliError::Failed)
    }
}

#[derive(Serialize)]
struct LaurentEntry {
    sign: &'static str,
    monodromy_eigenvalue: [f64; 2],
    tail_ratio: f64,
    residual: f64,
    #[serde(flatten)]
    series: heunsym::laurent::LaurentExport,
}

pub fn laurent(args: &LaurentArgs) -> Result<(), CliError> {
    let c = &args.common;
    validated(c)?;
    if args.n == 0 {
        return Err(CliError::Usage("--N must be positive".into()));
    }
    let params = c.heun()?;
    let basis = EigenBasis::new(params, c.tol)?;
    let md = MonodromyData::new(&basis)?;
    let eig = monodromy_eigen(&md.m, &md.boundary)?;
    let opts = SeriesOptions { force: args.force, ..SeriesOptions::default() };
    let mut entries = Vec::new();
    for plus in [true, false] {
        let anchor = eig.anchor(plus, &basis.cauchy());
        let ls = build_series_with(&params, eig.exponent(plus), &anchor, args.n, &opts)?;
        entries.push(LaurentEntry {
            sign: if plus { "+" } else { "-" },
            monodromy_eigenvalue: c64_pair(eig.lambda(plus)),
            tail_ratio: ls.tail_ratio,
            residual: ls.residual,
            series: ls.export(),
        });
    }
    let text = match c.format {
        Format::Json => json_string(&entries)?,
        Format::Csv => {
            let mut rows = Vec::new();
            for e in &entries {
                let n = e.series.n as i64;
                for (j, z) in e.series.coeffs.iter().enumerate() {
                    rows.push(vec![e.sign.to_string(), (j as i64 - n).to_string(), num(z[0]), num(z[1])]);
                }
            }
            csv_string(&["sign", "k", "re", "im"], &rows)?
        }
    };
    emit(c.out.as_deref(), &text)
}

#[derive(Serialize)]
struct JosephsonConstants {
    params: JosephsonParams,
    mapping: HeunMapping,
    phi0: f64,
    alpha: f64,
    period: f64,
    half_period: HalfPeriod,
    theta_maps: Option<ThetaPhaseConstants>,
}

#[derive(Serialize)]
struct JosephsonMonodromy {
    integer_order: bool,
    l: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    phase_side: Option<Mat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phase_side_unit_frame: Option<Mat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    heun_side: Option<Mat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rel_diff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    det_minus_one: Option<f64>,
}

#[derive(Serialize)]
struct JosephsonSummary {
    out: String,
    files: Vec<&'static str>,
    integer_order: bool,
    forward_max_error: Option<f64>,
    monodromy_rel_diff: Option<f64>,
    extension_max_diff: Option<f64>,
    extension_fallback_points: Option<usize>,
}

pub fn josephson(args: &JosephsonArgs) -> Result<(), CliError> {
    let c = &args.common;
    validated(c)?;
    let dir =
        c.out.clone().ok_or_else(|| CliError::Usage("josephson writes several files; pass --out <dir>".into()))?;
    if args.samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let jp = c.josephson()?;
    let phi0 = match args.alpha {
        Some(alpha) => alpha - PI / 2.0,
        None => args.phi0.unwrap_or(0.7),
    };
    let alpha = args.alpha.unwrap_or_else(|| alpha_for_phi0(phi0));
    fs::create_dir_all(&dir).map_err(CliError::Io)?;
    let mut files = Vec::new();

    let traj = integrate_period(&jp, phi0, args.samples, c.tol)?;
    write_file(&dir, "trajectory.csv", &csv_string(&TRAJECTORY_HEADER, &numeric_rows(&traj.csv_rows()))?)?;
    files.push("trajectory.csv");

    let mapping = params_to_heun(&jp)?;
    let integer = mapping.params.is_some();
    let constants = JosephsonConstants {
        params: jp,
        mapping,
        phi0,
        alpha,
        period: jp.period(),
        half_period: traj.half_period()?,
        theta_maps: if integer { Some(trajectory_constants(&traj)?) } else { None },
    };
    write_file(&dir, "constants.json", &json_string(&constants)?)?;
    files.push("constants.json");

    let mut mono = JosephsonMonodromy {
        integer_order: integer,
        l: jp.l(),
        phase_side: None,
        phase_side_unit_frame: None,
        heun_side: None,
        rel_diff: None,
        det_minus_one: None,
    };
    let mut forward_max = None;
    if let Some(hp) = mapping.params {
        let basis = EigenBasis::new(hp, c.tol)?;
        let mj = heunsym::phase_monodromy_matrix(&traj)?;
        let unit = to_unit_frame(&mj, phi0)?;
        let mh = MonodromyData::new(&basis)?.m;
        mono.phase_side = Some(mj.to_array());
        mono.phase_side_unit_frame = Some(unit.to_array());
        mono.heun_side = Some(mh.to_array());
        mono.rel_diff = Some(unit.rel_diff(&mh));
        mono.det_minus_one = Some((mj.det() - 1.0).norm());

        let mut rows = Vec::with_capacity(traj.len());
        let mut worst = 0.0f64;
        for k in 0..traj.len() {
            let t = traj.t_grid[k];
            let phi = phi_from_basis(alpha, &basis, CoverPoint::new(1.0, jp.omega * t))?;
            let err = (phi - traj.exp_iphi(k)).norm();
            worst = worst.max(err);
            rows.push([t, phi.re, phi.im, err]);
        }
        write_file(&dir, "forward.csv", &csv_string(&["t", "re_Phi", "im_Phi", "abs_diff"], &numeric_rows(&rows))?)?;
        files.push("forward.csv");
        forward_max = Some(worst);
    }
    write_file(&dir, "monodromy.json", &json_string(&mono)?)?;
    files.push("monodromy.json");

    let (mut ext_max, mut ext_fallback) = (None, None);
    if args.extend {
        let ext = extend_phase(&traj)?;
        let et = &ext.trajectory;
        write_file(&dir, "extended.csv", &csv_string(&TRAJECTORY_HEADER, &numeric_rows(&et.csv_rows()))?)?;
        files.push("extended.csv");
        let direct = integrate_phase(&jp, phi0, &et.t_grid, c.tol)?;
        let mut rows = Vec::with_capacity(et.len());
        let mut worst = 0.0f64;
        for k in 0..et.len() {
            let d_phase = (et.exp_iphi(k) - direct.exp_iphi(k)).norm();
            let d_p = (et.p[k] - direct.p[k]).abs();
            worst = worst.max(d_phase).max(d_p);
            let fell_back = ext.fallback.iter().any(|&t| t == et.t_grid[k]);
            rows.push(vec![num(et.t_grid[k]), num(d_phase), num(d_p), u8::from(fell_back).to_string()]);
        }
        write_file(
            &dir,
            "extension_diff.csv",
            &csv_string(&["t", "abs_diff_exp_iphi", "abs_diff_P", "fallback"], &rows)?,
        )?;
        files.push("extension_diff.csv");
        ext_max = Some(worst);
        ext_fallback = Some(ext.fallback.len());
    }

    let summary = JosephsonSummary {
        out: dir.display().to_string(),
        files,
        integer_order: integer,
        forward_max_error: forward_max,
        monodromy_rel_diff: mono.rel_diff,
        extension_max_diff: ext_max,
        extension_fallback_points: ext_fallback,
    };
    emit(None, &json_string(&summary)?)
}
