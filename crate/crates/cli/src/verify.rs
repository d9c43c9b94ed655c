//! The `verify` suite: every identity of the library checked on one parameter
//! set, reported section by section.
//!
//! Thresholds derive from `--budget` (default 1e-8): boundary and eigen
//! relations use `budget/10`, `|det 𝐌 − 1|` and `|Λ₊Λ₋ − 1|` use `budget/100`,
//! algebraic continuation uses `10·budget`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use heunsym::laurent::{build_series, monodromy_eigen, MIN_N};
use heunsym::monodromy::{loop_matrix, Continuator, MonodromyData};
use heunsym::polys::{build_polys, build_polys_exact, delta_pm, verify_poly_system, IdentityReport};
use heunsym::solver::{
    function_residual, random_complex, random_point, scaled_diff, verify_compositions, wronskian, CompositionConfig,
    EigenBasis, Theta,
};
use heunsym::{eval_series, Complex64 as C, CoverPoint, Error, HeunParams};

use crate::args::{c64_pair, Format, Resolved, Section, VerifyArgs};
use crate::output::{csv_string, emit, json_string, num};
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Absent for boolean checks and for exact checks (which must be literally zero).
    pub threshold: Option<f64>,
    pub pass: bool,
}

impl Check {
    fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold: Some(threshold), pass: value < threshold }
    }

    fn flag(name: impl Into<String>, value: f64, pass: bool) -> Self {
        Check { name: name.into(), value, threshold: None, pass }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct SectionReport {
    pub name: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub ell: u32,
    pub lambda: [f64; 2],
    pub mu: [f64; 2],
    pub seed: u64,
    pub budget: f64,
    pub tol: f64,
    pub flip_delta: bool,
    pub pass: bool,
    pub sections: Vec<SectionReport>,
}

/// Shared inputs of the sections.
struct Ctx<'a> {
    params: HeunParams,
    exact: Option<&'a (heunsym::Exact, heunsym::Exact)>,
    basis: EigenBasis,
    tol: f64,
    budget: f64,
    seed: u64,
    flip_delta: bool,
}

impl Ctx<'_> {
    /// Independent stream per section so that skipping one leaves the others unchanged.
    fn rng(&self, section: Section) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ section as u64)
    }

    /// Fresh basis for one parallel task, so that results do not depend on scheduling.
    fn task_basis(&self) -> Result<EigenBasis, Error> {
        EigenBasis::new(self.params, self.tol)
    }
}

pub fn run(args: &VerifyArgs) -> Result<(), CliError> {
    args.common.validate().map_err(CliError::Usage)?;
    let (params, exact) = match args.common.resolve()? {
        Resolved::Heun { params, exact } => (params, exact),
        Resolved::Josephson(_) => (args.common.heun()?, None),
    };
    let ctx = Ctx {
        params,
        exact: exact.as_ref(),
        basis: EigenBasis::new(params, args.common.tol)?,
        tol: args.common.tol,
        budget: args.common.budget,
        seed: args.common.seed,
        flip_delta: args.flip_delta,
    };
    let mut sections = Vec::new();
    let mut first_error = None;
    for s in Section::ALL {
        if args.skip.contains(&s) {
            sections.push(SectionReport { name: s.name(), status: Status::Skipped, error: None, checks: vec![] });
            continue;
        }
        let report = match section(&ctx, s) {
            Ok(checks) => {
                let status = if checks.iter().all(|c| c.pass) { Status::Pass } else { Status::Fail };
                SectionReport { name: s.name(), status, error: None, checks }
            }
            Err(e) => {
                let r = SectionReport {
                    name: s.name(),
                    status: Status::Error,
                    error: Some(format!("{}: {}", e.tag(), e)),
                    checks: vec![],
                };
                first_error.get_or_insert(e);
                r
            }
        };
        sections.push(report);
    }
    let pass = sections.iter().all(|s| matches!(s.status, Status::Pass | Status::Skipped));
    let report = VerifyReport {
        ell: params.ell,
        lambda: c64_pair(params.lambda),
        mu: c64_pair(params.mu),
        seed: ctx.seed,
        budget: ctx.budget,
        tol: ctx.tol,
        flip_delta: ctx.flip_delta,
        pass,
        sections,
    };
    let text = match args.common.format {
        Format::Json => json_string(&report)?,
        Format::Csv => report_csv(&report)?,
    };
    emit(args.common.out.as_deref(), &text)?;
    match first_error {
        Some(e) => Err(CliError::Module(e)),
        None if pass => Ok(()),
        None => Err(CliError::Failed),
    }
}

fn report_csv(r: &VerifyReport) -> Result<String, CliError> {
    let mut rows = Vec::new();
    for s in &r.sections {
        if s.checks.is_empty() {
            let status = serde_json::to_value(s.status).ok().and_then(|v| v.as_str().map(String::from));
            rows.push(vec![
                s.name.to_string(),
                String::new(),
                String::new(),
                String::new(),
                status.unwrap_or_default(),
            ]);
        }
        for c in &s.checks {
            rows.push(vec![
                s.name.to_string(),
                c.name.clone(),
                num(c.value),
                c.threshold.map(num).unwrap_or_default(),
                c.pass.to_string(),
            ]);
        }
    }
    csv_string(&["section", "check", "value", "threshold", "pass"], &rows)
}

fn section(ctx: &Ctx<'_>, s: Section) -> Result<Vec<Check>, Error> {
    match s {
        Section::Polys => polys(ctx),
        Section::Images => images(ctx),
        Section::Compositions => compositions(ctx),
        Section::Eigenbasis => eigenbasis(ctx),
        Section::Monodromy => monodromy(ctx),
        Section::Continuation => continuation(ctx),
        Section::Laurent => laurent(ctx),
    }
}

fn identity_checks(report: &IdentityReport, budget: f64) -> Vec<Check> {
    report
        .checks
        .iter()
        .map(|c| {
            if report.exact {
                Check::flag(format!("{} (exact)", c.name), c.residual, c.exact_zero)
            } else {
                Check::below(c.name.clone(), c.residual, budget)
            }
        })
        .collect()
}

fn polys(ctx: &Ctx<'_>) -> Result<Vec<Check>, Error> {
    let p = &ctx.params;
    let mut checks = match ctx.exact {
        Some((lam, mu)) => {
            identity_checks(&verify_poly_system(&build_polys_exact(p.ell, lam.clone(), mu.clone())?, true), 0.0)
        }
        None => identity_checks(&verify_poly_system(&build_polys(p)?, false), ctx.budget),
    };
    let dpm = delta_pm(ctx.basis.polys(), p.two_omega)?;
    checks.push(Check::below("delta_pm product = (2w)^2 delta", dpm.dev_plus_two, ctx.budget));
    // with (2w)^2 = 1 the two candidates coincide and nothing can be rejected
    let indistinct = (p.two_omega * p.two_omega - 1.0).norm() < ctx.budget;
    checks.push(Check::flag(
        "delta_pm product = (2w)^-2 delta rejected",
        dpm.dev_minus_two,
        dpm.dev_minus_two > ctx.budget || indistinct,
    ));
    Ok(checks)
}

fn images(ctx: &Ctx<'_>) -> Result<Vec<Check>, Error> {
    let mut rng = ctx.rng(Section::Images);
    let mut tasks = Vec::new();
    for _ in 0..3 {
        let coeffs = (random_complex(&mut rng), random_complex(&mut rng));
        for _ in 0..5 {
            tasks.push((coeffs, random_point(&mut rng)));
        }
    }
    let rows: Vec<[f64; 3]> = tasks
        .par_iter()
        .map(|&((cp, cm), z)| {
            let b = ctx.task_basis()?;
            let s = b.handle(cp, cm);
            let ops = b.operators();
            let mut out = [0.0; 3];
            for (slot, th) in out.iter_mut().zip([Theta::A, Theta::B, Theta::C]) {
                *slot = function_residual(&ctx.params, &ops.image(th, &s), z)?;
            }
            Ok(out)
        })
        .collect::<Result<_, Error>>()?;
    Ok([Theta::A, Theta::B, Theta::C]
        .iter()
        .enumerate()
        .map(|(i, th)| {
            let worst = rows.iter().map(|r| r[i]).fold(0.0, f64::max);
            Check::below(format!("{} image residual", th.name()), worst, ctx.budget)
        })
        .collect())
}

fn compositions(ctx: &Ctx<'_>) -> Result<Vec<Check>, Error> {
    let cfg = CompositionConfig { seed: ctx.seed, flip_delta: ctx.flip_delta, ..CompositionConfig::default() };
    let report = verify_compositions(&ctx.basis, &cfg)?;
    Ok(report.rules.iter().map(|r| Check::below(r.name.clone(), r.max_residual, ctx.budget)).collect())
}

fn eigenbasis(ctx: &Ctx<'_>) -> Result<Vec<Check>, Error> {
    let thr = ctx.budget / 10.0;
    let mut rng = ctx.rng(Section::Eigenbasis);
    let b = &ctx.basis;
    let mut eig = 0.0f64;
    for _ in 0..10 {
        let r = b.eigen_residual(random_point(&mut rng))?;
        eig = eig.max(r[0]).max(r[1]);
    }
    let w1 = wronskian(&b.plus(), &b.minus(), CoverPoint::ONE)?;
    let mut wr = 0.0f64;
    for _ in 0..5 {
        wr = wr.max(scaled_diff(wronskian(&b.plus(), &b.minus(), random_point(&mut rng))?, w1));
    }
    let md = MonodromyData::new(b)?;
    let r = md.boundary.residuals;
    Ok(vec![
        Check::below("eigen relation", eig, thr),
        Check::below("wronskian constancy", wr, thr),
        Check::below("product relation at -1", r.minus_one, thr),
        Check::below("product relation at +-i", r.imaginary_unit, thr),
        Check::below("delta cross ratio", r.cross_ratio, thr),
        Check::below("a+b from +-i", r.sums, thr),
        Check::below("a-b from +-i", r.diffs, thr),
    ])
}

fn monodromy(ctx: &Ctx<'_>) -> Result<Vec<Check>, Error> {
    let b = &ctx.basis;
    let md = MonodromyData::new(b)?;
    let looped = loop_matrix(b, CoverPoint::ONE)?;
    let delta = b.delta();
    let b2 = (md.b * md.b).scale(1.0 / delta);
    let (l1, l2) = md.m.eigenvalues();
    let mut checks = vec![
        Check::below("M vs loop integration", md.m.rel_diff(&looped), ctx.budget),
        Check::below("|det M - 1|", (md.m.det() - 1.0).norm(), ctx.budget / 100.0),
        Check::below("B^2 / delta = M", b2.rel_diff(&md.m), ctx.budget),
        Check::below("det A = delta", scaled_diff(md.a.det(), delta), ctx.budget),
        Check::below("|L+ L- - 1|", (l1 * l2 - 1.0).norm(), ctx.budget / 100.0),
    ];
    checks.push(Check::flag("generic", 0.0, md.generic));
    Ok(checks)
}

fn continuation(ctx: &Ctx<'_>) -> Result<Vec<Check>, Error> {
    let md = MonodromyData::new(&ctx.basis)?;
    let mut rng = ctx.rng(Section::Continuation);
    let points: Vec<CoverPoint> = (0..10)
        .map(|i| {
            // cycle through the sheets so that every one is visited
            let k = (i % 5) as f64 - 2.0;
            let lr: f64 = rng.gen_range(-std::f64::consts::LN_2..std::f64::consts::LN_2);
            CoverPoint::new(lr.exp(), rng.gen_range(-PI..PI) + 2.0 * PI * k)
        })
        .collect();
    let diffs: Vec<f64> = points
        .par_iter()
        .map(|&at| {
            let b = ctx.task_basis()?;
            let cont = Continuator::with_data(&b, md)?;
            let alg = cont.eval(at)?;
            let direct = ctx.task_basis()?.values(at)?;
            Ok(scaled_diff(alg[0], direct[0]).max(scaled_diff(alg[1], direct[1])))
        })
        .collect::<Result<_, Error>>()?;
    let worst = diffs.iter().copied().fold(0.0, f64::max);
    Ok(vec![Check::below("algebraic vs direct continuation", worst, 10.0 * ctx.budget)])
}

fn laurent(ctx: &Ctx<'_>) -> Result<Vec<Check>, Error> {
    let b = &ctx.basis;
    let md = MonodromyData::new(b)?;
    let eig = monodromy_eigen(&md.m, &md.boundary)?;
    let mut checks = Vec::new();
    for plus in [true, false] {
        let tag = if plus { "+" } else { "-" };
        let c = eig.combo(plus);
        let lam = eig.lambda(plus);
        let anchor = eig.anchor(plus, &b.cauchy());
        let ls = build_series(&ctx.params, eig.exponent(plus), &anchor, MIN_N)?;
        let ode = |at: CoverPoint| -> Result<C, Error> {
            let v = b.values(at)?;
            Ok(c[0] * v[0] + c[1] * v[1])
        };
        let (mut vs_ode, mut single) = (0.0f64, 0.0f64);
        for rho in [0.5, 1.0, 2.0] {
            for phi in [-2.0, 0.5, 2.5] {
                let at = CoverPoint::new(rho, phi);
                let e = ode(at)?;
                vs_ode = vs_ode.max(scaled_diff(eval_series(&ls, at), e));
                // step toward the growing direction; the other one cancels
                let k = if lam.norm() >= 1.0 { 1 } else { -1 };
                single = single.max(scaled_diff(ode(at.shifted(k))? / lam.powi(k as i32), e));
            }
        }
        checks.push(Check::below(format!("series {tag} vs ODE"), vs_ode, ctx.budget));
        checks.push(Check::below(format!("eigen-combination {tag} single-valued"), single, ctx.budget));
        checks.push(Check::below(format!("series {tag} recurrence residual"), ls.residual, ctx.budget));
        let perturbed = build_series(&ctx.params, eig.exponent(plus) + 0.1, &anchor, MIN_N);
        checks.push(Check::flag(
            format!("perturbed exponent {tag} rejected"),
            ls.n as f64,
            matches!(perturbed, Err(Error::NoDecay(_))),
        ));
    }
    Ok(checks)
}
