use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heunsym::josephson::{heun_to_params, params_to_heun, JosephsonParams};
use heunsym::scalar::{parse_complex, parse_exact};
use heunsym::{Complex64, Error, Exact, HeunParams};

/// Symmetries of the special double confluent Heun equation and the
/// Josephson phase equation.
#[derive(Parser, Debug)]
#[command(name = "heunsym", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build p, q, r, s and Δ and check their identities.
    Polys(PolysArgs),
    /// Run the full identity, composition, monodromy and continuation suite.
    Verify(VerifyArgs),
    /// Emit the matrices 𝐀, 𝐁, 𝐌.
    Monodromy(CommonArgs),
    /// Compare algebraic continuation with direct integration.
    Continue(ContinueArgs),
    /// Build the convergent two-sided series of the monodromy eigen-combinations.
    Laurent(LaurentArgs),
    /// Integrate the phase equation and apply the bridge maps.
    Josephson(JosephsonArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Parameters and output settings shared by all subcommands.
///
/// Heun-style (`--ell/--lambda/--mu`) and Josephson-style (`--A/--B/--omega`)
/// parameters are mutually exclusive. Without either group the defaults are
/// `ell = 1, lambda = 1, mu = 0.5`.
#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Order 𝓁 (the equation has l = −𝓁).
    #[arg(long, conflicts_with_all = ["a", "b", "omega"])]
    pub ell: Option<u32>,
    /// λ: rational, decimal or complex (`1.3+0.4i`).
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["a", "b", "omega"])]
    pub lambda: Option<String>,
    /// μ, same syntax as λ.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["a", "b", "omega"])]
    pub mu: Option<String>,
    /// Drive amplitude A.
    #[arg(long = "A", id = "a", allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Bias B.
    #[arg(long = "B", id = "b", allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Drive frequency ω.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Integration tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Residual budget for identity checks.
    #[arg(long, default_value_t = 1e-8)]
    pub budget: f64,
    /// Seed for random sample points and solutions.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file (directory for `josephson`); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct PolysArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Use floating-point instead of exact rational arithmetic.
    #[arg(long)]
    pub float: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Sections to skip.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub skip: Vec<Section>,
    /// Use −Δ in the composition rules (negative control).
    #[arg(long)]
    pub flip_delta: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Section {
    Polys,
    Images,
    Compositions,
    Eigenbasis,
    Monodromy,
    Continuation,
    Laurent,
}

impl Section {
    pub const ALL: [Section; 7] = [
        Section::Polys,
        Section::Images,
        Section::Compositions,
        Section::Eigenbasis,
        Section::Monodromy,
        Section::Continuation,
        Section::Laurent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Section::Polys => "polys",
            Section::Images => "images",
            Section::Compositions => "compositions",
            Section::Eigenbasis => "eigenbasis",
            Section::Monodromy => "monodromy",
            Section::Continuation => "continuation",
            Section::Laurent => "laurent",
        }
    }
}

#[derive(Args, Debug)]
pub struct ContinueArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of random sample points.
    #[arg(long, default_value_t = 10)]
    pub points: usize,
    /// Sheets are drawn from `-sheets..=sheets`.
    #[arg(long, default_value_t = 2)]
    pub sheets: i64,
}

#[derive(Args, Debug)]
pub struct LaurentArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Initial truncation half-width (doubled until the tail decays).
    #[arg(long = "N", id = "n", default_value_t = 16)]
    pub n: usize,
    /// Accept a non-decaying series at the cap instead of failing.
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug)]
pub struct JosephsonArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Initial phase φ(0) [default: 0.7].
    #[arg(long, allow_hyphen_values = true, conflicts_with = "alpha")]
    pub phi0: Option<f64>,
    /// Constant α of the forward map; fixes φ(0) = α − π/2.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Grid points per half period.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    /// Also extend to (−3T/2, 3T/2) and compare with the ODE.
    #[arg(long)]
    pub extend: bool,
}

/// Parameters resolved from either group.
#[allow(clippy::large_enum_variant)]
pub enum Resolved {
    Heun { params: HeunParams, exact: Option<(Exact, Exact)> },
    Josephson(JosephsonParams),
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

impl CommonArgs {
    fn josephson_style(&self) -> bool {
        self.a.is_some() || self.b.is_some() || self.omega.is_some()
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err("--tol must lie in (0, 1)".into());
        }
        if self.budget.is_nan() || self.budget <= 0.0 {
            return Err("--budget must be positive".into());
        }
        if self.josephson_style() && (self.a.is_none() || self.b.is_none() || self.omega.is_none()) {
            return Err("--A, --B and --omega must be given together".into());
        }
        if self.ell == Some(0) {
            return Err("--ell must be a positive integer".into());
        }
        for (name, v) in [("--lambda", &self.lambda), ("--mu", &self.mu)] {
            if let Some(s) = v {
                if parse_complex(s).is_none() {
                    return Err(format!("cannot parse {name} value '{s}'"));
                }
            }
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<Resolved, Error> {
        if self.josephson_style() {
            let jp = JosephsonParams::new(self.a.unwrap(), self.b.unwrap(), self.omega.unwrap())?;
            return Ok(Resolved::Josephson(jp));
        }
        let ell = self.ell.unwrap_or(1);
        let lam = self.lambda.as_deref().unwrap_or("1");
        let mu = self.mu.as_deref().unwrap_or("0.5");
        let lam_c = parse_complex(lam).ok_or_else(|| usage("lambda"))?;
        let mu_c = parse_complex(mu).ok_or_else(|| usage("mu"))?;
        let exact = parse_exact(lam).zip(parse_exact(mu));
        let params = HeunParams::new(ell, lam_c, mu_c)?;
        Ok(Resolved::Heun { params, exact })
    }

    pub fn heun(&self) -> Result<HeunParams, Error> {
        match self.resolve()? {
            Resolved::Heun { params, .. } => Ok(params),
            Resolved::Josephson(jp) => params_to_heun(&jp)?.require(),
        }
    }

    pub fn josephson(&self) -> Result<JosephsonParams, Error> {
        match self.resolve()? {
            Resolved::Josephson(jp) => Ok(jp),
            Resolved::Heun { params, .. } => heun_to_params(&params),
        }
    }
}

pub fn c64_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}
