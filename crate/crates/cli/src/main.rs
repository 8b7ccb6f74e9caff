//! `raysinger`: runs the verification suites and the individual experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use raysinger_core::chern_weil::{curvature_matrix, euler_form, one_form_matrix, transgression_form, SkewFormMatrix};
use raysinger_core::local_index::{rhs_variation_gtm, rhs_variation_hf, FixedPointData};
use raysinger_core::report::{emit_report, Check, Format, Report, RunInfo, SuiteResult};
use raysinger_core::spectral::{
    anomaly_experiment, convergence_table, renormalized_log_torsion, torus_anomaly, Case, CircleConfig, CircleIsometry,
    CircleModel, Family, Fourier, Fourier2, LogDetMethod, TorsionReport, TorusConfig, TorusFamily, TorusIsometry,
    TorusModel,
};
use raysinger_core::suite::{self, Context, SuiteConfig};
use raysinger_core::Scalar;

#[derive(Parser, Debug)]
#[command(name = "raysinger", version, about = "Equivariant Ray-Singer metric verification suites")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed for every randomized check.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// JSON configuration: suite settings, or the model for `spectral`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Text)]
    format: OutFormat,
    /// Multiplier applied to every numeric tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
    Text,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
            OutFormat::Text => Format::Text,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a named suite: algebra, chernweil, asymptotics, transport, localindex, spectral or all.
    Suite { name: String },
    /// Euler and transgression forms of a curvature matrix.
    Chernweil {
        #[command(subcommand)]
        op: ChernweilOp,
    },
    /// Gaussian moments, the P-series identity and the asymp4 check.
    Asymp {
        #[command(subcommand)]
        op: AsympOp,
    },
    /// Transport ODE against the closed forms.
    Transport {
        #[command(subcommand)]
        op: TransportOp,
    },
    /// Fixed-point integrands.
    Localindex {
        #[command(subcommand)]
        op: LocalindexOp,
    },
    /// Anomaly experiments on discrete circle and torus models.
    Spectral {
        #[command(subcommand)]
        op: SpectralOp,
    },
}

#[derive(Subcommand, Debug)]
enum ChernweilOp {
    /// Pf(R/2π) of a curvature tensor or an exact scalar matrix.
    Euler {
        #[arg(long)]
        input: PathBuf,
    },
    /// ∂_b Pf((R + bṠ)/2π) at b = 0.
    Transgression {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum AsympOp {
    /// Moments against quadrature, the P-series and asymp4 at one n.
    Verify {
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Largest moment degree; the P-series is checked through 2n.
        #[arg(long, default_value_t = 6)]
        degree: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

#[derive(Subcommand, Debug)]
enum TransportOp {
    /// Integrate the transport ODE on random geometries of dimension n.
    Verify {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 256)]
        steps: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CaseArg {
    #[value(name = "hF")]
    Hf,
    #[value(name = "gTM")]
    Gtm,
}

impl From<CaseArg> for Case {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::Hf => Case::HF,
            CaseArg::Gtm => Case::GTM,
        }
    }
}

#[derive(Subcommand, Debug)]
enum LocalindexOp {
    /// Right-hand side of the variation formula from fixed-point samples.
    Rhs {
        #[arg(long, value_enum)]
        case: CaseArg,
        #[arg(long)]
        input: PathBuf,
    },
    /// Both routes through the pipeline on random samples.
    Consistency {
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Spectral,
    Cholesky,
}

impl From<MethodArg> for LogDetMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Spectral => LogDetMethod::Spectral,
            MethodArg::Cholesky => LogDetMethod::Cholesky,
        }
    }
}

#[derive(Args, Debug)]
struct SpectralArgs {
    /// Isometry, e.g. id, reflection, rotation:2 (circle) or id, -id (torus).
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    /// Grid size, overriding the configuration.
    #[arg(long)]
    n: Option<usize>,
    /// Write the full experiment record (JSON) here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the convergence table (CSV) here.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Grid sizes for a convergence table of the renormalized log torsion
    /// at γ = id.
    #[arg(long, value_delimiter = ',')]
    convergence: Vec<usize>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
}

#[derive(Subcommand, Debug)]
enum SpectralOp {
    /// Circle model: anomaly experiment, or a convergence table.
    Circle {
        /// Which metric the family varies.
        #[arg(long, value_enum)]
        vary: Option<CaseArg>,
        #[command(flatten)]
        common: SpectralArgs,
    },
    /// Flat torus model under a bundle-metric family.
    Torus {
        #[command(flatten)]
        common: SpectralArgs,
    },
}

/// Curvature tensor R_{ijkl} (n⁴ entries) or a scalar matrix with exact
/// entries such as "1/2"; `sdot` holds Ṡ_{kl} = Σ_i c_{kli} dx_i.
#[derive(Deserialize, Debug)]
struct CurvatureInput {
    #[serde(default)]
    n: usize,
    #[serde(default)]
    r: Option<Vec<f64>>,
    #[serde(default)]
    matrix: Option<Vec<Vec<String>>>,
    #[serde(default)]
    sdot: Option<Vec<f64>>,
}

impl CurvatureInput {
    fn matrix(&self) -> Result<SkewFormMatrix> {
        match (&self.r, &self.matrix) {
            (Some(r), None) => {
                if r.len() != self.n.pow(4) {
                    bail!("r has {} entries, expected n⁴ = {}", r.len(), self.n.pow(4));
                }
                Ok(curvature_matrix(r, self.n))
            }
            (None, Some(m)) => {
                let rows = m
                    .iter()
                    .map(|row| row.iter().map(|x| x.parse::<Scalar>()).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(SkewFormMatrix::from_scalars(&rows)?)
            }
            _ => bail!("input needs exactly one of \"r\" (with \"n\") or \"matrix\""),
        }
    }
}

/// A computed quantity, for the commands that do not run checks.
#[derive(Serialize, Debug)]
struct Value {
    quantity: String,
    value: f64,
    exact: Option<String>,
    form: Option<String>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).with_context(|| format!("malformed JSON in {}", path.display()))
}

fn write(path: &Path, s: &str) -> Result<()> {
    std::fs::write(path, s).with_context(|| format!("cannot write {}", path.display()))
}

fn emit_value(g: &Global, v: &Value) -> Result<()> {
    let s = match g.format {
        OutFormat::Json => serde_json::to_string_pretty(v)? + "\n",
        OutFormat::Csv => {
            format!("quantity,value,exact\n{},{:e},{}\n", v.quantity, v.value, v.exact.as_deref().unwrap_or(""))
        }
        OutFormat::Text => {
            let mut s = format!("{} = {}", v.quantity, v.value);
            if let Some(e) = &v.exact {
                s += &format!("  (exact {e})");
            }
            if let Some(f) = &v.form {
                s += &format!("\nform: {f}");
            }
            s + "\n"
        }
    };
    match &g.out {
        Some(p) => write(p, &s),
        None => {
            print!("{s}");
            Ok(())
        }
    }
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn emit_checks(g: &Global, suites: Vec<SuiteResult>, mut run: RunInfo) -> Result<bool> {
    run.timestamp = timestamp();
    let config = g.config.as_ref().map(|p| p.display().to_string());
    let report = Report::new(suites, run, config, g.tolerance_scale);
    emit_report(&report, g.format.into(), g.out.as_deref())?;
    Ok(report.passed())
}

fn context(g: &Global, suite_config: bool) -> Result<Context> {
    if !(g.tolerance_scale > 0.0 && g.tolerance_scale.is_finite()) {
        bail!("--tolerance-scale must be positive");
    }
    let mut ctx = Context::new(g.seed);
    ctx.tolerance_scale = g.tolerance_scale;
    if suite_config {
        if let Some(p) = &g.config {
            ctx.config = SuiteConfig::from_json(&read(p)?)?;
        }
    }
    Ok(ctx)
}

fn single(name: &str, seed: u64, checks: Vec<Check>) -> Vec<SuiteResult> {
    vec![SuiteResult { suite: name.into(), seed, checks }]
}

fn chernweil(g: &Global, op: &ChernweilOp) -> Result<bool> {
    let v = match op {
        ChernweilOp::Euler { input } => {
            let inp: CurvatureInput = parse_json(input)?;
            let e = euler_form(&inp.matrix()?)?;
            let top = e.top_coefficient();
            Value {
                quantity: "euler".into(),
                value: top.to_f64(),
                exact: top.is_exact().then(|| top.to_string()),
                form: Some(e.value.to_string()),
            }
        }
        ChernweilOp::Transgression { input } => {
            let inp: CurvatureInput = parse_json(input)?;
            let r = inp.matrix()?;
            let sdot = inp.sdot.as_ref().context("transgression input needs \"sdot\"")?;
            let t = transgression_form(&r, &one_form_matrix(sdot, r.form_dim)?)?;
            let norm = t.terms().values().map(|c| c.to_f64().abs()).fold(0.0, f64::max);
            Value {
                quantity: "transgression_max_coefficient".into(),
                value: norm,
                exact: None,
                form: Some(t.to_string()),
            }
        }
    };
    emit_value(g, &v)?;
    Ok(true)
}

fn localindex_rhs(g: &Global, case: Case, input: &Path) -> Result<bool> {
    let samples: Vec<FixedPointData> = parse_json(input)?;
    let value = match case {
        Case::HF => rhs_variation_hf(&samples)?,
        Case::GTM => rhs_variation_gtm(&samples)?,
    };
    emit_value(g, &Value { quantity: format!("rhs_{}", case.label()), value, exact: None, form: None })?;
    Ok(true)
}

fn apply_common(a: &SpectralArgs, n: &mut usize) {
    if let Some(m) = a.n {
        *n = m;
    }
}

fn convergence_csv(r: &TorsionReport) -> String {
    let mut s = String::from("n,value,extrapolation\n");
    for row in &r.convergence {
        let e = row.extrapolation.map(|x| format!("{x:e}")).unwrap_or_default();
        s += &format!("{},{:e},{e}\n", row.n, row.value);
    }
    s
}

fn finish_spectral(g: &Global, ctx: &Context, a: &SpectralArgs, r: &TorsionReport) -> Result<bool> {
    if let Some(p) = &a.report {
        write(p, &(serde_json::to_string_pretty(r)? + "\n"))?;
    }
    if let Some(p) = &a.table {
        write(p, &convergence_csv(r))?;
    }
    let id = format!("spectral.{}.{}.{}", r.model, r.gamma, r.case);
    let check = suite::anomaly_check(&id, r, ctx.tol(2e-2), ctx.tol(5e-3));
    emit_checks(g, single("spectral", ctx.seed, vec![check]), RunInfo::default())
}

fn spectral(g: &Global, op: &SpectralOp) -> Result<bool> {
    suite::deterministic_linalg();
    let ctx = context(g, false)?;
    match op {
        SpectralOp::Circle { vary, common } => {
            let mut c: CircleConfig = match &g.config {
                Some(p) => parse_json(p)?,
                None => suite::circle_family(1024, Case::HF, CircleIsometry::Reflection),
            };
            apply_common(common, &mut c.n);
            if let Some(s) = &common.gamma {
                c.isometry = s.parse()?;
            }
            if let Some(v) = vary {
                let f = c.family.get_or_insert_with(|| Family {
                    case: Case::HF,
                    direction: Fourier { a0: 1.0, cos: vec![], sin: vec![] },
                    step: 1e-4,
                });
                f.case = (*v).into();
            }
            let method = common.method.map_or(LogDetMethod::Spectral, Into::into);
            let mut r = anomaly_experiment(&CircleModel::new(c.clone())?, method)?;
            r.convergence = convergence_table(&common.convergence, &|n| {
                let id = CircleConfig { n, isometry: CircleIsometry::Identity, ..c.clone() };
                renormalized_log_torsion(&CircleModel::new(id)?)
            })?;
            finish_spectral(g, &ctx, common, &r)
        }
        SpectralOp::Torus { common } => {
            let mut c: TorusConfig = match &g.config {
                Some(p) => parse_json(p)?,
                None => suite::torus_family(32, TorusIsometry::MinusId),
            };
            apply_common(common, &mut c.n);
            if let Some(s) = &common.gamma {
                c.isometry = s.parse()?;
            }
            if c.family.is_none() {
                c.family = Some(TorusFamily { direction: Fourier2 { a0: 1.0, terms: vec![] }, step: 1e-4 });
            }
            if !common.convergence.is_empty() {
                bail!("convergence tables are only available for circle models");
            }
            let method = common.method.map_or(LogDetMethod::Cholesky, Into::into);
            let r = torus_anomaly(&TorusModel::new(c)?, method)?;
            finish_spectral(g, &ctx, common, &r)
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let g = &cli.global;
    match &cli.command {
        Command::Suite { name } => {
            let ctx = context(g, true)?;
            let (suites, run) = suite::run_suite(name, &ctx)?;
            emit_checks(g, suites, run)
        }
        Command::Chernweil { op } => chernweil(g, op),
        Command::Asymp { op: AsympOp::Verify { n, degree, trials } } => {
            let ctx = context(g, false)?;
            let mut checks = suite::gaussian_moment_checks(&ctx, *n, *degree);
            checks.push(suite::p_series_check(*n, 2 * n));
            checks.push(suite::asymp4_check(&ctx, *n, *trials));
            emit_checks(g, single("asymptotics", g.seed, checks), RunInfo::default())
        }
        Command::Transport { op: TransportOp::Verify { n, trials, steps } } => {
            let ctx = context(g, false)?;
            let checks = suite::transport_checks(&ctx, *n, *trials, *steps);
            emit_checks(g, single("transport", g.seed, checks), RunInfo::default())
        }
        Command::Localindex { op: LocalindexOp::Rhs { case, input } } => localindex_rhs(g, (*case).into(), input),
        Command::Localindex { op: LocalindexOp::Consistency { trials } } => {
            let ctx = context(g, false)?;
            let checks = suite::pipeline_checks(&ctx, *trials, 100);
            emit_checks(g, single("localindex", g.seed, checks), RunInfo::default())
        }
        Command::Spectral { op } => spectral(g, op),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
