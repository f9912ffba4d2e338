//! Command-line front end. The `hyperlab` binary forwards to [`run`].

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::catalog::{model_names, ModelSpec};
use crate::error::{Error, Result};
use crate::hypersurface::ChartMap;
use crate::jets::MAX_ORDER;
use crate::quadrature::{integrate_field, MIN_RESOLUTION};
use crate::tensor_calculus::ScalarFieldId;
use crate::tensors::TensorFieldId;
use crate::theorem_lab::{
    evaluate_model, invariants, okumura_bound_holds, okumura_conclusion_sample, scan_products, sixth_bound_hypothesis,
    flat_okumura_hypothesis, two_curvature_branch,
};
use crate::verifier::{all_checks, check_names, run_suite, CheckId, CheckKind, Status, SuiteConfig, Tolerances};

pub const THREADS_ENV: &str = "HYPERLAB_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

const VERIFY_HELP: &str = "\
CSV columns:
  check         check name (see `hyperlab catalog`)
  model         model id with parameters
  grid          per-axis resolution, e.g. 48x96
  residual_max  largest pointwise residual, or |integral| for integral checks
  residual_l2   root mean square of pointwise residuals (|integral| for integrals)
  tol           tolerance the residual was compared against
  status        PASS, FAIL, SKIP or ERROR
  note          reason for SKIP/ERROR, or skipped-node count

Exit status: 0 when every check passes or skips, 1 on FAIL or ERROR,
2 on configuration errors.";

const SCAN_HELP: &str = "\
CSV columns:
  r1            radius of the first factor
  norm_a2       |A|^2 of the product
  m2f2_over_6   m^2 f^2 / 6
  hypothesis    true when |A|^2 <= m^2 f^2 / 6
  admissible    true, false or boundary for r1 > sqrt(1/m)
  chain_partial 5(r2/r1)^2 - (m-7)(m-1)(r1/r2)^2   (m1 = 1 only)
  chain_full    chain_partial + 2(m-1)              (m1 = 1 only)";

#[derive(Debug, Parser)]
#[command(name = "hyperlab", version, about = "Checks curvature identities of hypersurfaces in space forms")]
pub struct Cli {
    /// Worker threads (default: $HYPERLAB_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run pointwise and integral checks on a model.
    #[command(after_help = VERIFY_HELP)]
    Verify(RunArgs),
    /// Run only the integral checks, or integrate named scalar fields.
    #[command(after_help = VERIFY_HELP)]
    Integrals(IntegralArgs),
    /// Scan the admissible radius range of product spheres.
    #[command(after_help = SCAN_HELP)]
    ScanProducts(ScanArgs),
    /// List models, their default parameters and the registered checks.
    Catalog(CatalogArgs),
    /// Evaluate the theorem hypotheses on a model or a principal curvature vector.
    CheckTheorem(TheoremArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Model name (see `hyperlab catalog`).
    #[arg(long)]
    pub model: Option<String>,
    /// Parameter overrides, `key=value[,key=value...]`; repeatable.
    #[arg(long = "param", value_name = "K=V")]
    pub params: Vec<String>,
    /// JSON or TOML model record with a `kind` field; replaces --model.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    /// Per-axis resolutions; one value is used for every axis.
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Jet order, 3 or 4.
    #[arg(long)]
    pub jet_order: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// TOML or JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Restrict to these checks; repeatable.
    #[arg(long = "check", value_name = "NAME")]
    pub checks: Vec<String>,
    /// Record the wall-clock time in the report metadata.
    #[arg(long)]
    pub timestamp: bool,
    /// Pointwise tolerance [default: 1e-6]
    #[arg(long)]
    pub tol_pointwise: Option<f64>,
    /// Tolerance for identities with fourth derivatives [default: 1e-5]
    #[arg(long)]
    pub tol_fourth_order: Option<f64>,
    /// Smallest integral tolerance [default: 1e-5]
    #[arg(long)]
    pub tol_integral_floor: Option<f64>,
    /// Integral tolerance in units of the quadrature error estimate [default: 3]
    #[arg(long)]
    pub tol_integral_factor: Option<f64>,
    /// Biconservativity residual below which biconservative-only checks run [default: 1e-8]
    #[arg(long)]
    pub tol_biconservative: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct IntegralArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Integrate these scalar fields (f, f2, norm_a2, trace_a3, x0, ...);
    /// with --tensor they are the γ of box_zero(Φ, γ).
    #[arg(long = "field", value_delimiter = ',')]
    pub fields: Vec<String>,
    /// Run box_zero(Φ, γ) for these tensors (s2, t1, t2, t3, phi, ...).
    #[arg(long = "tensor", value_delimiter = ',')]
    pub tensors: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub m1: usize,
    #[arg(long)]
    pub r1_min: f64,
    #[arg(long)]
    pub r1_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CatalogArgs {
    #[arg(long, value_enum, default_value = "pretty")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct TheoremArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Principal curvatures to test instead of a model.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda: Vec<f64>,
    /// Ambient curvature for --lambda.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long, value_enum, default_value = "pretty")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Run configuration file; every field is optional and flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub spec: Option<ModelSpec>,
    pub grid: Option<Vec<usize>>,
    pub jet_order: Option<usize>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub checks: Option<Vec<String>>,
    pub timestamp: Option<bool>,
    pub tolerances: Option<PartialTolerances>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialTolerances {
    pub pointwise: Option<f64>,
    pub fourth_order: Option<f64>,
    pub integral_floor: Option<f64>,
    pub integral_factor: Option<f64>,
    pub biconservative: Option<f64>,
}

/// Fully resolved settings for `verify` and `integrals`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: ModelSpec,
    pub grid: Vec<usize>,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub suite: SuiteConfig,
}

fn read_structured<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    if is_toml {
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    } else {
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

pub fn parse_params(items: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in items.iter().flat_map(|s| s.split(',')).filter(|s| !s.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("parameter `{item}` is not key=value")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("parameter `{k}` has non-numeric value `{v}`")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

pub fn parse_checks(names: &[String]) -> Result<Vec<CheckId>> {
    names
        .iter()
        .map(|n| {
            CheckId::parse(n).ok_or_else(|| {
                Error::Config(format!("unknown check `{n}`; valid checks: {}", check_names().join(", ")))
            })
        })
        .collect()
}

fn parse_field(name: &str) -> Result<ScalarFieldId> {
    ScalarFieldId::parse(name)
        .ok_or_else(|| Error::Config(format!("unknown field `{name}`; valid fields: f, f2, norm_a2, trace_a3, x0, x1, ...")))
}

fn unknown_model(name: &str) -> Error {
    Error::Config(format!("unknown model `{name}`; valid models: {}", model_names().join(", ")))
}

fn resolve_spec(args: &ModelArgs, file: &FileConfig) -> Result<ModelSpec> {
    let spec = if let Some(path) = &args.model_file {
        read_structured::<ModelSpec>(path)?
    } else if let Some(name) = args.model.as_deref().or(file.model.as_deref()) {
        if !model_names().contains(&name) {
            return Err(unknown_model(name));
        }
        let mut params = if args.model.is_none() || args.model == file.model { file.params.clone() } else { BTreeMap::new() };
        params.extend(parse_params(&args.params)?);
        ModelSpec::from_name(name, &params)?
    } else if let Some(spec) = &file.spec {
        spec.clone()
    } else {
        return Err(Error::Config(format!(
            "no model given; use --model with one of: {}",
            model_names().join(", ")
        )));
    };
    spec.validate()?;
    Ok(spec)
}

/// Default resolution per axis for a hypersurface dimension.
pub fn default_grid(dim: usize) -> usize {
    match dim {
        2 => 48,
        3 => 16,
        _ => MIN_RESOLUTION,
    }
}

fn now_stamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

/// Merges a configuration file (if any) under the command-line flags.
pub fn resolve_run(args: &RunArgs, threads: Option<usize>) -> Result<RunConfig> {
    let file = match &args.config {
        Some(p) => read_structured::<FileConfig>(p)?,
        None => FileConfig::default(),
    };
    let spec = resolve_spec(&args.model, &file)?;
    let grid = if !args.model.grid.is_empty() {
        args.model.grid.clone()
    } else if let Some(g) = &file.grid {
        g.clone()
    } else {
        vec![default_grid(spec.dim())]
    };
    crate::quadrature::expand_resolution(&grid, spec.dim()).map_err(|e| Error::Config(e.to_string()))?;
    let jet_order = args.jet_order.or(file.jet_order).unwrap_or(MAX_ORDER);
    if !(3..=MAX_ORDER).contains(&jet_order) {
        return Err(Error::Config(format!("jet order must be 3 or 4, got {jet_order}")));
    }
    let ft = file.tolerances.unwrap_or_default();
    let d = Tolerances::default();
    let tolerances = Tolerances {
        pointwise: args.tol_pointwise.or(ft.pointwise).unwrap_or(d.pointwise),
        fourth_order: args.tol_fourth_order.or(ft.fourth_order).unwrap_or(d.fourth_order),
        integral_floor: args.tol_integral_floor.or(ft.integral_floor).unwrap_or(d.integral_floor),
        integral_factor: args.tol_integral_factor.or(ft.integral_factor).unwrap_or(d.integral_factor),
        biconservative: args.tol_biconservative.or(ft.biconservative).unwrap_or(d.biconservative),
    };
    tolerances.validate()?;
    let names = if !args.checks.is_empty() { args.checks.clone() } else { file.checks.clone().unwrap_or_default() };
    let checks = parse_checks(&names)?;
    let timestamp = (args.timestamp || file.timestamp.unwrap_or(false)).then(now_stamp);
    let threads = threads.or(file.threads);
    if threads == Some(0) {
        return Err(Error::Config("thread count must be positive".into()));
    }
    Ok(RunConfig {
        spec,
        grid,
        format: args.format.or(file.format).unwrap_or(Format::Pretty),
        output: args.output.clone().or(file.output),
        threads,
        suite: SuiteConfig {
            jet_order,
            tolerances,
            checks,
            timestamp,
        },
    })
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Config(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Error::Config(e.to_string()))
        }
    }
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Config("thread count must be positive".into()));
        }
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(f))
}

fn chart_of(spec: &ModelSpec) -> Result<ChartMap> {
    spec.instantiate()
}

fn report_exit(statuses: impl Iterator<Item = Status>) -> i32 {
    let mut code = EXIT_OK;
    for s in statuses {
        if matches!(s, Status::Fail | Status::Error) {
            code = EXIT_FAIL;
        }
    }
    code
}

fn run_verify(cfg: RunConfig) -> Result<i32> {
    let chart = chart_of(&cfg.spec)?;
    let report = with_pool(cfg.threads, || run_suite(&chart, &cfg.spec.id(), &cfg.grid, &cfg.suite))?;
    let text = match cfg.format {
        Format::Json => report.to_json()? + "\n",
        Format::Csv => report.to_csv()?,
        Format::Pretty => format!("model {}\n{}", cfg.spec.id(), report.to_pretty()),
    };
    emit(cfg.output.as_deref(), &text)?;
    Ok(report_exit(report.checks.iter().map(|c| c.status)))
}

#[derive(Debug, Serialize)]
struct FieldIntegral {
    field: String,
    value: f64,
    error_estimate: f64,
}

fn run_integrals(args: &IntegralArgs, threads: Option<usize>) -> Result<i32> {
    let mut cfg = resolve_run(&args.run, threads)?;
    if !args.tensors.is_empty() {
        let fields = if args.fields.is_empty() { vec!["f".to_string(), "x0".to_string()] } else { args.fields.clone() };
        let mut checks = Vec::new();
        for t in &args.tensors {
            let tensor = TensorFieldId::parse(t).ok_or_else(|| {
                Error::Config(format!("unknown tensor `{t}`; valid tensors: identity, a, a2, a3, s2, t1, t2, t3, phi"))
            })?;
            for f in &fields {
                let field = parse_field(f)?;
                checks.push(CheckId::BoxZero { tensor: tensor.clone(), field });
            }
        }
        cfg.suite.checks = checks;
        return run_verify(cfg);
    }
    if args.fields.is_empty() {
        if cfg.suite.checks.is_empty() {
            cfg.suite.checks = all_checks();
        }
        cfg.suite.checks.retain(|c| c.kind() == CheckKind::Integral);
        if cfg.suite.checks.is_empty() {
            return Err(Error::Config("none of the selected checks is an integral check".into()));
        }
        return run_verify(cfg);
    }
    let fields: Vec<ScalarFieldId> = args.fields.iter().map(|n| parse_field(n)).collect::<Result<_>>()?;
    let chart = chart_of(&cfg.spec)?;
    let rows: Vec<FieldIntegral> = with_pool(cfg.threads, || {
        fields
            .iter()
            .map(|f| {
                let i = integrate_field(&chart, &cfg.grid, f)?;
                Ok(FieldIntegral {
                    field: f.name(),
                    value: i.value,
                    error_estimate: i.error_estimate,
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let text = match cfg.format {
        Format::Json => serde_json::to_string_pretty(&rows).map_err(|e| Error::Config(e.to_string()))? + "\n",
        Format::Csv => to_csv(&rows)?,
        Format::Pretty => rows
            .iter()
            .map(|r| format!("{:<12} {:>22.15e}  ± {:.2e}\n", r.field, r.value, r.error_estimate))
            .collect(),
    };
    emit(cfg.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Config(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
}

fn run_scan(args: &ScanArgs, threads: Option<usize>) -> Result<i32> {
    let rows = with_pool(threads, || scan_products(args.m, args.m1, args.r1_min, args.r1_max, args.step))?
        .map_err(|e| Error::Config(e.to_string()))?;
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&rows).map_err(|e| Error::Config(e.to_string()))? + "\n",
        Format::Csv => to_csv(&rows)?,
        Format::Pretty => {
            let mut s = format!("{:>8} {:>12} {:>12} {:>10} {:>10}\n", "r1", "|A|^2", "m2f2/6", "hypothesis", "admissible");
            for r in &rows {
                s.push_str(&format!(
                    "{:>8.4} {:>12.5} {:>12.5} {:>10} {:>10}\n",
                    r.r1,
                    r.norm_a2,
                    r.m2f2_over_6,
                    r.hypothesis,
                    r.admissible.as_str()
                ));
            }
            s
        }
    };
    emit(args.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct CatalogEntry {
    name: String,
    default_id: String,
    dim: usize,
    curvature: f64,
    spec: ModelSpec,
}

#[derive(Debug, Serialize)]
struct CheckEntry {
    name: String,
    kind: String,
    biconservative_only: bool,
    identity: String,
}

fn run_catalog(args: &CatalogArgs) -> Result<i32> {
    let models: Vec<CatalogEntry> = model_names()
        .iter()
        .map(|n| {
            let spec = ModelSpec::from_name(n, &BTreeMap::new())?;
            Ok(CatalogEntry {
                name: n.to_string(),
                default_id: spec.id(),
                dim: spec.dim(),
                curvature: spec.curvature(),
                spec,
            })
        })
        .collect::<Result<_>>()?;
    let checks: Vec<CheckEntry> = all_checks()
        .iter()
        .map(|c| CheckEntry {
            name: c.name(),
            kind: format!("{:?}", c.kind()).to_lowercase(),
            biconservative_only: c.biconservative_only(),
            identity: c.anchor(),
        })
        .collect();
    let text = match args.format {
        Format::Json => {
            let v = serde_json::json!({ "models": models, "checks": checks });
            serde_json::to_string_pretty(&v).map_err(|e| Error::Config(e.to_string()))? + "\n"
        }
        Format::Csv => to_csv(&checks)?,
        Format::Pretty => {
            let mut s = String::from("models\n");
            for m in &models {
                s.push_str(&format!("  {:<16} {}\n", m.name, m.default_id));
            }
            s.push_str("checks\n");
            for c in &checks {
                let tag = if c.biconservative_only { " [biconservative]" } else { "" };
                s.push_str(&format!("  {:<28} {:<9} {}{tag}\n", c.name, c.kind, c.identity));
            }
            s
        }
    };
    emit(None, &text)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct LambdaReport {
    c: f64,
    lambda: Vec<f64>,
    f: f64,
    norm_a2: f64,
    sixth_bound_hypothesis: bool,
    flat_okumura_hypothesis: bool,
    okumura_bound: Option<bool>,
    okumura_conclusion: f64,
    two_curvature_branch: Option<f64>,
    note: Option<String>,
}

fn run_theorem(args: &TheoremArgs, threads: Option<usize>) -> Result<i32> {
    if !args.lambda.is_empty() {
        let m = args.lambda.len();
        let (f, a2) = invariants(&args.lambda);
        let bound = okumura_bound_holds(args.c, f, a2, m);
        let conclusion = okumura_conclusion_sample(args.c, &args.lambda);
        let r = LambdaReport {
            c: args.c,
            lambda: args.lambda.clone(),
            f,
            norm_a2: a2,
            sixth_bound_hypothesis: sixth_bound_hypothesis(f, a2, m),
            flat_okumura_hypothesis: flat_okumura_hypothesis(f, a2, m),
            okumura_bound: bound.as_ref().ok().copied(),
            okumura_conclusion: conclusion,
            two_curvature_branch: two_curvature_branch(args.c, m),
            note: bound.err().map(|e| e.to_string()),
        };
        let violated = r.okumura_bound == Some(true) && conclusion < -1e-10;
        let text = match args.format {
            Format::Pretty | Format::Csv => key_values(&r)?,
            Format::Json => serde_json::to_string_pretty(&r).map_err(|e| Error::Config(e.to_string()))? + "\n",
        };
        emit(args.output.as_deref(), &text)?;
        return Ok(if violated { EXIT_FAIL } else { EXIT_OK });
    }
    let spec = resolve_spec(&args.model, &FileConfig::default())?;
    let grid = if args.model.grid.is_empty() { vec![default_grid(spec.dim())] } else { args.model.grid.clone() };
    crate::quadrature::expand_resolution(&grid, spec.dim()).map_err(|e| Error::Config(e.to_string()))?;
    let chart = chart_of(&spec)?;
    let summary = with_pool(threads, || evaluate_model(&chart, &spec.id(), &grid))??;
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&summary).map_err(|e| Error::Config(e.to_string()))? + "\n",
        Format::Csv => to_csv(std::slice::from_ref(&summary))?,
        Format::Pretty => key_values(&summary)?,
    };
    emit(args.output.as_deref(), &text)?;
    Ok(if summary.consistent() { EXIT_OK } else { EXIT_FAIL })
}

/// `key: value` lines for a flat serializable record.
fn key_values<T: Serialize>(record: &T) -> Result<String> {
    let v = serde_json::to_value(record).map_err(|e| Error::Config(e.to_string()))?;
    let mut out = String::new();
    if let serde_json::Value::Object(map) = v {
        for (k, v) in map {
            let shown = match v {
                serde_json::Value::Null => "-".to_string(),
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            };
            out.push_str(&format!("{k:<24} {shown}\n"));
        }
    }
    Ok(out)
}

fn dispatch(cli: Cli) -> Result<i32> {
    let threads = match cli.threads {
        Some(n) => Some(n),
        None => threads_from_env()?,
    };
    match &cli.command {
        Command::Verify(a) => run_verify(resolve_run(a, threads)?),
        Command::Integrals(a) => run_integrals(a, threads),
        Command::ScanProducts(a) => run_scan(a, threads),
        Command::Catalog(a) => run_catalog(a),
        Command::CheckTheorem(a) => run_theorem(a, threads),
    }
}

fn exit_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Spec(_) | Error::Argument(_) | Error::Unsupported(_) => EXIT_CONFIG,
        _ => EXIT_FAIL,
    }
}

/// Parses `argv` (including the program name) and runs it; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}
