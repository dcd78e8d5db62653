//! Command-line surface: descriptor parsing, subcommand dispatch, report
//! rendering.
//!
//! Every report starts with its command and seed: CSV output as a leading
//! `# command=… seed=…` line, JSON output as fields of the top-level object.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{self, BoundCertificate, ConditionName};
use crate::compare::{self, csv_field, GNormSource};
use crate::error::Error;
use crate::gibbs::{GibbsMeasure, MeasureKind};
use crate::lattice::{self, InteractionModel, LatticeBoundReport, PoissonSumReport};
use crate::numeric::TailRule;
use crate::size_bias::CouplingSpec;
use crate::stein::{self, SolveRoute, TestFunction};
use crate::verify::{self, VerifyTolerances};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad descriptor, flag or file contents.
    #[error("{location}: {message}")]
    Parse { location: String, message: String },
    #[error("{0}")]
    Compute(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => 2,
            _ => 1,
        }
    }
}

fn parse_err(location: impl Into<String>, message: impl std::fmt::Display) -> CliError {
    CliError::Parse {
        location: location.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    #[default]
    Solve,
    Bounds,
    Compare,
    Lattice,
    PoissonSum,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Resolved settings for one run. Field names double as config-file keys.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    /// Measure descriptor; `measure2` is the second one for `compare`.
    pub measure: Option<String>,
    pub measure2: Option<String>,
    /// Test function descriptor for `solve`.
    pub f: Option<String>,
    /// `exact`, `rate_range` or `user:g1,g2`.
    pub g_norm: Option<String>,
    pub model: Option<String>,
    pub lambda: Option<f64>,
    pub z_n: Option<f64>,
    /// Single `n` or inclusive range `a..b`.
    pub n: Option<String>,
    /// Bernoulli success probabilities for `poisson-sum`.
    pub p: Option<Vec<f64>>,
    /// Coupling-spec file for `poisson-sum`.
    pub spec: Option<PathBuf>,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub seed: u64,
    /// Tail tolerance for infinite-support measures.
    pub tolerance: Option<f64>,
}

/// Optional overrides read from a config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    command: Option<CommandKind>,
    measure: Option<String>,
    measure2: Option<String>,
    f: Option<String>,
    g_norm: Option<String>,
    model: Option<String>,
    lambda: Option<f64>,
    z_n: Option<f64>,
    n: Option<Value>,
    p: Option<Vec<f64>>,
    spec: Option<PathBuf>,
    format: Option<Format>,
    output: Option<PathBuf>,
    seed: Option<u64>,
    tolerance: Option<f64>,
}

impl RunConfig {
    /// Apply a JSON config file on top of `self`; file values win.
    pub fn apply_config_file(mut self, path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        let file: ConfigFile = serde_json::from_str(&text)
            .map_err(|e| parse_err(path.display().to_string(), e))?;
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = file.$f { self.$f = Some(v); } )* };
        }
        take!(measure, measure2, f, g_norm, model, lambda, z_n, p, spec, output, tolerance);
        if let Some(c) = file.command {
            self.command = c;
        }
        if let Some(v) = file.format {
            self.format = v;
        }
        if let Some(v) = file.seed {
            self.seed = v;
        }
        if let Some(n) = file.n {
            self.n = Some(match n {
                Value::String(s) => s,
                other => other.to_string(),
            });
        }
        Ok(self)
    }

    fn tail_rule(&self) -> Result<TailRule, CliError> {
        match self.tolerance {
            None => Ok(TailRule::default()),
            Some(t) if t > 0.0 && t < 1.0 => Ok(TailRule::Tolerance(t)),
            Some(t) => Err(parse_err("--tolerance", format!("{t} not in (0, 1)"))),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gibbs-stein", version, about = "Stein bounds for discrete Gibbs measures")]
pub struct Cli {
    /// JSON file whose keys override the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Tail mass allowed when truncating infinite supports.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate g_f and its increments.
    Solve {
        #[arg(long)]
        measure: String,
        /// `indicator:0,2`, `values:0.1,0.5,...` or `constant:c`.
        #[arg(long)]
        f: Option<String>,
    },
    /// Certificates for one measure.
    Bounds {
        #[arg(long)]
        measure: String,
    },
    /// Generator comparison of two measures.
    Compare {
        #[arg(long)]
        measure: String,
        #[arg(long)]
        measure2: String,
        #[arg(long)]
        g_norm: Option<String>,
    },
    /// Lattice law versus its continuum limit over a range of n.
    Lattice {
        #[arg(long)]
        model: String,
        #[arg(long, alias = "z")]
        lambda: Option<f64>,
        #[arg(long)]
        z_n: Option<f64>,
        #[arg(long)]
        n: String,
    },
    /// Poisson approximation bounds for a sum of indicators.
    PoissonSum {
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Seeded invariant suite; exits 1 on the first violation.
    Verify,
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig {
            format: self.format.unwrap_or_default(),
            output: self.output,
            seed: self.seed.unwrap_or(0),
            tolerance: self.tolerance,
            ..RunConfig::default()
        };
        match self.command {
            Command::Solve { measure, f } => {
                cfg.command = CommandKind::Solve;
                cfg.measure = Some(measure);
                cfg.f = f;
            }
            Command::Bounds { measure } => {
                cfg.command = CommandKind::Bounds;
                cfg.measure = Some(measure);
            }
            Command::Compare {
                measure,
                measure2,
                g_norm,
            } => {
                cfg.command = CommandKind::Compare;
                cfg.measure = Some(measure);
                cfg.measure2 = Some(measure2);
                cfg.g_norm = g_norm;
            }
            Command::Lattice {
                model,
                lambda,
                z_n,
                n,
            } => {
                cfg.command = CommandKind::Lattice;
                cfg.model = Some(model);
                cfg.lambda = lambda;
                cfg.z_n = z_n;
                cfg.n = Some(n);
            }
            Command::PoissonSum { p, spec } => {
                cfg.command = CommandKind::PoissonSum;
                cfg.p = p;
                cfg.spec = spec;
            }
            Command::Verify => cfg.command = CommandKind::Verify,
        }
        match &self.config {
            Some(path) => cfg.apply_config_file(path),
            None => Ok(cfg),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn numbers(location: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| parse_err(location, format!("`{t}`: {e}")))
        })
        .collect()
}

fn count(location: &str, v: f64) -> Result<usize, CliError> {
    if v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(parse_err(location, format!("{v} is not a count")))
    }
}

/// Parse a measure descriptor: `poisson:λ`, `binomial:n,p`, `geometric:p`,
/// `negbin:r,p`, `hypergeometric:N,K,n`, `uniform:max`, `pmf:w0,w1,...`,
/// `lattice:model,n,z`, `limit:model,z` or `@file.json`.
pub fn parse_measure(desc: &str, rule: TailRule) -> Result<GibbsMeasure, CliError> {
    let loc = format!("measure `{desc}`");
    if let Some(path) = desc.strip_prefix('@') {
        let text = read(Path::new(path))?;
        return GibbsMeasure::from_json(&text).map_err(|e| parse_err(path, e));
    }
    let (name, args) = desc
        .split_once(':')
        .ok_or_else(|| parse_err(&loc, "expected `kind:params`"))?;
    let arity = |k: usize, v: &[f64]| {
        if v.len() == k {
            Ok(())
        } else {
            Err(parse_err(&loc, format!("expected {k} parameters, got {}", v.len())))
        }
    };
    let kind = match name {
        "lattice" | "limit" => {
            let parts: Vec<&str> = args.split(',').map(str::trim).collect();
            let model = InteractionModel::by_name(parts[0]).map_err(|e| parse_err(&loc, e))?;
            let rest = numbers(&loc, &parts[1..].join(","))?;
            return if name == "lattice" {
                arity(2, &rest)?;
                Ok(lattice::lattice_measure(&model, count(&loc, rest[0])?, rest[1])?)
            } else {
                arity(1, &rest)?;
                Ok(lattice::limit_measure(&model, rest[0], rule)?)
            };
        }
        "pmf" => {
            let w = numbers(&loc, args)?;
            return Ok(GibbsMeasure::from_pmf(&w, 1.0)?);
        }
        "poisson" => {
            let v = numbers(&loc, args)?;
            arity(1, &v)?;
            MeasureKind::Poisson { lambda: v[0] }
        }
        "binomial" => {
            let v = numbers(&loc, args)?;
            arity(2, &v)?;
            MeasureKind::Binomial {
                n: count(&loc, v[0])?,
                p: v[1],
            }
        }
        "geometric" => {
            let v = numbers(&loc, args)?;
            arity(1, &v)?;
            MeasureKind::Geometric { p: v[0] }
        }
        "negbin" => {
            let v = numbers(&loc, args)?;
            arity(2, &v)?;
            MeasureKind::NegativeBinomial { r: v[0], p: v[1] }
        }
        "hypergeometric" => {
            let v = numbers(&loc, args)?;
            arity(3, &v)?;
            MeasureKind::Hypergeometric {
                population: count(&loc, v[0])?,
                successes: count(&loc, v[1])?,
                draws: count(&loc, v[2])?,
            }
        }
        "uniform" => {
            let v = numbers(&loc, args)?;
            arity(1, &v)?;
            MeasureKind::DiscreteUniform {
                max: count(&loc, v[0])?,
            }
        }
        other => return Err(parse_err(&loc, format!("unknown kind `{other}`"))),
    };
    Ok(GibbsMeasure::builtin(kind, rule)?)
}

/// `indicator:0,2`, `values:…` or `constant:c`; the default is the
/// indicator of `{0}`.
pub fn parse_test_function(desc: Option<&str>, len: usize) -> Result<TestFunction, CliError> {
    let Some(desc) = desc else {
        return Ok(TestFunction::indicator(len, [0])?);
    };
    let loc = format!("f `{desc}`");
    let (name, args) = desc
        .split_once(':')
        .ok_or_else(|| parse_err(&loc, "expected `kind:params`"))?;
    let v = numbers(&loc, args)?;
    Ok(match name {
        "indicator" => {
            let set = v
                .iter()
                .map(|&x| count(&loc, x))
                .collect::<Result<Vec<_>, _>>()?;
            TestFunction::indicator(len, set)?
        }
        "values" => {
            if v.len() != len {
                return Err(parse_err(&loc, format!("need {len} values, got {}", v.len())));
            }
            TestFunction::new(v)?
        }
        "constant" if v.len() == 1 => TestFunction::constant(len, v[0])?,
        _ => return Err(parse_err(&loc, "unknown test function")),
    })
}

/// `exact` (default), `rate_range` or `user:g1,g2`.
pub fn parse_g_norm(desc: Option<&str>) -> Result<GNormSource, CliError> {
    match desc {
        None | Some("exact") => Ok(GNormSource::Exact),
        Some("rate_range") => Ok(GNormSource::RateRange),
        Some("extended_rate_range") => Ok(GNormSource::ExtendedRateRange),
        Some(s) => {
            let loc = format!("g_norm `{s}`");
            let args = s
                .strip_prefix("user:")
                .ok_or_else(|| parse_err(&loc, "unknown source"))?;
            let v = numbers(&loc, args)?;
            if v.len() != 2 {
                return Err(parse_err(&loc, "expected two norms"));
            }
            Ok(GNormSource::UserSupplied { g1: v[0], g2: v[1] })
        }
    }
}

fn require<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    v.as_ref()
        .ok_or_else(|| parse_err(format!("--{name}"), "required for this command"))
}

/// Rendered report and the process exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: String,
    pub status: i32,
    /// Name of the first violated property, for `verify`.
    pub first_failure: Option<&'static str>,
}

struct Table {
    header: &'static str,
    rows: Vec<String>,
    json: Vec<Value>,
    extra: Value,
}

fn render(cfg: &RunConfig, name: &str, t: Table) -> String {
    match cfg.format {
        Format::Csv => {
            let mut s = format!("# command={name} seed={}\n{}\n", cfg.seed, t.header);
            for r in &t.rows {
                s.push_str(r);
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let mut obj = json!({"command": name, "seed": cfg.seed, "rows": t.json});
            if let (Value::Object(o), Value::Object(extra)) = (&mut obj, t.extra) {
                o.extend(extra);
            }
            let mut s = serde_json::to_string_pretty(&obj).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn flags(c: &BoundCertificate, name: ConditionName) -> &'static str {
    match c.conditions.iter().find(|x| x.name == name) {
        Some(x) if x.holds => "true",
        Some(_) => "false",
        None => "",
    }
}

fn run_solve(cfg: &RunConfig) -> Result<Table, CliError> {
    let m = parse_measure(require(&cfg.measure, "measure")?, cfg.tail_rule()?)?;
    let f = parse_test_function(cfg.f.as_deref(), m.support_max() + 1)?;
    let sol = stein::solve_with_route(&m, &f, SolveRoute::Auto)?;
    let mut rows = Vec::new();
    let mut js = Vec::new();
    for j in 0..sol.g().len() {
        let (g, dg) = (sol.at(j), sol.increment(j));
        rows.push(format!("{j},{g:.16e},{dg:.16e}"));
        js.push(json!({"j": j, "g": g, "delta_g": dg}));
    }
    Ok(Table {
        header: "j,g,delta_g",
        rows,
        json: js,
        extra: json!({
            "measure": m.kind().label(),
            "mean_f": sol.mean_f(),
            "max_relative_residual": stein::max_relative_residual(&m, &sol, f.values()),
        }),
    })
}

fn run_bounds(cfg: &RunConfig) -> Result<Table, CliError> {
    let m = parse_measure(require(&cfg.measure, "measure")?, cfg.tail_rule()?)?;
    let mut certs = bounds::exact_certificates(&m);
    certs.extend(bounds::all_certificates(&m));
    let mut rows = Vec::new();
    for c in &certs {
        let j = c.j.map_or_else(String::new, |j| j.to_string());
        let value = c.value.map_or_else(String::new, |v| format!("{v:.16e}"));
        rows.push(format!(
            "{},{j},{value},{},{},{},{},{},{}",
            to_value(&c.quantity).as_str().unwrap_or(""),
            to_value(&c.formula).as_str().unwrap_or(""),
            to_value(&c.exactness).as_str().unwrap_or(""),
            c.licensed,
            flags(c, ConditionName::TwoSidedRatio),
            flags(c, ConditionName::NonincreasingBirthRates),
            flags(c, ConditionName::LowerTailRatio),
        ));
    }
    let pair = bounds::LambdaPair::of(&m);
    Ok(Table {
        header: "quantity,j,value,formula,exactness,licensed,two_sided_ratio,nonincreasing_birth_rates,lower_tail_ratio",
        rows,
        json: certs.iter().map(to_value).collect(),
        extra: json!({
            "measure": m.kind().label(),
            "conditions": to_value(&bounds::check_conditions(&m)),
            "lambda_pair": to_value(&pair),
        }),
    })
}

fn run_compare(cfg: &RunConfig) -> Result<Table, CliError> {
    let rule = cfg.tail_rule()?;
    let m1 = parse_measure(require(&cfg.measure, "measure")?, rule)?;
    let m2 = parse_measure(require(&cfg.measure2, "measure2")?, rule)?;
    let report = compare::compare(&m1, &m2, parse_g_norm(cfg.g_norm.as_deref())?)?;
    Ok(Table {
        header: compare::ComparisonReport::CSV_HEADER,
        rows: vec![report.csv_row()],
        json: vec![to_value(&report)],
        extra: json!({}),
    })
}

fn run_lattice(cfg: &RunConfig) -> Result<Table, CliError> {
    let name = require(&cfg.model, "model")?;
    let model = InteractionModel::by_name(name).map_err(|e| parse_err("--model", e))?;
    let ns = lattice::parse_n_range(require(&cfg.n, "n")?).map_err(|e| parse_err("--n", e))?;
    let z = cfg.lambda.unwrap_or(1.0);
    let z_n = cfg.z_n.unwrap_or(z);
    let rule = cfg.tail_rule()?;
    let reports = ns
        .into_iter()
        .map(|n| lattice::theorem_4_2_bound(&model, n, z_n, z, rule, GNormSource::Exact))
        .collect::<Result<Vec<LatticeBoundReport>, _>>()?;
    Ok(Table {
        header: LatticeBoundReport::CSV_HEADER,
        rows: reports.iter().map(LatticeBoundReport::csv_row).collect(),
        json: reports.iter().map(to_value).collect(),
        extra: json!({"model": csv_field(name), "z": z, "z_n": z_n}),
    })
}

fn run_poisson_sum(cfg: &RunConfig) -> Result<Table, CliError> {
    let spec = match (&cfg.p, &cfg.spec) {
        (Some(p), None) => CouplingSpec::independent(p)?,
        (None, Some(path)) => CouplingSpec::from_json(&read(path)?)
            .map_err(|e| parse_err(path.display().to_string(), e))?,
        _ => return Err(parse_err("--p/--spec", "give exactly one")),
    };
    let report: PoissonSumReport = lattice::poisson_sum_bounds(&spec)?;
    Ok(Table {
        header: PoissonSumReport::CSV_HEADER,
        rows: vec![report.csv_row()],
        json: vec![to_value(&report)],
        extra: json!({"n": spec.n(), "independent": spec.is_independent()}),
    })
}

/// Execute one configured command.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let mut first_failure = None;
    let (name, table, status) = match cfg.command {
        CommandKind::Solve => ("solve", run_solve(cfg)?, 0),
        CommandKind::Bounds => ("bounds", run_bounds(cfg)?, 0),
        CommandKind::Compare => ("compare", run_compare(cfg)?, 0),
        CommandKind::Lattice => ("lattice", run_lattice(cfg)?, 0),
        CommandKind::PoissonSum => ("poisson-sum", run_poisson_sum(cfg)?, 0),
        CommandKind::Verify => {
            let suite = verify::run_suite(cfg.seed, &VerifyTolerances::default());
            let status = if suite.passed() { 0 } else { 1 };
            let rows = suite
                .outcomes
                .iter()
                .map(|o| {
                    format!(
                        "{},{},{},{}",
                        o.name,
                        o.cases,
                        o.passed,
                        csv_field(o.detail.as_deref().unwrap_or(""))
                    )
                })
                .collect();
            let first = suite.first_failure().map(|o| o.name);
            first_failure = first;
            let table = Table {
                header: "property,cases,passed,detail",
                rows,
                json: suite.outcomes.iter().map(to_value).collect(),
                extra: json!({"passed": suite.passed(), "first_failure": first}),
            };
            ("verify", table, status)
        }
    };
    Ok(RunOutcome {
        report: render(cfg, name, table),
        status,
        first_failure,
    })
}

/// Parse arguments, run, write the report; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = cli.into_config().and_then(|cfg| {
        let out = run(&cfg)?;
        match &cfg.output {
            Some(path) => std::fs::write(path, &out.report).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?,
            None => print!("{}", out.report),
        }
        if let Some(name) = out.first_failure {
            eprintln!("verification failed: {name}");
        }
        Ok(out.status)
    });
    match outcome {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(args: &[&str]) -> RunConfig {
        let mut full = vec!["gibbs-stein"];
        full.extend_from_slice(args);
        Cli::try_parse_from(full).unwrap().into_config().unwrap()
    }

    #[test]
    fn measure_descriptors() {
        let r = TailRule::default();
        let g = parse_measure("geometric:0.5", r).unwrap();
        assert!(matches!(g.kind(), MeasureKind::Geometric { .. }));
        let p = parse_measure("pmf:1,1,0.5", r).unwrap();
        assert_eq!(p.support_max(), 2);
        assert!((p.pmf()[2] - 0.2).abs() < 1e-15);
        assert!(parse_measure("lattice:repelling,4,1", r).is_ok());
        for bad in ["geometric", "poisson:x", "binomial:10", "weird:1", "binomial:2.5,0.5"] {
            let e = parse_measure(bad, r).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{bad}");
        }
    }

    #[test]
    fn geometric_bounds_report_norm_two() {
        let out = run(&cfg(&["bounds", "--measure", "geometric:0.5"])).unwrap();
        assert!(out.report.starts_with("# command=bounds seed=0\n"));
        let row = out
            .report
            .lines()
            .find(|l| l.starts_with("sup_norm_g,,") && l.contains("geometric_sup_norm"))
            .unwrap();
        assert!(row.contains("2.0000000000000000e0"));
    }

    #[test]
    fn lattice_rows() {
        let out = run(&cfg(&["lattice", "--model", "repelling", "--lambda", "1", "--n", "2..6"]))
            .unwrap();
        let lines: Vec<_> = out.report.lines().collect();
        assert_eq!(lines[1], LatticeBoundReport::CSV_HEADER);
        assert_eq!(lines.len(), 7);
        assert!(lines[2].starts_with("2,"));
    }

    #[test]
    fn config_file_overrides_flags() {
        let dir = std::env::temp_dir().join(format!("gibbs-stein-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.json");
        std::fs::write(&path, r#"{"measure": "poisson:2", "seed": 7, "format": "json"}"#).unwrap();
        let c = cfg(&["bounds", "--measure", "poisson:1", "--seed", "3"])
            .apply_config_file(&path)
            .unwrap();
        assert_eq!(c.measure.as_deref(), Some("poisson:2"));
        assert_eq!(c.seed, 7);
        assert_eq!(c.format, Format::Json);
        std::fs::write(&path, r#"{"measure": 3"#).unwrap();
        let e = cfg(&["verify"]).apply_config_file(&path).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("line 1"));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn deterministic_reports() {
        let c = cfg(&["poisson-sum", "--p", "0.1,0.3,0.2", "--format", "json", "--seed", "9"]);
        let a = run(&c).unwrap();
        assert_eq!(a, run(&c).unwrap());
        assert!(a.report.contains("\"seed\": 9"));
    }

    #[test]
    fn parse_errors_exit_two() {
        assert_eq!(main_with_args(["gibbs-stein", "bounds"]), 2);
        assert_eq!(main_with_args(["gibbs-stein", "bounds", "--measure", "poisson:-1"]), 1);
        assert_eq!(main_with_args(["gibbs-stein", "bounds", "--measure", "poisson"]), 2);
    }
}
