//! Command implementations behind the `padic-moments` binary.
//!
//! Every command returns a [`Output`]: a JSON document (also rendered as
//! CSV on request) plus the exit code it implies. Nothing here prints.

use std::fmt;
use std::path::{Path, PathBuf};

use padic_moments::curve::{preset, CurveConfig, EllipticCurve};
use padic_moments::horizontal::{kurihara_search, smallest_primitive_root, tw_scan, PrimeSequence, TwStatus};
use padic_moments::moments::{derivative_congruence_check, unit_criteria};
use padic_moments::pipeline::{arithmetic_run, synthetic_run, RunOutcome};
use padic_moments::real::{MpFloat, Real};
use padic_moments::verify::{run_suite, Suite};
use padic_moments::{Error, ModularSymbols};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Environment variable naming the default symbol cache directory.
pub const CACHE_ENV: &str = "PADIC_MOMENTS_CACHE";

pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const RECONSTRUCTION: i32 = 4;
    pub const IDENTITY: i32 = 5;
    pub const SUITE: i32 = 6;
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError { code: exit::USAGE, message: msg.into() }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError { code: exit::CONFIG, message: msg.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Reconstruction { .. } | Error::FrickeSign(_) => exit::RECONSTRUCTION,
            Error::Config(_)
            | Error::InvalidSequence(_)
            | Error::InvalidCurve(_)
            | Error::NonMinimalModel(_)
            | Error::MissingBadPrime(_)
            | Error::InvalidCharacter(_)
            | Error::InvalidInvariants(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => exit::CONFIG,
            _ => exit::INTERNAL,
        };
        CliError { code, message: e.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(CliError::usage(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub mu: u32,
    pub lambda: u64,
    #[serde(default = "one_u32")]
    pub e: u32,
    /// Number of factors of the synthetic measure.
    pub factors: usize,
}

fn one_u32() -> u32 {
    1
}

fn default_precision() -> u32 {
    30
}

fn default_sign() -> String {
    "+".into()
}

/// Run configuration; every field can be overridden from the command line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Curve JSON path, or a built-in label (`11a1`, `37a1`).
    #[serde(default)]
    pub curve: Option<String>,
    #[serde(default)]
    pub p: Option<u32>,
    #[serde(default)]
    pub primes: Vec<u64>,
    #[serde(default)]
    pub generators: Option<Vec<u64>>,
    #[serde(default)]
    pub r: usize,
    #[serde(default)]
    pub levels: Vec<usize>,
    #[serde(default = "one_u32")]
    pub m: u32,
    #[serde(default = "default_sign")]
    pub sign: String,
    #[serde(default)]
    pub denominator_bound: Option<u64>,
    /// Decimal digits for period integrals.
    #[serde(default = "default_precision")]
    pub precision: u32,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub out: OutputFormat,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub synthetic: Option<SyntheticSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            curve: None,
            p: None,
            primes: Vec::new(),
            generators: None,
            r: 0,
            levels: Vec::new(),
            m: 1,
            sign: default_sign(),
            denominator_bound: None,
            precision: default_precision(),
            cache_dir: None,
            out: OutputFormat::Json,
            seed: 0,
            synthetic: None,
        }
    }
}

/// Command-line values that override the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub curve: Option<String>,
    pub p: Option<u32>,
    pub primes: Option<Vec<u64>>,
    pub generators: Option<Vec<u64>>,
    pub r: Option<usize>,
    pub levels: Option<Vec<usize>>,
    pub m: Option<u32>,
    pub out: Option<OutputFormat>,
    pub cache: Option<PathBuf>,
    pub seed: Option<u64>,
    pub precision: Option<u32>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    /// Config file (if any) with command-line overrides applied.
    pub fn resolve(path: Option<&Path>, o: &Overrides) -> CliResult<Self> {
        let mut c = match path {
            Some(p) => Self::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &o.curve {
            c.curve = Some(v.clone());
        }
        if let Some(v) = o.p {
            c.p = Some(v);
        }
        if let Some(v) = &o.primes {
            c.primes = v.clone();
        }
        if let Some(v) = &o.generators {
            c.generators = Some(v.clone());
        }
        if let Some(v) = o.r {
            c.r = v;
        }
        if let Some(v) = &o.levels {
            c.levels = v.clone();
        }
        if let Some(v) = o.m {
            c.m = v;
        }
        if let Some(v) = o.out {
            c.out = v;
        }
        if let Some(v) = &o.cache {
            c.cache_dir = Some(v.clone());
        }
        if let Some(v) = o.seed {
            c.seed = v;
        }
        if let Some(v) = o.precision {
            c.precision = v;
        }
        Ok(c)
    }

    pub fn prime(&self) -> CliResult<u32> {
        let p = self.p.ok_or_else(|| CliError::config("p is required"))?;
        if p < 2 || !(2..p).take_while(|d| d * d <= p).all(|d| p % d != 0) {
            return Err(CliError::config(format!("p = {p} is not prime")));
        }
        Ok(p)
    }

    fn check_common(&self) -> CliResult<()> {
        if self.sign != "+" {
            return Err(CliError::config("only the + sign is available: every p-power order character is even"));
        }
        if self.m == 0 {
            return Err(CliError::config("m must be at least 1"));
        }
        if !(10..=2000).contains(&self.precision) {
            return Err(CliError::config("precision must be between 10 and 2000 digits"));
        }
        Ok(())
    }

    pub fn curve(&self) -> CliResult<EllipticCurve> {
        let spec = self.curve.as_deref().ok_or_else(|| CliError::config("no curve given"))?;
        let path = Path::new(spec);
        let cfg = if path.exists() {
            CurveConfig::load(path)?
        } else if let Some(c) = preset(spec) {
            c
        } else {
            return Err(CliError::config(format!("curve `{spec}` is neither a file nor a built-in label")));
        };
        Ok(EllipticCurve::new(cfg)?)
    }

    fn symbols(&self, curve: &EllipticCurve) -> CliResult<ModularSymbols> {
        let prec = MpFloat::precision_for_digits(self.precision);
        let bound = self.denominator_bound.unwrap_or_else(|| curve.default_denominator_bound());
        let ms = ModularSymbols::with_bound(curve, prec, bound)?;
        Ok(match &self.cache_dir {
            Some(dir) => ms.with_cache_dir(dir)?,
            None => ms,
        })
    }

    /// The effective configuration, echoed into every report.
    pub fn echo(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// A command result: the document and the exit code it warrants.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub document: Value,
    pub csv: Option<String>,
    pub code: i32,
}

impl Output {
    pub fn render(&self, format: OutputFormat) -> String {
        match (format, &self.csv) {
            (OutputFormat::Csv, Some(csv)) => csv.clone(),
            _ => {
                let mut s = serde_json::to_string_pretty(&self.document).expect("json");
                s.push('\n');
                s
            }
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Share of Taylor–Wiles primes among `ℓ ≡ 1 mod p` up to `bound`.
fn goodness_report(curve: &EllipticCurve, p: u32, bound: u64) -> Value {
    let rows = tw_scan(curve, p as u64, bound);
    let tw = rows.iter().filter(|r| r.status == TwStatus::TaylorWiles).count();
    json!({
        "status": "assumed",
        "scan_bound": bound,
        "candidates": rows.len(),
        "taylor_wiles": tw,
    })
}

pub fn cmd_tw_scan(cfg: &RunConfig, bound: u64, first: usize) -> CliResult<Output> {
    let curve = cfg.curve()?;
    let p = cfg.prime()?;
    let rows = tw_scan(&curve, p as u64, bound);
    let usable: Vec<u64> =
        rows.iter().filter(|r| r.status == TwStatus::TaylorWiles).map(|r| r.ell).take(first).collect();
    let tw = rows.iter().filter(|r| r.status == TwStatus::TaylorWiles).count();
    let fraction = if rows.is_empty() { Value::Null } else { json!(format!("{tw}/{}", rows.len())) };
    let mut csv = String::from("ell,a_ell,status\n");
    for r in &rows {
        let a = r.a_ell.map(|a| a.to_string()).unwrap_or_default();
        let status = serde_json::to_value(r.status).expect("status");
        csv.push_str(&format!("{},{},{}\n", r.ell, a, status.as_str().unwrap_or_default()));
    }
    let document = json!({
        "command": "tw-scan",
        "curve": curve.label(),
        "p": p,
        "bound": bound,
        "rows": rows,
        "taylor_wiles_fraction": fraction,
        "first_usable": usable,
    });
    Ok(Output { document, csv: Some(csv), code: exit::OK })
}

fn outcome_csv(out: &RunOutcome) -> String {
    let mut s = String::from("factors,valuation,predicted_valuation,identity_check,fitted_mu,fitted_lambda,in_asymptotic_regime\n");
    let opt = |v: &Option<padic_moments::scalar::Valuation>| v.as_ref().map(|x| x.to_string()).unwrap_or_default();
    for r in &out.reports {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.factors,
            csv_field(&r.valuation.to_string()),
            csv_field(&opt(&r.predicted_valuation)),
            r.identity_check,
            csv_field(&opt(&r.fitted_mu)),
            csv_field(&opt(&r.fitted_lambda)),
            r.in_asymptotic_regime.map(|b| b.to_string()).unwrap_or_default(),
        ));
    }
    s
}

pub fn cmd_moment_run(cfg: &RunConfig) -> CliResult<Output> {
    cfg.check_common()?;
    if cfg.levels.is_empty() {
        return Err(CliError::usage("no levels given (use --levels)"));
    }
    let p = cfg.prime()?;
    if let Some(s) = &cfg.synthetic {
        let out = synthetic_run(p, cfg.m, s.factors, s.mu, s.lambda, s.e, cfg.seed, &cfg.levels)?;
        let code = if out.identities_hold() { exit::OK } else { exit::IDENTITY };
        let document = json!({
            "command": "moment-run",
            "mode": "synthetic",
            "config": cfg.echo(),
            "reports": out.reports,
            "fit": out.fit,
            "conventions": out.conventions,
        });
        return Ok(Output { csv: Some(outcome_csv(&out)), document, code });
    }
    let curve = cfg.curve()?;
    let seq = PrimeSequence::new(&curve, p, &cfg.primes, cfg.generators.as_deref(), cfg.r)?;
    let symbols = cfg.symbols(&curve)?;
    let (out, nu) = arithmetic_run(&curve, &symbols, &seq, &cfg.levels, cfg.m)?;
    symbols.save_cache()?;
    let mut derivative = Value::Null;
    let mut units = Value::Null;
    let reduced = nu.reduce_uniform(1)?;
    if cfg.m == 1 {
        derivative = serde_json::to_value(derivative_congruence_check(&reduced)?).expect("json");
        units = serde_json::to_value(unit_criteria(&reduced)?).expect("json");
    }
    let code = if out.identities_hold() { exit::OK } else { exit::IDENTITY };
    let mut effective = cfg.echo();
    effective["generators"] = json!(seq.generators());
    effective["denominator_bound"] = json!(symbols.denominator_bound());
    let document = json!({
        "command": "moment-run",
        "mode": "arithmetic",
        "config": effective,
        "sequence": { "primes": seq.primes(), "generators": seq.generators(), "exponents": seq.exponents(), "r": seq.r() },
        "reports": out.reports,
        "fit": out.fit,
        "tower_compatible": out.tower_compatible,
        "derivative_check": derivative,
        "unit_criteria": units,
        "goodness": goodness_report(&curve, p, 1000),
        "conventions": out.conventions,
    });
    Ok(Output { csv: Some(outcome_csv(&out)), document, code })
}

pub fn cmd_verify(cfg: &RunConfig, suite: Suite) -> CliResult<Output> {
    cfg.check_common()?;
    let curve = match cfg.curve {
        Some(_) => cfg.curve()?,
        None => EllipticCurve::new(preset("11a1").expect("built-in"))?,
    };
    let symbols = cfg.symbols(&curve)?;
    let reports = run_suite(suite, cfg.seed, &symbols)?;
    symbols.save_cache()?;
    let passed = reports.iter().all(|r| r.passed());
    let mut csv = String::from("suite,check,passed,detail\n");
    for r in &reports {
        for c in &r.checks {
            csv.push_str(&format!("{},{},{},{}\n", r.suite, csv_field(&c.name), c.passed, csv_field(&c.detail)));
        }
    }
    let document = json!({
        "command": "verify",
        "suite": suite,
        "seed": cfg.seed,
        "curve": curve.label(),
        "passed": passed,
        "reports": reports,
    });
    Ok(Output { document, csv: Some(csv), code: if passed { exit::OK } else { exit::SUITE } })
}

/// Scans for a witness and, with `follow_up`, runs the moment pipeline with
/// the witness first (`r = 1`) and the first Taylor–Wiles prime after it.
pub fn cmd_kurihara_search(cfg: &RunConfig, bound: u64, follow_up: bool) -> CliResult<Output> {
    cfg.check_common()?;
    let curve = cfg.curve()?;
    let p = cfg.prime()?;
    let mut notes = Vec::new();
    if curve.config().rank != Some(1) {
        notes.push("hypotheses unmet: the curve is not flagged as rank 1".to_string());
    }
    if !curve.has_good_ordinary_reduction(p as u64) {
        notes.push(format!("hypotheses unmet: reduction at {p} is not good ordinary"));
    }
    let symbols = cfg.symbols(&curve)?;
    let (witness, seen) = kurihara_search(&symbols, p, bound)?;
    let mut run = Value::Null;
    let mut code = exit::OK;
    if let (Some(w), true) = (&witness, follow_up) {
        let next = tw_scan(&curve, p as u64, 100_000)
            .into_iter()
            .find(|r| r.status == TwStatus::TaylorWiles && r.ell != w.q)
            .ok_or_else(|| CliError::config("no Taylor-Wiles prime found"))?;
        let gens = [w.generator, smallest_primitive_root(next.ell)];
        let seq = PrimeSequence::new(&curve, p, &[w.q, next.ell], Some(&gens), 1)?;
        let (out, _) = arithmetic_run(&curve, &symbols, &seq, &[1, 2], 1)?;
        if !out.identities_hold() {
            code = exit::IDENTITY;
        }
        run = json!({
            "primes": seq.primes(),
            "generators": seq.generators(),
            "r": 1,
            "reports": out.reports,
            "fit": out.fit,
            "tower_compatible": out.tower_compatible,
            "conventions": out.conventions,
        });
    }
    symbols.save_cache()?;
    let mut csv = String::from("q,generator,sum,unit_sum,valuation,holds\n");
    for s in &seen {
        csv.push_str(&format!("{},{},{},{},{},{}\n", s.q, s.generator, s.sum, s.unit_sum, s.valuation, s.holds));
    }
    let document = json!({
        "command": "kurihara-search",
        "curve": curve.label(),
        "p": p,
        "bound": bound,
        "witness": witness,
        "examined": seen,
        "notes": notes,
        "follow_up": run,
    });
    Ok(Output { document, csv: Some(csv), code })
}

/// Effective cache directory: flag, then environment.
pub fn cache_from_env() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).map(PathBuf::from)
}

/// Parses a comma-separated list.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<T>().map_err(|_| CliError::usage(format!("bad list entry `{t}`"))))
        .collect()
}
