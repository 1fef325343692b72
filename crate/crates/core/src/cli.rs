//! Batch front end: JSON run configs in, canonical classes and
//! specializations out.

use std::collections::BTreeSet;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::chain::{Engine, EngineOptions};
use crate::error::{Error, Result};
use crate::higgs::{higgs_alpha, higgs_moduli_class, HiggsProblem};
use crate::motive::{specialize_count, specialize_e, CurveData, MotiveClass};
use crate::num::{fmt_q, parse_q, q, Q};
use crate::oracles;
use crate::parabolic::{generic_datum, ChainType, PointWeights, WeightDatum};
use crate::stacks::{flag_class, pbundle_stack_class};

#[derive(Parser, Debug)]
#[command(name = "parhiggs", version, about = "Motivic classes of parabolic Higgs moduli and chain stacks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Append-only memo cache (JSON lines).
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Record one line per crossed wall.
    #[arg(long, global = true)]
    pub trace_walls: bool,
    /// Point-count specialization at this prime power.
    #[arg(long, global = true)]
    pub q: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Class of the moduli space of stable parabolic Higgs bundles.
    Higgs,
    /// Class of the stack of semistable parabolic chains.
    Chain,
    /// Class of the stack of all parabolic bundles of a given type.
    Stack,
    /// Compare the engine against the independent oracles.
    Verify,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveConfig {
    pub genus: u32,
    #[serde(default)]
    pub marked_points: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_numerator: Option<Vec<i64>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ProblemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointCount {
    pub q: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutputsConfig {
    #[serde(default = "yes")]
    pub canonical: bool,
    #[serde(default)]
    pub e_polynomial: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_count: Option<PointCount>,
}

fn yes() -> bool {
    true
}

impl Default for OutputsConfig {
    fn default() -> Self {
        OutputsConfig { canonical: true, e_polynomial: false, point_count: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub curve: CurveConfig,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_path: Option<String>,
    #[serde(default)]
    pub verify: bool,
}

impl RunConfig {
    pub fn curve_data(&self) -> CurveData {
        CurveData {
            genus: self.curve.genus,
            num_marked: self.curve.marked_points,
            zeta_numerator: match (&self.curve.zeta_numerator, self.curve.genus) {
                (None, 0) => Some(vec![1]),
                (z, _) => z.clone(),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub class: String,
    pub specializations: Value,
    pub diagnostics: Value,
}

/// Exit code for an engine error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Parse(_)
        | Error::InvalidWeights(_)
        | Error::RankMismatch(_)
        | Error::InvalidFlagType(_)
        | Error::MissingZetaData
        | Error::InconsistentZeta { .. } => 2,
        Error::WallHit(_) | Error::BaseWallHit(_) => 3,
        Error::NonGenericWeights(_) => 4,
        Error::NonPolynomialResult(_) => 5,
        _ => 1,
    }
}

fn err_name(e: &Error) -> &'static str {
    match e {
        Error::DivisionOutsideRing(_) => "DivisionOutsideRing",
        Error::NonConvergentEvaluation(_) => "NonConvergentEvaluation",
        Error::MissingZetaData => "MissingZetaData",
        Error::InconsistentZeta { .. } => "InconsistentZeta",
        Error::BudgetExceeded(_) => "BudgetExceeded",
        Error::RankMismatch(_) => "RankMismatch",
        Error::InvalidFlagType(_) => "InvalidFlagType",
        Error::InvalidWeights(_) => "InvalidWeights",
        Error::UnboundedSearch(_) => "UnboundedSearch",
        Error::BaseCaseHypothesisViolated(_) => "BaseCaseHypothesisViolated",
        Error::NonGenericWeights(_) => "NonGenericWeights",
        Error::WallHit(_) => "WallHit",
        Error::BaseWallHit(_) => "BaseWallHit",
        Error::NonPolynomialResult(_) => "NonPolynomialResult",
        Error::NonIntegerDimension => "NonIntegerDimension",
        Error::Parse(_) => "Parse",
        Error::Config(_) => "Config",
        Error::Divergent(_) => "Divergent",
    }
}

/// `"p/q"` or `"p/q:m"` (multiplicity `m`).
fn parse_weight(s: &str) -> Result<(Q, u32)> {
    let (w, m) = match s.split_once(':') {
        Some((w, m)) => (w, m.trim().parse::<u32>().map_err(|_| Error::Config(format!("bad multiplicity in {s:?}")))?),
        None => (s, 1),
    };
    Ok((parse_q(w.trim())?, m))
}

fn parse_point(v: &Value) -> Result<PointWeights> {
    let arr = v.as_array().ok_or_else(|| Error::Config(format!("expected a list of weights, got {v}")))?;
    let mut pairs = Vec::new();
    for x in arr {
        let s = x.as_str().ok_or_else(|| Error::Config(format!("weights are strings \"p/q\", got {x}")))?;
        pairs.push(parse_weight(s)?);
    }
    pairs.sort();
    Ok(PointWeights::new(pairs.iter().map(|p| p.0.clone()).collect(), pairs.iter().map(|p| p.1).collect()))
}

fn parse_datum(v: &Value, k: usize) -> Result<WeightDatum> {
    let arr = v.as_array().ok_or_else(|| Error::Config("weights must be a list over marked points".into()))?;
    if arr.len() != k {
        return Err(Error::InvalidWeights(format!("{} weight lists for {k} marked points", arr.len())));
    }
    Ok(WeightDatum::new(arr.iter().map(parse_point).collect::<Result<_>>()?))
}

fn generate_bound(v: &Value) -> Option<Result<u32>> {
    let g = v.get("generate")?;
    Some(
        g.get("bound")
            .and_then(Value::as_u64)
            .map(|b| b as u32)
            .ok_or_else(|| Error::Config("generate needs an integer bound".into())),
    )
}

fn datum_json(d: &WeightDatum) -> Value {
    Value::Array(
        d.points
            .iter()
            .map(|p| {
                Value::Array(
                    p.weights
                        .iter()
                        .zip(&p.mults)
                        .map(|(w, m)| Value::String(if *m == 1 { fmt_q(w) } else { format!("{}:{m}", fmt_q(w)) }))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Splits a datum of rank `sum(ranks)` into consecutive blocks of weights.
fn split_consecutive(d: &WeightDatum, ranks: &[u32]) -> Vec<WeightDatum> {
    let mut out = vec![Vec::new(); ranks.len()];
    for p in &d.points {
        let ws = p.expanded();
        let mut at = 0;
        for (i, r) in ranks.iter().enumerate() {
            let slice = &ws[at..at + *r as usize];
            at += *r as usize;
            let mut pw: Vec<(Q, u32)> = Vec::new();
            for w in slice {
                match pw.last_mut() {
                    Some(last) if last.0 == *w => last.1 += 1,
                    _ => pw.push((w.clone(), 1)),
                }
            }
            out[i].push(PointWeights::new(pw.iter().map(|x| x.0.clone()).collect(), pw.iter().map(|x| x.1).collect()));
        }
    }
    out.into_iter().map(WeightDatum::new).collect()
}

fn kind_of(cmd: Command) -> &'static str {
    match cmd {
        Command::Higgs => "higgs",
        Command::Chain => "chain",
        Command::Stack | Command::Verify => "stack-class",
    }
}

fn cache_prefix(curve: &CurveData) -> String {
    format!("g{}k{}|", curve.genus, curve.num_marked)
}

/// Loads cache records for this curve, skipping corrupt lines with a warning.
pub fn load_cache(path: &Path, engine: &Engine) -> usize {
    let Ok(text) = fs::read_to_string(path) else { return 0 };
    let prefix = cache_prefix(&engine.curve);
    let mut n = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: Option<(String, MotiveClass)> = serde_json::from_str::<Value>(line).ok().and_then(|v| {
            let key = v.get("key")?.as_str()?.to_string();
            let class = MotiveClass::parse(v.get("class")?.as_str()?).ok()?;
            Some((key, class))
        });
        match rec {
            Some((key, class)) => {
                if let Some(k) = key.strip_prefix(&prefix) {
                    engine.preload(k.to_string(), class);
                    n += 1;
                }
            }
            None => eprintln!("warning: skipping corrupt cache record at {}:{}", path.display(), i + 1),
        }
    }
    n
}

/// Appends memo entries not already on disk.
pub fn store_cache(path: &Path, engine: &Engine) -> std::io::Result<usize> {
    let prefix = cache_prefix(&engine.curve);
    let existing: BTreeSet<String> = fs::read_to_string(path)
        .unwrap_or_default()
        .lines()
        .filter_map(|l| serde_json::from_str::<Value>(l).ok())
        .filter_map(|v| v.get("key").and_then(Value::as_str).map(str::to_string))
        .collect();
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    let mut n = 0;
    for (k, c) in engine.memo_entries() {
        let key = format!("{prefix}{k}");
        if !existing.contains(&key) {
            writeln!(f, "{}", json!({"key": key, "class": c.canonical()}))?;
            n += 1;
        }
    }
    Ok(n)
}

/// Runs one configuration. `cmd` fixes the problem kind.
pub fn run(mut config: RunConfig, cmd: Command, cli_q: Option<u64>, trace_walls: bool, cache: Option<&Path>) -> Result<Report> {
    let kind = kind_of(cmd);
    if let Some(k) = &config.problem.kind {
        if cmd != Command::Verify && k != kind {
            return Err(Error::Config(format!("config kind {k:?} does not match subcommand {kind:?}")));
        }
    }
    config.problem.kind = Some(kind.to_string());
    if let Some(qv) = cli_q {
        config.outputs.point_count = Some(PointCount { q: qv });
    }
    let curve = config.curve_data();
    let k = curve.num_marked as usize;
    let engine = Engine::new(curve.clone(), EngineOptions { trace_walls, ..EngineOptions::default() });
    let cache_path: Option<PathBuf> = cache.map(Path::to_path_buf).or_else(|| config.cache_path.as_ref().map(PathBuf::from));
    let preloaded = cache_path.as_deref().map(|p| load_cache(p, &engine)).unwrap_or(0);
    let mut diag = serde_json::Map::new();
    let class = match cmd {
        Command::Higgs => {
            let n = config.problem.rank.ok_or_else(|| Error::Config("higgs problem needs rank".into()))?;
            let d = config.problem.degree.ok_or_else(|| Error::Config("higgs problem needs degree".into()))?;
            let datum = match config.problem.weights.as_ref() {
                None => return Err(Error::Config("higgs problem needs weights".into())),
                Some(v) => match generate_bound(v) {
                    Some(b) => generic_datum(n, k, b?),
                    None => parse_datum(v, k)?,
                },
            };
            datum.validate(n)?;
            config.problem.weights = Some(datum_json(&datum));
            let p = HiggsProblem { curve: curve.clone(), n, d, datum };
            let r = higgs_moduli_class(&p, &engine)?;
            diag.insert("half_dimension".into(), json!(r.half_dimension));
            diag.insert("dimension".into(), json!(2 * r.half_dimension));
            diag.insert("fixed_types".into(), json!(r.summands.len()));
            diag.insert("stack".into(), json!(false));
            r.class
        }
        Command::Chain => {
            let ranks = config.problem.ranks.clone().ok_or_else(|| Error::Config("chain problem needs ranks".into()))?;
            let degrees =
                config.problem.degrees.clone().ok_or_else(|| Error::Config("chain problem needs degrees".into()))?;
            if ranks.len() != degrees.len() {
                return Err(Error::RankMismatch(format!("{} ranks, {} degrees", ranks.len(), degrees.len())));
            }
            let data: Vec<WeightDatum> = match config.problem.weights.as_ref() {
                None => vec![WeightDatum::empty(k); ranks.len()],
                Some(v) => match generate_bound(v) {
                    Some(b) => split_consecutive(&generic_datum(ranks.iter().sum(), k, b?), &ranks),
                    None => {
                        let arr = v.as_array().ok_or_else(|| Error::Config("chain weights: list per component".into()))?;
                        if arr.len() != ranks.len() {
                            return Err(Error::RankMismatch(format!("{} weight data for {} components", arr.len(), ranks.len())));
                        }
                        arr.iter().map(|x| parse_datum(x, k)).collect::<Result<_>>()?
                    }
                },
            };
            config.problem.weights = Some(Value::Array(data.iter().map(datum_json).collect()));
            let alpha: Vec<Q> = match &config.problem.alpha {
                Some(a) => a.iter().map(|s| parse_q(s)).collect::<Result<_>>()?,
                None => higgs_alpha(ranks.len() - 1, curve.genus),
            };
            config.problem.alpha = Some(alpha.iter().map(fmt_q).collect());
            let t = ChainType::new(ranks, degrees, data);
            diag.insert("stack".into(), json!(true));
            engine.chain_class(&t, &alpha)?
        }
        Command::Stack => {
            let n = config.problem.rank.ok_or_else(|| Error::Config("stack problem needs rank".into()))?;
            let d = config.problem.degree.unwrap_or(0);
            let datum = match config.problem.weights.as_ref() {
                None => WeightDatum::new(vec![PointWeights::trivial(q(0), n); k]),
                Some(v) => match generate_bound(v) {
                    Some(b) => generic_datum(n, k, b?),
                    None => parse_datum(v, k)?,
                },
            };
            config.problem.weights = Some(datum_json(&datum));
            diag.insert("stack".into(), json!(true));
            pbundle_stack_class(n, d, &datum, &curve)?
        }
        Command::Verify => {
            let checks = verify_checks(&curve, cli_q.or(config.outputs.point_count.as_ref().map(|p| p.q)))?;
            let all = checks.iter().all(|c| c.1);
            diag.insert(
                "verify".into(),
                Value::Array(checks.iter().map(|(n, ok)| json!({"check": n, "pass": ok})).collect()),
            );
            diag.insert("verify_passed".into(), json!(all));
            if all {
                MotiveClass::one()
            } else {
                MotiveClass::zero()
            }
        }
    };
    let mut specs = serde_json::Map::new();
    if config.outputs.e_polynomial && cmd != Command::Verify {
        specs.insert("e_polynomial".into(), json!(specialize_e(&class, curve.genus).to_string()));
    }
    if let (Some(pc), true) = (&config.outputs.point_count, cmd != Command::Verify) {
        let v = specialize_count(&class, &curve, pc.q)?;
        specs.insert("point_count".into(), json!({"q": pc.q, "value": fmt_q(&v)}));
    }
    let stats = engine.stats();
    diag.insert("walls".into(), json!(stats.walls));
    diag.insert("rays".into(), json!(stats.rays));
    diag.insert("strata".into(), json!(stats.strata));
    diag.insert("evaluations".into(), json!(stats.evaluations));
    diag.insert("memo_hits".into(), json!(stats.memo_hits));
    diag.insert("memo_size".into(), json!(engine.memo_entries().len()));
    diag.insert("cache_loaded".into(), json!(preloaded));
    if trace_walls {
        diag.insert("wall_trace".into(), json!(engine.take_trace()));
    }
    if let Some(p) = cache_path.as_deref() {
        let n = store_cache(p, &engine).map_err(|e| Error::Config(format!("cannot write cache {}: {e}", p.display())))?;
        diag.insert("cache_written".into(), json!(n));
    }
    Ok(Report { config, class: class.canonical(), specializations: Value::Object(specs), diagnostics: Value::Object(diag) })
}

/// Oracle comparisons for one curve.
pub fn verify_checks(curve: &CurveData, qv: Option<u64>) -> Result<Vec<(String, bool)>> {
    let mut out = Vec::new();
    let (g, k) = (curve.genus, curve.num_marked);
    let c0 = CurveData::new(g, k);
    let engine = Engine::new(c0.clone(), EngineOptions::default());
    for d in [-1, 0, 1] {
        let p = HiggsProblem { curve: c0.clone(), n: 1, d, datum: generic_datum(1, k as usize, 1) };
        let got = higgs_moduli_class(&p, &engine)?.class;
        out.push((format!("rank-1 Higgs d={d}"), got == oracles::rank1_higgs_oracle(g, k, d)));
    }
    for qq in [2u64, 3] {
        let mut ok = true;
        for n in 1..=4u32 {
            for comp in crate::chain::int_compositions(n) {
                let e = specialize_e(&flag_class(n, &comp)?, 0).eval(qq as i64, 1);
                let want = oracles::gaussian_flag_count(n, comp.len(), &comp, qq);
                ok &= e == Some(Q::from_integer(want));
            }
        }
        out.push((format!("flag counts q={qq}"), ok));
    }
    if k >= 1 {
        let datum = generic_datum(2, k as usize, 2);
        let w0: Vec<Q> = datum.points.iter().map(|p| p.weights[1].clone()).collect();
        let w1: Vec<Q> = datum.points.iter().map(|p| p.weights[0].clone()).collect();
        let data = split_consecutive(&datum, &[1, 1]);
        let data = vec![data[1].clone(), data[0].clone()];
        let alpha = higgs_alpha(1, g);
        let mut ok = true;
        for d0 in -2..=2 {
            for d1 in -2..=2 {
                let t = ChainType::new(vec![1, 1], vec![d0, d1], data.clone());
                let want = oracles::rank11_chain_oracle(g, k, d0, d1, &w0, &w1, (alpha[0].clone(), alpha[1].clone()));
                ok &= engine.chain_class(&t, &alpha)? == want;
            }
        }
        out.push(("rank-(1,1) chains".into(), ok));
    }
    if let (Some(qq), Some(_)) = (qv, &curve.zeta_numerator) {
        let plain = CurveData { num_marked: 0, ..curve.clone() };
        let e2 = Engine::new(plain.clone(), EngineOptions::default());
        let c = e2.chain_class(&ChainType::plain(vec![2], vec![1]), &[q(0)])?;
        let got = specialize_count(&c, &plain, qq)?;
        let want = oracles::bun2_hn_recursion_oracle(g, 1, qq, plain.zeta_numerator.as_ref().unwrap(), 4);
        out.push((format!("rank-2 bundles q={qq}"), got == want));
    }
    Ok(out)
}

pub fn render_text(r: &Report) -> String {
    let mut s = format!("class: {}\n", r.class);
    if let Some(e) = r.specializations.get("e_polynomial").and_then(Value::as_str) {
        s += &format!("e-polynomial: {e}\n");
    }
    if let Some(p) = r.specializations.get("point_count") {
        s += &format!("point count (q={}): {}\n", p["q"], p["value"].as_str().unwrap_or(""));
    }
    let d = &r.diagnostics;
    if let Some(n) = d.get("half_dimension") {
        s += &format!("half dimension: {n}, dimension: {}\n", d["dimension"]);
    }
    if let Some(v) = d.get("verify").and_then(Value::as_array) {
        for c in v {
            s += &format!("{}: {}\n", c["check"].as_str().unwrap_or(""), if c["pass"] == json!(true) { "pass" } else { "FAIL" });
        }
    }
    s += &format!(
        "walls: {}, strata: {}, evaluations: {}, memo hits: {}\n",
        d["walls"], d["strata"], d["evaluations"], d["memo_hits"]
    );
    if let Some(t) = d.get("wall_trace").and_then(Value::as_array) {
        for line in t {
            s += &format!("wall {}\n", line.as_str().unwrap_or(""));
        }
    }
    s
}

pub fn render_json(r: &Report) -> String {
    serde_json::to_string_pretty(r).expect("report serializes") + "\n"
}

fn error_json(e: &Error) -> String {
    serde_json::to_string_pretty(&json!({"error": {"kind": err_name(e), "code": exit_code(e), "message": e.to_string()}}))
        .expect("error serializes")
        + "\n"
}

/// Parses arguments, runs, writes output; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let config: RunConfig = match &cli.config {
        Some(p) => match fs::read_to_string(p) {
            Ok(text) => match serde_json::from_str(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: invalid config {}: {e}", p.display());
                    return 2;
                }
            },
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", p.display());
                return 2;
            }
        },
        None if cli.command == Command::Verify => RunConfig {
            curve: CurveConfig { genus: 2, marked_points: 1, zeta_numerator: None },
            problem: ProblemConfig::default(),
            outputs: OutputsConfig::default(),
            cache_path: None,
            verify: true,
        },
        None => {
            eprintln!("error: --config is required");
            return 2;
        }
    };
    let result = run(config, cli.command, cli.q, cli.trace_walls, cli.cache.as_deref());
    let (text, code) = match &result {
        Ok(r) => {
            let body = match cli.format {
                Format::Text => render_text(r),
                Format::Json => render_json(r),
            };
            let failed = r.diagnostics.get("verify_passed") == Some(&json!(false));
            (body, if failed { 1 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            match cli.format {
                Format::Json => (error_json(e), exit_code(e)),
                Format::Text => (String::new(), exit_code(e)),
            }
        }
    };
    if !text.is_empty() {
        match &cli.out {
            Some(p) => {
                if let Err(e) = fs::write(p, &text) {
                    eprintln!("error: cannot write {}: {e}", p.display());
                    return 1;
                }
            }
            None => print!("{text}"),
        }
    }
    code
}
