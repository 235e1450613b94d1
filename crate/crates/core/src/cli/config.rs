use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::base_dynamics::{Sft, SymbolicPoint, Word, DEFAULT_BUDGET, MAX_TEXT_ALPHABET};
use crate::cocycle::{linalg, Matrix, MatrixGenerator, MAX_DIM};
use crate::lyapunov::ErgodicMeasure;

use super::{CliError, Command};

const TOP_KEYS: &[&str] = &["sft", "generator", "measure", "params", "output"];
const SFT_KEYS: &[&str] = &["alphabet", "transitions", "metric_base"];
const GENERATOR_KEYS: &[&str] = &["dim", "radius", "alpha", "table", "builtin"];
const MEASURE_KEYS: &[&str] = &["kind", "p", "transition"];
const OUTPUT_KEYS: &[&str] = &["dir"];
const PARAM_KEYS: &[&str] = &[
    "steps",
    "seed",
    "max_period",
    "rho",
    "tau",
    "eps",
    "c",
    "depth",
    "n_max",
    "growth_n_max",
    "orbit_budget",
    "samples",
    "tol",
    "window",
    "point",
    "n",
    "centered",
    "table",
    "gauge",
    "exterior",
    "budget",
    "sweep",
];
const SWEEP_KEYS: &[&str] = &["rho", "tau", "eps", "steps"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SftConfig {
    pub alphabet: usize,
    pub transitions: Vec<Vec<u8>>,
    pub metric_base: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Builtin {
    Identity,
    Constant { matrix: Vec<f64> },
    Diagonal { diagonals: Vec<Vec<f64>> },
    Rotation {
        angles: Vec<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        scales: Option<Vec<f64>>,
    },
    /// `A(x) = P(f(x)) P(x)^{-1}`; the keys of `p_table` have length `2 (radius - 1) + 1`.
    Coboundary { p_table: BTreeMap<Word, Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorSource {
    Table(BTreeMap<Word, Vec<f64>>),
    Builtin(Builtin),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorConfig {
    pub dim: usize,
    pub radius: usize,
    pub alpha: f64,
    #[serde(flatten)]
    pub source: GeneratorSource,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureConfig {
    Bernoulli { p: Vec<f64> },
    Uniform,
    Markov { transition: Vec<Vec<f64>> },
    Parry,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Sweep {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<usize>>,
}

/// Command parameters with defaults filled in; optional ones stay `None` when absent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Params {
    pub steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub max_period: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    pub n_max: usize,
    pub growth_n_max: usize,
    pub orbit_budget: usize,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<Word>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<SymbolicPoint>,
    pub n: usize,
    pub centered: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauge: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exterior: Option<usize>,
    pub budget: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            steps: 100_000,
            seed: None,
            max_period: 8,
            rho: None,
            tau: None,
            eps: None,
            c: 2.0,
            depth: None,
            n_max: 16,
            growth_n_max: 16,
            orbit_budget: 1 << 20,
            samples: 100,
            tol: None,
            window: None,
            point: None,
            n: 10,
            centered: true,
            table: None,
            gauge: None,
            exterior: None,
            budget: DEFAULT_BUDGET,
            sweep: None,
        }
    }
}

/// A validated experiment. Serializing it gives the resolved configuration embedded in
/// every result document; the output directory is left out so results do not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub sft: SftConfig,
    pub generator: GeneratorConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureConfig>,
    pub params: Params,
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
    /// Directory relative paths in `params` are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Reads and validates a configuration file for `command`, after applying `overrides`.
pub fn parse_config(path: &Path, command: Command, overrides: &[(String, Value)]) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| CliError::Schema(vec![format!("invalid JSON: {e}")]))?;
    apply_overrides(&mut value, overrides)?;
    let mut cfg = from_value(&value, command, std::env::var("COCYCLELAB_BUDGET").ok().as_deref())?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(cfg)
}

/// Splits `--key value` pairs. Bare keys address `params`; dotted keys address any section.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, Value)>, CliError> {
    let mut out = Vec::new();
    let mut problems = Vec::new();
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let Some(key) = flag.strip_prefix("--").filter(|k| !k.is_empty()) else {
            problems.push(format!("override {flag:?} must look like --key value"));
            continue;
        };
        let (key, raw) = match key.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => match it.next() {
                Some(v) => (key.to_string(), v.clone()),
                None => {
                    problems.push(format!("override --{key} has no value"));
                    continue;
                }
            },
        };
        let value = serde_json::from_str(&raw).unwrap_or(Value::String(raw));
        let key = if key.contains('.') { key } else { format!("params.{key}") };
        out.push((key, value));
    }
    if problems.is_empty() {
        Ok(out)
    } else {
        Err(CliError::Schema(problems))
    }
}

pub fn apply_overrides(value: &mut Value, overrides: &[(String, Value)]) -> Result<(), CliError> {
    let mut problems = Vec::new();
    for (key, v) in overrides {
        let mut cur = &mut *value;
        let parts: Vec<&str> = key.split('.').collect();
        let mut ok = true;
        for part in &parts[..parts.len() - 1] {
            let Value::Object(map) = cur else {
                ok = false;
                break;
            };
            cur = map.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
        }
        match cur {
            Value::Object(map) if ok => {
                map.insert(parts[parts.len() - 1].to_string(), v.clone());
            }
            _ => problems.push(format!("override {key}: parent is not an object")),
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Schema(problems))
    }
}

/// Validates a configuration value, reporting every problem found.
pub fn from_value(value: &Value, command: Command, env_budget: Option<&str>) -> Result<ExperimentConfig, CliError> {
    let mut v = Checker::default();
    let top = v.object(value, "config", TOP_KEYS);
    let section = |name: &str| top.and_then(|m| m.get(name));

    let sft_cfg = match section("sft") {
        Some(s) => v.sft(s),
        None => {
            v.err("sft", "section required");
            None
        }
    };
    let sft = sft_cfg.as_ref().and_then(|c| match Sft::new(
        c.transitions.iter().map(|r| r.iter().map(|&b| b == 1).collect()).collect(),
        c.metric_base,
    ) {
        Ok(s) => Some(s),
        Err(e) => {
            v.err("sft", e);
            None
        }
    });

    let gen_cfg = match section("generator") {
        Some(g) => v.generator(g, sft_cfg.as_ref().map(|c| c.alphabet)),
        None => {
            v.err("generator", "section required");
            None
        }
    };
    let measure = section("measure").and_then(|m| v.measure(m, sft_cfg.as_ref().map(|c| c.alphabet)));
    let mut params = match section("params") {
        Some(p) => v.params(p),
        None => Some(Params::default()),
    };
    let output_dir = section("output")
        .and_then(|o| v.object(o, "output", OUTPUT_KEYS))
        .and_then(|o| v.string(o, "dir", "output"))
        .map(PathBuf::from);

    if let Some(p) = params.as_mut() {
        if !v.seen_budget {
            match env_budget.map(str::parse::<u64>) {
                Some(Ok(b)) if b > 0 => p.budget = b,
                Some(_) => v.err("COCYCLELAB_BUDGET", "must be a positive integer"),
                None => {}
            }
        }
        v.command_requirements(command, p, measure.is_some());
    }

    if let (Some(sft), Some(g), Some(p)) = (&sft, &gen_cfg, &params) {
        if let Err(e) = build_generator(sft.clone().with_budget(p.budget), g) {
            v.err("generator", e);
        }
        if let Some(m) = &measure {
            if let Err(e) = build_measure(sft, m) {
                v.err("measure", e);
            }
        }
    }

    if !v.errors.is_empty() {
        return Err(CliError::Schema(v.errors));
    }
    Ok(ExperimentConfig {
        sft: sft_cfg.expect("checked"),
        generator: gen_cfg.expect("checked"),
        measure,
        params: params.expect("checked"),
        output_dir,
        base_dir: PathBuf::new(),
    })
}

impl ExperimentConfig {
    pub fn sft(&self) -> Result<Sft, CliError> {
        let rows = self
            .sft
            .transitions
            .iter()
            .map(|r| r.iter().map(|&b| b == 1).collect())
            .collect();
        Sft::new(rows, self.sft.metric_base)
            .map(|s| s.with_budget(self.params.budget))
            .map_err(|e| CliError::Schema(vec![format!("sft: {e}")]))
    }

    pub fn generator(&self) -> Result<MatrixGenerator, CliError> {
        build_generator(self.sft()?, &self.generator).map_err(|e| CliError::Schema(vec![format!("generator: {e}")]))
    }

    pub fn measure(&self) -> Result<Option<ErgodicMeasure>, CliError> {
        let sft = self.sft()?;
        self.measure
            .as_ref()
            .map(|m| build_measure(&sft, m).map_err(|e| CliError::Schema(vec![format!("measure: {e}")])))
            .transpose()
    }

    /// `params.table` relative to the configuration file.
    pub fn table_path(&self) -> Option<PathBuf> {
        self.params.table.as_ref().map(|t| {
            let p = PathBuf::from(t);
            if p.is_absolute() {
                p
            } else {
                self.base_dir.join(p)
            }
        })
    }
}

fn matrix(dim: usize, v: &[f64]) -> Result<Matrix, String> {
    linalg::from_row_major(dim, v).ok_or_else(|| format!("expected {} entries, found {}", dim * dim, v.len()))
}

fn table_entries(dim: usize, t: &BTreeMap<Word, Vec<f64>>) -> Result<Vec<(Word, Matrix)>, String> {
    t.iter()
        .map(|(w, v)| matrix(dim, v).map(|m| (w.clone(), m)).map_err(|e| format!("entry {w}: {e}")))
        .collect()
}

pub(crate) fn build_generator(sft: Sft, g: &GeneratorConfig) -> Result<MatrixGenerator, String> {
    let d = g.dim;
    let built = match &g.source {
        GeneratorSource::Table(t) => MatrixGenerator::new(sft, d, g.radius, g.alpha, table_entries(d, t)?),
        GeneratorSource::Builtin(b) => {
            let simple = |gen: Result<MatrixGenerator, _>| gen.and_then(|x: MatrixGenerator| x.with_alpha(g.alpha));
            match b {
                Builtin::Identity => simple(MatrixGenerator::identity(sft, d)),
                Builtin::Constant { matrix: m } => simple(MatrixGenerator::constant(sft, matrix(d, m)?)),
                Builtin::Diagonal { diagonals } => simple(MatrixGenerator::diagonal_by_symbol(sft, diagonals)),
                Builtin::Rotation { angles, scales } => {
                    simple(MatrixGenerator::rotation_by_symbol(sft, angles, scales.as_deref()))
                }
                Builtin::Coboundary { p_table } => {
                    MatrixGenerator::new(sft, d, g.radius - 1, g.alpha, table_entries(d, p_table)?)
                        .and_then(|p| MatrixGenerator::coboundary(&p))
                }
            }
        }
    };
    built.map_err(|e| e.to_string())
}

pub(crate) fn build_measure(sft: &Sft, m: &MeasureConfig) -> Result<ErgodicMeasure, String> {
    match m {
        MeasureConfig::Bernoulli { p } => ErgodicMeasure::bernoulli(sft, p.clone()),
        MeasureConfig::Uniform => ErgodicMeasure::uniform_bernoulli(sft),
        MeasureConfig::Markov { transition } => ErgodicMeasure::markov(sft, transition.clone()),
        MeasureConfig::Parry => ErgodicMeasure::parry(sft),
    }
    .map_err(|e| e.to_string())
}

#[derive(Default)]
struct Checker {
    errors: Vec<String>,
    seen_budget: bool,
}

impl Checker {
    fn err(&mut self, path: &str, msg: impl Display) {
        self.errors.push(format!("{path}: {msg}"));
    }

    fn object<'a>(&mut self, v: &'a Value, path: &str, allowed: &[&str]) -> Option<&'a Map<String, Value>> {
        let Value::Object(m) = v else {
            self.err(path, "expected an object");
            return None;
        };
        for k in m.keys() {
            if !allowed.contains(&k.as_str()) {
                self.err(path, format!("unknown key {k:?}"));
            }
        }
        Some(m)
    }

    fn f64_value(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.err(path, "expected a finite number");
                None
            }
        }
    }

    fn f64_field(&mut self, m: &Map<String, Value>, key: &str, section: &str) -> Option<f64> {
        m.get(key).and_then(|v| self.f64_value(v, &format!("{section}.{key}")))
    }

    fn u64_field(&mut self, m: &Map<String, Value>, key: &str, section: &str) -> Option<u64> {
        let v = m.get(key)?;
        let got = v.as_u64();
        if got.is_none() {
            self.err(&format!("{section}.{key}"), "expected a nonnegative integer");
        }
        got
    }

    fn usize_field(&mut self, m: &Map<String, Value>, key: &str, section: &str) -> Option<usize> {
        let v = self.u64_field(m, key, section)?;
        match usize::try_from(v) {
            Ok(x) => Some(x),
            Err(_) => {
                self.err(&format!("{section}.{key}"), "too large");
                None
            }
        }
    }

    fn bool_field(&mut self, m: &Map<String, Value>, key: &str, section: &str) -> Option<bool> {
        let v = m.get(key)?;
        if v.as_bool().is_none() {
            self.err(&format!("{section}.{key}"), "expected true or false");
        }
        v.as_bool()
    }

    /// Strings; bare integers are accepted too since `--key 10` arrives as a number.
    fn string(&mut self, m: &Map<String, Value>, key: &str, section: &str) -> Option<String> {
        match m.get(key)? {
            Value::String(s) => Some(s.clone()),
            Value::Number(n) if n.is_u64() => Some(n.to_string()),
            _ => {
                self.err(&format!("{section}.{key}"), "expected a string");
                None
            }
        }
    }

    fn f64_array(&mut self, v: &Value, path: &str) -> Option<Vec<f64>> {
        let Some(items) = v.as_array() else {
            self.err(path, "expected an array of numbers");
            return None;
        };
        let before = self.errors.len();
        let out: Vec<f64> = items
            .iter()
            .enumerate()
            .filter_map(|(i, x)| self.f64_value(x, &format!("{path}[{i}]")))
            .collect();
        (self.errors.len() == before).then_some(out)
    }

    fn f64_rows(&mut self, v: &Value, path: &str, rows: Option<usize>, cols: Option<usize>) -> Option<Vec<Vec<f64>>> {
        let Some(items) = v.as_array() else {
            self.err(path, "expected an array of arrays");
            return None;
        };
        let before = self.errors.len();
        if let Some(r) = rows.filter(|&r| r != items.len()) {
            self.err(path, format!("expected {r} rows, found {}", items.len()));
        }
        let mut out = Vec::new();
        for (i, row) in items.iter().enumerate() {
            let rp = format!("{path}[{i}]");
            if let Some(row) = self.f64_array(row, &rp) {
                if let Some(c) = cols.filter(|&c| c != row.len()) {
                    self.err(&rp, format!("expected {c} entries, found {}", row.len()));
                }
                out.push(row);
            }
        }
        (self.errors.len() == before).then_some(out)
    }

    fn word_table(&mut self, v: &Value, path: &str, key_len: usize, dim: Option<usize>) -> Option<BTreeMap<Word, Vec<f64>>> {
        let Value::Object(m) = v else {
            self.err(path, "expected an object mapping words to row-major matrices");
            return None;
        };
        let before = self.errors.len();
        let mut out = BTreeMap::new();
        for (k, x) in m {
            let kp = format!("{path}.{k}");
            match k.parse::<Word>() {
                Ok(w) if w.len() == key_len => {
                    if let Some(vals) = self.f64_array(x, &kp) {
                        if let Some(d) = dim.filter(|&d| d.checked_mul(d) != Some(vals.len())) {
                            self.err(&kp, format!("expected {d}x{d} entries, found {}", vals.len()));
                        }
                        out.insert(w, vals);
                    }
                }
                Ok(w) => self.err(&kp, format!("key has length {}, expected {key_len}", w.len())),
                Err(e) => self.err(&kp, e),
            }
        }
        (self.errors.len() == before).then_some(out)
    }

    fn sft(&mut self, v: &Value) -> Option<SftConfig> {
        let m = self.object(v, "sft", SFT_KEYS)?;
        let before = self.errors.len();
        let alphabet = self.usize_field(m, "alphabet", "sft");
        match alphabet {
            None if !m.contains_key("alphabet") => self.err("sft.alphabet", "required"),
            Some(k) if k == 0 || k > MAX_TEXT_ALPHABET => self.err("sft.alphabet", format!("must lie in 1..={MAX_TEXT_ALPHABET}")),
            _ => {}
        }
        let k = alphabet.filter(|k| (1..=MAX_TEXT_ALPHABET).contains(k)).unwrap_or(0);
        let transitions = match m.get("transitions") {
            None => vec![vec![1u8; k]; k],
            Some(t) => {
                let rows = t.as_array().cloned().unwrap_or_default();
                if !t.is_array() {
                    self.err("sft.transitions", "expected an array of 0/1 rows");
                } else if rows.len() != k {
                    self.err("sft.transitions", format!("expected {k} rows, found {}", rows.len()));
                }
                let mut out = Vec::new();
                for (i, row) in rows.iter().enumerate() {
                    let rp = format!("sft.transitions[{i}]");
                    let Some(cells) = row.as_array() else {
                        self.err(&rp, "expected an array of 0/1 entries");
                        continue;
                    };
                    if cells.len() != k {
                        self.err(&rp, format!("expected {k} entries, found {}", cells.len()));
                    }
                    let mut r = Vec::new();
                    for (j, c) in cells.iter().enumerate() {
                        match (c.as_u64(), c.as_bool()) {
                            (Some(b @ (0 | 1)), _) => r.push(b as u8),
                            (_, Some(b)) => r.push(b as u8),
                            _ => self.err(&format!("{rp}[{j}]"), "expected 0 or 1"),
                        }
                    }
                    out.push(r);
                }
                out
            }
        };
        let metric_base = self.f64_field(m, "metric_base", "sft").unwrap_or(2.0);
        if metric_base <= 1.0 {
            self.err("sft.metric_base", "must be > 1");
        }
        (self.errors.len() == before).then_some(SftConfig {
            alphabet: k,
            transitions,
            metric_base,
        })
    }

    fn generator(&mut self, v: &Value, alphabet: Option<usize>) -> Option<GeneratorConfig> {
        let m = self.object(v, "generator", GENERATOR_KEYS)?;
        let before = self.errors.len();
        let dim = self.usize_field(m, "dim", "generator");
        match dim {
            None if !m.contains_key("dim") => self.err("generator.dim", "required"),
            Some(d) if d == 0 || d > MAX_DIM => self.err("generator.dim", format!("must lie in 1..={MAX_DIM}")),
            _ => {}
        }
        let alpha = self.f64_field(m, "alpha", "generator").unwrap_or(1.0);
        if !(alpha > 0.0 && alpha <= 1.0) {
            self.err("generator.alpha", "must lie in (0, 1]");
        }
        let builtin_family = m
            .get("builtin")
            .and_then(|b| b.get("family"))
            .and_then(Value::as_str);
        let default_radius = if builtin_family == Some("coboundary") { 1 } else { 0 };
        let mut radius = self.usize_field(m, "radius", "generator").unwrap_or(default_radius);
        if radius > 8 {
            self.err("generator.radius", "must be at most 8");
            radius = default_radius;
        }
        // out-of-range values are already reported; keep them away from the table checks
        let d = dim.filter(|d| (1..=MAX_DIM).contains(d)).unwrap_or(0);
        let source = match (m.get("table"), m.get("builtin")) {
            (Some(_), Some(_)) => {
                self.err("generator", "give either table or builtin, not both");
                None
            }
            (None, None) => {
                self.err("generator", "table or builtin required");
                None
            }
            (Some(t), None) => self
                .word_table(t, "generator.table", 2 * radius + 1, (d > 0).then_some(d))
                .map(GeneratorSource::Table),
            (None, Some(b)) => self.builtin(b, d, radius, alphabet).map(GeneratorSource::Builtin),
        };
        if self.errors.len() != before {
            return None;
        }
        Some(GeneratorConfig {
            dim: d,
            radius,
            alpha,
            source: source?,
        })
    }

    fn builtin(&mut self, v: &Value, dim: usize, radius: usize, alphabet: Option<usize>) -> Option<Builtin> {
        let path = "generator.builtin";
        let Value::Object(m) = v else {
            self.err(path, "expected an object");
            return None;
        };
        let family = match m.get("family").and_then(Value::as_str) {
            Some(f) => f,
            None => {
                self.err(path, "family required (identity, constant, diagonal, rotation, coboundary)");
                return None;
            }
        };
        let allowed: &[&str] = match family {
            "identity" => &["family"],
            "constant" => &["family", "matrix"],
            "diagonal" => &["family", "diagonals"],
            "rotation" => &["family", "angles", "scales"],
            "coboundary" => &["family", "p_table"],
            other => {
                self.err(path, format!("unknown family {other:?}"));
                return None;
            }
        };
        self.object(v, path, allowed)?;
        let before = self.errors.len();
        if family != "coboundary" && radius != 0 {
            self.err("generator.radius", format!("family {family} has radius 0"));
        }
        let need = |c: &mut Self, key: &str| {
            let got = m.get(key);
            if got.is_none() {
                c.err(&format!("{path}.{key}"), "required");
            }
            got
        };
        let out = match family {
            "identity" => Some(Builtin::Identity),
            "constant" => need(self, "matrix")
                .and_then(|x| self.f64_array(x, "generator.builtin.matrix"))
                .map(|matrix| Builtin::Constant { matrix }),
            "diagonal" => need(self, "diagonals")
                .and_then(|x| self.f64_rows(x, "generator.builtin.diagonals", alphabet, Some(dim)))
                .map(|diagonals| Builtin::Diagonal { diagonals }),
            "rotation" => {
                if dim != 2 {
                    self.err("generator.dim", "rotation family needs dim 2");
                }
                let angles = need(self, "angles").and_then(|x| self.f64_array(x, "generator.builtin.angles"));
                let scales = m.get("scales").and_then(|x| self.f64_array(x, "generator.builtin.scales"));
                angles.map(|angles| Builtin::Rotation { angles, scales })
            }
            _ => {
                if radius == 0 {
                    self.err("generator.radius", "coboundary generators have radius >= 1");
                    None
                } else {
                    need(self, "p_table")
                        .and_then(|x| self.word_table(x, "generator.builtin.p_table", 2 * radius - 1, Some(dim)))
                        .map(|p_table| Builtin::Coboundary { p_table })
                }
            }
        };
        if let (Some(Builtin::Constant { matrix }), true) = (&out, dim > 0) {
            if matrix.len() != dim * dim {
                self.err("generator.builtin.matrix", format!("expected {} entries, found {}", dim * dim, matrix.len()));
            }
        }
        (self.errors.len() == before).then_some(out).flatten()
    }

    fn measure(&mut self, v: &Value, alphabet: Option<usize>) -> Option<MeasureConfig> {
        let m = self.object(v, "measure", MEASURE_KEYS)?;
        let before = self.errors.len();
        let kind = m.get("kind").and_then(Value::as_str);
        let out = match kind {
            Some("bernoulli") => m
                .get("p")
                .or_else(|| {
                    self.err("measure.p", "required for bernoulli");
                    None
                })
                .and_then(|p| self.f64_array(p, "measure.p"))
                .map(|p| MeasureConfig::Bernoulli { p }),
            Some("uniform") => Some(MeasureConfig::Uniform),
            Some("markov") => m
                .get("transition")
                .or_else(|| {
                    self.err("measure.transition", "required for markov");
                    None
                })
                .and_then(|t| self.f64_rows(t, "measure.transition", alphabet, alphabet))
                .map(|transition| MeasureConfig::Markov { transition }),
            Some("parry") => Some(MeasureConfig::Parry),
            Some(other) => {
                self.err("measure.kind", format!("unknown kind {other:?} (bernoulli, uniform, markov, parry)"));
                None
            }
            None => {
                self.err("measure.kind", "required");
                None
            }
        };
        (self.errors.len() == before).then_some(out).flatten()
    }

    fn params(&mut self, v: &Value) -> Option<Params> {
        let m = self.object(v, "params", PARAM_KEYS)?;
        let s = "params";
        let d = Params::default();
        let nonneg = |c: &mut Self, key: &str, x: Option<f64>| {
            if let Some(x) = x.filter(|x| *x < 0.0) {
                c.err(&format!("params.{key}"), format!("{x} must be >= 0"));
            }
            x
        };
        let rho = self.f64_field(m, "rho", s);
        let rho = nonneg(self, "rho", rho);
        let tau = self.f64_field(m, "tau", s);
        let tau = nonneg(self, "tau", tau);
        let tol = self.f64_field(m, "tol", s);
        let tol = nonneg(self, "tol", tol);
        let eps = self.f64_field(m, "eps", s);
        if let Some(e) = eps.filter(|e| *e <= 0.0) {
            self.err("params.eps", format!("{e} must be > 0"));
        }
        let c = self.f64_field(m, "c", s).unwrap_or(d.c);
        if c <= 0.0 {
            self.err("params.c", "must be > 0");
        }
        let positive = |c: &mut Self, key: &str, x: Option<usize>| {
            if x == Some(0) {
                c.err(&format!("params.{key}"), "must be >= 1");
            }
            x
        };
        let steps = self.usize_field(m, "steps", s);
        let max_period = self.usize_field(m, "max_period", s);
        let depth = self.usize_field(m, "depth", s);
        let n_max = self.usize_field(m, "n_max", s);
        let growth_n_max = self.usize_field(m, "growth_n_max", s);
        let exterior = self.usize_field(m, "exterior", s);
        let budget = self.u64_field(m, "budget", s);
        self.seen_budget = budget.is_some();
        let window = self.string(m, "window", s).and_then(|w| match w.parse::<Word>() {
            Ok(w) => Some(w),
            Err(e) => {
                self.err("params.window", e);
                None
            }
        });
        let point = m.get("point").and_then(|p| match serde_json::from_value::<SymbolicPoint>(p.clone()) {
            Ok(x) => Some(x),
            Err(e) => {
                self.err("params.point", e);
                None
            }
        });
        let gauge = m.get("gauge").and_then(|g| self.f64_array(g, "params.gauge"));
        let sweep = m.get("sweep").and_then(|w| self.sweep(w));
        let out = Params {
            steps: positive(self, "steps", steps).unwrap_or(d.steps),
            seed: self.u64_field(m, "seed", s),
            max_period: positive(self, "max_period", max_period).unwrap_or(d.max_period),
            rho,
            tau,
            eps,
            c,
            depth: positive(self, "depth", depth),
            n_max: positive(self, "n_max", n_max).unwrap_or(d.n_max),
            growth_n_max: positive(self, "growth_n_max", growth_n_max).unwrap_or(d.growth_n_max),
            orbit_budget: self.usize_field(m, "orbit_budget", s).unwrap_or(d.orbit_budget),
            samples: self.usize_field(m, "samples", s).unwrap_or(d.samples),
            tol,
            window,
            point,
            n: self.usize_field(m, "n", s).unwrap_or(d.n),
            centered: self.bool_field(m, "centered", s).unwrap_or(d.centered),
            table: self.string(m, "table", s),
            gauge,
            exterior: positive(self, "exterior", exterior),
            budget: positive(self, "budget", budget.map(|b| b as usize)).map_or(d.budget, |b| b as u64),
            sweep,
        };
        // Kept even when a field failed, so command requirements are still checked.
        Some(out)
    }

    fn sweep(&mut self, v: &Value) -> Option<Sweep> {
        let m = self.object(v, "params.sweep", SWEEP_KEYS)?;
        let list = |c: &mut Self, key: &str| m.get(key).and_then(|x| c.f64_array(x, &format!("params.sweep.{key}")));
        let steps = m.get("steps").and_then(|x| {
            let vals = x.as_array().and_then(|a| a.iter().map(Value::as_u64).collect::<Option<Vec<u64>>>());
            if vals.is_none() {
                self.err("params.sweep.steps", "expected an array of positive integers");
            }
            vals.map(|v| v.into_iter().map(|s| s as usize).collect::<Vec<usize>>())
        });
        if steps.as_ref().is_some_and(|s| s.contains(&0)) {
            self.err("params.sweep.steps", "entries must be >= 1");
        }
        Some(Sweep {
            rho: list(self, "rho"),
            tau: list(self, "tau"),
            eps: list(self, "eps"),
            steps,
        })
    }

    fn command_requirements(&mut self, command: Command, p: &Params, has_measure: bool) {
        let need = |c: &mut Self, ok: bool, key: &str, msg: &str| {
            let path = format!("params.{key}");
            if !ok && !c.errors.iter().any(|e| e.starts_with(&format!("{path}:"))) {
                c.err(&path, msg);
            }
        };
        match command {
            Command::Spectrum => {
                need(self, p.seed.is_some(), "seed", "seed required");
                if !has_measure {
                    self.err("measure", "section required for spectrum");
                }
            }
            Command::Certify => {
                need(self, p.rho.is_some(), "rho", "rho required");
                need(self, p.tau.is_some(), "tau", "tau required");
            }
            Command::GrowthBound => {
                need(self, p.rho.is_some(), "rho", "rho required");
                need(self, p.eps.is_some(), "eps", "eps required");
            }
            Command::Contradiction => {
                need(self, p.rho.is_some(), "rho", "rho required");
                need(self, p.tau.is_some(), "tau", "tau required");
            }
            Command::Shadow => need(self, p.point.is_some() || p.seed.is_some(), "seed", "seed required when no point is given"),
            Command::LivsicSolve => need(self, p.samples == 0 || p.seed.is_some(), "seed", "seed required when samples > 0"),
            Command::LivsicVerify => {
                need(self, p.table.is_some(), "table", "path to a transfer table required");
                need(self, p.samples == 0 || p.seed.is_some(), "seed", "seed required when samples > 0");
            }
            Command::PeriodicScan | Command::LivsicCheck => {}
        }
    }
}
