//! Run configuration: a flat TOML document whose keys may also be set by
//! command-line flags (flag > config file > default).

use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use spillover::condcov::{DEFAULT_BURN_IN, DEFAULT_LAMBDA};
use spillover::ingest::AlignPolicy;
use spillover::portfolio::{Strategy, DEFAULT_ALPHA};
use spillover::r2conn::DEFAULT_THRESHOLD;
use spillover::stats::{LagOrder, DEFAULT_SIGNIFICANCE};
use spillover::CorrMethod;
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorChoice {
    Ewma,
    Dcc,
}

impl std::str::FromStr for EstimatorChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ewma" => Ok(Self::Ewma),
            "dcc" => Ok(Self::Dcc),
            _ => Err(format!("unknown estimator {s:?} (expected ewma or dcc)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub date_column: String,
    pub price_columns: Option<Vec<String>>,
    pub align: AlignPolicy,
    pub window: usize,
    pub step: usize,
    pub lag: usize,
    pub corr_method: CorrMethod,
    pub include_own_lag: bool,
    pub threshold: f64,
    pub robustness: bool,
    pub significance: f64,
    pub ers_lag: LagOrder,
    pub estimator: EstimatorChoice,
    pub lambda: f64,
    pub burn_in: usize,
    pub strategies: Vec<Strategy>,
    pub alpha: f64,
    pub long_only: bool,
    pub annualize: bool,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub charts: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            date_column: "date".into(),
            price_columns: None,
            align: AlignPolicy::Intersection,
            window: 200,
            step: 1,
            lag: 1,
            corr_method: CorrMethod::Pearson,
            include_own_lag: false,
            threshold: DEFAULT_THRESHOLD,
            robustness: true,
            significance: DEFAULT_SIGNIFICANCE,
            ers_lag: LagOrder::Auto,
            estimator: EstimatorChoice::Ewma,
            lambda: DEFAULT_LAMBDA,
            burn_in: DEFAULT_BURN_IN,
            strategies: Strategy::ALL.to_vec(),
            alpha: DEFAULT_ALPHA,
            long_only: true,
            annualize: true,
            output_dir: PathBuf::from("spillover-out"),
            seed: 42,
            charts: true,
        }
    }
}

pub const KEYS: [&str; 23] = [
    "inputs",
    "date_column",
    "price_columns",
    "align",
    "window",
    "step",
    "lag",
    "corr_method",
    "include_own_lag",
    "threshold",
    "robustness",
    "significance",
    "ers_lag",
    "estimator",
    "lambda",
    "burn_in",
    "strategies",
    "alpha",
    "long_only",
    "annualize",
    "output_dir",
    "seed",
    "charts",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

/// Closest known key by edit distance, if reasonably close.
pub fn suggest_key(unknown: &str) -> Option<&'static str> {
    KEYS.iter()
        .map(|k| (strsim::levenshtein(unknown, k), *k))
        .filter(|(d, k)| *d <= 3 && *d < k.len())
        .min()
        .map(|(_, k)| k)
}

struct Reader<'a> {
    table: &'a Table,
    errors: Vec<ConfigError>,
}

impl Reader<'_> {
    fn fail(&mut self, key: &str, message: impl Into<String>) {
        self.errors.push(ConfigError {
            key: key.into(),
            message: message.into(),
        });
    }

    fn get<T>(&mut self, key: &str, expected: &str, convert: impl Fn(&Value) -> Option<T>) -> Option<T> {
        let v = self.table.get(key)?;
        let out = convert(v);
        if out.is_none() {
            self.fail(key, format!("expected {expected}, found {}", v.type_str()));
        }
        out
    }

    fn string(&mut self, key: &str) -> Option<String> {
        self.get(key, "a string", |v| v.as_str().map(str::to_string))
    }

    fn boolean(&mut self, key: &str) -> Option<bool> {
        self.get(key, "a boolean", Value::as_bool)
    }

    fn float(&mut self, key: &str) -> Option<f64> {
        self.get(key, "a number", |v| v.as_float().or_else(|| v.as_integer().map(|i| i as f64)))
    }

    fn count(&mut self, key: &str) -> Option<usize> {
        self.get(key, "a non-negative integer", |v| v.as_integer().and_then(|i| usize::try_from(i).ok()))
    }

    fn strings(&mut self, key: &str) -> Option<Vec<String>> {
        self.get(key, "an array of strings", |v| {
            v.as_array()?.iter().map(|s| s.as_str().map(str::to_string)).collect()
        })
    }

    fn parsed<T: std::str::FromStr<Err = String>>(&mut self, key: &str) -> Option<T> {
        let s = self.string(key)?;
        match s.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                self.fail(key, e);
                None
            }
        }
    }
}

/// Parses and checks a configuration document, reporting every problem at
/// once. An empty document yields the defaults.
pub fn validate_config(text: &str) -> Result<RunConfig, Vec<ConfigError>> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| {
        vec![ConfigError {
            key: "<document>".into(),
            message: e.message().to_string(),
        }]
    })?;
    validate_table(&table)
}

pub fn validate_table(table: &Table) -> Result<RunConfig, Vec<ConfigError>> {
    let mut r = Reader {
        table,
        errors: Vec::new(),
    };
    for key in table.keys() {
        if !KEYS.contains(&key.as_str()) {
            let hint = suggest_key(key).map(|k| format!("; did you mean \"{k}\"?")).unwrap_or_default();
            r.fail(key, format!("unknown key{hint}"));
        }
    }

    let mut c = RunConfig::default();
    if let Some(v) = r.strings("inputs") {
        c.inputs = v.into_iter().map(PathBuf::from).collect();
    }
    if let Some(v) = r.string("date_column") {
        c.date_column = v;
    }
    if let Some(v) = r.strings("price_columns") {
        c.price_columns = Some(v);
    }
    if let Some(v) = r.parsed::<AlignPolicy>("align") {
        c.align = v;
    }
    if let Some(v) = r.count("window") {
        c.window = v;
    }
    if let Some(v) = r.count("step") {
        c.step = v;
    }
    if let Some(v) = r.count("lag") {
        c.lag = v;
    }
    if let Some(v) = r.parsed::<CorrMethod>("corr_method") {
        c.corr_method = v;
    }
    if let Some(v) = r.boolean("include_own_lag") {
        c.include_own_lag = v;
    }
    if let Some(v) = r.float("threshold") {
        c.threshold = v;
    }
    if let Some(v) = r.boolean("robustness") {
        c.robustness = v;
    }
    if let Some(v) = r.float("significance") {
        c.significance = v;
    }
    if let Some(v) = table.get("ers_lag") {
        match (v.as_str(), v.as_integer()) {
            (Some("auto"), _) => c.ers_lag = LagOrder::Auto,
            (_, Some(i)) if i >= 0 => c.ers_lag = LagOrder::Fixed(i as usize),
            _ => r.fail("ers_lag", "expected \"auto\" or a non-negative integer"),
        }
    }
    if let Some(v) = r.parsed::<EstimatorChoice>("estimator") {
        c.estimator = v;
    }
    if let Some(v) = r.float("lambda") {
        c.lambda = v;
    }
    if let Some(v) = r.count("burn_in") {
        c.burn_in = v;
    }
    if let Some(v) = r.strings("strategies") {
        let mut parsed = Vec::new();
        for s in v {
            match s.parse::<Strategy>() {
                Ok(st) if parsed.contains(&st) => r.fail("strategies", format!("{s:?} listed twice")),
                Ok(st) => parsed.push(st),
                Err(e) => r.fail("strategies", e),
            }
        }
        c.strategies = parsed;
    }
    if let Some(v) = r.float("alpha") {
        c.alpha = v;
    }
    if let Some(v) = r.boolean("long_only") {
        c.long_only = v;
    }
    if let Some(v) = r.boolean("annualize") {
        c.annualize = v;
    }
    if let Some(v) = r.string("output_dir") {
        c.output_dir = PathBuf::from(v);
    }
    if let Some(v) = r.get("seed", "a non-negative integer", |v| v.as_integer().and_then(|i| u64::try_from(i).ok())) {
        c.seed = v;
    }
    if let Some(v) = r.boolean("charts") {
        c.charts = v;
    }

    let present = |k: &str| table.contains_key(k);
    let mut range = |key: &str, ok: bool, msg: &str| {
        if present(key) && !ok {
            r.fail(key, msg.to_string());
        }
    };
    range("lambda", c.lambda > 0.0 && c.lambda < 1.0, "must lie in (0, 1)");
    range("alpha", c.alpha > 0.0 && c.alpha < 0.5, "must lie in (0, 0.5)");
    range("lag", c.lag >= 1, "must be at least 1");
    range("step", c.step >= 1, "must be at least 1");
    range("window", c.window >= 2, "must be at least 2");
    range("burn_in", c.burn_in >= 2, "must be at least 2");
    range("threshold", c.threshold >= 0.0 && c.threshold.is_finite(), "must be a finite number ≥ 0");
    range("significance", c.significance > 0.0 && c.significance < 1.0, "must lie in (0, 1)");
    range("strategies", !c.strategies.is_empty(), "must list at least one strategy");
    range("date_column", !c.date_column.is_empty(), "must not be empty");

    if r.errors.is_empty() {
        Ok(c)
    } else {
        Err(r.errors)
    }
}
