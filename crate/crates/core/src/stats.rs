//! Descriptive statistics, normality and unit-root tests, and pairwise
//! correlation matrices with significance masks.
//!
//! Skewness and excess kurtosis use the biased moment form
//! `m3 / m2^{3/2}` and `m4 / m2^2 - 3`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrMethod {
    #[default]
    Pearson,
    Spearman,
    Kendall,
}

impl CorrMethod {
    pub const ALL: [CorrMethod; 3] = [CorrMethod::Pearson, CorrMethod::Spearman, CorrMethod::Kendall];

    pub fn name(self) -> &'static str {
        match self {
            CorrMethod::Pearson => "pearson",
            CorrMethod::Spearman => "spearman",
            CorrMethod::Kendall => "kendall",
        }
    }
}

impl std::str::FromStr for CorrMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pearson" => Ok(Self::Pearson),
            "spearman" => Ok(Self::Spearman),
            "kendall" => Ok(Self::Kendall),
            other => Err(format!(
                "unknown correlation method {other:?} (expected pearson, spearman or kendall)"
            )),
        }
    }
}

impl std::fmt::Display for CorrMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Sample moments of one series. Skewness and kurtosis are `None` when the
/// series has zero variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
}

pub fn describe(series: &[f64]) -> Result<Moments> {
    let n = series.len();
    if n < 4 {
        return Err(Error::InsufficientData {
            required: 4,
            available: n,
        });
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in series".into()));
    }
    let nf = n as f64;
    let mean = linalg::mean(series);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in series {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let variance = m2 * nf / (nf - 1.0);
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2) - 3.0))
    } else {
        (None, None)
    };
    Ok(Moments {
        n,
        mean,
        variance,
        skewness,
        excess_kurtosis,
    })
}

/// `JB = n (S²/6 + K²/24)` for sample size `n`, skewness `S` and excess
/// kurtosis `K`, with its χ²(2) upper-tail p-value.
pub fn jarque_bera_from_moments(n: usize, skewness: f64, excess_kurtosis: f64) -> (f64, f64) {
    let jb = n as f64 * (skewness * skewness / 6.0 + excess_kurtosis * excess_kurtosis / 24.0);
    // χ²(2) survival function is exp(-x/2).
    (jb, (-jb / 2.0).exp())
}

pub fn jarque_bera(series: &[f64]) -> Result<(f64, f64)> {
    if series.len() < 8 {
        return Err(Error::InsufficientData {
            required: 8,
            available: series.len(),
        });
    }
    let m = describe(series)?;
    match (m.skewness, m.excess_kurtosis) {
        (Some(s), Some(k)) => Ok(jarque_bera_from_moments(m.n, s, k)),
        _ => Err(Error::ZeroVariance("Jarque-Bera on constant series".into())),
    }
}

/// Two-sided large-sample p-values for skewness and excess kurtosis.
pub fn moment_pvalues(m: &Moments) -> (Option<f64>, Option<f64>) {
    let n = m.n as f64;
    let z = |v: f64, var: f64| 2.0 * (1.0 - std_normal().cdf((v / var.sqrt()).abs()));
    (
        m.skewness.map(|s| z(s, 6.0 / n)),
        m.excess_kurtosis.map(|k| z(k, 24.0 / n)),
    )
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("valid normal")
}

/// Fixed critical values of the constant-only DF-GLS statistic at 1%, 5% and
/// 10%.
pub const ERS_CRITICAL_VALUES: [f64; 3] = [-2.58, -1.95, -1.62];
/// Local-to-unity parameter for the constant-only GLS demeaning.
pub const ERS_CBAR: f64 = -7.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Significance {
    OnePercent,
    FivePercent,
    TenPercent,
    NotSignificant,
}

impl Significance {
    pub fn stars(self) -> &'static str {
        match self {
            Significance::OnePercent => "***",
            Significance::FivePercent => "**",
            Significance::TenPercent => "*",
            Significance::NotSignificant => "",
        }
    }

    pub fn from_pvalue(p: f64) -> Self {
        if p < 0.01 {
            Self::OnePercent
        } else if p < 0.05 {
            Self::FivePercent
        } else if p < 0.10 {
            Self::TenPercent
        } else {
            Self::NotSignificant
        }
    }

    /// Position of a left-tailed DF-GLS statistic relative to the fixed
    /// critical values.
    pub fn from_ers(stat: f64) -> Self {
        let [c1, c5, c10] = ERS_CRITICAL_VALUES;
        if stat < c1 {
            Self::OnePercent
        } else if stat < c5 {
            Self::FivePercent
        } else if stat < c10 {
            Self::TenPercent
        } else {
            Self::NotSignificant
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LagOrder {
    /// Schwert rule `floor(12 (T/100)^{1/4})`.
    #[default]
    Auto,
    #[serde(untagged)]
    Fixed(usize),
}

impl LagOrder {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            LagOrder::Auto => (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize,
            LagOrder::Fixed(p) => p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErsResult {
    pub stat: f64,
    pub lag: usize,
    pub band: Significance,
}

/// DF-GLS unit-root test, constant-only case.
pub fn ers_dfgls(series: &[f64], lag_order: LagOrder) -> Result<ErsResult> {
    let n = series.len();
    if n < 50 {
        return Err(Error::InsufficientData {
            required: 50,
            available: n,
        });
    }
    let lag = lag_order.resolve(n);
    if lag + 10 >= n {
        return Err(Error::InvalidInput(format!("lag order {lag} too large for {n} observations")));
    }
    if linalg::is_constant(series) {
        return Err(Error::SingularRegression);
    }

    // GLS demeaning: quasi-difference the series and the constant.
    let a = 1.0 + ERS_CBAR / n as f64;
    let mut num = series[0];
    let mut den = 1.0;
    for t in 1..n {
        let yd = series[t] - a * series[t - 1];
        let z = 1.0 - a;
        num += z * yd;
        den += z * z;
    }
    let mu = num / den;
    let y: Vec<f64> = series.iter().map(|v| v - mu).collect();
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();

    // Δy_t = ρ y_{t-1} + Σ_j δ_j Δy_{t-j}, no constant. dy[t-1] = y[t] - y[t-1].
    let rows = n - 1 - lag;
    let cols = 1 + lag;
    let x = DMatrix::from_fn(rows, cols, |r, c| {
        let t = r + lag + 1;
        if c == 0 {
            y[t - 1]
        } else {
            dy[t - 1 - c]
        }
    });
    let resp = DVector::from_fn(rows, |r, _| dy[r + lag]);

    let svd = x.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin / smax < 1e-10 {
        return Err(Error::SingularRegression);
    }
    let xtx = x.transpose() * &x;
    let xtx_inv = xtx.try_inverse().ok_or(Error::SingularRegression)?;
    let coef = &xtx_inv * (x.transpose() * &resp);
    let resid = &resp - &x * &coef;
    let dof = (rows - cols) as f64;
    let s2 = resid.norm_squared() / dof;
    let se = (s2 * xtx_inv[(0, 0)]).sqrt();
    if !(se > 0.0) {
        return Err(Error::SingularRegression);
    }
    let stat = coef[0] / se;
    Ok(ErsResult {
        stat,
        lag,
        band: Significance::from_ers(stat),
    })
}

/// One Table-1 row.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRecord {
    pub moments: Moments,
    pub skewness_pvalue: Option<f64>,
    pub kurtosis_pvalue: Option<f64>,
    pub jb_stat: f64,
    pub jb_pvalue: f64,
    pub ers: ErsResult,
}

pub fn stats_record(series: &[f64], ers_lag: LagOrder) -> Result<StatsRecord> {
    let moments = describe(series)?;
    let (jb_stat, jb_pvalue) = jarque_bera(series)?;
    let (skewness_pvalue, kurtosis_pvalue) = moment_pvalues(&moments);
    let ers = ers_dfgls(series, ers_lag)?;
    Ok(StatsRecord {
        moments,
        skewness_pvalue,
        kurtosis_pvalue,
        jb_stat,
        jb_pvalue,
        ers,
    })
}

/// Average ranks (1-based), ties share their mean rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

fn pearson_matrix(columns: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let m = columns.len();
    let n = columns.first().map_or(0, Vec::len);
    let z: Vec<Vec<f64>> = columns
        .iter()
        .enumerate()
        .map(|(j, c)| {
            linalg::standardize(c).ok_or_else(|| Error::ZeroVariance(format!("column {j}")))
        })
        .collect::<Result<_>>()?;
    let mut r = DMatrix::identity(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let dot: f64 = z[i].iter().zip(&z[j]).map(|(a, b)| a * b).sum();
            let v = (dot / (n as f64 - 1.0)).clamp(-1.0, 1.0);
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(r)
}

/// Signs of all pairwise differences `x_b - x_a` for `a < b`.
fn pair_signs(xs: &[f64]) -> Vec<i8> {
    let n = xs.len();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            let d = xs[b] - xs[a];
            out.push(if d > 0.0 {
                1
            } else if d < 0.0 {
                -1
            } else {
                0
            });
        }
    }
    out
}

/// Kendall tau-b matrix.
fn kendall_matrix(columns: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let m = columns.len();
    let signs: Vec<Vec<i8>> = columns.iter().map(|c| pair_signs(c)).collect();
    let untied: Vec<i64> = signs
        .iter()
        .map(|s| s.iter().filter(|&&v| v != 0).count() as i64)
        .collect();
    for (j, &u) in untied.iter().enumerate() {
        if u == 0 {
            return Err(Error::ZeroVariance(format!("column {j}")));
        }
    }
    let mut r = DMatrix::identity(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let s: i64 = signs[i]
                .iter()
                .zip(&signs[j])
                .map(|(&a, &b)| (a * b) as i64)
                .sum();
            let v = (s as f64 / ((untied[i] as f64) * (untied[j] as f64)).sqrt()).clamp(-1.0, 1.0);
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(r)
}

/// Correlation matrix of `columns` (each of equal length) under `method`.
pub fn correlation_of_columns(columns: &[Vec<f64>], method: CorrMethod) -> Result<DMatrix<f64>> {
    match method {
        CorrMethod::Pearson => pearson_matrix(columns),
        CorrMethod::Spearman => {
            let ranked: Vec<Vec<f64>> = columns.iter().map(|c| ranks(c)).collect();
            pearson_matrix(&ranked)
        }
        CorrMethod::Kendall => kendall_matrix(columns),
    }
}

/// Two-sided p-value for a correlation coefficient estimated from `n` pairs.
pub fn correlation_pvalue(r: f64, n: usize, method: CorrMethod) -> f64 {
    let nf = n as f64;
    match method {
        CorrMethod::Pearson | CorrMethod::Spearman => {
            if r.abs() >= 1.0 {
                return 0.0;
            }
            let t = r * ((nf - 2.0) / (1.0 - r * r)).sqrt();
            let dist = StudentsT::new(0.0, 1.0, nf - 2.0).expect("valid t");
            (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
        }
        CorrMethod::Kendall => {
            let z = 3.0 * r * (nf * (nf - 1.0)).sqrt() / (2.0 * (2.0 * nf + 5.0)).sqrt();
            (2.0 * (1.0 - std_normal().cdf(z.abs()))).clamp(0.0, 1.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrix {
    pub method: CorrMethod,
    pub values: DMatrix<f64>,
    pub pvalues: DMatrix<f64>,
    /// True where the coefficient is not significant (`p >= threshold`).
    pub insignificant: DMatrix<bool>,
}

pub const DEFAULT_SIGNIFICANCE: f64 = 0.10;

pub fn correlation_matrix(panel: &ReturnPanel, method: CorrMethod, threshold: f64) -> Result<CorrMatrix> {
    let n = panel.n_obs();
    if n < 5 {
        return Err(Error::InsufficientData {
            required: 5,
            available: n,
        });
    }
    let k = panel.n_assets();
    let columns: Vec<Vec<f64>> = (0..k).map(|j| panel.column(j)).collect();
    for (j, c) in columns.iter().enumerate() {
        if linalg::is_constant(c) {
            return Err(Error::ZeroVariance(format!("column {:?}", panel.assets()[j])));
        }
    }
    let values = correlation_of_columns(&columns, method)?;
    let pvalues = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            0.0
        } else {
            correlation_pvalue(values[(i.min(j), i.max(j))], n, method)
        }
    });
    let insignificant = DMatrix::from_fn(k, k, |i, j| i != j && pvalues[(i, j)] >= threshold);
    Ok(CorrMatrix {
        method,
        values,
        pvalues,
        insignificant,
    })
}
