//! Price loading, calendar alignment and log-return construction.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which CSV columns hold the date and the prices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub date_column: String,
    /// Price columns to keep, in output order. `None` keeps every non-date column.
    pub price_columns: Option<Vec<String>>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            date_column: "date".to_string(),
            price_columns: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlignPolicy {
    #[default]
    Intersection,
    UnionForwardFill,
}

impl std::str::FromStr for AlignPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "intersection" => Ok(Self::Intersection),
            "union-forward-fill" => Ok(Self::UnionForwardFill),
            other => Err(format!(
                "unknown alignment policy {other:?} (expected intersection or union-forward-fill)"
            )),
        }
    }
}

/// Date-indexed matrix of positive price levels, one column per asset.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    dates: Vec<NaiveDate>,
    assets: Vec<String>,
    prices: DMatrix<f64>,
}

fn check_unique_assets(assets: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    match assets.iter().find(|a| !seen.insert(a.as_str())) {
        Some(a) => Err(Error::InvalidInput(format!("duplicate asset name {a:?}"))),
        None => Ok(()),
    }
}

impl PricePanel {
    pub fn new(dates: Vec<NaiveDate>, assets: Vec<String>, prices: DMatrix<f64>) -> Result<Self> {
        if dates.is_empty() || assets.is_empty() {
            return Err(Error::EmptyDocument);
        }
        if prices.nrows() != dates.len() || prices.ncols() != assets.len() {
            return Err(Error::InvalidInput(format!(
                "price matrix is {}×{} but there are {} dates and {} assets",
                prices.nrows(),
                prices.ncols(),
                dates.len(),
                assets.len()
            )));
        }
        check_unique_assets(&assets)?;
        if let Some(w) = dates.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "dates not strictly increasing at {}",
                dates[w + 1]
            )));
        }
        for (t, row) in prices.row_iter().enumerate() {
            for (k, &p) in row.iter().enumerate() {
                if !(p > 0.0) || !p.is_finite() {
                    return Err(Error::NonPositivePrice {
                        asset: assets[k].clone(),
                        date: dates[t],
                        value: p,
                    });
                }
            }
        }
        Ok(Self {
            dates,
            assets,
            prices,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn prices(&self) -> &DMatrix<f64> {
        &self.prices
    }

    pub fn n_obs(&self) -> usize {
        self.dates.len()
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    fn price_on(&self) -> BTreeMap<NaiveDate, usize> {
        self.dates.iter().enumerate().map(|(i, d)| (*d, i)).collect()
    }
}

/// Date-indexed matrix of log returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    dates: Vec<NaiveDate>,
    assets: Vec<String>,
    returns: DMatrix<f64>,
}

impl ReturnPanel {
    pub fn new(dates: Vec<NaiveDate>, assets: Vec<String>, returns: DMatrix<f64>) -> Result<Self> {
        if returns.nrows() != dates.len() || returns.ncols() != assets.len() {
            return Err(Error::InvalidInput(format!(
                "return matrix is {}×{} but there are {} dates and {} assets",
                returns.nrows(),
                returns.ncols(),
                dates.len(),
                assets.len()
            )));
        }
        check_unique_assets(&assets)?;
        if let Some(w) = dates.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "dates not strictly increasing at {}",
                dates[w + 1]
            )));
        }
        if returns.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidInput("non-finite return".into()));
        }
        Ok(Self {
            dates,
            assets,
            returns,
        })
    }

    /// Builds a panel with synthetic consecutive calendar dates starting at
    /// 2000-01-01. Handy for simulations and tests.
    pub fn from_matrix(returns: DMatrix<f64>) -> Result<Self> {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
        let dates = (0..returns.nrows())
            .map(|i| start + chrono::Days::new(i as u64))
            .collect();
        let assets = (0..returns.ncols()).map(|k| format!("A{}", k + 1)).collect();
        Self::new(dates, assets, returns)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn returns(&self) -> &DMatrix<f64> {
        &self.returns
    }

    pub fn n_obs(&self) -> usize {
        self.dates.len()
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.returns.column(k).iter().copied().collect()
    }

    /// Contiguous block of rows `start..end`.
    pub fn rows(&self, start: usize, end: usize) -> ReturnPanel {
        ReturnPanel {
            dates: self.dates[start..end].to_vec(),
            assets: self.assets.clone(),
            returns: self.returns.rows(start, end - start).into_owned(),
        }
    }

    /// Reorders (or subsets) the columns.
    pub fn select_columns(&self, order: &[usize]) -> ReturnPanel {
        ReturnPanel {
            dates: self.dates.clone(),
            assets: order.iter().map(|&k| self.assets[k].clone()).collect(),
            returns: self.returns.select_columns(order),
        }
    }

    pub fn position(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }
}


/// A dated scalar series, e.g. hedged-position or portfolio returns.
#[derive(Debug, Clone, PartialEq)]
pub struct DatedSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl DatedSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Panel row of each date in `dates`, requiring that consecutive dates are
/// consecutive panel rows.
pub(crate) fn contiguous_rows(panel: &ReturnPanel, dates: &[NaiveDate]) -> Result<Vec<usize>> {
    let rows = dates
        .iter()
        .map(|d| {
            panel
                .position(*d)
                .ok_or_else(|| Error::DateMisalignment(format!("{d} not in return panel")))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(w) = rows.windows(2).position(|w| w[1] != w[0] + 1) {
        return Err(Error::DateMisalignment(format!(
            "{} and {} are not consecutive panel dates",
            dates[w],
            dates[w + 1]
        )));
    }
    Ok(rows)
}

/// Parses a price CSV. Row numbers in errors count the header as row 1.
pub fn load_price_series<R: Read>(source: R, schema: &CsvSchema) -> Result<PricePanel> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::Csv {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let date_idx = headers
        .iter()
        .position(|h| h == schema.date_column)
        .ok_or_else(|| Error::Csv {
            row: 1,
            message: format!("missing date column {:?}", schema.date_column),
        })?;
    let price_idx: Vec<usize> = match &schema.price_columns {
        Some(cols) => cols
            .iter()
            .map(|c| {
                headers.iter().position(|h| h == c).ok_or_else(|| Error::Csv {
                    row: 1,
                    message: format!("missing price column {c:?}"),
                })
            })
            .collect::<Result<_>>()?,
        None => (0..headers.len()).filter(|&i| i != date_idx).collect(),
    };
    if price_idx.is_empty() {
        return Err(Error::Csv {
            row: 1,
            message: "no price columns".into(),
        });
    }
    let assets: Vec<String> = price_idx.iter().map(|&i| headers[i].to_string()).collect();

    let mut rows: Vec<(NaiveDate, Vec<f64>)> = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Csv {
            row,
            message: e.to_string(),
        })?;
        let raw_date = record.get(date_idx).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|_| {
            Error::MalformedDate {
                row,
                value: raw_date.to_string(),
            }
        })?;
        if !seen.insert(date) {
            return Err(Error::DuplicateDate { row });
        }
        let prices = price_idx
            .iter()
            .map(|&c| {
                let raw = record.get(c).unwrap_or("");
                raw.parse::<f64>()
                    .ok()
                    .filter(|p| p.is_finite())
                    .ok_or_else(|| Error::NonNumericPrice {
                        row,
                        column: headers[c].to_string(),
                        value: raw.to_string(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((date, prices));
    }
    if rows.is_empty() {
        return Err(Error::EmptyDocument);
    }
    rows.sort_by_key(|(d, _)| *d);
    let dates = rows.iter().map(|(d, _)| *d).collect();
    let k = assets.len();
    let prices = DMatrix::from_fn(rows.len(), k, |t, j| rows[t].1[j]);
    PricePanel::new(dates, assets, prices)
}

pub fn load_price_file(path: &Path, schema: &CsvSchema) -> Result<PricePanel> {
    let file = std::fs::File::open(path).map_err(|e| Error::Csv {
        row: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    load_price_series(std::io::BufReader::new(file), schema)
}

/// Joins several panels onto one calendar. Columns keep input panel order.
pub fn align_panels(panels: &[PricePanel], policy: AlignPolicy) -> Result<PricePanel> {
    if panels.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 panels to align, got {}",
            panels.len()
        )));
    }
    let dates: Vec<NaiveDate> = match policy {
        AlignPolicy::Intersection => {
            let mut common: BTreeSet<NaiveDate> = panels[0].dates.iter().copied().collect();
            for p in &panels[1..] {
                let other: BTreeSet<NaiveDate> = p.dates.iter().copied().collect();
                common = common.intersection(&other).copied().collect();
            }
            common.into_iter().collect()
        }
        AlignPolicy::UnionForwardFill => {
            let all: BTreeSet<NaiveDate> =
                panels.iter().flat_map(|p| p.dates.iter().copied()).collect();
            all.into_iter().collect()
        }
    };
    if dates.is_empty() {
        return Err(Error::EmptyIntersection);
    }

    let assets: Vec<String> = panels.iter().flat_map(|p| p.assets.iter().cloned()).collect();
    let mut prices = DMatrix::zeros(dates.len(), assets.len());
    let mut col = 0;
    for (pi, panel) in panels.iter().enumerate() {
        let index = panel.price_on();
        for (t, date) in dates.iter().enumerate() {
            let row = match policy {
                AlignPolicy::Intersection => index[date],
                AlignPolicy::UnionForwardFill => match index.range(..=*date).next_back() {
                    Some((_, &r)) => r,
                    None => {
                        return Err(Error::LeadingGap {
                            panel: pi,
                            date: *date,
                        })
                    }
                },
            };
            for j in 0..panel.n_assets() {
                prices[(t, col + j)] = panel.prices[(row, j)];
            }
        }
        col += panel.n_assets();
    }
    PricePanel::new(dates, assets, prices)
}

/// `returns[t][k] = ln(prices[t+1][k] / prices[t][k])`.
pub fn log_returns(panel: &PricePanel) -> Result<ReturnPanel> {
    let t = panel.n_obs();
    if t < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            available: t,
        });
    }
    for (r, row) in panel.prices.row_iter().enumerate() {
        for (k, &p) in row.iter().enumerate() {
            if !(p > 0.0) {
                return Err(Error::NonPositivePrice {
                    asset: panel.assets[k].clone(),
                    date: panel.dates[r],
                    value: p,
                });
            }
        }
    }
    let p = &panel.prices;
    let returns = DMatrix::from_fn(t - 1, panel.n_assets(), |r, k| {
        (p[(r + 1, k)] / p[(r, k)]).ln()
    });
    ReturnPanel::new(panel.dates[1..].to_vec(), panel.assets.clone(), returns)
}
