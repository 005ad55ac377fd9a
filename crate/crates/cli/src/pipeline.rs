//! Pipeline stages. Each stage computes its results with the core library and
//! writes its artifacts into a bundle; `run_pipeline` chains them all.

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde_json::json;
use spillover::condcov::{dcc_fit, ewma_covariance, ConditionalCovariances};
use spillover::hedge::{hedge_table, HedgeEffect};
use spillover::ingest::{align_panels, load_price_file, log_returns, CsvSchema};
use spillover::linalg::SeriesSummary;
use spillover::portfolio::{allocation_table, performance, run_strategy, MatrixSequence};
use spillover::r2conn::{
    averaged_spillover, export_network, rolling_connectedness, AveragedSpillover, DirectionalIndices, RollingConfig,
    WindowOutcome, WindowRecord,
};
use spillover::stats::{correlation_matrix, moment_pvalues, stats_record, Significance};
use spillover::{CorrMethod, ReturnPanel};

use crate::bundle::Bundle;
use crate::config::{EstimatorChoice, RunConfig};
use crate::exit::{CliError, StageContext};
use crate::format::{opt6, sig6, write_csv, UNDEFINED};
use crate::svg;

pub const TABLE1_HEADER: [&str; 7] = ["Asset", "Mean (×10²)", "Variance (×10²)", "Skewness", "Ex.Kurtosis", "JB", "ERS"];
pub const TABLE2_HEADER: [&str; 7] = ["Pair", "Mean", "Std. Dev.", "5%", "95%", "HE", "p-value"];
pub const TABLE3_HEADER: [&str; 8] = ["Strategy", "Asset", "Mean", "Std.Dev.", "5%", "95%", "HE", "p-value"];
pub const TABLE4_HEADER: [&str; 6] = [
    "Strategy",
    "Return",
    "StdDev",
    "Sharpe Ratio (StdDev)",
    "Sharpe Ratio (VaR)",
    "Sharpe Ratio (CVaR)",
];

pub fn load_returns(c: &RunConfig) -> Result<ReturnPanel, CliError> {
    if c.inputs.is_empty() {
        return Err(CliError::config("inputs: no input files given (use --input or the inputs key)"));
    }
    let schema = CsvSchema {
        date_column: c.date_column.clone(),
        price_columns: c.price_columns.clone(),
    };
    let panels = c
        .inputs
        .iter()
        .map(|p| load_price_file(p, &schema))
        .collect::<Result<Vec<_>, _>>()
        .stage("ingest")?;
    let prices = match panels.len() {
        1 => panels.into_iter().next().expect("one panel"),
        _ => align_panels(&panels, c.align).stage("ingest")?,
    };
    if prices.n_assets() < 2 {
        return Err(CliError::from(spillover::Error::InvalidInput(format!(
            "analytics need at least 2 assets, found {}",
            prices.n_assets()
        )))
        .in_stage("ingest"));
    }
    log_returns(&prices).stage("ingest")
}

/// Effective configuration and the conventions every artifact follows.
pub fn stamp(bundle: &mut Bundle, command: &str, c: &RunConfig) {
    bundle.set_metadata("tool", "spillover");
    bundle.set_metadata("version", env!("CARGO_PKG_VERSION"));
    bundle.set_metadata("command", command);
    bundle.set_metadata("config", c);
    bundle.set_metadata(
        "conventions",
        json!({
            "returns": "log returns ln(P_t / P_{t-1}), decimal per period",
            "number_format": format!("6 significant digits; {UNDEFINED} marks an undefined value"),
            "descriptive_stars": "skewness and excess kurtosis: two-sided normal tests with variances 6/n and 24/n; JB: chi-square(2); ERS: DF-GLS constant-only, c = -7, critical values -2.58/-1.95/-1.62 at 1/5/10%",
            "ers_lag": match c.ers_lag {
                spillover::stats::LagOrder::Auto => "Schwert rule floor(12 (T/100)^(1/4))".to_string(),
                spillover::stats::LagOrder::Fixed(p) => format!("fixed at {p}"),
            },
            "correlation_mask": format!("cells with p-value >= {} are masked", c.significance),
            "connectedness_units": "percentage points",
            "matrix_orientation": "row i receives, column j transmits: entry (i, j) is the share of asset i's variance explained by asset j",
            "npdc": "npdc[i][j] = (C[j][i] + L[j][i]) - (C[i][j] + L[i][j]); positive when i transmits more to j than it receives; network edge i -> j iff npdc[i][j] > threshold",
            "own_lag_in_tci": c.include_own_lag,
            "rolling_label": "window end date",
            "hedge_timing": "ratio or weight observed at t-1 applied to returns at t; Table 2 statistics describe the unlagged series",
            "hedge_ratio_variant": "long asset I, short beta units of asset J, compared with holding I",
            "bilateral_weight_variant": "minimum-variance weight of asset I in an I/J portfolio, clamped to [0, 1], compared with holding I",
            "he_pvalue": "one-sided F test of var(reference) > var(portfolio) with (n-1, n-1) degrees of freedom",
            "portfolio_timing": "weights from date t-1 earn returns at t; dates without an estimate keep the previous weights",
            "long_only": if c.long_only { "negative weights set to zero, then renormalized once" } else { "unconstrained" },
            "annualization": if c.annualize { 252 } else { 1 },
            "sharpe_var": "annualized mean / (sqrt(annualization) * VaR); VaR and CVaR are daily losses at the tail level",
            "tail_level": c.alpha,
            "covariance_csv": "upper triangle including the diagonal",
        }),
    );
}

fn star_cell(value: Option<f64>, band: Significance) -> String {
    match value {
        Some(v) => format!("{}{}", sig6(v), band.stars()),
        None => UNDEFINED.to_string(),
    }
}

fn matrix_rows(labels: &[String], m: &DMatrix<f64>) -> Vec<Vec<String>> {
    labels
        .iter()
        .enumerate()
        .map(|(i, name)| std::iter::once(name.clone()).chain((0..m.ncols()).map(|j| sig6(m[(i, j)]))).collect())
        .collect()
}

fn write_matrix(bundle: &mut Bundle, rel: &str, labels: &[String], m: &DMatrix<f64>) -> Result<(), CliError> {
    let header: Vec<&str> = std::iter::once("Asset").chain(labels.iter().map(String::as_str)).collect();
    write_csv(bundle, rel, &header, &matrix_rows(labels, m))
}

pub fn write_stats(bundle: &mut Bundle, panel: &ReturnPanel, c: &RunConfig) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for (k, asset) in panel.assets().iter().enumerate() {
        let rec = stats_record(&panel.column(k), c.ers_lag).map_err(|e| CliError::from(e).in_stage("stats"));
        let rec = rec.map_err(|e| CliError {
            message: format!("{asset}: {}", e.message),
            ..e
        })?;
        let (sp, kp) = moment_pvalues(&rec.moments);
        let band = |p: Option<f64>| p.map(Significance::from_pvalue).unwrap_or(Significance::NotSignificant);
        rows.push(vec![
            asset.clone(),
            sig6(rec.moments.mean * 100.0),
            sig6(rec.moments.variance * 100.0),
            star_cell(rec.moments.skewness, band(sp)),
            star_cell(rec.moments.excess_kurtosis, band(kp)),
            star_cell(Some(rec.jb_stat), Significance::from_pvalue(rec.jb_pvalue)),
            star_cell(Some(rec.ers.stat), rec.ers.band),
        ]);
    }
    write_csv(bundle, "stats/table1_descriptive.csv", &TABLE1_HEADER, &rows)?;

    let corr = correlation_matrix(panel, c.corr_method, c.significance).stage("stats")?;
    let labels = panel.assets();
    write_matrix(bundle, "stats/correlation.csv", labels, &corr.values)?;
    write_matrix(bundle, "stats/correlation_pvalues.csv", labels, &corr.pvalues)?;
    if c.charts {
        let title = format!("{} correlation (p >= {} masked)", corr.method, c.significance);
        bundle.write("stats/correlation_heatmap.svg", svg::heatmap(&title, labels, &corr.values, Some(&corr.insignificant)).as_bytes())?;
    }
    Ok(())
}

pub struct Connectedness {
    pub method: CorrMethod,
    pub records: Vec<WindowRecord>,
    pub averaged: AveragedSpillover,
}

fn rolling_config(c: &RunConfig, method: CorrMethod) -> RollingConfig {
    RollingConfig {
        window: c.window,
        step: c.step,
        lag: c.lag,
        corr_method: method,
        include_own_lag: c.include_own_lag,
    }
}

pub fn compute_connectedness(panel: &ReturnPanel, c: &RunConfig, method: CorrMethod) -> Result<Connectedness, CliError> {
    let records = rolling_connectedness(panel, &rolling_config(c, method)).stage("connectedness")?;
    let averaged = averaged_spillover(&records).stage("connectedness")?;
    Ok(Connectedness {
        method,
        records,
        averaged,
    })
}

fn index_row(date: NaiveDate, ind: Option<&DirectionalIndices>, k: usize) -> Vec<String> {
    let mut row = vec![date.to_string()];
    match ind {
        Some(i) => {
            row.extend([i.tci, i.tci_c, i.tci_l].map(sig6));
            for v in [&i.to, &i.from, &i.net] {
                row.extend(v.iter().map(|x| sig6(*x)));
            }
        }
        None => row.extend(std::iter::repeat_n(UNDEFINED.to_string(), 3 + 3 * k)),
    }
    row
}

pub fn write_connectedness(bundle: &mut Bundle, panel: &ReturnPanel, c: &RunConfig, conn: &Connectedness) -> Result<(), CliError> {
    let labels = panel.assets();
    let k = labels.len();
    let avg = &conn.averaged;
    let d = &avg.decomposition;
    write_matrix(bundle, "connectedness/averaged_total.csv", labels, &d.total())?;
    write_matrix(bundle, "connectedness/averaged_contemporaneous.csv", labels, &d.contemporaneous)?;
    write_matrix(bundle, "connectedness/averaged_lagged.csv", labels, &d.lagged)?;

    let ind = &avg.indices;
    let rows: Vec<Vec<String>> = (0..k)
        .map(|i| {
            let mut r = vec![labels[i].clone()];
            for v in [&ind.to, &ind.from, &ind.net, &ind.to_c, &ind.from_c, &ind.net_c, &ind.to_l, &ind.from_l, &ind.net_l] {
                r.push(sig6(v[i]));
            }
            r
        })
        .collect();
    let header = ["Asset", "TO", "FROM", "NET", "TO_C", "FROM_C", "NET_C", "TO_L", "FROM_L", "NET_L"];
    write_csv(bundle, "connectedness/averaged_directional.csv", &header, &rows)?;
    let tci_rows = vec![
        vec!["TCI".to_string(), sig6(ind.tci)],
        vec!["TCI_C".to_string(), sig6(ind.tci_c)],
        vec!["TCI_L".to_string(), sig6(ind.tci_l)],
        vec!["windows".to_string(), avg.n_windows.to_string()],
    ];
    write_csv(bundle, "connectedness/averaged_tci.csv", &["Measure", "Value"], &tci_rows)?;

    let mut header = vec!["date".to_string(), "tci".into(), "tci_c".into(), "tci_l".into()];
    for prefix in ["to", "from", "net"] {
        header.extend(labels.iter().map(|a| format!("{prefix}_{a}")));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = conn.records.iter().map(|r| index_row(r.end_date, r.result().map(|(_, i)| i), k)).collect();
    write_csv(bundle, "connectedness/rolling_indices.csv", &header, &rows)?;

    let mut npdc_rows = Vec::new();
    for r in &conn.records {
        if let Some((_, i)) = r.result() {
            for a in 0..k {
                for b in (a + 1)..k {
                    npdc_rows.push(vec![r.end_date.to_string(), labels[a].clone(), labels[b].clone(), sig6(i.npdc[(a, b)])]);
                }
            }
        }
    }
    write_csv(bundle, "connectedness/npdc.csv", &["date", "from", "to", "npdc"], &npdc_rows)?;

    for r in &conn.records {
        if let WindowOutcome::Gap { reason } = &r.outcome {
            bundle.push_metadata("connectedness_gaps", json!({"date": r.end_date.to_string(), "reason": reason.to_string()}));
        }
    }

    let network = export_network(&ind.npdc, labels, c.threshold).stage("connectedness")?;
    bundle.write("connectedness/network.dot", network.to_dot(sig6).as_bytes())?;
    bundle.write("connectedness/network.graphml", network.to_graphml(sig6).as_bytes())?;

    if c.charts {
        for (name, m) in [("total", d.total()), ("contemporaneous", d.contemporaneous.clone()), ("lagged", d.lagged.clone())] {
            let svg = svg::heatmap(&format!("Averaged {name} spillover (%)"), labels, &m, None);
            bundle.write(&format!("connectedness/heatmap_{name}.svg"), svg.as_bytes())?;
        }
        let dates: Vec<NaiveDate> = conn.records.iter().map(|r| r.end_date).collect();
        let pick = |f: &dyn Fn(&DirectionalIndices) -> f64| -> Vec<f64> {
            conn.records.iter().map(|r| r.result().map(|(_, i)| f(i)).unwrap_or(f64::NAN)).collect()
        };
        let tci = vec![
            ("TCI".to_string(), pick(&|i| i.tci)),
            ("TCI_C".to_string(), pick(&|i| i.tci_c)),
            ("TCI_L".to_string(), pick(&|i| i.tci_l)),
        ];
        bundle.write("connectedness/tci.svg", svg::line_chart("Total connectedness", "%", &dates, &tci).as_bytes())?;
        let net: Vec<(String, Vec<f64>)> = (0..k).map(|a| (labels[a].clone(), pick(&|i| i.net[a]))).collect();
        bundle.write("connectedness/net.svg", svg::line_chart("Net directional connectedness", "%", &dates, &net).as_bytes())?;
    }
    Ok(())
}

/// Rolling TCI under all three correlation measures, reusing `main` for its
/// own method.
pub fn write_robustness(bundle: &mut Bundle, panel: &ReturnPanel, c: &RunConfig, main: &Connectedness) -> Result<(), CliError> {
    let mut series: Vec<(CorrMethod, Vec<WindowRecord>)> = Vec::new();
    for method in CorrMethod::ALL {
        let records = if method == main.method {
            main.records.clone()
        } else {
            rolling_connectedness(panel, &rolling_config(c, method)).stage("robustness")?
        };
        series.push((method, records));
    }
    let dates: Vec<NaiveDate> = main.records.iter().map(|r| r.end_date).collect();
    let tci = |recs: &[WindowRecord]| -> Vec<f64> { recs.iter().map(|r| r.result().map(|(_, i)| i.tci).unwrap_or(f64::NAN)).collect() };
    let values: Vec<Vec<f64>> = series.iter().map(|(_, r)| tci(r)).collect();
    let rows: Vec<Vec<String>> = dates
        .iter()
        .enumerate()
        .map(|(t, d)| std::iter::once(d.to_string()).chain(values.iter().map(|v| sig6(v[t]))).collect())
        .collect();
    write_csv(bundle, "robustness/rolling_tci.csv", &["date", "pearson", "spearman", "kendall"], &rows)?;
    if c.charts {
        let named: Vec<(String, Vec<f64>)> = series.iter().map(|(m, _)| m.name().to_string()).zip(values).collect();
        bundle.write("robustness/rolling_tci.svg", svg::line_chart("TCI by correlation measure", "%", &dates, &named).as_bytes())?;
    }
    Ok(())
}

pub fn compute_covariance(bundle: &mut Bundle, panel: &ReturnPanel, c: &RunConfig) -> Result<ConditionalCovariances, CliError> {
    let cov = match c.estimator {
        EstimatorChoice::Ewma => ewma_covariance(panel, c.lambda, c.burn_in).stage("covariance")?,
        EstimatorChoice::Dcc => dcc_fit(panel).stage("covariance")?.covariances,
    };
    cov.validate().stage("covariance")?;
    bundle.set_metadata("estimator", &cov.estimator);
    for w in &cov.warnings {
        bundle.push_metadata("warnings", w);
    }
    Ok(cov)
}

pub fn write_covariance(bundle: &mut Bundle, cov: &ConditionalCovariances) -> Result<(), CliError> {
    let k = cov.n_assets();
    let mut rows = Vec::with_capacity(cov.len() * k * (k + 1) / 2);
    for (d, s) in cov.dates.iter().zip(&cov.sigmas) {
        for i in 0..k {
            for j in i..k {
                rows.push(vec![d.to_string(), cov.assets[i].clone(), cov.assets[j].clone(), sig6(s[(i, j)])]);
            }
        }
    }
    write_csv(bundle, "covariance/covariances.csv", &["date", "asset_i", "asset_j", "sigma"], &rows)
}

fn summary_row(label: Vec<String>, s: &SeriesSummary, he: &HedgeEffect) -> Vec<String> {
    let mut row = label;
    row.extend([s.mean, s.std_dev, s.q05, s.q95, he.he, he.pvalue].map(sig6));
    row
}

pub fn write_hedge(bundle: &mut Bundle, panel: &ReturnPanel, cov: &ConditionalCovariances) -> Result<(), CliError> {
    let table = hedge_table(panel, cov).stage("hedge")?;
    let ratios: Vec<Vec<String>> = table.iter().map(|h| summary_row(vec![h.label.clone()], &h.ratio_stats, &h.ratio_he)).collect();
    write_csv(bundle, "hedge/table2_hedge_ratios.csv", &TABLE2_HEADER, &ratios)?;
    let weights: Vec<Vec<String>> = table.iter().map(|h| summary_row(vec![h.label.clone()], &h.weight_stats, &h.weight_he)).collect();
    write_csv(bundle, "hedge/table2_bilateral_weights.csv", &TABLE2_HEADER, &weights)
}

pub fn write_portfolio(
    bundle: &mut Bundle,
    panel: &ReturnPanel,
    c: &RunConfig,
    cov: &ConditionalCovariances,
    conn: Option<&Connectedness>,
) -> Result<(), CliError> {
    let needs_pci = c.strategies.iter().any(|s| s.pci_variant().is_some());
    let conn = match conn {
        Some(conn) => Some(conn),
        None if needs_pci => return Err(CliError::config("strategies: connectedness strategies need rolling connectedness").in_stage("portfolio")),
        None => None,
    };
    // All strategies share one calendar starting when every input is available.
    let mut start = cov.dates[0];
    if let (true, Some(conn)) = (needs_pci, conn) {
        start = start.max(conn.records[0].end_date);
    }
    let grid: Vec<NaiveDate> = panel.dates().iter().copied().filter(|d| *d >= start).collect();
    let cov_seq = MatrixSequence::from_covariances(cov).on_dates(&grid);

    let mut table3 = Vec::new();
    let mut table4 = Vec::new();
    let mut cumulative: BTreeMap<NaiveDate, Vec<Option<f64>>> = BTreeMap::new();
    let mut weights_rows = Vec::new();
    let n = c.strategies.len();
    for (s_idx, &strategy) in c.strategies.iter().enumerate() {
        let stage = format!("portfolio ({})", strategy.key());
        let seq = match (strategy.pci_variant(), conn) {
            (Some(v), Some(conn)) => MatrixSequence::from_rolling(&conn.records, v).on_dates(&grid),
            _ => cov_seq.clone(),
        };
        let run = run_strategy(panel, &seq, strategy, c.long_only).stage(&stage)?;
        for (t, d) in run.trajectory.dates.iter().enumerate() {
            for (a, asset) in panel.assets().iter().enumerate() {
                weights_rows.push(vec![d.to_string(), strategy.tag().to_string(), asset.clone(), sig6(run.trajectory.weights[(t, a)])]);
            }
        }
        for row in allocation_table(&run, panel).stage(&stage)? {
            table3.push(summary_row(vec![strategy.tag().to_string(), row.asset.clone()], &row.weight, &row.he));
        }
        let rep = performance(&run.returns.values, c.alpha, c.annualize).stage(&stage)?;
        table4.push(vec![
            strategy.tag().to_string(),
            sig6(rep.mean),
            sig6(rep.std_dev),
            opt6(rep.sharpe_std),
            opt6(rep.sharpe_var),
            opt6(rep.sharpe_cvar),
        ]);
        for (t, d) in run.returns.dates.iter().enumerate() {
            cumulative.entry(*d).or_insert_with(|| vec![None; n])[s_idx] = Some(rep.cumulative[t + 1]);
        }
        for d in &run.carried_forward {
            bundle.push_metadata("portfolio_carried_forward", json!({"strategy": strategy.key(), "date": d.to_string()}));
        }
    }
    write_csv(bundle, "portfolio/table3_weights.csv", &TABLE3_HEADER, &table3)?;
    write_csv(bundle, "portfolio/table4_performance.csv", &TABLE4_HEADER, &table4)?;
    write_csv(bundle, "portfolio/weights.csv", &["date", "strategy", "asset", "weight"], &weights_rows)?;

    let tags: Vec<&str> = c.strategies.iter().map(|s| s.tag()).collect();
    let header: Vec<&str> = std::iter::once("date").chain(tags.iter().copied()).collect();
    let rows: Vec<Vec<String>> = cumulative
        .iter()
        .map(|(d, v)| std::iter::once(d.to_string()).chain(v.iter().map(|x| opt6(*x))).collect())
        .collect();
    write_csv(bundle, "portfolio/cumulative_returns.csv", &header, &rows)?;
    if c.charts {
        let dates: Vec<NaiveDate> = cumulative.keys().copied().collect();
        let series: Vec<(String, Vec<f64>)> = tags
            .iter()
            .enumerate()
            .map(|(s, tag)| (tag.to_string(), cumulative.values().map(|v| v[s].unwrap_or(f64::NAN)).collect()))
            .collect();
        bundle.write("portfolio/cumulative_returns.svg", svg::line_chart("Cumulative returns", "sum of log returns", &dates, &series).as_bytes())?;
    }
    Ok(())
}

/// Full pipeline into `c.output_dir`.
pub fn run_pipeline(c: &RunConfig) -> Result<(PathBuf, usize), CliError> {
    let panel = load_returns(c)?;
    let mut bundle = Bundle::create(&c.output_dir)?;
    stamp(&mut bundle, "run", c);
    write_stats(&mut bundle, &panel, c)?;
    let conn = compute_connectedness(&panel, c, c.corr_method)?;
    write_connectedness(&mut bundle, &panel, c, &conn)?;
    if c.robustness {
        write_robustness(&mut bundle, &panel, c, &conn)?;
    }
    let cov = compute_covariance(&mut bundle, &panel, c)?;
    write_covariance(&mut bundle, &cov)?;
    write_hedge(&mut bundle, &panel, &cov)?;
    write_portfolio(&mut bundle, &panel, c, &cov, Some(&conn))?;
    let count = bundle.artifacts().count() + 1;
    let path = bundle.finish()?;
    Ok((path, count))
}
