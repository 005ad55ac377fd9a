//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use spillover::condcov::{dcc_fit, ewma_covariance, garch11_fit};
use spillover::hedge::{bilateral_weight_raw, clamp_weight, hedged_returns, hedging_effectiveness, paired_portfolio_returns};
use spillover::ingest::log_returns;
use spillover::portfolio::{mcop_weights, mcp_weights, mvp_weights, run_strategy, MatrixSequence, Strategy};
use spillover::r2conn::{
    averaged_spillover, relative_weights, rolling_connectedness, DirectionalIndices, RollingConfig, WindowRecord,
};
use spillover::simulate::{
    equicorrelated, simulate_garch11, simulate_gaussian, simulate_var1, synthetic_fixture, VarSpec,
};
use spillover::{CorrMethod, ReturnPanel};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| normal(rng))
}

fn fixture_returns() -> ReturnPanel {
    log_returns(&synthetic_fixture(1)).expect("fixture prices are positive")
}

/// R² of `y` on `x` with an intercept, from a least-squares fit on centered data.
fn ols_r_squared(x: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    let n = x.nrows();
    let mut xc = x.clone();
    for mut c in xc.column_iter_mut() {
        let m = c.sum() / n as f64;
        c.add_scalar_mut(-m);
    }
    let yc = y.add_scalar(-y.sum() / n as f64);
    let beta = xc.clone().svd(true, true).solve(&yc, 1e-14).expect("least squares");
    let resid = &yc - &xc * beta;
    1.0 - resid.norm_squared() / yc.norm_squared()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst_gap, mut min_share) = (0.0f64, f64::INFINITY);
    for _ in 0..500 {
        let m = rng.random_range(1..=17);
        let mixing = random_matrix(&mut rng, m, m);
        let x = random_matrix(&mut rng, 250, m) * mixing;
        let coef = DVector::from_fn(m, |_, _| normal(&mut rng));
        let noise = DVector::from_fn(250, |_, _| normal(&mut rng));
        let y = &x * coef + noise * rng.random_range(0.2..3.0);
        let rw = relative_weights(&x, &y, CorrMethod::Pearson).expect("relative weights");
        let total: f64 = rw.weights.iter().sum();
        worst_gap = worst_gap.max((total - ols_r_squared(&x, &y)).abs());
        min_share = rw.weights.iter().copied().fold(min_share, f64::min);
    }
    let elapsed = start.elapsed();
    outcome(
        worst_gap <= 1e-8 && min_share >= -1e-12 && elapsed < Duration::from_secs(30),
        format!("max |Σε - R²| = {worst_gap:.2e}, min ε = {min_share:.2e}, {elapsed:.1?}"),
    )
}

fn results(records: &[WindowRecord]) -> Vec<&DirectionalIndices> {
    records.iter().map(|r| r.result().map(|(_, i)| i).expect("window decomposes")).collect()
}

fn criterion_2() -> Outcome {
    let panel = fixture_returns();
    let config = RollingConfig {
        window: 200,
        step: 1,
        ..RollingConfig::default()
    };
    let start = Instant::now();
    let records = rolling_connectedness(&panel, &config).expect("rolling pass");
    let elapsed = start.elapsed();
    let k = panel.n_assets();
    let mut failures = 0;
    let mut worst_net = 0.0f64;
    for ind in results(&records) {
        let net_sum: f64 = ind.net.iter().sum();
        worst_net = worst_net.max(net_sum.abs());
        let split = ind.tci == ind.tci_c + ind.tci_l;
        let antisymmetric = &ind.npdc + ind.npdc.transpose() == DMatrix::zeros(k, k);
        let from_ok = ind.from.iter().all(|f| (0.0..=100.0).contains(f));
        if !(split && antisymmetric && from_ok && net_sum.abs() <= 1e-10) {
            failures += 1;
        }
    }
    outcome(
        failures == 0 && elapsed < Duration::from_secs(60),
        format!("{} windows, {failures} violating, max |ΣNET| = {worst_net:.2e}, {elapsed:.1?}", records.len()),
    )
}

fn criterion_3() -> Outcome {
    let hits = (0..50u64)
        .filter(|s| {
            let panel = simulate_var1(&VarSpec::planted(4), 600, 7000 + s).expect("simulation");
            let records = rolling_connectedness(&panel, &RollingConfig::default()).expect("rolling pass");
            let net = averaged_spillover(&records).expect("averages").indices.net;
            net[0] > 0.0 && net[1] < 0.0 && net[2] < 0.0
        })
        .count();
    outcome(hits >= 45, format!("roles recovered in {hits}/50 seeds"))
}

fn index_values(ind: &DirectionalIndices) -> Vec<f64> {
    let mut v = vec![ind.tci, ind.tci_c, ind.tci_l];
    for series in [&ind.to, &ind.from, &ind.net, &ind.to_c, &ind.from_c, &ind.net_c, &ind.to_l, &ind.from_l, &ind.net_l] {
        v.extend(series.iter());
    }
    v.extend(ind.npdc.iter());
    v
}

fn criterion_4() -> Outcome {
    let panel = fixture_returns();
    let k = panel.n_assets();
    let mut worst_scale = 0.0f64;
    let mut permutation_exact = true;
    let order: Vec<usize> = vec![4, 8, 0, 6, 2, 7, 1, 5, 3];
    for method in CorrMethod::ALL {
        let config = RollingConfig {
            step: 40,
            corr_method: method,
            ..RollingConfig::default()
        };
        let base = rolling_connectedness(&panel, &config).expect("rolling pass");
        let base = results(&base);
        for col in 0..k {
            let mut m = panel.returns().clone();
            m.column_mut(col).scale_mut(3.0);
            let scaled = ReturnPanel::new(panel.dates().to_vec(), panel.assets().to_vec(), m).expect("panel");
            let recs = rolling_connectedness(&scaled, &config).expect("rolling pass");
            for (a, b) in results(&recs).iter().zip(&base) {
                for (x, y) in index_values(a).iter().zip(index_values(b)) {
                    worst_scale = worst_scale.max((x - y).abs());
                }
            }
        }
        let permuted = panel.select_columns(&order);
        let recs = rolling_connectedness(&permuted, &config).expect("rolling pass");
        for (p, b) in results(&recs).iter().zip(&base) {
            let same_vec = |pv: &[f64], bv: &[f64]| (0..k).all(|i| pv[i] == bv[order[i]]);
            permutation_exact &= p.tci == b.tci && p.tci_c == b.tci_c && p.tci_l == b.tci_l;
            permutation_exact &= same_vec(p.to.as_slice(), b.to.as_slice())
                && same_vec(p.from.as_slice(), b.from.as_slice())
                && same_vec(p.net.as_slice(), b.net.as_slice());
            permutation_exact &= (0..k).all(|i| (0..k).all(|j| p.npdc[(i, j)] == b.npdc[(order[i], order[j])]));
        }
    }
    outcome(
        worst_scale <= 1e-9 && permutation_exact,
        format!("max change under ×3 scaling = {worst_scale:.2e}, permutation exact = {permutation_exact}"),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let garch_hits = (0..50u64)
        .filter(|s| {
            let series = simulate_garch11(0.05, 0.08, 0.90, 5000, 500 + s);
            garch11_fit(&series).is_ok_and(|f| (f.params.alpha + f.params.beta - 0.98).abs() <= 0.05)
        })
        .count();
    let dcc_hits = (0..50u64)
        .filter(|s| {
            let panel = simulate_gaussian(&equicorrelated(3, 0.5, 0.01), 1000, 900 + s).expect("simulation");
            dcc_fit(&panel).is_ok_and(|f| f.a <= 0.05)
        })
        .count();
    let elapsed = start.elapsed();
    outcome(
        garch_hits >= 40 && dcc_hits >= 40 && elapsed < Duration::from_secs(300),
        format!("GARCH α+β within ±0.05 in {garch_hits}/50, DCC a ≤ 0.05 in {dcc_hits}/50, {elapsed:.1?}"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut outside = 0usize;
    for _ in 0..1_000_000 {
        let a = random_matrix(&mut rng, 2, 2);
        let s = &a * a.transpose();
        let w = bilateral_weight_raw(s[(0, 0)], s[(0, 1)], s[(1, 1)]).map(clamp_weight).unwrap_or(0.5);
        if !(0.0..=1.0).contains(&w) {
            outside += 1;
        }
    }

    let mut r = DMatrix::zeros(300, 2);
    for t in 0..300 {
        let x = normal(&mut rng) * 0.01;
        r[(t, 0)] = x;
        r[(t, 1)] = x;
    }
    let panel = ReturnPanel::from_matrix(r).expect("panel");
    let dates: Vec<NaiveDate> = panel.dates().to_vec();
    let reference = |series: &spillover::ingest::DatedSeries| -> Vec<f64> {
        series.dates.iter().map(|d| panel.returns()[(panel.position(*d).expect("date"), 0)]).collect()
    };
    let hedged = hedged_returns(&panel, &dates, &vec![1.0; dates.len()], 0, 1).expect("hedged returns");
    let perfect = hedging_effectiveness(&hedged.values, &reference(&hedged)).expect("HE").he;
    let same = paired_portfolio_returns(&panel, &dates, &vec![1.0; dates.len()], 0, 1).expect("paired returns");
    let none = hedging_effectiveness(&same.values, &reference(&same)).expect("HE").he;
    outcome(
        outside == 0 && perfect == 1.0 && none == 0.0,
        format!("{outside} of 10⁶ weights outside [0, 1], perfect hedge HE = {perfect}, r_p ≡ r_i HE = {none}"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0usize;
    for _ in 0..10_000 {
        let k = rng.random_range(2..=10);
        let a = random_matrix(&mut rng, k, k);
        let sigma = &a * a.transpose() / k as f64;
        let w = mvp_weights(&sigma, false).expect("weights");
        let var = (w.transpose() * &sigma * &w)[(0, 0)];
        let min_diag = sigma.diagonal().min();
        if var > min_diag + 1e-10 {
            violations += 1;
        }
    }

    let mut equal = true;
    for k in 2..=10 {
        let target = 1.0 / k as f64;
        let exact = |w: DVector<f64>| w.iter().all(|&x| x == target);
        equal &= exact(mvp_weights(&DMatrix::identity(k, k), true).expect("weights"));
        equal &= exact(mcp_weights(&DMatrix::identity(k, k), true).expect("weights"));
        equal &= exact(mcop_weights(&DMatrix::identity(k, k), true).expect("weights"));
        for rho in [0.1, 0.3, 0.5, 0.8] {
            equal &= exact(mvp_weights(&equicorrelated(k, rho, 0.02), true).expect("weights"));
            equal &= exact(mcp_weights(&equicorrelated(k, rho, 0.02), true).expect("weights"));
            equal &= exact(mcop_weights(&equicorrelated(k, rho, 1.0), true).expect("weights"));
        }
    }

    let panel = fixture_returns();
    let cov = ewma_covariance(&panel, 0.94, 60).expect("EWMA");
    let records = rolling_connectedness(&panel, &RollingConfig::default()).expect("rolling pass");
    let start = cov.dates[0].max(records[0].end_date);
    let grid: Vec<NaiveDate> = panel.dates().iter().copied().filter(|d| *d >= start).collect();
    let mut worst_sum = 0.0f64;
    for strategy in Strategy::ALL {
        let seq = match strategy.pci_variant() {
            Some(v) => MatrixSequence::from_rolling(&records, v).on_dates(&grid),
            None => MatrixSequence::from_covariances(&cov).on_dates(&grid),
        };
        for long in [true, false] {
            let run = run_strategy(&panel, &seq, strategy, long).expect("strategy run");
            for row in run.trajectory.weights.row_iter() {
                worst_sum = worst_sum.max((row.sum() - 1.0).abs());
            }
        }
    }
    outcome(
        violations == 0 && equal && worst_sum <= 1e-12,
        format!("{violations} MVP variance violations, equal weights exact = {equal}, max |Σw - 1| = {worst_sum:.2e}"),
    )
}

fn spillover(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_spillover")).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&out.stderr).into_owned())
    }
}

fn read_tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).expect("readable bundle") {
            let path = entry.expect("entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = fs::read(&path).expect("readable file");
                files.insert(path.strip_prefix(root).expect("inside root").to_path_buf(), bytes);
            }
        }
    }
    files
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_path(path).expect("csv file");
    reader.records().map(|r| r.expect("csv row").iter().map(String::from).collect()).collect()
}

fn criterion_8(dir: &Path) -> Outcome {
    let input = dir.join("fixture.csv");
    let out = dir.join("bundle");
    let (input_s, out_s) = (input.to_str().expect("utf-8 path"), out.to_str().expect("utf-8 path"));
    if let Err(e) = spillover(&["simulate", "--kind", "fixture", "--seed", "1", "--out", input_s]) {
        return outcome(false, format!("simulate failed: {e}"));
    }
    if let Err(e) = spillover(&["run", "--input", input_s, "--out", out_s]) {
        return outcome(false, format!("first run failed: {e}"));
    }
    let first = read_tree(&out);
    if let Err(e) = spillover(&["run", "--input", input_s, "--out", out_s]) {
        return outcome(false, format!("second run failed: {e}"));
    }
    let identical = first == read_tree(&out);

    let header = |rel: &str| csv_rows(&out.join(rel)).into_iter().next().unwrap_or_default();
    let expect = |cols: &[&str]| cols.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let tables = [
        ("stats/table1_descriptive.csv", expect(&["Asset", "Mean (×10²)", "Variance (×10²)", "Skewness", "Ex.Kurtosis", "JB", "ERS"])),
        ("hedge/table2_hedge_ratios.csv", expect(&["Pair", "Mean", "Std. Dev.", "5%", "95%", "HE", "p-value"])),
        ("hedge/table2_bilateral_weights.csv", expect(&["Pair", "Mean", "Std. Dev.", "5%", "95%", "HE", "p-value"])),
        ("portfolio/table3_weights.csv", expect(&["Strategy", "Asset", "Mean", "Std.Dev.", "5%", "95%", "HE", "p-value"])),
        (
            "portfolio/table4_performance.csv",
            expect(&["Strategy", "Return", "StdDev", "Sharpe Ratio (StdDev)", "Sharpe Ratio (VaR)", "Sharpe Ratio (CVaR)"]),
        ),
    ];
    let shapes_ok = tables.iter().all(|(rel, cols)| &header(rel) == cols);
    let table4: Vec<String> = csv_rows(&out.join("portfolio/table4_performance.csv")).into_iter().skip(1).map(|r| r[0].clone()).collect();
    let strategies_ok = table4 == ["MVP", "MCP", "MCoP", "MCoP^C", "MCoP^L"];
    let table1_rows = csv_rows(&out.join("stats/table1_descriptive.csv")).len() - 1;
    let pairs = csv_rows(&out.join("hedge/table2_hedge_ratios.csv")).len() - 1;

    let dot = fs::read_to_string(out.join("connectedness/network.dot")).unwrap_or_default();
    let weights: Vec<f64> = dot
        .lines()
        .filter(|l| l.contains("->"))
        .filter_map(|l| l.split("weight=\"").nth(1)?.split('"').next()?.parse().ok())
        .collect();
    let edges = dot.lines().filter(|l| l.contains("->")).count();
    let edges_ok = edges > 0 && weights.len() == edges && weights.iter().all(|w| *w > 0.05);

    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("index.json")).unwrap_or_default()).unwrap_or_default();
    let artifacts = manifest["artifacts"].as_array().map_or(0, Vec::len);

    outcome(
        identical && shapes_ok && strategies_ok && table1_rows == 9 && pairs == 72 && edges_ok && artifacts >= 12,
        format!(
            "table columns match = {shapes_ok}, Table 4 strategies = {table4:?}, {edges} edges all > 0.05 = {edges_ok}, \
             {artifacts} artifacts, byte-identical re-run = {identical}"
        ),
    )
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

fn criterion_9(dir: &Path) -> Outcome {
    let rows = csv_rows(&dir.join("bundle/robustness/rolling_tci.csv"));
    if rows.len() < 3 || rows[0] != ["date", "pearson", "spearman", "kendall"] {
        return outcome(false, "robustness/rolling_tci.csv missing or malformed");
    }
    let column = |c: usize| -> Vec<f64> { rows[1..].iter().map(|r| r[c].parse().unwrap_or(f64::NAN)).collect() };
    let series = [column(1), column(2), column(3)];
    let names = ["pearson", "spearman", "kendall"];
    let mut worst = f64::INFINITY;
    let mut parts = Vec::new();
    for a in 0..3 {
        for b in (a + 1)..3 {
            let r = pearson(&series[a], &series[b]);
            worst = worst.min(r);
            parts.push(format!("{}/{} {r:.3}", names[a], names[b]));
        }
    }
    outcome(worst >= 0.8, format!("{} windows: {}", rows.len() - 1, parts.join(", ")))
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<(&str, Check)> = vec![
        ("R² oracle equivalence", Box::new(criterion_1)),
        ("connectedness identities on every window", Box::new(criterion_2)),
        ("planted transmitter/receiver recovery", Box::new(criterion_3)),
        ("scale and permutation invariance", Box::new(criterion_4)),
        ("GARCH and DCC estimator recovery", Box::new(criterion_5)),
        ("hedging algebra", Box::new(criterion_6)),
        ("portfolio optimality and corner cases", Box::new(criterion_7)),
        ("output fidelity and reproducibility", Box::new(|| criterion_8(dir.path()))),
        ("correlation-measure robustness", Box::new(|| criterion_9(dir.path()))),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{verdict}] {name}: {} ({:.1?})", n + 1, result.detail, start.elapsed());
        failed += usize::from(!result.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
