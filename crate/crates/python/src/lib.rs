//! Python bindings. Matrices cross the boundary as lists of rows.

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use spillover::condcov::{self, ConditionalCovariances};
use spillover::r2conn::{self, DirectionalIndices, RollingConfig, SpilloverDecomposition};
use spillover::{hedge, portfolio, simulate, stats, CorrMethod};

fn py_err(e: spillover::Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err("all rows must have the same length"));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn method(name: &str) -> PyResult<CorrMethod> {
    name.parse().map_err(PyValueError::new_err)
}

fn decomposition_dict<'py>(py: Python<'py>, d: &SpilloverDecomposition) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("contemporaneous", rows(&d.contemporaneous))?;
    out.set_item("lagged", rows(&d.lagged))?;
    out.set_item("total", rows(&d.total()))?;
    out.set_item("r_squared", d.r_squared.clone())?;
    Ok(out)
}

fn indices_dict<'py>(py: Python<'py>, i: &DirectionalIndices) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("tci", i.tci)?;
    out.set_item("tci_c", i.tci_c)?;
    out.set_item("tci_l", i.tci_l)?;
    out.set_item("to", i.to.clone())?;
    out.set_item("from", i.from.clone())?;
    out.set_item("net", i.net.clone())?;
    out.set_item("npdc", rows(&i.npdc))?;
    Ok(out)
}

/// Dated return panel, one column per asset.
#[pyclass(name = "ReturnPanel", module = "spillover_py", frozen)]
struct PyReturnPanel {
    inner: spillover::ReturnPanel,
}

#[pymethods]
impl PyReturnPanel {
    /// `returns` is a list of rows. Without `dates`, consecutive days from
    /// 2000-01-01 are used; without `assets`, A1, A2, ...
    #[new]
    #[pyo3(signature = (returns, assets=None, dates=None))]
    fn new(returns: Vec<Vec<f64>>, assets: Option<Vec<String>>, dates: Option<Vec<String>>) -> PyResult<Self> {
        let m = matrix(&returns)?;
        let base = spillover::ReturnPanel::from_matrix(m.clone()).map_err(py_err)?;
        let assets = assets.unwrap_or_else(|| base.assets().to_vec());
        let dates = match dates {
            Some(ds) => ds
                .iter()
                .map(|d| NaiveDate::parse_from_str(d, "%Y-%m-%d").map_err(|e| PyValueError::new_err(format!("{d:?}: {e}"))))
                .collect::<PyResult<Vec<_>>>()?,
            None => base.dates().to_vec(),
        };
        let inner = spillover::ReturnPanel::new(dates, assets, m).map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Log returns of a price CSV with a date column.
    #[staticmethod]
    #[pyo3(signature = (path, date_column="date"))]
    fn from_price_csv(path: &str, date_column: &str) -> PyResult<Self> {
        let schema = spillover::ingest::CsvSchema {
            date_column: date_column.to_string(),
            price_columns: None,
        };
        let prices = spillover::ingest::load_price_file(std::path::Path::new(path), &schema).map_err(py_err)?;
        let inner = spillover::ingest::log_returns(&prices).map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Log returns of the 9-asset synthetic fixture.
    #[staticmethod]
    #[pyo3(signature = (seed=42))]
    fn synthetic_fixture(seed: u64) -> PyResult<Self> {
        let inner = spillover::ingest::log_returns(&simulate::synthetic_fixture(seed)).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn assets(&self) -> Vec<String> {
        self.inner.assets().to_vec()
    }

    #[getter]
    fn dates(&self) -> Vec<String> {
        self.inner.dates().iter().map(|d| d.to_string()).collect()
    }

    #[getter]
    fn returns(&self) -> Vec<Vec<f64>> {
        rows(self.inner.returns())
    }

    fn __len__(&self) -> usize {
        self.inner.n_obs()
    }

    fn __repr__(&self) -> String {
        format!("ReturnPanel({} rows × {} assets)", self.inner.n_obs(), self.inner.n_assets())
    }

    /// Whole-panel R² decomposition and its connectedness indices.
    #[pyo3(signature = (lag=1, corr_method="pearson", include_own_lag=false))]
    fn connectedness<'py>(
        &self,
        py: Python<'py>,
        lag: usize,
        corr_method: &str,
        include_own_lag: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let d = r2conn::decompose_window(&self.inner, lag, method(corr_method)?).map_err(py_err)?;
        let out = decomposition_dict(py, &d)?;
        out.set_item("indices", indices_dict(py, &r2conn::directional_indices(&d, include_own_lag))?)?;
        Ok(out)
    }

    /// One dict per window (`None` for a window that failed), plus the
    /// averaged decomposition under key `averaged`.
    #[pyo3(signature = (window=200, step=1, lag=1, corr_method="pearson", include_own_lag=false))]
    fn rolling<'py>(
        &self,
        py: Python<'py>,
        window: usize,
        step: usize,
        lag: usize,
        corr_method: &str,
        include_own_lag: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let config = RollingConfig {
            window,
            step,
            lag,
            corr_method: method(corr_method)?,
            include_own_lag,
        };
        let records = r2conn::rolling_connectedness(&self.inner, &config).map_err(py_err)?;
        let mut windows = Vec::with_capacity(records.len());
        for r in &records {
            windows.push(match r.result() {
                Some((_, i)) => {
                    let d = indices_dict(py, i)?;
                    d.set_item("date", r.end_date.to_string())?;
                    Some(d)
                }
                None => None,
            });
        }
        let avg = r2conn::averaged_spillover(&records).map_err(py_err)?;
        let out = PyDict::new(py);
        out.set_item("windows", windows)?;
        let averaged = decomposition_dict(py, &avg.decomposition)?;
        averaged.set_item("indices", indices_dict(py, &avg.indices)?)?;
        out.set_item("averaged", averaged)?;
        Ok(out)
    }

    /// EWMA conditional covariances, one K×K list per date after burn-in.
    #[pyo3(signature = (lam=condcov::DEFAULT_LAMBDA, burn_in=condcov::DEFAULT_BURN_IN))]
    fn ewma_covariance(&self, lam: f64, burn_in: usize) -> PyResult<Covariances> {
        let inner = condcov::ewma_covariance(&self.inner, lam, burn_in).map_err(py_err)?;
        Ok(Covariances { inner })
    }

    /// DCC-GARCH(1,1) conditional covariances.
    fn dcc_covariance(&self) -> PyResult<Covariances> {
        let inner = condcov::dcc_fit(&self.inner).map_err(py_err)?.covariances;
        Ok(Covariances { inner })
    }
}

/// Dated conditional covariance matrices.
#[pyclass(module = "spillover_py", frozen)]
struct Covariances {
    inner: ConditionalCovariances,
}

#[pymethods]
impl Covariances {
    #[getter]
    fn dates(&self) -> Vec<String> {
        self.inner.dates.iter().map(|d| d.to_string()).collect()
    }

    #[getter]
    fn matrices(&self) -> Vec<Vec<Vec<f64>>> {
        self.inner.sigmas.iter().map(rows).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `Σ_ij / Σ_jj` on every date.
    fn hedge_ratios(&self, i: usize, j: usize) -> PyResult<Vec<f64>> {
        hedge::hedge_ratio_series(&self.inner, i, j).map_err(py_err)
    }

    /// Clamped minimum-variance weight of `i` in an `i`/`j` pair on every date.
    fn bilateral_weights(&self, i: usize, j: usize) -> PyResult<Vec<f64>> {
        hedge::bilateral_weight_series(&self.inner, i, j).map_err(py_err)
    }
}

/// Relative-weights split of the R² of `y` on the columns of `x` (rows of
/// observations). Returns `(weights, r_squared)`.
#[pyfunction]
#[pyo3(signature = (x, y, corr_method="pearson"))]
fn relative_weights(x: Vec<Vec<f64>>, y: Vec<f64>, corr_method: &str) -> PyResult<(Vec<f64>, f64)> {
    let rw = r2conn::relative_weights(&matrix(&x)?, &DVector::from_vec(y), method(corr_method)?).map_err(py_err)?;
    Ok((rw.weights, rw.r_squared))
}

/// Mean, variance, skewness, excess kurtosis, Jarque-Bera and DF-GLS.
#[pyfunction]
fn describe<'py>(py: Python<'py>, series: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let rec = stats::stats_record(&series, stats::LagOrder::Auto).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("mean", rec.moments.mean)?;
    out.set_item("variance", rec.moments.variance)?;
    out.set_item("skewness", rec.moments.skewness)?;
    out.set_item("excess_kurtosis", rec.moments.excess_kurtosis)?;
    out.set_item("jb", rec.jb_stat)?;
    out.set_item("jb_pvalue", rec.jb_pvalue)?;
    out.set_item("ers", rec.ers.stat)?;
    out.set_item("ers_lag", rec.ers.lag)?;
    Ok(out)
}

/// GARCH(1,1) quasi-maximum likelihood: `(omega, alpha, beta, converged)`.
#[pyfunction]
fn garch11_fit(series: Vec<f64>) -> PyResult<(f64, f64, f64, bool)> {
    let f = condcov::garch11_fit(&series).map_err(py_err)?;
    Ok((f.params.omega, f.params.alpha, f.params.beta, f.converged))
}

/// `(he, p_value)` of a hedged position against holding the reference asset.
#[pyfunction]
fn hedging_effectiveness(portfolio: Vec<f64>, reference: Vec<f64>) -> PyResult<(f64, f64)> {
    let he = hedge::hedging_effectiveness(&portfolio, &reference).map_err(py_err)?;
    Ok((he.he, he.pvalue))
}

/// Portfolio weights for `strategy` in mvp, mcp or mcop. `matrix` is a
/// covariance matrix for mvp and mcp and a pairwise connectedness matrix for
/// mcop.
#[pyfunction]
#[pyo3(signature = (strategy, matrix, long_only=true))]
fn portfolio_weights(strategy: &str, matrix: Vec<Vec<f64>>, long_only: bool) -> PyResult<Vec<f64>> {
    let m = self::matrix(&matrix)?;
    let w = match strategy {
        "mvp" => portfolio::mvp_weights(&m, long_only),
        "mcp" => portfolio::mcp_weights(&m, long_only),
        "mcop" => portfolio::mcop_weights(&m, long_only),
        other => return Err(PyValueError::new_err(format!("unknown strategy {other:?} (expected mvp, mcp or mcop)"))),
    };
    Ok(w.map_err(py_err)?.iter().copied().collect())
}

/// Pairwise connectedness matrix from contemporaneous and lagged spillover
/// matrices; `variant` is total, contemporaneous or lagged.
#[pyfunction]
#[pyo3(signature = (contemporaneous, lagged, variant="total"))]
fn pairwise_connectedness(contemporaneous: Vec<Vec<f64>>, lagged: Vec<Vec<f64>>, variant: &str) -> PyResult<Vec<Vec<f64>>> {
    let d = SpilloverDecomposition::from_parts(matrix(&contemporaneous)?, matrix(&lagged)?).map_err(py_err)?;
    let v = match variant {
        "total" => r2conn::PciVariant::Total,
        "contemporaneous" => r2conn::PciVariant::Contemporaneous,
        "lagged" => r2conn::PciVariant::Lagged,
        other => return Err(PyValueError::new_err(format!("unknown variant {other:?}"))),
    };
    Ok(rows(&r2conn::pci_matrix(&d, v)))
}

/// Return, volatility and Sharpe ratios of a daily return series.
#[pyfunction]
#[pyo3(signature = (returns, alpha=portfolio::DEFAULT_ALPHA, annualize=true))]
fn performance<'py>(py: Python<'py>, returns: Vec<f64>, alpha: f64, annualize: bool) -> PyResult<Bound<'py, PyDict>> {
    let r = portfolio::performance(&returns, alpha, annualize).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("mean", r.mean)?;
    out.set_item("std_dev", r.std_dev)?;
    out.set_item("sharpe_std", r.sharpe_std)?;
    out.set_item("sharpe_var", r.sharpe_var)?;
    out.set_item("sharpe_cvar", r.sharpe_cvar)?;
    out.set_item("var", r.var)?;
    out.set_item("cvar", r.cvar)?;
    Ok(out)
}

#[pymodule]
fn spillover_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyReturnPanel>()?;
    m.add_class::<Covariances>()?;
    m.add_function(wrap_pyfunction!(relative_weights, m)?)?;
    m.add_function(wrap_pyfunction!(describe, m)?)?;
    m.add_function(wrap_pyfunction!(garch11_fit, m)?)?;
    m.add_function(wrap_pyfunction!(hedging_effectiveness, m)?)?;
    m.add_function(wrap_pyfunction!(portfolio_weights, m)?)?;
    m.add_function(wrap_pyfunction!(pairwise_connectedness, m)?)?;
    m.add_function(wrap_pyfunction!(performance, m)?)?;
    Ok(())
}
