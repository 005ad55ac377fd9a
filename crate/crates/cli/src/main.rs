use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spillover::ingest::PricePanel;
use spillover::simulate::{simulate_var1, synthetic_fixture, VarSpec};
use spillover_cli::bundle::Bundle;
use spillover_cli::config::{validate_table, RunConfig};
use spillover_cli::exit::CliError;
use spillover_cli::pipeline::{self, run_pipeline};
use toml::{Table, Value};

#[derive(Parser)]
#[command(name = "spillover", version, about = "R² connectedness, hedging and connectedness-based portfolios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive statistics (Table 1) and the correlation matrix.
    Stats {
        #[command(flatten)]
        common: Common,
    },
    /// Averaged and rolling R² connectedness, NPDC and networks.
    Connectedness {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        conn: ConnArgs,
    },
    /// Conditional covariance matrices.
    Covariance {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        cov: CovArgs,
    },
    /// Pairwise hedge ratios and bilateral weights (Table 2).
    Hedge {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        cov: CovArgs,
    },
    /// Portfolio weights (Table 3) and performance (Table 4).
    Portfolio {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        conn: ConnArgs,
        #[command(flatten)]
        cov: CovArgs,
        #[command(flatten)]
        port: PortArgs,
    },
    /// Every stage into one bundle.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        conn: ConnArgs,
        #[command(flatten)]
        cov: CovArgs,
        #[command(flatten)]
        port: PortArgs,
    },
    /// Write a seeded synthetic price panel as CSV.
    Simulate {
        #[arg(long, value_enum, default_value_t = Kind::Fixture)]
        kind: Kind,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Return rows for the planted VAR panel.
        #[arg(long, default_value_t = 600)]
        rows: usize,
        /// Assets in the planted VAR panel.
        #[arg(long, default_value_t = 4)]
        assets: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// The 9-asset fixture with 1000 returns.
    Fixture,
    /// A VAR(1) where the first asset drives the next two.
    Planted,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Price CSV (repeatable).
    #[arg(long = "input")]
    inputs: Vec<String>,
    #[arg(long)]
    date_column: Option<String>,
    /// intersection or union-forward-fill.
    #[arg(long)]
    align: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    no_charts: bool,
}

#[derive(Args)]
struct ConnArgs {
    #[arg(long)]
    window: Option<i64>,
    #[arg(long)]
    step: Option<i64>,
    #[arg(long)]
    lag: Option<i64>,
    /// pearson, spearman or kendall.
    #[arg(long)]
    corr_method: Option<String>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    include_own_lag: bool,
    /// Skip the Spearman/Kendall rolling TCI comparison.
    #[arg(long)]
    no_robustness: bool,
}

#[derive(Args)]
struct CovArgs {
    /// ewma or dcc.
    #[arg(long)]
    estimator: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    burn_in: Option<i64>,
}

#[derive(Args)]
struct PortArgs {
    /// Comma-separated: mvp,mcp,mcop,mcop_c,mcop_l.
    #[arg(long)]
    strategies: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, overrides_with = "no_long_only")]
    long_only: bool,
    #[arg(long, overrides_with = "long_only")]
    no_long_only: bool,
    #[arg(long, overrides_with = "no_annualize")]
    annualize: bool,
    #[arg(long, overrides_with = "annualize")]
    no_annualize: bool,
}

fn set(t: &mut Table, key: &str, v: Option<impl Into<Value>>) {
    if let Some(v) = v {
        t.insert(key.to_string(), v.into());
    }
}

fn flag(t: &mut Table, key: &str, on: bool, off: bool) {
    if on {
        t.insert(key.into(), Value::Boolean(true));
    } else if off {
        t.insert(key.into(), Value::Boolean(false));
    }
}

impl Common {
    fn apply(&self, t: &mut Table) {
        if !self.inputs.is_empty() {
            t.insert("inputs".into(), Value::Array(self.inputs.iter().cloned().map(Value::String).collect()));
        }
        set(t, "date_column", self.date_column.clone());
        set(t, "align", self.align.clone());
        set(t, "output_dir", self.out.clone());
        flag(t, "charts", false, self.no_charts);
    }
}

impl ConnArgs {
    fn apply(&self, t: &mut Table) {
        set(t, "window", self.window);
        set(t, "step", self.step);
        set(t, "lag", self.lag);
        set(t, "corr_method", self.corr_method.clone());
        set(t, "threshold", self.threshold);
        flag(t, "include_own_lag", self.include_own_lag, false);
        flag(t, "robustness", false, self.no_robustness);
    }
}

impl CovArgs {
    fn apply(&self, t: &mut Table) {
        set(t, "estimator", self.estimator.clone());
        set(t, "lambda", self.lambda);
        set(t, "burn_in", self.burn_in);
    }
}

impl PortArgs {
    fn apply(&self, t: &mut Table) {
        if let Some(s) = &self.strategies {
            let list = s.split(',').map(|x| Value::String(x.trim().to_string())).collect();
            t.insert("strategies".into(), Value::Array(list));
        }
        set(t, "alpha", self.alpha);
        flag(t, "long_only", self.long_only, self.no_long_only);
        flag(t, "annualize", self.annualize, self.no_annualize);
    }
}

/// Config file first, then flags on top.
fn resolve(common: &Common, apply: impl FnOnce(&mut Table)) -> Result<RunConfig, CliError> {
    let mut table = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            text.parse::<Table>()
                .map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message())))?
        }
        None => Table::new(),
    };
    common.apply(&mut table);
    apply(&mut table);
    validate_table(&table).map_err(|errors| {
        let lines: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
        CliError::config(format!("invalid configuration:\n  {}", lines.join("\n  ")))
    })
}

fn single_stage(
    command: &str,
    c: &RunConfig,
    body: impl FnOnce(&mut Bundle, &spillover::ReturnPanel) -> Result<(), CliError>,
) -> Result<(PathBuf, usize), CliError> {
    let panel = pipeline::load_returns(c)?;
    let mut bundle = Bundle::create(&c.output_dir)?;
    pipeline::stamp(&mut bundle, command, c);
    body(&mut bundle, &panel)?;
    let count = bundle.artifacts().count() + 1;
    Ok((bundle.finish()?, count))
}

fn write_prices(panel: &PricePanel, out: &Path) -> Result<(), CliError> {
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(out)
        .map_err(|e| CliError::io(out, e))?;
    let header = std::iter::once("date".to_string()).chain(panel.assets().iter().cloned());
    w.write_record(header).map_err(|e| CliError::io(out, e))?;
    for (t, d) in panel.dates().iter().enumerate() {
        let row = std::iter::once(d.to_string()).chain((0..panel.n_assets()).map(|k| format!("{}", panel.prices()[(t, k)])));
        w.write_record(row).map_err(|e| CliError::io(out, e))?;
    }
    w.flush().map_err(|e| CliError::io(out, e))
}

fn simulate(kind: Kind, seed: u64, rows: usize, assets: usize, out: &Path) -> Result<(), CliError> {
    let panel = match kind {
        Kind::Fixture => synthetic_fixture(seed),
        Kind::Planted => {
            if assets < 3 || rows < 2 {
                return Err(CliError::config("simulate: the planted panel needs at least 3 assets and 2 rows"));
            }
            let returns = simulate_var1(&VarSpec::planted(assets), rows, seed)?;
            let r = returns.returns();
            let mut prices = nalgebra::DMatrix::from_element(rows + 1, assets, 100.0);
            for t in 0..rows {
                for k in 0..assets {
                    prices[(t + 1, k)] = prices[(t, k)] * r[(t, k)].exp();
                }
            }
            let first = returns.dates()[0];
            let dates = std::iter::once(first - chrono::Days::new(1)).chain(returns.dates().iter().copied()).collect();
            PricePanel::new(dates, returns.assets().to_vec(), prices)?
        }
    };
    write_prices(&panel, out)
}

fn execute(cli: Cli) -> Result<String, CliError> {
    let report = |(path, n): (PathBuf, usize)| format!("wrote {n} artifacts to {}", path.display());
    match cli.command {
        Command::Stats { common } => {
            let c = resolve(&common, |_| {})?;
            single_stage("stats", &c, |b, p| pipeline::write_stats(b, p, &c)).map(report)
        }
        Command::Connectedness { common, conn } => {
            let c = resolve(&common, |t| conn.apply(t))?;
            single_stage("connectedness", &c, |b, p| {
                let result = pipeline::compute_connectedness(p, &c, c.corr_method)?;
                pipeline::write_connectedness(b, p, &c, &result)?;
                if c.robustness {
                    pipeline::write_robustness(b, p, &c, &result)?;
                }
                Ok(())
            })
            .map(report)
        }
        Command::Covariance { common, cov } => {
            let c = resolve(&common, |t| cov.apply(t))?;
            single_stage("covariance", &c, |b, p| {
                let sigma = pipeline::compute_covariance(b, p, &c)?;
                pipeline::write_covariance(b, &sigma)
            })
            .map(report)
        }
        Command::Hedge { common, cov } => {
            let c = resolve(&common, |t| cov.apply(t))?;
            single_stage("hedge", &c, |b, p| {
                let sigma = pipeline::compute_covariance(b, p, &c)?;
                pipeline::write_hedge(b, p, &sigma)
            })
            .map(report)
        }
        Command::Portfolio { common, conn, cov, port } => {
            let c = resolve(&common, |t| {
                conn.apply(t);
                cov.apply(t);
                port.apply(t);
            })?;
            single_stage("portfolio", &c, |b, p| {
                let sigma = pipeline::compute_covariance(b, p, &c)?;
                let needs_pci = c.strategies.iter().any(|s| s.pci_variant().is_some());
                let result = if needs_pci {
                    Some(pipeline::compute_connectedness(p, &c, c.corr_method)?)
                } else {
                    None
                };
                pipeline::write_portfolio(b, p, &c, &sigma, result.as_ref())
            })
            .map(report)
        }
        Command::Run { common, conn, cov, port } => {
            let c = resolve(&common, |t| {
                conn.apply(t);
                cov.apply(t);
                port.apply(t);
            })?;
            run_pipeline(&c).map(report)
        }
        Command::Simulate {
            kind,
            seed,
            rows,
            assets,
            out,
        } => {
            simulate(kind, seed, rows, assets, &out)?;
            Ok(format!("wrote {}", out.display()))
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
