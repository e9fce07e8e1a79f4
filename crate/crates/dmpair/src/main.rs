use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand, ValueEnum};
use dmpair::checks::{Comparison, Context, Row};
use dmpair::report::{self, BalanceRow, PairRow};
use dmpair::{run_to_dir, with_pool, Scenario, Settings};
use dmpair_core::gaussgreen::{gauss_green, gauss_green_weakly_regular};
use dmpair_core::oracle::{weak_divergence, PiecewiseVectorField};
use dmpair_core::pairing::pairing_by_definition;
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "dmpair", version, about = "Pairings between divergence-measure fields and BV functions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// 2D panels per characteristic length.
    #[arg(long)]
    panels: Option<usize>,
    /// 1D panels per characteristic length.
    #[arg(long = "panels-1d")]
    panels_1d: Option<usize>,
    /// Tolerance for quadrature-based identities.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for random test functions; overrides the scenario's.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn settings(&self) -> Settings {
        Settings {
            panels_2d: self.panels,
            panels_1d: self.panels_1d,
            tol: self.tol,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the scenario's checks and write report.csv and convergence.csv.
    Run {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Brute-force weak divergence against the analytic measure.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Check `Div_x B(·, t)` at this level instead of `Div B(·, u)`.
        #[arg(long)]
        level: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The pairing by every route, one row per route and test function.
    Pair {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Both Gauss–Green balances on every scenario set.
    GaussGreen {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn sink(out: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn load(common: &Common) -> anyhow::Result<(Scenario, Settings)> {
    let s = common.settings();
    let sc = s.load(&common.scenario)?;
    Ok((sc, s))
}

fn print_failures(rows: &[Row]) {
    for r in rows.iter().filter(|r| !r.pass) {
        match &r.error {
            Some(e) => eprintln!("FAIL {}: {e}", r.name),
            None => eprintln!("FAIL {}: value {} reference {} residual {} tolerance {}", r.name, r.value, r.reference, r.residual, r.tolerance),
        }
    }
}

fn run(common: &Common, out: &Path) -> anyhow::Result<bool> {
    let (sc, s) = load(common)?;
    let outcome = run_to_dir(&sc, &s, out)?;
    print_failures(&outcome.rows);
    let failed = outcome.rows.iter().filter(|r| !r.pass).count();
    eprintln!("{}: {} checks, {failed} failed", sc.name, outcome.rows.len());
    Ok(outcome.all_pass())
}

fn oracle(common: &Common, level: Option<f64>, out: &Option<PathBuf>) -> anyhow::Result<bool> {
    let (sc, s) = load(common)?;
    let q = s.integrator();
    let tol = sc.tol.quadrature;
    let (v, exact) = match level {
        Some(t) => (PiecewiseVectorField::at_level(&sc.field, t), sc.field.div_big_b(t)?),
        None => {
            let ctx = Context::new(&sc, q.clone());
            (PiecewiseVectorField::composite(&sc.field, &sc.u), ctx.decomposition()?.composite_div)
        }
    };
    let rows: Vec<Row> = with_pool(|| {
        sc.phis
            .par_iter()
            .map(|p| {
                let r = weak_divergence(&v, &p.phi, &q).and_then(|w| Ok((w, exact.apply_with(&p.phi, &q)?)));
                match r {
                    Ok((w, e)) => Row::compare(format!("oracle/{}", p.id), w, e, tol, Comparison::Close),
                    Err(e) => Row {
                        name: format!("oracle/{}", p.id),
                        value: f64::NAN,
                        reference: f64::NAN,
                        residual: f64::NAN,
                        tolerance: tol,
                        pass: false,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    })?;
    let res = q.resolution();
    report::write_report(sink(out)?, &report::header(&sc.name, sc.seed, res.panels_1d, res.panels_2d), &rows)?;
    print_failures(&rows);
    Ok(rows.iter().all(|r| r.pass))
}

fn pair(common: &Common, out: &Option<PathBuf>) -> anyhow::Result<bool> {
    let (sc, s) = load(common)?;
    let ctx = Context::new(&sc, s.integrator());
    let rows = with_pool(|| -> anyhow::Result<Vec<PairRow>> {
        let mu = ctx.mu()?;
        let definition: Vec<f64> = sc
            .phis
            .par_iter()
            .map(|p| pairing_by_definition(&sc.field, &sc.u, &p.phi, &ctx.q))
            .collect::<Result<_, _>>()?;
        let mollified = ctx.mollified()?;
        let mut rows = Vec::new();
        for (k, p) in sc.phis.iter().enumerate() {
            for (route, v) in [("decomposition", mu[k]), ("definition", definition[k]), ("mollified", mollified[k].limit)] {
                rows.push(PairRow {
                    route,
                    phi: p.id.clone(),
                    value: v,
                    residual: v - mu[k],
                });
            }
        }
        Ok(rows)
    })??;
    report::write_pairs(sink(out)?, &rows)?;
    Ok(true)
}

fn balances(common: &Common, format: Format, out: &Option<PathBuf>) -> anyhow::Result<bool> {
    let (sc, s) = load(common)?;
    let q = s.integrator();
    let rows = with_pool(|| -> anyhow::Result<Vec<BalanceRow>> {
        let per_set: Vec<anyhow::Result<[BalanceRow; 2]>> = sc
            .sets
            .par_iter()
            .map(|set| {
                let g = gauss_green(&sc.field, &sc.u, &set.set, &q)?;
                let w = gauss_green_weakly_regular(&sc.field, &sc.u, &set.set, &q)?;
                Ok([BalanceRow::new(&set.id, "gauss-green", &g), BalanceRow::new(&set.id, "weakly-regular", &w)])
            })
            .collect();
        let mut rows = Vec::new();
        for r in per_set {
            rows.extend(r?);
        }
        Ok(rows)
    })??;
    let mut w = sink(out)?;
    match format {
        Format::Csv => report::write_balances_csv(w, &rows)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &rows)?;
            writeln!(w)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run { common, out } => run(common, out),
        Cmd::Oracle { common, level, out } => oracle(common, *level, out),
        Cmd::Pair { common, out } => pair(common, out),
        Cmd::GaussGreen { common, format, out } => balances(common, *format, out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
