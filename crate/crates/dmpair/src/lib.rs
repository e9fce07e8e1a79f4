//! Scenario runner for `dmpair-core`: loads JSON scenarios, runs the
//! requested checks in parallel and writes CSV reports.

pub mod checks;
pub mod report;
pub mod scenario;

use std::fs;
use std::path::Path;

use anyhow::Context as _;
use dmpair_core::{Integrator, Resolution};

pub use checks::{run_checks, Outcome, Row};
pub use scenario::{load, LoadError, Scenario};

/// Environment variable capping the worker count.
pub const THREADS_VAR: &str = "DMPAIR_THREADS";

/// Worker count from `DMPAIR_THREADS`; `None` leaves rayon's default.
pub fn threads_from_env() -> anyhow::Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Ok(s) => {
            let n: usize = s.trim().parse().with_context(|| format!("{THREADS_VAR}={s:?} is not a thread count"))?;
            anyhow::ensure!(n > 0, "{THREADS_VAR} must be at least 1");
            Ok(Some(n))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Runs `f` on a pool sized by `DMPAIR_THREADS`.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads_from_env()? {
        b = b.num_threads(n);
    }
    Ok(b.build()?.install(f))
}

/// Resolution overrides taken from the command line.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    pub panels_2d: Option<usize>,
    pub panels_1d: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

impl Settings {
    pub fn integrator(&self) -> Integrator {
        let d = Resolution::default();
        Integrator::new(Resolution {
            panels_1d: self.panels_1d.unwrap_or(d.panels_1d),
            panels_2d: self.panels_2d.unwrap_or(d.panels_2d),
            ..d
        })
    }

    /// Loads a scenario and applies `--tol`.
    pub fn load(&self, path: &Path) -> Result<Scenario, LoadError> {
        let mut sc = load(path, self.seed)?;
        if let Some(t) = self.tol {
            sc.tol.quadrature = t;
        }
        Ok(sc)
    }
}

/// Runs every check and writes `report.csv` and `convergence.csv` into
/// `out`. Returns the outcome so the caller can pick the exit status.
pub fn run_to_dir(sc: &Scenario, settings: &Settings, out: &Path) -> anyhow::Result<Outcome> {
    let q = settings.integrator();
    let res = q.resolution().clone();
    let outcome = with_pool(|| run_checks(sc, q))?;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let header = report::header(&sc.name, sc.seed, res.panels_1d, res.panels_2d);
    let f = fs::File::create(out.join("report.csv"))?;
    report::write_report(f, &header, &outcome.rows)?;
    let f = fs::File::create(out.join("convergence.csv"))?;
    report::write_convergence(f, &outcome.convergence)?;
    Ok(outcome)
}
