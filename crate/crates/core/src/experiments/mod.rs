//! Experiment drivers and run-directory output.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

pub mod decay;
pub mod evolve;
pub mod lifespan;
pub mod phase;
pub mod testfn;

pub use decay::{run_decay_suite, run_diffusion_suite, DecayConfig, DecayReport, ProfileSpec};
pub use evolve::{run_evolve, EvolveConfig, EvolveReport};
pub use lifespan::{fit_sweep, run_lifespan_sweep, SweepConfig, SweepResult};
pub use phase::{emit_phase_diagram, PhaseDiagram};
pub use testfn::{evaluate_testfn_functional, TestFunctionSpec, TestFnReport};

/// Environment variable naming the output root.
pub const OUT_ENV: &str = "CRITEX_OUT";

/// Output root from `CRITEX_OUT`, or `./runs`.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

/// A fresh `<root>/<timestamp>-<kind>/` directory.
#[derive(Clone, Debug)]
pub struct RunDir {
    path: PathBuf,
}

impl RunDir {
    pub fn create(root: &Path, kind: &str) -> Result<Self> {
        fs::create_dir_all(root)?;
        let stamp = chrono::Utc::now().format("%Y-%m-%dT%H-%M-%S%.3fZ");
        let base = format!("{stamp}-{kind}");
        let mut path = root.join(&base);
        let mut k = 1;
        while path.exists() {
            path = root.join(format!("{base}-{k}"));
            k += 1;
        }
        fs::create_dir(&path)?;
        Ok(Self { path })
    }

    /// Use an existing directory as is.
    pub fn at(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        fs::create_dir_all(&path)?;
        Ok(Self { path })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(self.file(name))?);
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        fs::write(self.file(name), text)?;
        Ok(())
    }

    /// Wall time goes to its own file so the other artifacts stay reproducible.
    pub fn write_timing(&self, seconds: f64) -> Result<()> {
        self.write_json("timing.json", &serde_json::json!({ "wall_seconds": seconds }))
    }
}

/// Run `f` over `items` on a pool of `workers` threads, keeping input order.
pub fn in_pool<T, R, F>(workers: Option<usize>, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    use rayon::prelude::*;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::Domain("worker count must be positive".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Contract(format!("cannot build worker pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}
