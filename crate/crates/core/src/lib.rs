//! Pseudo-spectral incompressible MHD on periodic boxes, with tools to
//! check Sobolev and Gagliardo–Nirenberg inequalities and the decay of
//! Sobolev and Lebesgue norms along computed solutions.
//!
//! ```
//! use mhdk::spectral::make_grid;
//! use mhdk::init::{random_band_pair, sample_rng, BandSpec};
//! use mhdk::solver::{run, RunOptions, SolverConfig};
//! use mhdk::analysis::ledger_scan;
//!
//! let grid = make_grid(2, 32, 2.0 * std::f64::consts::PI)?;
//! let band = BandSpec { k_min: 1.0, k_max: 4.0, slope: 2.0 };
//! let data = random_band_pair(&grid, &band, 1.0, &mut sample_rng(1, 0))?;
//! let config = SolverConfig::new(grid, 0.02, 0.02, 1e-2, 0.2)?;
//! let traj = run(&config, &data, &RunOptions::default(), &mut ()).map_err(|a| a.error)?;
//! assert!(ledger_scan(&traj.series)?.max_relative < 1e-6);
//! # Ok::<(), mhdk::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
mod error;
pub mod inequalities;
pub mod init;
pub mod io;
pub mod norms;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/grids.md")]
    pub mod grids {}
    #[doc = include_str!("../../../book/src/norms.md")]
    pub mod norms {}
    #[doc = include_str!("../../../book/src/inequalities.md")]
    pub mod inequalities {}
    #[doc = include_str!("../../../book/src/solver.md")]
    pub mod solver {}
    #[doc = include_str!("../../../book/src/decay.md")]
    pub mod decay {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}

/// Worker threads for parallel sections: `MHDK_WORKERS` if it holds a
/// positive integer, otherwise the available parallelism.
pub fn worker_count() -> usize {
    std::env::var("MHDK_WORKERS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `f` on a dedicated pool of `n` threads.
pub fn with_worker_count<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

pub(crate) fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    with_worker_count(worker_count(), f)
}
