//! Time evolution of the incompressible MHD system
//!
//! ```text
//! u_t = mu  Lap u + P(-u.grad u + b.grad b)
//! b_t = nu  Lap b - u.grad b + b.grad u
//! div u = div b = 0
//! ```
//!
//! in Fourier space. The pressure is never formed: the Leray projection `P`
//! removes the gradient part of the velocity forcing. Two integrators are
//! provided, an integrating-factor RK4 stepper and a Picard iteration of the
//! mild (Duhamel) formulation, which serve as independent cross-checks.

mod checkpoint;
mod config;
mod duhamel;
mod rhs;
mod run;
mod stepper;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use config::{Integrator, SolverConfig, CFL_LIMIT};
pub use duhamel::{duhamel_solve, DuhamelOutcome};
pub use rhs::{cross_term_work, nonlinear_rhs, NonlinearTerms};
pub use run::{run, RunAborted, RunObserver, RunOptions, Trajectory};
pub use stepper::{heat_semigroup, heat_semigroup_pair, prepare_initial, step, MHDState, StepInfo};
