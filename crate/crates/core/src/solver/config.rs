use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spectral::FourierGrid;

/// Advective stability bound on `sum_i (max|u_i| + max|b_i|) dt / dx`.
///
/// With 2/3 dealiasing the largest retained wavenumber is `(2 pi / 3) / dx`,
/// and RK4 is stable for purely imaginary eigenvalues up to `2 sqrt 2`, so
/// the sharp limit is about 1.35. The linear (diffusive) part is integrated
/// exactly and imposes no restriction.
pub const CFL_LIMIT: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    /// Integrating-factor (Lawson) RK4.
    IfRk4,
    /// One Duhamel/Picard solve per step.
    DuhamelPicard,
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Integrator::IfRk4 => "if_rk4",
            Integrator::DuhamelPicard => "duhamel_picard",
        })
    }
}

impl FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "if_rk4" => Ok(Integrator::IfRk4),
            "duhamel_picard" => Ok(Integrator::DuhamelPicard),
            _ => Err(Error::InvalidParameter(format!(
                "integrator must be if_rk4 or duhamel_picard, got `{s}`"
            ))),
        }
    }
}

/// Physical and numerical parameters of a run.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Viscosity.
    pub mu: f64,
    /// Resistivity.
    pub nu: f64,
    pub grid: FourierGrid,
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub dealias: bool,
    pub record_every: usize,
    /// Switches the quadratic terms off, leaving the exact heat flow.
    pub nonlinear: bool,
    /// Return an error instead of warning when [`CFL_LIMIT`] is exceeded.
    pub abort_on_cfl: bool,
    /// Picard iterates per step for [`Integrator::DuhamelPicard`].
    pub picard_iterations: usize,
    /// Simpson panels per step for [`Integrator::DuhamelPicard`].
    pub picard_panels: usize,
}

impl SolverConfig {
    pub fn new(grid: FourierGrid, mu: f64, nu: f64, dt: f64, t_end: f64) -> Result<Self> {
        let cfg = SolverConfig {
            mu,
            nu,
            grid,
            dt,
            t_end,
            integrator: Integrator::IfRk4,
            dealias: true,
            record_every: 1,
            nonlinear: true,
            abort_on_cfl: false,
            picard_iterations: 4,
            picard_panels: 2,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("mu", self.mu)?;
        positive("nu", self.nu)?;
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be >= 1".into()));
        }
        if self.picard_iterations == 0 || self.picard_panels < 2 {
            return Err(Error::InvalidParameter(
                "Picard solves need at least 1 iterate and 2 Simpson panels".into(),
            ));
        }
        Ok(())
    }

    /// Number of steps to reach `t_end`, rounding to the nearest step.
    pub fn n_steps(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }
}
