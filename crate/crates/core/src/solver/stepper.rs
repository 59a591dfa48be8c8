use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::norms::PairField;
use crate::spectral::{
    dealias_in_place, leray_project_in_place, remove_mean, FourierGrid, VectorSpectralField,
};

use super::config::{Integrator, SolverConfig, CFL_LIMIT};
use super::duhamel::duhamel_solve;
use super::rhs::nonlinear_rhs;

/// Solution snapshot.
#[derive(Clone, Debug)]
pub struct MHDState {
    pub t: f64,
    pub fields: PairField,
}

/// Diagnostics of one accepted step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    /// `sum_i (max|u_i| + max|b_i|) dt / dx` at the start of the step.
    pub cfl: f64,
}

impl StepInfo {
    pub fn cfl_exceeded(&self) -> bool {
        self.cfl > CFL_LIMIT
    }
}

/// Per-mode multipliers `exp(-kappa |k|^2 tau)`. Negative `tau` is allowed
/// here and used only inside quadrature formulas.
pub(crate) fn heat_factors(grid: &FourierGrid, kappa: f64, tau: f64) -> Vec<f64> {
    grid.k_squared().iter().map(|k2| (-kappa * k2 * tau).exp()).collect()
}

pub(crate) fn apply_factors(v: &mut VectorSpectralField, factors: &[f64]) {
    for c in v.components_mut() {
        for (z, f) in c.coeffs_mut().iter_mut().zip(factors) {
            *z *= *f;
        }
    }
}

/// Velocity and magnetic multipliers for one time offset.
pub(crate) struct PairFactors {
    u: Vec<f64>,
    b: Vec<f64>,
}

impl PairFactors {
    pub(crate) fn new(grid: &FourierGrid, mu: f64, nu: f64, tau: f64) -> Self {
        PairFactors {
            u: heat_factors(grid, mu, tau),
            b: heat_factors(grid, nu, tau),
        }
    }

    pub(crate) fn apply(&self, p: &PairField) -> PairField {
        let mut out = p.clone();
        self.apply_in_place(&mut out);
        out
    }

    pub(crate) fn apply_in_place(&self, p: &mut PairField) {
        apply_factors(&mut p.u, &self.u);
        apply_factors(&mut p.b, &self.b);
    }
}

/// Exact heat flow `e^{kappa tau Lap} f`.
pub fn heat_semigroup(f: &VectorSpectralField, tau: f64, kappa: f64) -> Result<VectorSpectralField> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "heat semigroup time must be finite and >= 0, got {tau}"
        )));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "diffusivity must be positive, got {kappa}"
        )));
    }
    let mut out = f.clone();
    apply_factors(&mut out, &heat_factors(f.grid(), kappa, tau));
    Ok(out)
}

/// Heat flow of a pair with viscosity `mu` on `u` and resistivity `nu` on `b`.
pub fn heat_semigroup_pair(f: &PairField, tau: f64, mu: f64, nu: f64) -> Result<PairField> {
    Ok(PairField {
        u: heat_semigroup(&f.u, tau, mu)?,
        b: heat_semigroup(&f.b, tau, nu)?,
    })
}

/// Projects, optionally dealiases and removes the mean of initial data.
pub fn prepare_initial(config: &SolverConfig, fields: &PairField) -> Result<MHDState> {
    if fields.grid() != &config.grid {
        return Err(Error::GridMismatch(
            "initial data and solver config use different grids".into(),
        ));
    }
    Ok(MHDState {
        t: 0.0,
        fields: restore_invariants(fields, config.dealias),
    })
}

pub(crate) fn restore_invariants(p: &PairField, dealias: bool) -> PairField {
    let mut out = p.clone();
    restore_invariants_in_place(&mut out, dealias);
    out
}

pub(crate) fn restore_invariants_in_place(p: &mut PairField, dealias: bool) {
    for v in [&mut p.u, &mut p.b] {
        if dealias {
            for c in v.components_mut() {
                dealias_in_place(c);
            }
        }
        leray_project_in_place(v);
        remove_mean(v);
    }
}

fn pair_coeffs_mut(p: &mut PairField) -> impl Iterator<Item = &mut [Complex64]> {
    p.u.components_mut()
        .iter_mut()
        .chain(p.b.components_mut())
        .map(|c| c.coeffs_mut())
}

fn pair_coeffs(p: &PairField) -> impl Iterator<Item = &[Complex64]> {
    p.u.components().iter().chain(p.b.components()).map(|c| c.coeffs())
}

fn copy_into(dst: &mut PairField, src: &PairField) {
    for (d, s) in pair_coeffs_mut(dst).zip(pair_coeffs(src)) {
        d.copy_from_slice(s);
    }
}

/// `dst = alpha dst + other`
fn scale_then_add(dst: &mut PairField, alpha: f64, other: &PairField) {
    for (d, s) in pair_coeffs_mut(dst).zip(pair_coeffs(other)) {
        for (a, b) in d.iter_mut().zip(s) {
            *a = *a * alpha + b;
        }
    }
}

fn nonlinear(config: &SolverConfig, p: &PairField) -> Result<(PairField, f64)> {
    let terms = nonlinear_rhs(p, config.dealias)?;
    let speed: f64 = terms.max_u.iter().zip(&terms.max_b).map(|(a, b)| a + b).sum();
    Ok((PairField { u: terms.nu, b: terms.nb }, speed))
}

fn max_speed(p: &PairField) -> f64 {
    let sup = |v: &VectorSpectralField| -> f64 {
        v.to_physical()
            .iter()
            .map(|c| c.iter().fold(0.0f64, |m, x| m.max(x.abs())))
            .sum()
    };
    sup(&p.u) + sup(&p.b)
}

/// Advances `state` by `config.dt`.
///
/// The integrating-factor RK4 stepper treats the diffusion exactly, with
/// `H = e^{dt/2 Lap}` and `F = H^2` (viscosity on `u`, resistivity on `b`):
///
/// ```text
/// a = N(v)
/// b = N(H (v + dt/2 a))
/// c = N(H v + dt/2 b)
/// d = N(F v + dt H c)
/// v' = F v + dt/6 (F a + 2 H b + 2 H c + d)
/// ```
///
/// The result is re-projected and its mean removed. With the nonlinearity
/// switched off this is exactly `F v`.
pub fn step(config: &SolverConfig, state: &MHDState) -> Result<(MHDState, StepInfo)> {
    Stepper::new(config).step(state)
}

/// A stepper for one configuration, holding the diffusion multipliers.
pub(crate) struct Stepper<'a> {
    config: &'a SolverConfig,
    half: PairFactors,
    full: PairFactors,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(config: &'a SolverConfig) -> Self {
        let (grid, mu, nu, dt) = (&config.grid, config.mu, config.nu, config.dt);
        Stepper {
            config,
            half: PairFactors::new(grid, mu, nu, dt / 2.0),
            full: PairFactors::new(grid, mu, nu, dt),
        }
    }

    pub(crate) fn step(&self, state: &MHDState) -> Result<(MHDState, StepInfo)> {
        let config = self.config;
        let dt = config.dt;
        let v = &state.fields;
        let (mut next, speed) = match (config.integrator, config.nonlinear) {
            (_, false) => (self.full.apply(v), max_speed(v)),
            (Integrator::IfRk4, true) => self.if_rk4(v)?,
            (Integrator::DuhamelPicard, true) => {
                let speed = max_speed(v);
                let out = duhamel_solve(
                    config,
                    state,
                    dt,
                    config.picard_iterations,
                    config.picard_panels,
                )?;
                (out.state.fields, speed)
            }
        };
        let info = StepInfo {
            cfl: speed * dt / config.grid.spacing(),
        };
        if config.abort_on_cfl && info.cfl_exceeded() {
            return Err(Error::Numerical(format!(
                "CFL number {:.3} exceeds {CFL_LIMIT} at t = {}",
                info.cfl, state.t
            )));
        }
        restore_invariants_in_place(&mut next, false);
        if !next.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite coefficients after the step from t = {}",
                state.t
            )));
        }
        Ok((
            MHDState {
                t: state.t + dt,
                fields: next,
            },
            info,
        ))
    }

    fn if_rk4(&self, v: &PairField) -> Result<(PairField, f64)> {
        let config = self.config;
        let dt = config.dt;
        let (half, full) = (&self.half, &self.full);

        let (mut acc, speed) = nonlinear(config, v)?;

        let mut v2 = v.clone();
        v2.axpy(dt / 2.0, &acc);
        half.apply_in_place(&mut v2);
        let (kb, _) = nonlinear(config, &v2)?;

        let mut v3 = v2;
        copy_into(&mut v3, v);
        half.apply_in_place(&mut v3);
        v3.axpy(dt / 2.0, &kb);
        let (kc, _) = nonlinear(config, &v3)?;

        let fv = full.apply(v);
        let mut v4 = v3;
        copy_into(&mut v4, &kc);
        half.apply_in_place(&mut v4);
        scale_then_add(&mut v4, dt, &fv);
        let (kd, _) = nonlinear(config, &v4)?;

        half.apply_in_place(&mut acc);
        acc.axpy(2.0, &kb);
        acc.axpy(2.0, &kc);
        half.apply_in_place(&mut acc);
        acc.axpy(1.0, &kd);

        let mut out = fv;
        out.axpy(dt / 6.0, &acc);
        Ok((out, speed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::{random_band_pair, sample_rng, BandSpec};
    use crate::norms::{divergence_ratio, hs_norm};
    use crate::spectral::{make_grid, SpectralField};
    use std::f64::consts::PI;

    fn diff(a: &PairField, b: &PairField) -> f64 {
        let mut d = a.clone();
        d.axpy(-1.0, b);
        hs_norm(&d, 0.0).unwrap()
    }

    fn smooth_state(n: usize, amp: f64) -> (SolverConfig, MHDState) {
        let g = make_grid(2, n, 2.0 * PI).unwrap();
        let band = BandSpec { k_min: 1.0, k_max: 4.0, slope: 2.0 };
        let p = random_band_pair(&g, &band, amp, &mut sample_rng(11, 0)).unwrap();
        let cfg = SolverConfig::new(g, 0.02, 0.03, 0.01, 0.1).unwrap();
        let s = prepare_initial(&cfg, &p).unwrap();
        (cfg, s)
    }

    #[test]
    fn linear_step_is_the_semigroup() {
        let (mut cfg, s) = smooth_state(32, 1.0);
        cfg.nonlinear = false;
        let (next, _) = step(&cfg, &s).unwrap();
        let exact = heat_semigroup_pair(&s.fields, cfg.dt, cfg.mu, cfg.nu).unwrap();
        let rel = diff(&next.fields, &exact) / hs_norm(&exact, 0.0).unwrap();
        assert!(rel <= 1e-13, "{rel}");
    }

    #[test]
    fn semigroup_rejects_bad_arguments() {
        let g = make_grid(2, 8, 1.0).unwrap();
        let v = VectorSpectralField::zeros(&g);
        assert!(heat_semigroup(&v, -1e-3, 1.0).is_err());
        assert!(heat_semigroup(&v, 1.0, 0.0).is_err());
        assert!(heat_semigroup(&v, 0.0, 1.0).is_ok());
    }

    #[test]
    fn semigroup_single_mode_factor() {
        let g = make_grid(2, 16, 2.0 * PI).unwrap();
        let f = SpectralField::from_fn(&g, |x| (2.0 * x[0]).cos());
        let v = VectorSpectralField::new(vec![SpectralField::zeros(&g), f]).unwrap();
        let w = heat_semigroup(&v, 0.25, 1.0).unwrap();
        let ratio = hs_norm(&w, 0.0).unwrap() / hs_norm(&v, 0.0).unwrap();
        assert!((ratio - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn pure_b_mode_decays_exponentially() {
        let g = make_grid(2, 16, 2.0 * PI).unwrap();
        let b = VectorSpectralField::from_fn(&g, |x, c| if c == 0 { (3.0 * x[1]).sin() } else { 0.0 });
        let p = PairField::new(VectorSpectralField::zeros(&g), b).unwrap();
        let cfg = SolverConfig::new(g, 0.1, 0.05, 0.01, 0.1).unwrap();
        let mut s = prepare_initial(&cfg, &p).unwrap();
        let e0 = hs_norm(&s.fields, 0.0).unwrap();
        for _ in 0..10 {
            s = step(&cfg, &s).unwrap().0;
        }
        let expect = e0 * (-0.05 * 9.0 * s.t).exp();
        assert!((hs_norm(&s.fields, 0.0).unwrap() - expect).abs() < 1e-13 * e0);
    }

    #[test]
    fn fourth_order_self_convergence() {
        let (mut cfg, s0) = smooth_state(32, 2.0);
        let horizon = 0.2;
        let run = |cfg: &SolverConfig| {
            let mut s = s0.clone();
            for _ in 0..(horizon / cfg.dt).round() as usize {
                s = step(cfg, &s).unwrap().0;
            }
            s.fields
        };
        cfg.dt = horizon / 80.0;
        let reference = run(&cfg);
        let mut errs = Vec::new();
        for steps in [5.0, 10.0, 20.0] {
            cfg.dt = horizon / steps;
            errs.push(diff(&run(&cfg), &reference));
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 4.0).abs() < 1.0, "order {order} from {errs:?}");
        }
    }

    #[test]
    fn steps_preserve_solenoidality() {
        let (cfg, mut s) = smooth_state(32, 2.0);
        for _ in 0..10 {
            s = step(&cfg, &s).unwrap().0;
            assert!(divergence_ratio(&s.fields.u) <= 1e-10);
            assert!(divergence_ratio(&s.fields.b) <= 1e-10);
            assert_eq!(s.fields.u.component(0).coeffs()[0].norm(), 0.0);
        }
    }

    #[test]
    fn cfl_abort_on_request() {
        let (mut cfg, s) = smooth_state(32, 50.0);
        cfg.dt = 0.5;
        cfg.abort_on_cfl = true;
        let err = step(&cfg, &s).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
