use std::fmt;

use crate::analysis::{detect_wraparound, NormSeries, SeriesRow, WRAPAROUND_THRESHOLD};
use crate::error::{Error, Result};
use crate::norms::{hs_norm, lq_norm, PairField};

use super::config::SolverConfig;
use super::stepper::{prepare_initial, MHDState, Stepper};

/// What [`run`] records besides the always-present columns.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Sobolev orders recorded as `hs:<s>` columns.
    pub s_list: Vec<f64>,
    /// Lebesgue exponents recorded as `lq:<q>` columns.
    pub q_list: Vec<f64>,
    /// Keep every recorded state in [`Trajectory::snapshots`].
    pub keep_snapshots: bool,
    /// Test each recorded state for boundary contact.
    pub track_wraparound: bool,
}

/// Hook invoked for each recorded state, for streaming output.
pub trait RunObserver {
    fn on_record(&mut self, _state: &MHDState, _step: usize) -> Result<()> {
        Ok(())
    }
}

impl RunObserver for () {}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub series: NormSeries,
    pub snapshots: Vec<MHDState>,
    pub final_state: MHDState,
    /// Time of the first record that touched the boundary layers.
    pub wraparound_time: Option<f64>,
    pub max_cfl: f64,
    /// Steps whose CFL number exceeded the limit.
    pub cfl_warnings: usize,
    pub steps: usize,
}

/// A failed run together with everything recorded before the failure.
#[derive(Debug)]
pub struct RunAborted {
    pub error: Error,
    pub partial: Trajectory,
}

impl fmt::Display for RunAborted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "run aborted after {} steps (t = {}): {}",
            self.partial.steps, self.partial.final_state.t, self.error
        )
    }
}

impl std::error::Error for RunAborted {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

struct Recorder<'a> {
    config: &'a SolverConfig,
    options: &'a RunOptions,
    traj: Trajectory,
    /// `(t, 2 mu ||Du||^2, 2 nu ||Db||^2)` at the previous step.
    last_rates: (f64, f64),
    acc: (f64, f64),
}

impl Recorder<'_> {
    fn rates(&self, p: &PairField) -> Result<(f64, f64)> {
        Ok((
            2.0 * self.config.mu * hs_norm(&p.u, 1.0)?.powi(2),
            2.0 * self.config.nu * hs_norm(&p.b, 1.0)?.powi(2),
        ))
    }

    fn advance(&mut self, next: &MHDState) -> Result<()> {
        let r = self.rates(&next.fields)?;
        let h = self.config.dt;
        self.acc.0 += 0.5 * h * (self.last_rates.0 + r.0);
        self.acc.1 += 0.5 * h * (self.last_rates.1 + r.1);
        self.last_rates = r;
        Ok(())
    }

    fn record(&mut self, state: &MHDState, observer: &mut dyn RunObserver, step: usize) -> Result<()> {
        let p = &state.fields;
        let row = SeriesRow {
            t: state.t,
            l2: hs_norm(p, 0.0)?,
            h1: hs_norm(p, 1.0)?,
            hs: self
                .options
                .s_list
                .iter()
                .map(|&s| hs_norm(p, s))
                .collect::<Result<_>>()?,
            lq: self
                .options
                .q_list
                .iter()
                .map(|&q| lq_norm(p, q))
                .collect::<Result<_>>()?,
            diss_u: self.acc.0,
            diss_b: self.acc.1,
        };
        self.traj.series.push(row)?;
        if self.options.track_wraparound
            && self.traj.wraparound_time.is_none()
            && detect_wraparound(p, WRAPAROUND_THRESHOLD)
        {
            self.traj.wraparound_time = Some(state.t);
        }
        if self.options.keep_snapshots {
            self.traj.snapshots.push(state.clone());
        }
        observer.on_record(state, step)
    }
}

/// Evolves `initial` to `config.t_end`.
///
/// The data are projected, dealiased (when enabled) and made mean-free
/// first. Records are taken at step 0, every `record_every` steps and at the
/// final step; the time of step `k` is `t0 + k dt`. Dissipation integrals are
/// accumulated with the trapezoid rule at every step.
///
/// On failure the returned [`RunAborted`] holds the trajectory up to the
/// last accepted step.
pub fn run(
    config: &SolverConfig,
    initial: &PairField,
    options: &RunOptions,
    observer: &mut dyn RunObserver,
) -> std::result::Result<Trajectory, Box<RunAborted>> {
    let mut state = match config.validate().and_then(|_| prepare_initial(config, initial)) {
        Ok(s) => s,
        Err(error) => {
            let grid = initial.grid();
            return Err(Box::new(RunAborted {
                error,
                partial: Trajectory {
                    series: NormSeries::new(&options.s_list, &options.q_list),
                    snapshots: Vec::new(),
                    final_state: MHDState { t: 0.0, fields: PairField::zeros(grid) },
                    wraparound_time: None,
                    max_cfl: 0.0,
                    cfl_warnings: 0,
                    steps: 0,
                },
            }));
        }
    };
    let mut rec = Recorder {
        config,
        options,
        traj: Trajectory {
            series: NormSeries::new(&options.s_list, &options.q_list),
            snapshots: Vec::new(),
            final_state: state.clone(),
            wraparound_time: None,
            max_cfl: 0.0,
            cfl_warnings: 0,
            steps: 0,
        },
        last_rates: (0.0, 0.0),
        acc: (0.0, 0.0),
    };
    let t0 = state.t;
    let n_steps = config.n_steps();
    let stepper = Stepper::new(config);
    let outcome = (|| -> Result<()> {
        rec.last_rates = rec.rates(&state.fields)?;
        rec.record(&state, observer, 0)?;
        for k in 1..=n_steps {
            let (mut next, info) = stepper.step(&state)?;
            next.t = t0 + k as f64 * config.dt;
            rec.traj.max_cfl = rec.traj.max_cfl.max(info.cfl);
            if info.cfl_exceeded() {
                rec.traj.cfl_warnings += 1;
            }
            rec.advance(&next)?;
            state = next;
            rec.traj.steps = k;
            if k % config.record_every == 0 || k == n_steps {
                rec.record(&state, observer, k)?;
            }
        }
        Ok(())
    })();
    rec.traj.final_state = state;
    match outcome {
        Ok(()) => Ok(rec.traj),
        Err(error) => Err(Box::new(RunAborted {
            error,
            partial: rec.traj,
        })),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::{random_band_pair, sample_rng, BandSpec};
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn zero_data_gives_zero_trajectory() {
        let g = make_grid(2, 16, 2.0 * PI).unwrap();
        let cfg = SolverConfig::new(g.clone(), 0.1, 0.1, 0.01, 0.05).unwrap();
        let tr = run(&cfg, &PairField::zeros(&g), &RunOptions::default(), &mut ()).unwrap();
        assert_eq!(tr.series.len(), 6);
        assert!(tr.series.l2.iter().all(|&v| v == 0.0));
        assert_eq!(tr.steps, 5);
    }

    #[test]
    fn records_on_cadence_and_at_the_end() {
        let g = make_grid(2, 16, 2.0 * PI).unwrap();
        let band = BandSpec { k_min: 1.0, k_max: 3.0, slope: 1.0 };
        let p = random_band_pair(&g, &band, 0.5, &mut sample_rng(2, 0)).unwrap();
        let mut cfg = SolverConfig::new(g, 0.1, 0.1, 0.01, 0.07).unwrap();
        cfg.record_every = 3;
        let opts = RunOptions { s_list: vec![2.0], q_list: vec![4.0], keep_snapshots: true, ..Default::default() };
        let tr = run(&cfg, &p, &opts, &mut ()).unwrap();
        let expect = [0.0, 0.03, 0.06, 0.07];
        assert_eq!(tr.series.len(), 4);
        for (a, b) in tr.series.times.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(tr.snapshots.len(), 4);
        tr.series.validate().unwrap();
    }

    #[test]
    fn heat_run_matches_mode_sum() {
        let g = make_grid(2, 16, 2.0 * PI).unwrap();
        let band = BandSpec { k_min: 1.0, k_max: 5.0, slope: 0.0 };
        let p = random_band_pair(&g, &band, 1.0, &mut sample_rng(4, 0)).unwrap();
        let mut cfg = SolverConfig::new(g.clone(), 0.05, 0.02, 0.01, 0.5).unwrap();
        cfg.nonlinear = false;
        let tr = run(&cfg, &p, &RunOptions::default(), &mut ()).unwrap();
        let start = prepare_initial(&cfg, &p).unwrap().fields;
        for (i, &t) in tr.series.times.iter().enumerate() {
            let mut e = 0.0;
            for (comps, kappa) in [(start.u.components(), cfg.mu), (start.b.components(), cfg.nu)] {
                for c in comps {
                    for (z, k2) in c.coeffs().iter().zip(g.k_squared()) {
                        e += (-2.0 * kappa * k2 * t).exp() * z.norm_sqr();
                    }
                }
            }
            let exact = (e * g.volume()).sqrt();
            assert!((tr.series.l2[i] - exact).abs() <= 1e-10 * exact);
        }
    }

    struct FailAfter(usize);

    impl RunObserver for FailAfter {
        fn on_record(&mut self, _: &MHDState, step: usize) -> Result<()> {
            if step >= self.0 {
                Err(Error::Numerical("stop".into()))
            } else {
                Ok(())
            }
        }
    }

    #[test]
    fn abort_keeps_the_partial_trajectory() {
        let g = make_grid(2, 16, 2.0 * PI).unwrap();
        let cfg = SolverConfig::new(g.clone(), 0.1, 0.1, 0.01, 0.1).unwrap();
        let err = run(&cfg, &PairField::zeros(&g), &RunOptions::default(), &mut FailAfter(4)).unwrap_err();
        assert_eq!(err.partial.steps, 4);
        assert_eq!(err.partial.series.len(), 5);
    }
}
