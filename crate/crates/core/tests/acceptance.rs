//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! a nonzero status if any criterion fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::StandardNormal;

use mhdk::analysis::{
    admissible_window, check_monotone_derivative, default_smallness_constant, fit_decay,
    ledger_scan, o_one_over_t_check, smallness_onset, weighted_energy_diagnostic, NormSelector,
    NormSeries,
};
use mhdk::inequalities::{
    ensemble_constants, evaluate, EnsembleSpec, InequalityCase,
};
use mhdk::init::{random_band_pair, sample_rng, BandSpec};
use mhdk::io::{execute_run, parse_config, parse_config_str, RunConfig, RunOutput, SERIES_FILE};
use mhdk::norms::{hs_norm, interpolation_check, PairField};
use mhdk::solver::{
    decode_checkpoint, duhamel_solve, encode_checkpoint, heat_semigroup_pair, prepare_initial,
    read_checkpoint, run, step, write_checkpoint, Checkpoint, RunOptions, SolverConfig,
};
use mhdk::spectral::{make_grid, signed_mode, FourierGrid, SpectralField, VectorSpectralField};

// Tolerances, one per quantitative statement.
const LEDGER_REL_TOL: f64 = 1e-6;
const RUN_TIME_LIMIT: Duration = Duration::from_secs(60);
const LINEAR_STEP_REL_TOL: f64 = 1e-13;
const LINEAR_TRAJECTORY_REL_TOL: f64 = 1e-10;
const INTERPOLATION_SLACK: f64 = 1e-12;
const SINGLE_MODE_TOL: f64 = 1e-12;
const INTERPOLATION_FIELDS: usize = 1000;
const ENSEMBLE_SAMPLES: usize = 500;
const SCALE_INVARIANCE_TOL: f64 = 1e-12;
const SEED_AGREEMENT: f64 = 0.10;
const DUHAMEL_REL_TOL: f64 = 1e-4;
const DECAY_SLOPE_BOUND: f64 = -0.5 + 0.1;
const HEAT_SLOPE_REL_TOL: f64 = 0.02;
const WEIGHTED_REL_TOL: f64 = 1e-6;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into() }
    }

    fn error(e: impl std::fmt::Display) -> Self {
        Verdict::new(false, format!("error: {e}"))
    }
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn rel_diff(a: &PairField, b: &PairField) -> f64 {
    let mut d = a.clone();
    d.axpy(-1.0, b);
    let scale = hs_norm(b, 0.0).unwrap();
    hs_norm(&d, 0.0).unwrap() / scale
}

/// The decaying 2D run shared by criteria 1, 6, 8 and 9.
struct DecayRun {
    config: RunConfig,
    output: RunOutput,
    elapsed: Duration,
    smallness_constant: f64,
    onset: Option<usize>,
    _dir: tempfile::TempDir,
}

fn decay_run() -> mhdk::Result<DecayRun> {
    let config = parse_config(config_path("decay2d.cfg"))?;
    let dir = tempfile::tempdir().expect("temp dir");
    let start = Instant::now();
    let output = execute_run(&config, dir.path())?;
    let elapsed = start.elapsed();
    let c = default_smallness_constant(ENSEMBLE_SAMPLES, 0)?;
    let s = &output.trajectory.series;
    let onset = smallness_onset(s, s.l2[0], c, config.solver.mu, config.solver.nu);
    Ok(DecayRun { config, output, elapsed, smallness_constant: c, onset, _dir: dir })
}

fn energy_ledger(r: &DecayRun) -> Verdict {
    let scan = match ledger_scan(&r.output.trajectory.series) {
        Ok(s) => s,
        Err(e) => return Verdict::error(e),
    };
    let fast = r.elapsed < RUN_TIME_LIMIT;
    Verdict::new(
        scan.max_relative <= LEDGER_REL_TOL && fast,
        format!(
            "worst relative residual {:.3e} at (r, t) records ({}, {}), tol {LEDGER_REL_TOL:e}; \
             run time {:.1}s, limit {}s",
            scan.max_relative,
            scan.r_index,
            scan.t_index,
            r.elapsed.as_secs_f64(),
            RUN_TIME_LIMIT.as_secs()
        ),
    )
}

/// `||e^{t Lap} v||` from the coefficients of `v`, with wavenumbers built
/// here rather than taken from the grid.
fn heat_mode_sum(v: &PairField, mu: f64, nu: f64, t: f64, order: i32) -> f64 {
    let grid = v.grid();
    let n = grid.points_per_axis();
    let unit = 2.0 * PI / grid.box_length();
    let mut sum = 0.0;
    for (field, kappa) in [(&v.u, mu), (&v.b, nu)] {
        for comp in field.components() {
            for (flat, c) in comp.coeffs().iter().enumerate() {
                let mut rem = flat;
                let mut k2 = 0.0;
                for _ in 0..grid.dim() {
                    let m = signed_mode(rem % n, n) as f64 * unit;
                    k2 += m * m;
                    rem /= n;
                }
                sum += c.norm_sqr() * (-2.0 * kappa * k2 * t).exp() * k2.powi(order);
            }
        }
    }
    (sum * grid.volume()).sqrt()
}

fn linear_exactness() -> mhdk::Result<Verdict> {
    let mut config = parse_config(config_path("decay2d.cfg"))?;
    config.solver.nonlinear = false;
    let solver = &config.solver;
    let initial = prepare_initial(solver, &config.initial_fields()?)?;

    let (one, _) = step(solver, &initial)?;
    let exact = heat_semigroup_pair(&initial.fields, solver.dt, solver.mu, solver.nu)?;
    let step_err = rel_diff(&one.fields, &exact);

    let traj = run(solver, &initial.fields, &RunOptions::default(), &mut ()).map_err(|a| a.error)?;
    let s = &traj.series;
    let mut traj_err: f64 = 0.0;
    for i in 0..s.len() {
        let t = s.times[i];
        let l2 = heat_mode_sum(&initial.fields, solver.mu, solver.nu, t, 0);
        let h1 = heat_mode_sum(&initial.fields, solver.mu, solver.nu, t, 1);
        traj_err = traj_err.max((s.l2[i] - l2).abs() / l2).max((s.h1[i] - h1).abs() / h1);
    }
    let final_exact =
        heat_semigroup_pair(&initial.fields, traj.final_state.t, solver.mu, solver.nu)?;
    let final_err = rel_diff(&traj.final_state.fields, &final_exact);
    Ok(Verdict::new(
        step_err <= LINEAR_STEP_REL_TOL
            && traj_err <= LINEAR_TRAJECTORY_REL_TOL
            && final_err <= LINEAR_TRAJECTORY_REL_TOL,
        format!(
            "one step {step_err:.2e} (tol {LINEAR_STEP_REL_TOL:e}); {} records vs mode sum \
             {traj_err:.2e}, final state {final_err:.2e} (tol {LINEAR_TRAJECTORY_REL_TOL:e})",
            s.len()
        ),
    ))
}

/// Mean-zero pair with independent normal grid samples in every component.
fn white_noise_pair(grid: &FourierGrid, rng: &mut impl Rng) -> PairField {
    let vec_field = |rng: &mut dyn rand::RngCore| {
        let comps = (0..grid.dim())
            .map(|_| {
                let samples: Vec<f64> = (0..grid.len()).map(|_| rng.sample(StandardNormal)).collect();
                let mut c = SpectralField::forward(grid, &samples).unwrap();
                c.coeffs_mut()[0] = Default::default();
                c
            })
            .collect();
        VectorSpectralField::new(comps).unwrap()
    };
    let u = vec_field(rng);
    let b = vec_field(rng);
    PairField::new(u, b).unwrap()
}

fn interpolation() -> mhdk::Result<Verdict> {
    let mut worst: f64 = 0.0;
    let mut single_worst: f64 = 0.0;
    for (dim, n) in [(2, 32), (3, 16), (4, 8)] {
        let grid = make_grid(dim, n, 2.0 * PI)?;
        let mut rng = sample_rng(1000 + dim as u64, 0);
        for _ in 0..INTERPOLATION_FIELDS {
            let f = white_noise_pair(&grid, &mut rng);
            for m in 1..=4 {
                for l in 0..m {
                    worst = worst.max(interpolation_check(&f, l, m)?.ratio);
                }
            }
        }
        let mode = VectorSpectralField::from_fn(&grid, |x, c| if c == 1 { (2.0 * x[0]).cos() } else { 0.0 });
        let single = PairField::new(mode.clone(), mode.scaled(0.5))?;
        for m in 1..=4 {
            for l in 0..m {
                single_worst = single_worst.max((interpolation_check(&single, l, m)?.ratio - 1.0).abs());
            }
        }
    }
    Ok(Verdict::new(
        worst <= 1.0 + INTERPOLATION_SLACK && single_worst <= SINGLE_MODE_TOL,
        format!(
            "max ratio {worst:.15} over {INTERPOLATION_FIELDS} fields per dim 2, 3, 4 \
             (bound 1 + {INTERPOLATION_SLACK:e}); single mode |ratio - 1| {single_worst:.1e}"
        ),
    ))
}

fn inequality_constants() -> mhdk::Result<Verdict> {
    let mut failures = Vec::new();
    let mut worst_spread: f64 = 0.0;
    let mut worst_scale: f64 = 0.0;
    let mut time_4d = Duration::ZERO;
    for dim in [2, 3, 4] {
        let spec = EnsembleSpec::default_for_dim(dim)?;
        let cases = InequalityCase::catalogue(dim);
        let start = Instant::now();
        let a = ensemble_constants(&cases, &spec, ENSEMBLE_SAMPLES, 0)?;
        if dim == 4 {
            time_4d = start.elapsed();
        }
        let b = ensemble_constants(&cases, &spec, ENSEMBLE_SAMPLES, 1)?;
        for (ra, rb) in a.iter().zip(&b) {
            let finite = ra.max_ratio.is_finite() && ra.max_ratio > 0.0 && ra.n_degenerate == 0;
            let spread = (ra.max_ratio - rb.max_ratio).abs() / ra.max_ratio.max(rb.max_ratio);
            worst_spread = worst_spread.max(spread);
            if !finite || spread > SEED_AGREEMENT {
                failures.push(format!("{} ({:.4e} vs {:.4e})", ra.case, ra.max_ratio, rb.max_ratio));
            }
        }
        let grid = make_grid(dim, spec.points_per_axis, spec.box_length)?;
        for i in 0..5 {
            let f = random_band_pair(&grid, &spec.band, 1.0, &mut sample_rng(7, i))?;
            for &case in &cases {
                let r = evaluate(case, &f)?.ratio;
                for alpha in [1e-3, 1e3] {
                    let ra = evaluate(case, &f.scaled(alpha))?.ratio;
                    worst_scale = worst_scale.max((ra - r).abs() / r);
                }
            }
        }
    }
    let fast = time_4d < RUN_TIME_LIMIT;
    Ok(Verdict::new(
        failures.is_empty() && worst_scale <= SCALE_INVARIANCE_TOL && fast,
        format!(
            "seed spread max {:.1}% (limit {:.0}%){}; scale invariance {worst_scale:.1e} \
             (tol {SCALE_INVARIANCE_TOL:e}); 4D ensemble at 16^4 {:.1}s",
            100.0 * worst_spread,
            100.0 * SEED_AGREEMENT,
            if failures.is_empty() { String::new() } else { format!(", failing: {}", failures.join(", ")) },
            time_4d.as_secs_f64()
        ),
    ))
}

fn duhamel() -> mhdk::Result<Verdict> {
    let grid = make_grid(2, 64, 2.0 * PI)?;
    let band = BandSpec { k_min: 1.0, k_max: 8.0, slope: 2.0 };
    let data = random_band_pair(&grid, &band, 1.0, &mut sample_rng(0, 0))?;
    let horizon = 0.05;
    let config = SolverConfig::new(grid, 0.05, 0.05, 0.005, horizon)?;
    let start = prepare_initial(&config, &data)?;
    let picard = duhamel_solve(&config, &start, horizon, 4, 4)?;
    let mut stepped = start;
    for _ in 0..config.n_steps() {
        stepped = step(&config, &stepped)?.0;
    }
    let err = rel_diff(&picard.state.fields, &stepped.fields);
    let inc = &picard.increments;
    let decreasing = inc.windows(2).all(|w| w[1] < w[0]);
    Ok(Verdict::new(
        err <= DUHAMEL_REL_TOL && decreasing,
        format!(
            "relative L2 discrepancy {err:.2e} (tol {DUHAMEL_REL_TOL:e}); increments {}",
            inc.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>().join(" > ")
        ),
    ))
}

fn monotonicity(r: &DecayRun) -> Verdict {
    let Some(onset) = r.onset else {
        return Verdict::new(false, "smallness condition never holds");
    };
    let s = &r.output.trajectory.series;
    match check_monotone_derivative(s, onset) {
        Ok(rep) => Verdict::new(
            rep.passed(),
            format!(
                "C = {:.4e}, onset at t = {} (record {onset}); {} pairs, largest increase {:.3e}{}",
                r.smallness_constant,
                s.times[onset],
                rep.pairs_checked,
                rep.max_increase,
                rep.first_violation.map_or(String::new(), |i| format!(", violation at record {i}"))
            ),
        ),
        Err(e) => Verdict::error(e),
    }
}

/// Least-squares slope of `ln f` against `ln t`.
fn loglog_slope(t: &[f64], f: &[f64]) -> f64 {
    let x: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = f.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn decay_surrogates() -> mhdk::Result<Verdict> {
    let config = parse_config(config_path("localized2d.cfg"))?;
    let solver = &config.solver;
    let dir = tempfile::tempdir().expect("temp dir");
    let out = execute_run(&config, dir.path())?;
    let traj = &out.trajectory;
    let s = &traj.series;
    let window = admissible_window(s, solver.dt, solver.record_every, traj.wraparound_time)?;
    let fit = fit_decay(s, NormSelector::H1, window, 2, 0.1)?;
    let first = s.index_of(window.0)?;
    let last = s.index_of(window.1)?;
    let trend = o_one_over_t_check(s, NormSelector::H1, first, last)?;

    // Heat control: ||D e^{t Lap} curl psi|| is proportional to
    // (sigma^2 + 2 mu t)^{-3/2} for a Gaussian stream function psi.
    let mut heat_cfg = config.clone();
    heat_cfg.solver.nonlinear = false;
    let heat = run(&heat_cfg.solver, &heat_cfg.initial_fields()?, &RunOptions::default(), &mut ())
        .map_err(|a| a.error)?;
    let hs = &heat.series;
    let heat_fit = fit_decay(hs, NormSelector::H1, window, 2, 0.1)?;
    let sigma2 = config.init.sigma.powi(2);
    let times: Vec<f64> = hs.times.iter().copied().filter(|&t| t >= window.0 && t <= window.1).collect();
    let analytic: Vec<f64> = times.iter().map(|&t| (sigma2 + 2.0 * solver.mu * t).powf(-1.5)).collect();
    let analytic_slope = loglog_slope(&times, &analytic);
    let heat_err = (heat_fit.slope - analytic_slope).abs() / analytic_slope.abs();

    Ok(Verdict::new(
        fit.slope <= DECAY_SLOPE_BOUND && trend.nonincreasing && heat_err <= HEAT_SLOPE_REL_TOL,
        format!(
            "window [{}, {}] (wraparound {}); slope {:.4} (bound {DECAY_SLOPE_BOUND}); \
             t|D(u,b)|^2 trailing max rel. increase {:.2e}; heat slope {:.5} vs analytic {:.5} \
             ({:.2e}, tol {HEAT_SLOPE_REL_TOL})",
            window.0,
            window.1,
            traj.wraparound_time.map_or("none".into(), |t| format!("t = {t}")),
            fit.slope,
            trend.max_relative_increase,
            heat_fit.slope,
            analytic_slope,
            heat_err
        ),
    ))
}

fn weighted(r: &DecayRun) -> Verdict {
    let Some(onset) = r.onset else {
        return Verdict::new(false, "smallness condition never holds");
    };
    let s: &NormSeries = &r.output.trajectory.series;
    let mut parts = Vec::new();
    let mut pass = true;
    for m in [1, 2] {
        match weighted_energy_diagnostic(s, m, onset) {
            Ok(rep) => {
                pass &= rep.holds(WEIGHTED_REL_TOL);
                parts.push(format!(
                    "m = {m}: max(lhs - rhs) {:.3e}, max rhs {:.3e}",
                    rep.max_excess, rep.max_rhs
                ));
            }
            Err(e) => return Verdict::error(e),
        }
    }
    Verdict::new(pass, format!("from t = {}; {} (tol {WEIGHTED_REL_TOL:e} max rhs)", s.times[onset], parts.join("; ")))
}

fn persistence(r: &DecayRun) -> mhdk::Result<Verdict> {
    let first = std::fs::read(r.output.dir.join(SERIES_FILE)).expect("series written");
    let dir = tempfile::tempdir().expect("temp dir");
    let again_cfg = parse_config_str(&r.output.manifest.config, Path::new("manifest"))?;
    let again = execute_run(&again_cfg, dir.path())?;
    let second = std::fs::read(again.dir.join(SERIES_FILE)).expect("series written");
    let identical = first == second && again.manifest.run_id == r.output.manifest.run_id;

    let state = &r.output.trajectory.final_state;
    let ck = Checkpoint { t: state.t, mu: r.config.solver.mu, nu: r.config.solver.nu, fields: state.fields.clone() };
    let path = dir.path().join("roundtrip.mhdk");
    write_checkpoint(&path, &ck)?;
    let back = read_checkpoint(&path)?;
    let bits = |c: &Checkpoint| {
        let mut v = vec![c.t.to_bits(), c.mu.to_bits(), c.nu.to_bits()];
        for comp in c.fields.u.components().iter().chain(c.fields.b.components()) {
            for z in comp.coeffs() {
                v.push(z.re.to_bits());
                v.push(z.im.to_bits());
            }
        }
        v
    };
    let exact = bits(&ck) == bits(&back) && encode_checkpoint(&decode_checkpoint(&encode_checkpoint(&ck))?) == encode_checkpoint(&ck);
    Ok(Verdict::new(
        identical && exact,
        format!(
            "re-run from manifest: series {} ({} bytes), run id {}; checkpoint roundtrip {}",
            if first == second { "byte-identical" } else { "differs" },
            first.len(),
            again.manifest.run_id,
            if exact { "bit-exact" } else { "differs" }
        ),
    ))
}

fn report(id: usize, name: &str, v: Verdict) -> bool {
    println!("{} [{id}] {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    v.pass
}

fn flatten(r: mhdk::Result<Verdict>) -> Verdict {
    r.unwrap_or_else(Verdict::error)
}

fn main() -> ExitCode {
    let decay = decay_run();
    let shared = |f: &dyn Fn(&DecayRun) -> Verdict| match &decay {
        Ok(r) => f(r),
        Err(e) => Verdict::error(e),
    };
    let results = [
        report(1, "energy inequality", shared(&energy_ledger)),
        report(2, "linear exactness", flatten(linear_exactness())),
        report(3, "interpolation", flatten(interpolation())),
        report(4, "inequality constants", flatten(inequality_constants())),
        report(5, "duhamel cross-check", flatten(duhamel())),
        report(6, "monotone derivative norm", shared(&monotonicity)),
        report(7, "decay surrogates", flatten(decay_surrogates())),
        report(8, "weighted diagnostic", shared(&weighted)),
        report(9, "determinism and persistence", shared(&|r| flatten(persistence(r)))),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
