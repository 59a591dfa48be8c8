use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mhdk::analysis::{fit_decay, NormSelector, DEFAULT_SLACK};
use mhdk::inequalities::{ensemble_constants, EnsembleSpec, InequalityCase};
use mhdk::init::{random_band_pair, sample_rng, BandSpec};
use mhdk::io::{execute_run, parse_config, parse_config_str, read_series, RunManifest, MANIFEST_FILE};
use mhdk::norms::{dm_lq_norm, hs_norm, lq_norm};
use mhdk::solver::{duhamel_solve, prepare_initial, read_checkpoint, step, SolverConfig};
use mhdk::spectral::make_grid;
use mhdk::{Error, Result};

#[derive(Parser)]
#[command(name = "mhdk", version, about = "Pseudo-spectral MHD runs and Sobolev-norm diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the MHD system from a config file.
    Run(RunArgs),
    /// Estimate inequality constants on random ensembles.
    CheckInequalities(InequalityArgs),
    /// Compare the stepper with the Picard solution of the mild form.
    DuhamelCompare(DuhamelArgs),
    /// Fit a log-log decay slope to a recorded series.
    FitDecay(FitArgs),
    /// Norms of a checkpointed state.
    Norms(NormArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file in key = value format.
    #[arg(long, conflicts_with = "from_manifest", required_unless_present = "from_manifest")]
    config: Option<PathBuf>,
    /// Re-run the configuration stored in a manifest.
    #[arg(long)]
    from_manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InequalityArgs {
    #[arg(long)]
    dim: usize,
    /// Comma-separated cases, e.g. `2.10a,2.10f(0,3)`; all cases of the
    /// dimension when omitted.
    #[arg(long)]
    cases: Option<String>,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Grid points per axis (default depends on the dimension).
    #[arg(long)]
    n: Option<usize>,
    /// Upper end of the random band.
    #[arg(long)]
    k_max: Option<f64>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DuhamelArgs {
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    mu: f64,
    #[arg(long, default_value_t = 0.05)]
    nu: f64,
    #[arg(long, default_value_t = 0.05)]
    horizon: f64,
    /// Step size of the composed stepper.
    #[arg(long, default_value_t = 0.005)]
    dt: f64,
    #[arg(long, default_value_t = 4)]
    picard: usize,
    /// Simpson panels of the Duhamel integral.
    #[arg(long, default_value_t = 4)]
    quad: usize,
    /// `L^2` norm of the random initial pair.
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    series: PathBuf,
    /// Fit the `hs:<s>` column (`1` uses `h1_pair`, `0` uses `l2_pair`).
    #[arg(long, conflicts_with = "q", required_unless_present = "q")]
    s: Option<f64>,
    /// Fit the `lq:<q>` column.
    #[arg(long)]
    q: Option<f64>,
    /// `t_a:t_b`
    #[arg(long)]
    window: String,
    /// Spatial dimension of the run.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = DEFAULT_SLACK)]
    slack: f64,
}

#[derive(Args)]
struct NormArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Sobolev orders, comma separated.
    #[arg(long, default_value = "0,1,2")]
    s: String,
    /// Lebesgue exponents, comma separated (`inf` allowed).
    #[arg(long, default_value = "2,4,inf")]
    q: String,
    /// Derivative order for `||D^m (u, b)||_q` rows.
    #[arg(long, default_value_t = 1)]
    m: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::CheckInequalities(a) => cmd_inequalities(a),
        Command::DuhamelCompare(a) => cmd_duhamel(a),
        Command::FitDecay(a) => cmd_fit(a),
        Command::Norms(a) => cmd_norms(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let config = match (&a.config, &a.from_manifest) {
        (Some(path), _) => parse_config(path)?,
        (None, Some(m)) => parse_config_str(&RunManifest::read(m)?.config, m)?,
        (None, None) => unreachable!("clap requires one of the two"),
    };
    let out = execute_run(&config, &a.out)?;
    let t = &out.trajectory;
    if t.cfl_warnings > 0 {
        eprintln!(
            "warning: CFL limit exceeded on {} steps (max {:.3})",
            t.cfl_warnings, t.max_cfl
        );
    }
    println!("run_id={}", out.manifest.run_id);
    println!("steps={}", t.steps);
    println!("records={}", t.series.len());
    println!("max_cfl={:e}", t.max_cfl);
    if let Some(w) = t.wraparound_time {
        println!("wraparound_t={w:e}");
    }
    println!("manifest={}", out.dir.join(MANIFEST_FILE).display());
    Ok(())
}

/// Splits on commas that are not inside parentheses.
fn split_cases(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out.into_iter().filter(|c| !c.is_empty()).collect()
}

fn cmd_inequalities(a: InequalityArgs) -> Result<()> {
    let mut spec = EnsembleSpec::default_for_dim(a.dim)?;
    if let Some(n) = a.n {
        spec.points_per_axis = n;
    }
    if let Some(k) = a.k_max {
        spec.band.k_max = k;
    }
    let cases = match &a.cases {
        Some(list) => split_cases(list)
            .into_iter()
            .map(str::parse)
            .collect::<Result<Vec<InequalityCase>>>()?,
        None => InequalityCase::catalogue(a.dim),
    };
    let results = ensemble_constants(&cases, &spec, a.samples, a.seed)?;
    let mut text = String::from("case,dim,points_per_axis,samples,seed,max_ratio,mean_ratio,degenerate\n");
    for r in results {
        text.push_str(&format!(
            "{},{},{},{},{},{:e},{:e},{}\n",
            r.case, spec.dim, spec.points_per_axis, r.n_samples, a.seed, r.max_ratio, r.mean_ratio, r.n_degenerate
        ));
    }
    emit(&text, a.out.as_ref())
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io { path: p.clone(), source: e }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io { path: "<stdout>".into(), source: e }),
    }
}

fn cmd_duhamel(a: DuhamelArgs) -> Result<()> {
    let grid = make_grid(2, a.n, 2.0 * std::f64::consts::PI)?;
    let k_max = ((a.n / 3) as f64 - 1.0).min(8.0);
    let band = BandSpec { k_min: 1.0, k_max, slope: 2.0 };
    let data = random_band_pair(&grid, &band, a.amplitude, &mut sample_rng(a.seed, 0))?;
    let config = SolverConfig::new(grid, a.mu, a.nu, a.dt, a.horizon)?;
    let start = prepare_initial(&config, &data)?;
    let picard = duhamel_solve(&config, &start, a.horizon, a.picard, a.quad)?;
    let mut stepped = start;
    for _ in 0..config.n_steps() {
        stepped = step(&config, &stepped)?.0;
    }
    let mut diff = picard.state.fields.clone();
    diff.axpy(-1.0, &stepped.fields);
    let rel = hs_norm(&diff, 0.0)? / hs_norm(&stepped.fields, 0.0)?;
    println!("relative_l2_discrepancy={rel:e}");
    for (j, inc) in picard.increments.iter().enumerate() {
        println!("increment_{}={inc:e}", j + 1);
    }
    let monotone = picard.increments.windows(2).all(|w| w[1] < w[0]);
    println!("increments_decreasing={monotone}");
    Ok(())
}

fn parse_window(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidParameter(format!("window must look like `1.0:4.0`, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    let series = read_series(&a.series)?;
    let which = match (a.s, a.q) {
        (Some(s), _) => NormSelector::Hs(s),
        (None, Some(q)) => NormSelector::Lq(q),
        (None, None) => unreachable!("clap requires one of the two"),
    };
    let fit = fit_decay(&series, which, parse_window(&a.window)?, a.dim, a.slack)?;
    let label = match which {
        NormSelector::Hs(s) => format!("hs:{s}"),
        NormSelector::Lq(q) => format!("lq:{q}"),
        NormSelector::L2 => "l2_pair".into(),
        NormSelector::H1 => "h1_pair".into(),
    };
    println!("norm,t_a,t_b,samples,slope,intercept,residual,predicted_exponent,slack,consistent");
    println!(
        "{label},{:e},{:e},{},{:e},{:e},{:e},{:e},{:e},{}",
        fit.window.0,
        fit.window.1,
        fit.samples,
        fit.slope,
        fit.intercept,
        fit.residual,
        fit.predicted_exponent,
        fit.slack,
        fit.consistent
    );
    Ok(())
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("not a number: `{x}`")))
        })
        .collect()
}

fn cmd_norms(a: NormArgs) -> Result<()> {
    let c = read_checkpoint(&a.checkpoint)?;
    let f = &c.fields;
    println!("norm,value");
    println!("t,{:e}", c.t);
    for s in parse_list(&a.s)? {
        println!("hs:{s},{:e}", hs_norm(f, s)?);
    }
    for q in parse_list(&a.q)? {
        println!("lq:{q},{:e}", lq_norm(f, q)?);
        println!("d{}lq:{q},{:e}", a.m, dm_lq_norm(f, a.m, q)?);
    }
    Ok(())
}
