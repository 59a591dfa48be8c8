use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::init::{gaussian_localized_pair, orszag_tang_pair, random_band_pair, sample_rng, BandSpec};
use crate::norms::PairField;
use crate::solver::{Integrator, SolverConfig};
use crate::spectral::make_grid;

const REQUIRED: [&str; 12] = [
    "dim",
    "n",
    "box_length",
    "mu",
    "nu",
    "dt",
    "t_end",
    "init",
    "seed",
    "record_every",
    "s_list",
    "q_list",
];

const OPTIONAL: [&str; 13] = [
    "integrator",
    "dealias",
    "nonlinear",
    "abort_on_cfl",
    "picard_iterations",
    "picard_panels",
    "amplitude",
    "k_min",
    "k_max",
    "slope",
    "sigma",
    "checkpoint_every",
    "track_wraparound",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitKind {
    RandomBand,
    GaussianLocalized,
    OrszagTang,
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitKind::RandomBand => "random_band",
            InitKind::GaussianLocalized => "gaussian_localized",
            InitKind::OrszagTang => "orszag_tang",
        })
    }
}

impl FromStr for InitKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "random_band" => Ok(InitKind::RandomBand),
            "gaussian_localized" => Ok(InitKind::GaussianLocalized),
            "orszag_tang" => Ok(InitKind::OrszagTang),
            _ => Err(format!(
                "init must be random_band, gaussian_localized or orszag_tang, got `{s}`"
            )),
        }
    }
}

/// Initial-data recipe.
#[derive(Clone, Debug, PartialEq)]
pub struct InitSpec {
    pub kind: InitKind,
    /// Pair `L^2` norm for `random_band`, per-field `L^2` norm for
    /// `gaussian_localized`, velocity amplitude for `orszag_tang`.
    pub amplitude: f64,
    pub band: BandSpec,
    pub sigma: f64,
}

/// Everything a `run` needs, parsed from a config file.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub init: InitSpec,
    pub seed: u64,
    pub s_list: Vec<f64>,
    pub q_list: Vec<f64>,
    /// Write a checkpoint every this many steps (the final state is always
    /// written).
    pub checkpoint_every: Option<usize>,
    pub track_wraparound: bool,
    /// Parsed `key=value` pairs, used for the run id.
    pub entries: BTreeMap<String, String>,
}

impl RunConfig {
    /// Keys and values in sorted `key=value` lines; comments, spacing and
    /// key order of the source file do not affect it.
    pub fn canonical(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn initial_fields(&self) -> Result<PairField> {
        let grid = &self.solver.grid;
        match self.init.kind {
            InitKind::RandomBand => random_band_pair(
                grid,
                &self.init.band,
                self.init.amplitude,
                &mut sample_rng(self.seed, 0),
            ),
            InitKind::GaussianLocalized => {
                gaussian_localized_pair(grid, self.init.sigma, self.init.amplitude)
            }
            InitKind::OrszagTang => orszag_tang_pair(grid, self.init.amplitude),
        }
    }
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text, path)
}

/// Parses the flat `key = value` format. `#` starts a comment; blank lines
/// are ignored. Lists are comma separated and may be empty.
pub fn parse_config_str(text: &str, path: impl Into<PathBuf>) -> Result<RunConfig> {
    let path = path.into();
    let err = |line: usize, message: String| Error::Config {
        path: path.clone(),
        line,
        message,
    };
    let mut values: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected `key = value`, got `{line}`")))?;
        let key = k.trim();
        if !REQUIRED.contains(&key) && !OPTIONAL.contains(&key) {
            return Err(err(line_no, format!("unknown key `{key}`")));
        }
        if let Some((first, _)) = values.get(key) {
            return Err(err(line_no, format!("key `{key}` already set on line {first}")));
        }
        values.insert(key.to_string(), (line_no, v.trim().to_string()));
    }
    if let Some(missing) = REQUIRED.iter().find(|k| !values.contains_key(**k)) {
        let last = text.lines().count();
        return Err(err(last, format!("missing required key `{missing}`")));
    }

    let get = |key: &str| values.get(key).map(|(l, v)| (*l, v.as_str()));
    fn parse_as<T: FromStr>(
        err: &dyn Fn(usize, String) -> Error,
        key: &str,
        entry: (usize, &str),
    ) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        entry
            .1
            .parse::<T>()
            .map_err(|e| err(entry.0, format!("invalid value `{}` for `{key}`: {e}", entry.1)))
    }
    let req = |key: &str| get(key).expect("presence checked");
    let positive = |key: &str| -> Result<f64> {
        let entry = req(key);
        let v: f64 = parse_as(&err, key, entry)?;
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(err(entry.0, format!("`{key}` must be positive, got {v}")))
        }
    };
    let opt_f64 = |key: &str, default: f64| -> Result<f64> {
        get(key).map_or(Ok(default), |e| parse_as(&err, key, e))
    };
    let opt_bool = |key: &str, default: bool| -> Result<bool> {
        get(key).map_or(Ok(default), |e| parse_as(&err, key, e))
    };
    let list = |key: &str| -> Result<Vec<f64>> {
        let (line, v) = req(key);
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_as::<f64>(&err, key, (line, s)))
            .collect()
    };

    let dim_entry = req("dim");
    let dim: usize = parse_as(&err, "dim", dim_entry)?;
    if !(2..=3).contains(&dim) {
        return Err(err(
            dim_entry.0,
            format!("runs are supported in 2 or 3 dimensions, got {dim}"),
        ));
    }
    let n_entry = req("n");
    let n: usize = parse_as(&err, "n", n_entry)?;
    let box_length = positive("box_length")?;
    let grid = make_grid(dim, n, box_length).map_err(|e| err(n_entry.0, e.to_string()))?;
    let mu = positive("mu")?;
    let nu = positive("nu")?;
    let dt = positive("dt")?;
    let t_end = positive("t_end")?;
    let init_kind: InitKind = parse_as(&err, "init", req("init"))?;
    let seed: u64 = parse_as(&err, "seed", req("seed"))?;
    let re_entry = req("record_every");
    let record_every: usize = parse_as(&err, "record_every", re_entry)?;
    if record_every == 0 {
        return Err(err(re_entry.0, "`record_every` must be at least 1".into()));
    }
    let s_list = list("s_list")?;
    if let Some(s) = s_list.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
        return Err(err(req("s_list").0, format!("Sobolev orders must be finite and >= 0, got {s}")));
    }
    let q_list = list("q_list")?;
    if let Some(q) = q_list.iter().find(|q| !(**q >= 2.0)) {
        return Err(err(req("q_list").0, format!("Lebesgue exponents must be >= 2 or inf, got {q}")));
    }

    let mut solver = SolverConfig::new(grid, mu, nu, dt, t_end)?;
    solver.record_every = record_every;
    if let Some(e) = get("integrator") {
        solver.integrator = parse_as(&err, "integrator", e)?;
    } else {
        solver.integrator = Integrator::IfRk4;
    }
    solver.dealias = opt_bool("dealias", true)?;
    solver.nonlinear = opt_bool("nonlinear", true)?;
    solver.abort_on_cfl = opt_bool("abort_on_cfl", false)?;
    if let Some(e) = get("picard_iterations") {
        solver.picard_iterations = parse_as(&err, "picard_iterations", e)?;
    }
    if let Some(e) = get("picard_panels") {
        solver.picard_panels = parse_as(&err, "picard_panels", e)?;
    }
    solver
        .validate()
        .map_err(|e| err(get("picard_iterations").or(get("picard_panels")).map_or(0, |x| x.0), e.to_string()))?;

    let default_k_max = ((n / 3) as f64 - 1.0).min(8.0);
    let init = InitSpec {
        kind: init_kind,
        amplitude: opt_f64("amplitude", 1.0)?,
        band: BandSpec {
            k_min: opt_f64("k_min", 1.0)?,
            k_max: opt_f64("k_max", default_k_max)?,
            slope: opt_f64("slope", 2.0)?,
        },
        sigma: opt_f64("sigma", 1.0)?,
    };
    if init.kind == InitKind::RandomBand {
        init.band
            .validate(&solver.grid)
            .map_err(|e| err(get("k_max").or(get("k_min")).map_or(0, |x| x.0), e.to_string()))?;
    }
    if !(init.amplitude >= 0.0) || !init.amplitude.is_finite() {
        return Err(err(get("amplitude").map_or(0, |x| x.0), "`amplitude` must be finite and >= 0".into()));
    }
    if !(init.sigma > 0.0) {
        return Err(err(get("sigma").map_or(0, |x| x.0), "`sigma` must be positive".into()));
    }
    let checkpoint_every = match get("checkpoint_every") {
        None => None,
        Some(e) => match parse_as::<usize>(&err, "checkpoint_every", e)? {
            0 => return Err(err(e.0, "`checkpoint_every` must be at least 1".into())),
            k => Some(k),
        },
    };
    let track_wraparound = opt_bool("track_wraparound", init.kind == InitKind::GaussianLocalized)?;

    Ok(RunConfig {
        solver,
        init,
        seed,
        s_list,
        q_list,
        checkpoint_every,
        track_wraparound,
        entries: values.into_iter().map(|(k, (_, v))| (k, v)).collect(),
    })
}
