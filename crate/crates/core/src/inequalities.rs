//! The interpolation / Gagliardo–Nirenberg inequality ladder used by the
//! decay argument, evaluated on concrete `(u, b)` pairs, and empirical
//! estimates of the unspecified constants.
//!
//! Every inequality is homogeneous of the same degree on both sides, so the
//! ratio `lhs / rhs` is invariant under `f -> alpha f`. The constant of an
//! inequality is estimated as the largest ratio seen over a random ensemble;
//! this is a lower bound on the true constant for the ensemble's band.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::init::{random_band_pair, sample_rng, BandSpec};
use crate::norms::{dm_lq_norm, hs_norm, PairField};
use crate::spectral::make_grid;

/// One inequality of the ladder, with its derivative parameters where the
/// statement is a family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InequalityCase {
    /// 2D: `||f||_inf <= ||f||_2^{1/2} ||D^2 f||_2^{1/2}`
    Gn27a,
    /// 3D: `||f||_inf <= ||f||_2^{1/4} ||D^2 f||_2^{3/4}`
    Gn27b,
    /// any dim: `||Df||_2 <= ||f||_2^{1/2} ||D^2 f||_2^{1/2}`
    Gn28a,
    /// any dim: `||D^l f||_2 <= ||f||_2^{1-l/m} ||D^m f||_2^{l/m}`
    Gn28b { l: usize, m: usize },
    L1a,
    L1b,
    L1c,
    /// 2D, `m >= 2`, `l <= m - 2`
    L1d { l: usize, m: usize },
    L2a,
    L2b,
    L2c,
    L2d,
    L2e,
    /// 3D, `m >= 3`, `l <= m - 3`
    L2f { l: usize, m: usize },
    /// 4D: `||f||_4 <= ||Df||_2`
    Sob211,
    /// 4D, `m >= 1`, `l <= m - 1`
    L3 { l: usize, m: usize },
}

impl InequalityCase {
    /// Grid dimension the inequality is stated for; `None` means any.
    pub fn required_dim(&self) -> Option<usize> {
        use InequalityCase::*;
        match self {
            Gn27a | L1a | L1b | L1c | L1d { .. } => Some(2),
            Gn27b | L2a | L2b | L2c | L2d | L2e | L2f { .. } => Some(3),
            Sob211 | L3 { .. } => Some(4),
            Gn28a | Gn28b { .. } => None,
        }
    }

    /// Checks the family parameters against the ranges of the statement.
    pub fn validate(&self) -> Result<()> {
        use InequalityCase::*;
        let ok = match *self {
            Gn28b { l, m } => m >= 1 && l <= m,
            L1d { l, m } => m >= 2 && l + 2 <= m,
            L2f { l, m } => m >= 3 && l + 3 <= m,
            L3 { l, m } => m >= 1 && l < m,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{self}: derivative orders outside the stated range"
            )))
        }
    }

    /// Highest Sobolev order the right-hand side needs.
    pub fn max_derivative(&self) -> usize {
        use InequalityCase::*;
        match *self {
            Gn27a | Gn27b | Gn28a | L1a | L2a => 2,
            L1b | L1c | L2b | L2c => 3,
            L2d => 4,
            L2e => 5,
            Gn28b { m, .. } => m,
            L1d { m, .. } | L2f { m, .. } | L3 { m, .. } => m + 1,
            Sob211 => 1,
        }
    }

    /// The full set of cases with representative family parameters, for a
    /// given dimension.
    pub fn catalogue(dim: usize) -> Vec<InequalityCase> {
        use InequalityCase::*;
        let mut out = vec![Gn28a, Gn28b { l: 1, m: 3 }];
        match dim {
            2 => out.extend([Gn27a, L1a, L1b, L1c, L1d { l: 0, m: 2 }, L1d { l: 1, m: 3 }]),
            3 => out.extend([
                Gn27b,
                L2a,
                L2b,
                L2c,
                L2d,
                L2e,
                L2f { l: 0, m: 3 },
                L2f { l: 1, m: 4 },
            ]),
            4 => out.extend([Sob211, L3 { l: 0, m: 1 }, L3 { l: 1, m: 2 }]),
            _ => {}
        }
        out
    }
}

impl fmt::Display for InequalityCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use InequalityCase::*;
        match *self {
            Gn27a => write!(f, "GN_2_7a"),
            Gn27b => write!(f, "GN_2_7b"),
            Gn28a => write!(f, "GN_2_8a"),
            Gn28b { l, m } => write!(f, "GN_2_8b({l},{m})"),
            L1a => write!(f, "L1_2_9a"),
            L1b => write!(f, "L1_2_9b"),
            L1c => write!(f, "L1_2_9c"),
            L1d { l, m } => write!(f, "L1_2_9d({l},{m})"),
            L2a => write!(f, "L2_2_10a"),
            L2b => write!(f, "L2_2_10b"),
            L2c => write!(f, "L2_2_10c"),
            L2d => write!(f, "L2_2_10d"),
            L2e => write!(f, "L2_2_10e"),
            L2f { l, m } => write!(f, "L2_2_10f({l},{m})"),
            Sob211 => write!(f, "SOB_2_11"),
            L3 { l, m } => write!(f, "L3_2_12({l},{m})"),
        }
    }
}

impl FromStr for InequalityCase {
    type Err = Error;

    /// Accepts either the identifier form (`L2_2_10f(0,3)`) or the bare
    /// case label (`2.10f`, `2.10f(0,3)`). Families default to their
    /// smallest admissible parameters.
    fn from_str(s: &str) -> Result<Self> {
        use InequalityCase::*;
        let s = s.trim();
        let (head, params) = match s.find('(') {
            Some(i) => {
                let inner = s[i + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| bad_case(s))?;
                let nums = inner
                    .split(',')
                    .map(|t| t.trim().parse::<usize>().map_err(|_| bad_case(s)))
                    .collect::<Result<Vec<_>>>()?;
                if nums.len() != 2 {
                    return Err(bad_case(s));
                }
                (&s[..i], Some((nums[0], nums[1])))
            }
            None => (s, None),
        };
        let label = head
            .trim_start_matches("GN_")
            .trim_start_matches("L1_")
            .trim_start_matches("L2_")
            .trim_start_matches("L3_")
            .trim_start_matches("SOB_")
            .replace('_', ".");
        let lm = |dl: usize, dm: usize| params.unwrap_or((dl, dm));
        let case = match label.as_str() {
            "2.7a" => Gn27a,
            "2.7b" => Gn27b,
            "2.8a" => Gn28a,
            "2.8b" => {
                let (l, m) = lm(1, 2);
                Gn28b { l, m }
            }
            "2.9a" => L1a,
            "2.9b" => L1b,
            "2.9c" => L1c,
            "2.9d" => {
                let (l, m) = lm(0, 2);
                L1d { l, m }
            }
            "2.10a" => L2a,
            "2.10b" => L2b,
            "2.10c" => L2c,
            "2.10d" => L2d,
            "2.10e" => L2e,
            "2.10f" => {
                let (l, m) = lm(0, 3);
                L2f { l, m }
            }
            "2.11" => Sob211,
            "2.12" => {
                let (l, m) = lm(0, 1);
                L3 { l, m }
            }
            _ => return Err(bad_case(s)),
        };
        if params.is_some() && !matches!(case, Gn28b { .. } | L1d { .. } | L2f { .. } | L3 { .. }) {
            return Err(bad_case(s));
        }
        case.validate()?;
        Ok(case)
    }
}

fn bad_case(s: &str) -> Error {
    Error::InvalidParameter(format!("unknown inequality case `{s}`"))
}

/// Both sides of one inequality instance on one field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalityReport {
    pub case: InequalityCase,
    pub lhs: f64,
    pub rhs_without_constant: f64,
    /// `lhs / rhs`, or 0 when the right-hand side vanishes.
    pub ratio: f64,
    pub degenerate: bool,
}

impl InequalityReport {
    pub fn new(case: InequalityCase, lhs: f64, rhs: f64) -> Self {
        let degenerate = !(rhs > 0.0);
        InequalityReport {
            case,
            lhs,
            rhs_without_constant: rhs,
            ratio: if degenerate { 0.0 } else { lhs / rhs },
            degenerate,
        }
    }
}

/// Memoized norms of one pair, shared across the cases evaluated on it.
pub struct NormCache<'a> {
    field: &'a PairField,
    l2: HashMap<usize, f64>,
    sup: HashMap<usize, f64>,
    l4: HashMap<usize, f64>,
}

impl<'a> NormCache<'a> {
    pub fn new(field: &'a PairField) -> Self {
        NormCache {
            field,
            l2: HashMap::new(),
            sup: HashMap::new(),
            l4: HashMap::new(),
        }
    }

    /// `||(D^m u, D^m b)||_2`
    pub fn l2(&mut self, m: usize) -> f64 {
        let f = self.field;
        *self
            .l2
            .entry(m)
            .or_insert_with(|| hs_norm(f, m as f64).expect("valid order"))
    }

    /// `||(D^m u, D^m b)||_inf`
    pub fn sup(&mut self, m: usize) -> f64 {
        let f = self.field;
        *self
            .sup
            .entry(m)
            .or_insert_with(|| dm_lq_norm(f, m, f64::INFINITY).expect("valid exponent"))
    }

    /// `||(D^m u, D^m b)||_4`
    pub fn l4(&mut self, m: usize) -> f64 {
        let f = self.field;
        *self
            .l4
            .entry(m)
            .or_insert_with(|| dm_lq_norm(f, m, 4.0).expect("valid exponent"))
    }
}

/// Evaluates both sides of `case` on `f`.
pub fn evaluate(case: InequalityCase, f: &PairField) -> Result<InequalityReport> {
    check_applicable(case, f)?;
    Ok(evaluate_cached(case, &mut NormCache::new(f)))
}

fn check_applicable(case: InequalityCase, f: &PairField) -> Result<()> {
    case.validate()?;
    let dim = f.grid().dim();
    if let Some(d) = case.required_dim() {
        if d != dim {
            return Err(Error::InvalidParameter(format!(
                "{case} is stated for dimension {d}, field lives in dimension {dim}"
            )));
        }
    }
    let mean: f64 = f
        .u
        .components()
        .iter()
        .chain(f.b.components())
        .map(|c| c.coeffs()[0].norm())
        .fold(0.0, f64::max);
    let scale = (f.u.mode_energy() + f.b.mode_energy()).sqrt();
    if mean > 1e-12 * scale {
        return Err(Error::InvalidParameter(format!(
            "{case} needs mean-zero fields"
        )));
    }
    Ok(())
}

/// Evaluates `case` using (and filling) a shared norm cache. Assumes the
/// case has already been checked against the field.
pub fn evaluate_cached(case: InequalityCase, c: &mut NormCache<'_>) -> InequalityReport {
    use InequalityCase::*;
    let (lhs, rhs) = match case {
        Gn27a => (c.sup(0), c.l2(0).sqrt() * c.l2(2).sqrt()),
        Gn27b => (c.sup(0), c.l2(0).powf(0.25) * c.l2(2).powf(0.75)),
        Gn28a => (c.l2(1), c.l2(0).sqrt() * c.l2(2).sqrt()),
        Gn28b { l, m } => {
            let theta = l as f64 / m as f64;
            (c.l2(l), c.l2(0).powf(1.0 - theta) * c.l2(m).powf(theta))
        }
        L1a => (c.sup(0) * c.l2(1), c.l2(0) * c.l2(2)),
        L1b => (c.sup(0) * c.l2(2), c.l2(0) * c.l2(3)),
        L1c => (c.sup(1) * c.l2(1), c.l2(0) * c.l2(3)),
        L1d { l, m } => (c.sup(l) * c.l2(m - l), c.l2(0) * c.l2(m + 1)),
        L2a => (c.sup(0) * c.l2(1), c.l2(0).sqrt() * c.l2(1).sqrt() * c.l2(2)),
        L2b => (c.sup(0) * c.l2(2), c.l2(0).sqrt() * c.l2(1).sqrt() * c.l2(3)),
        L2c => (c.sup(1) * c.l2(1), c.l2(0).sqrt() * c.l2(1).sqrt() * c.l2(3)),
        L2d => (
            c.sup(1) * c.l2(2),
            c.l2(0).powf(0.75) * c.l2(2).powf(0.25) * c.l2(4),
        ),
        L2e => (
            c.sup(2) * c.l2(2),
            c.l2(0).powf(0.75) * c.l2(2).powf(0.25) * c.l2(5),
        ),
        L2f { l, m } => {
            let lf = l as f64;
            let a = (lf + 1.5) / (lf + 2.0);
            let b = 0.5 / (lf + 2.0);
            (
                c.sup(l) * c.l2(m - l),
                c.l2(0).powf(a) * c.l2(l + 2).powf(b) * c.l2(m + 1),
            )
        }
        Sob211 => (c.l4(0), c.l2(1)),
        L3 { l, m } => (c.l4(l) * c.l4(m - l), c.l2(1) * c.l2(m + 1)),
    };
    InequalityReport::new(case, lhs, rhs)
}

/// Distribution of the random pairs used to estimate constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub dim: usize,
    pub points_per_axis: usize,
    pub box_length: f64,
    pub band: BandSpec,
}

impl EnsembleSpec {
    /// Default ensemble per dimension: a `2 pi` box, spectral slope 2 and a
    /// band well inside the 2/3-rule limit so that every norm up to `D^5`
    /// is alias-free and grid sup-norms are well sampled.
    pub fn default_for_dim(dim: usize) -> Result<Self> {
        let (n, k_max) = match dim {
            2 => (64, 8.0),
            3 => (32, 5.0),
            4 => (16, 3.0),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "no ensemble for dimension {dim}"
                )))
            }
        };
        Ok(EnsembleSpec {
            dim,
            points_per_axis: n,
            box_length: 2.0 * std::f64::consts::PI,
            band: BandSpec {
                k_min: 1.0,
                k_max,
                slope: 2.0,
            },
        })
    }
}

/// Ensemble estimate for one case.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleResult {
    pub case: InequalityCase,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub n_samples: usize,
    pub n_degenerate: usize,
}

/// Largest ratio of `case` over `n_samples` random pairs.
pub fn ensemble_constant(
    case: InequalityCase,
    spec: &EnsembleSpec,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    Ok(ensemble_constants(&[case], spec, n_samples, seed)?[0].max_ratio)
}

/// Evaluates several cases on one shared ensemble. Sample `i` is drawn from
/// the RNG stream `(seed, i)`, so results do not depend on the number of
/// worker threads.
pub fn ensemble_constants(
    cases: &[InequalityCase],
    spec: &EnsembleSpec,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<EnsembleResult>> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
    }
    for case in cases {
        case.validate()?;
        if let Some(d) = case.required_dim() {
            if d != spec.dim {
                return Err(Error::InvalidParameter(format!(
                    "{case} is stated for dimension {d}, ensemble is {}-dimensional",
                    spec.dim
                )));
            }
        }
    }
    let grid = make_grid(spec.dim, spec.points_per_axis, spec.box_length)?;
    spec.band.validate(&grid)?;

    let per_sample = |i: usize| -> Result<Vec<InequalityReport>> {
        let mut rng = sample_rng(seed, i as u64);
        let pair = random_band_pair(&grid, &spec.band, 1.0, &mut rng)?;
        let mut cache = NormCache::new(&pair);
        Ok(cases.iter().map(|&c| evaluate_cached(c, &mut cache)).collect())
    };
    let reports: Vec<Vec<InequalityReport>> = crate::with_workers(|| {
        (0..n_samples)
            .into_par_iter()
            .map(per_sample)
            .collect::<Result<Vec<_>>>()
    })?;

    Ok(cases
        .iter()
        .enumerate()
        .map(|(j, &case)| {
            let mut max_ratio: f64 = 0.0;
            let mut sum = 0.0;
            let mut n_degenerate = 0;
            for r in &reports {
                let rep = r[j];
                if rep.degenerate {
                    n_degenerate += 1;
                } else {
                    max_ratio = max_ratio.max(rep.ratio);
                    sum += rep.ratio;
                }
            }
            let valid = n_samples - n_degenerate;
            EnsembleResult {
                case,
                max_ratio,
                mean_ratio: if valid > 0 { sum / valid as f64 } else { 0.0 },
                n_samples,
                n_degenerate,
            }
        })
        .collect())
}
