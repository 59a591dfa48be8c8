use crate::error::Result;
use crate::inequalities::{ensemble_constant, EnsembleSpec, InequalityCase};
use crate::norms::{hs_norm, lq_norm, PairField};

/// Factor applied to the measured ensemble constant to obtain the default
/// smallness constant.
pub const SMALLNESS_SAFETY_FACTOR: f64 = 2.0;

/// Relative boundary magnitude above which localized data is considered to
/// have reached the periodic boundary.
pub const WRAPAROUND_THRESHOLD: f64 = 1e-8;

/// Sup-norm bound from `L^2` and `H^2` norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GnBound {
    /// `C ||f||_2^{1/2} ||D^2 f||_2^{1/2}` in 2D,
    /// `C ||f||_2^{1/4} ||D^2 f||_2^{3/4}` in 3D, `C ||D^2 f||_2` in 4D.
    pub bound: f64,
    /// Largest grid sample of `|(u, b)|`.
    pub sampled_sup: f64,
}

impl GnBound {
    pub fn dominates(&self) -> bool {
        self.sampled_sup <= self.bound
    }
}

pub fn linf_via_gn(fields: &PairField, constant: f64) -> Result<GnBound> {
    let l2 = hs_norm(fields, 0.0)?;
    let h2 = hs_norm(fields, 2.0)?;
    let shape = match fields.grid().dim() {
        2 => (l2 * h2).sqrt(),
        3 => l2.powf(0.25) * h2.powf(0.75),
        _ => h2,
    };
    Ok(GnBound {
        bound: constant * shape,
        sampled_sup: lq_norm(fields, f64::INFINITY)?,
    })
}

/// `max |(u, b)|` over the two grid layers next to the periodic boundary
/// (first and last index along any axis), divided by the overall maximum.
/// Zero for the zero field.
pub fn boundary_ratio(fields: &PairField) -> f64 {
    let grid = fields.grid();
    let n = grid.points_per_axis();
    let phys: Vec<Vec<f64>> = fields
        .u
        .to_physical()
        .into_iter()
        .chain(fields.b.to_physical())
        .collect();
    let mut peak: f64 = 0.0;
    let mut edge: f64 = 0.0;
    for x in 0..grid.len() {
        let mag = phys.iter().fold(0.0f64, |m, c| m.max(c[x].abs()));
        peak = peak.max(mag);
        if on_boundary(x, n, grid.dim()) {
            edge = edge.max(mag);
        }
    }
    if peak > 0.0 {
        edge / peak
    } else {
        0.0
    }
}

fn on_boundary(mut flat: usize, n: usize, dim: usize) -> bool {
    for _ in 0..dim {
        let i = flat % n;
        if i == 0 || i == n - 1 {
            return true;
        }
        flat /= n;
    }
    false
}

/// Whether the field at the boundary layers exceeds `threshold` times its peak.
pub fn detect_wraparound(fields: &PairField, threshold: f64) -> bool {
    boundary_ratio(fields) > threshold
}

/// [`SMALLNESS_SAFETY_FACTOR`] times the measured constant of
/// `||f||_inf ||Df||_2 <= C ||f||_2^{1/2} ||Df||_2^{1/2} ||D^2 f||_2` on the
/// default 3D ensemble. The same value is used in every dimension.
pub fn default_smallness_constant(n_samples: usize, seed: u64) -> Result<f64> {
    let spec = EnsembleSpec::default_for_dim(3)?;
    Ok(SMALLNESS_SAFETY_FACTOR * ensemble_constant(InequalityCase::L2a, &spec, n_samples, seed)?)
}
