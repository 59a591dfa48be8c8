//! Initial-data recipes: random band-limited solenoidal pairs,
//! Gaussian-localized pairs and an Orszag–Tang-style vortex.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::norms::{hs_norm, PairField};
use crate::spectral::{
    leray_project, FourierGrid, SpectralField, VectorSpectralField,
};

/// Spectral shape of a random band-limited field.
///
/// Every mode with `k_min <= |m| <= k_max` (integer-frequency magnitude) gets
/// independent complex Gaussian coefficients with variance `|m|^-slope`;
/// everything else is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandSpec {
    pub k_min: f64,
    pub k_max: f64,
    pub slope: f64,
}

impl BandSpec {
    pub fn validate(&self, grid: &FourierGrid) -> Result<()> {
        let nyq = (grid.points_per_axis() / 2) as f64;
        if !(self.k_min > 0.0 && self.k_min <= self.k_max && self.k_max < nyq) {
            return Err(Error::InvalidParameter(format!(
                "band [{}, {}] must satisfy 0 < k_min <= k_max < {nyq}",
                self.k_min, self.k_max
            )));
        }
        if !self.slope.is_finite() {
            return Err(Error::InvalidParameter("spectral slope must be finite".into()));
        }
        Ok(())
    }
}

/// Deterministic RNG for sample `stream` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Random mean-zero, divergence-free pair with the given band, rescaled so
/// that `||(u, b)||_2 = l2_norm` (unless the draw is identically zero).
pub fn random_band_pair<R: Rng + ?Sized>(
    grid: &FourierGrid,
    band: &BandSpec,
    l2_norm: f64,
    rng: &mut R,
) -> Result<PairField> {
    band.validate(grid)?;
    let dim = grid.dim();
    let unit = grid.wavenumber_unit();
    let mut comps = vec![vec![Complex64::default(); grid.len()]; 2 * dim];
    for i in 0..grid.len() {
        let p = grid.partner(i);
        if p < i {
            continue;
        }
        let m = grid.k_squared()[i].sqrt() / unit;
        if m < band.k_min || m > band.k_max {
            continue;
        }
        let sd = m.powf(-band.slope / 2.0);
        for c in comps.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            if p == i {
                c[i] = Complex64::new(re * sd, 0.0);
            } else {
                let z = Complex64::new(re, im) * (sd / 2f64.sqrt());
                c[i] = z;
                c[p] = z.conj();
            }
        }
    }
    let mut fields = comps
        .into_iter()
        .map(|c| SpectralField::from_coeffs(grid, c))
        .collect::<Result<Vec<_>>>()?;
    let bs = fields.split_off(dim);
    let u = leray_project(&VectorSpectralField::new(fields)?);
    let b = leray_project(&VectorSpectralField::new(bs)?);
    let pair = PairField::new(u, b)?;
    Ok(normalize(pair, l2_norm))
}

fn normalize(pair: PairField, l2_norm: f64) -> PairField {
    let current = hs_norm(&pair, 0.0).expect("s = 0 is valid");
    if current > 0.0 {
        pair.scaled(l2_norm / current)
    } else {
        pair
    }
}

/// Divergence-free pair built from Gaussian stream functions centred in the
/// box. In 2D, `u = (-d_y psi, d_x psi)` with
/// `psi = exp(-|x - c|^2 / (2 sigma^2))`; `b` uses the same profile shifted
/// by a quarter width along the first axis. In higher dimensions the same
/// construction is applied in the `(x_0, x_1)` plane with a Gaussian
/// envelope in the remaining axes, followed by a Leray projection.
/// Both fields are scaled to `||u||_2 = ||b||_2 = l2_each`.
pub fn gaussian_localized_pair(grid: &FourierGrid, sigma: f64, l2_each: f64) -> Result<PairField> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let l = grid.box_length();
    let centre = l / 2.0;
    let make = |shift: f64| {
        VectorSpectralField::from_fn(grid, move |x, c| {
            let dx: Vec<f64> = x
                .iter()
                .enumerate()
                .map(|(a, &xa)| xa - centre - if a == 0 { shift } else { 0.0 })
                .collect();
            let r2: f64 = dx.iter().map(|d| d * d).sum();
            let psi = (-r2 / (2.0 * sigma * sigma)).exp();
            match c {
                0 => dx[1] / (sigma * sigma) * psi,
                1 => -dx[0] / (sigma * sigma) * psi,
                _ => 0.0,
            }
        })
    };
    let u = leray_project(&make(0.0));
    let b = leray_project(&make(0.25 * sigma));
    let scale = |v: VectorSpectralField| {
        let n = hs_norm(&v, 0.0).expect("valid");
        v.scaled(l2_each / n)
    };
    let mut pair = PairField::new(scale(u), scale(b))?;
    for c in pair.u.components_mut().iter_mut().chain(pair.b.components_mut()) {
        c.coeffs_mut()[0] = Complex64::default();
    }
    Ok(pair)
}

/// Orszag–Tang-style vortex in the `(x_0, x_1)` plane:
/// `u = (-sin y, sin x)`, `b = (-sin y, sin 2x)` on a `2 pi`-periodic box
/// (coordinates rescaled to the box), multiplied by `amplitude`.
pub fn orszag_tang_pair(grid: &FourierGrid, amplitude: f64) -> Result<PairField> {
    let s = 2.0 * PI / grid.box_length();
    let u = VectorSpectralField::from_fn(grid, |x, c| match c {
        0 => -amplitude * (s * x[1]).sin(),
        1 => amplitude * (s * x[0]).sin(),
        _ => 0.0,
    });
    let b = VectorSpectralField::from_fn(grid, |x, c| match c {
        0 => -amplitude * (s * x[1]).sin(),
        1 => amplitude * (2.0 * s * x[0]).sin(),
        _ => 0.0,
    });
    PairField::new(u, b)
}
