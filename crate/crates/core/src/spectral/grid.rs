use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::fft::FftEngine;
use crate::error::{Error, Result};

/// A cubic periodic grid `[0, L)^dim` with `n` points per axis and its
/// Fourier dual.
///
/// Cloning is cheap; all lookup tables live behind an `Arc`. Coefficients
/// are stored row-major with axis 0 slowest, in standard FFT ordering: index
/// `i` on an axis carries the integer frequency `i` for `i < n/2` and
/// `i - n` otherwise, so the Nyquist index maps to `-n/2`.
#[derive(Clone)]
pub struct FourierGrid {
    inner: Arc<GridTables>,
}

struct GridTables {
    dim: usize,
    n: usize,
    box_length: f64,
    len: usize,
    /// Full `|k|^2`, Nyquist included.
    k2: Vec<f64>,
    /// Per-axis wavenumber used for differentiation; zero on that axis's
    /// Nyquist index so that odd derivatives keep real fields real.
    kd: Vec<Vec<f64>>,
    /// Largest per-axis `|m|` over all axes.
    max_abs_m: Vec<u32>,
    /// Flat index of `-k`.
    partner: Vec<usize>,
    fft: FftEngine,
}

impl fmt::Debug for FourierGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierGrid")
            .field("dim", &self.dim())
            .field("points_per_axis", &self.points_per_axis())
            .field("box_length", &self.box_length())
            .finish()
    }
}

impl PartialEq for FourierGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.dim() == other.dim()
                && self.points_per_axis() == other.points_per_axis()
                && self.box_length().to_bits() == other.box_length().to_bits())
    }
}

/// Integer frequency carried by index `i` on an axis of `n` points.
#[inline]
pub fn signed_mode(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Builds a grid. `dim` must be 2, 3 or 4 and `points_per_axis` a power of
/// two no smaller than 8.
pub fn make_grid(dim: usize, points_per_axis: usize, box_length: f64) -> Result<FourierGrid> {
    FourierGrid::new(dim, points_per_axis, box_length)
}

impl FourierGrid {
    pub fn new(dim: usize, n: usize, box_length: f64) -> Result<Self> {
        if !(2..=4).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 2, 3 or 4, got {dim}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive and finite, got {box_length}"
            )));
        }
        let len = n
            .checked_pow(dim as u32)
            .filter(|&l| l <= 1 << 26)
            .ok_or_else(|| Error::InvalidGrid(format!("{n}^{dim} modes is too large")))?;

        let unit = 2.0 * PI / box_length;
        let mut k2 = vec![0.0; len];
        let mut kd = vec![vec![0.0; len]; dim];
        let mut max_abs_m = vec![0u32; len];
        let mut partner = vec![0usize; len];
        let mut idx = vec![0usize; dim];
        for flat in 0..len {
            let mut rem = flat;
            for a in (0..dim).rev() {
                idx[a] = rem % n;
                rem /= n;
            }
            let mut sum = 0.0;
            let mut mx = 0u32;
            let mut p = 0usize;
            for a in 0..dim {
                let m = signed_mode(idx[a], n);
                let k = m as f64 * unit;
                sum += k * k;
                kd[a][flat] = if idx[a] == n / 2 { 0.0 } else { k };
                mx = mx.max(m.unsigned_abs() as u32);
                p = p * n + (n - idx[a]) % n;
            }
            k2[flat] = sum;
            max_abs_m[flat] = mx;
            partner[flat] = p;
        }

        Ok(FourierGrid {
            inner: Arc::new(GridTables {
                dim,
                n,
                box_length,
                len,
                k2,
                kd,
                max_abs_m,
                partner,
                fft: FftEngine::new(dim, n),
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.inner.n
    }

    pub fn box_length(&self) -> f64 {
        self.inner.box_length
    }

    /// Total number of modes, `n^dim`.
    pub fn len(&self) -> usize {
        self.inner.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Box volume `L^dim`.
    pub fn volume(&self) -> f64 {
        self.box_length().powi(self.dim() as i32)
    }

    /// Quadrature weight of one grid cell, `(L/n)^dim`.
    pub fn cell_volume(&self) -> f64 {
        (self.box_length() / self.points_per_axis() as f64).powi(self.dim() as i32)
    }

    pub fn spacing(&self) -> f64 {
        self.box_length() / self.points_per_axis() as f64
    }

    /// Wavenumber spacing `2 pi / L`.
    pub fn wavenumber_unit(&self) -> f64 {
        2.0 * PI / self.box_length()
    }

    /// Per-axis integer frequencies in FFT order.
    pub fn axis_modes(&self) -> Vec<i64> {
        let n = self.points_per_axis();
        (0..n).map(|i| signed_mode(i, n)).collect()
    }

    /// Per-axis wavenumbers `2 pi m / L` in FFT order.
    pub fn axis_wavenumbers(&self) -> Vec<f64> {
        let unit = self.wavenumber_unit();
        self.axis_modes().iter().map(|&m| m as f64 * unit).collect()
    }

    /// `|k|^2` for every mode.
    pub fn k_squared(&self) -> &[f64] {
        &self.inner.k2
    }

    /// Differentiation wavenumbers along `axis` (Nyquist index zeroed).
    pub fn derivative_wavenumbers(&self, axis: usize) -> &[f64] {
        &self.inner.kd[axis]
    }

    /// Largest `|m_j|` of each mode.
    pub fn max_abs_mode(&self) -> &[u32] {
        &self.inner.max_abs_m
    }

    /// Flat index of the mode `-k`.
    pub fn partner(&self, flat: usize) -> usize {
        self.inner.partner[flat]
    }

    /// Multi-index of a flat position.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let n = self.points_per_axis();
        let mut out = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            out[a] = flat % n;
            flat /= n;
        }
        out
    }

    /// Integer frequency vector of a flat position.
    pub fn mode_vector(&self, flat: usize) -> Vec<i64> {
        let n = self.points_per_axis();
        self.unravel(flat)
            .into_iter()
            .map(|i| signed_mode(i, n))
            .collect()
    }

    /// Physical coordinates of the grid point at `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let h = self.spacing();
        self.unravel(flat)
            .into_iter()
            .map(|i| i as f64 * h)
            .collect()
    }

    /// Whether the mode at `flat` survives 2/3-rule truncation.
    #[inline]
    pub fn is_resolved(&self, flat: usize) -> bool {
        3 * self.inner.max_abs_m[flat] as usize <= self.points_per_axis()
    }

    pub(crate) fn fft(&self) -> &FftEngine {
        &self.inner.fft
    }
}
