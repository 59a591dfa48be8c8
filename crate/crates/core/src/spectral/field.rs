use num_complex::Complex64;

use super::grid::FourierGrid;
use crate::error::{Error, Result};

/// Fourier coefficients of a real scalar field.
///
/// Normalization: `f(x) = sum_k c(k) e^{i k.x}`, so `c(0)` is the spatial
/// mean and `int |f|^2 dx = L^dim sum_k |c(k)|^2`.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: FourierGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &FourierGrid) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: &FourierGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Transforms real grid samples (row-major, axis 0 slowest).
    pub fn forward(grid: &FourierGrid, samples: &[f64]) -> Result<Self> {
        check_len(grid, samples.len())?;
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        grid.fft().forward(&mut buf);
        let scale = 1.0 / grid.len() as f64;
        let mut out = SpectralField {
            grid: grid.clone(),
            coeffs: buf,
        };
        // Symmetrize so that the Hermitian property holds exactly.
        out.coeffs.iter_mut().for_each(|c| *c *= scale);
        out.symmetrize();
        Ok(out)
    }

    /// Samples the real field on the grid.
    pub fn inverse(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        self.grid.fft().inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Samples a function of the physical coordinates on the grid and
    /// transforms it.
    pub fn from_fn(grid: &FourierGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let samples: Vec<f64> = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self::forward(grid, &samples).expect("sample count matches grid")
    }

    pub fn grid(&self) -> &FourierGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= alpha);
        out
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &SpectralField) {
        debug_assert!(self.grid == other.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * alpha;
        }
    }

    /// `sum_k |c(k)|^2`.
    pub fn mode_energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest `|c(-k) - conj(c(k))|` over all modes.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[self.grid.partner(i)] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Replaces each coefficient pair by its Hermitian part.
    pub fn symmetrize(&mut self) {
        for i in 0..self.coeffs.len() {
            let p = self.grid.partner(i);
            if p < i {
                continue;
            }
            if p == i {
                self.coeffs[i].im = 0.0;
            } else {
                let avg = (self.coeffs[i] + self.coeffs[p].conj()) * 0.5;
                self.coeffs[i] = avg;
                self.coeffs[p] = avg.conj();
            }
        }
    }
}

fn check_len(grid: &FourierGrid, got: usize) -> Result<()> {
    if got != grid.len() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            got,
        });
    }
    Ok(())
}

/// Inverse-transforms many fields, two per complex FFT.
pub fn inverse_many(fields: &[&SpectralField]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(fields.len());
    for chunk in fields.chunks(2) {
        match chunk {
            [a, b] => {
                let grid = a.grid();
                let i = Complex64::new(0.0, 1.0);
                let mut buf: Vec<Complex64> = a
                    .coeffs()
                    .iter()
                    .zip(b.coeffs())
                    .map(|(x, y)| x + i * y)
                    .collect();
                grid.fft().inverse(&mut buf);
                out.push(buf.iter().map(|c| c.re).collect());
                out.push(buf.iter().map(|c| c.im).collect());
            }
            [a] => out.push(a.inverse()),
            _ => unreachable!(),
        }
    }
    out
}

/// Forward-transforms many real sample arrays, two per complex FFT.
pub fn forward_many(grid: &FourierGrid, samples: &[&[f64]]) -> Result<Vec<SpectralField>> {
    let mut out = Vec::with_capacity(samples.len());
    let scale = 1.0 / grid.len() as f64;
    for chunk in samples.chunks(2) {
        match chunk {
            [a, b] => {
                check_len(grid, a.len())?;
                check_len(grid, b.len())?;
                let mut z: Vec<Complex64> =
                    a.iter().zip(b.iter()).map(|(&x, &y)| Complex64::new(x, y)).collect();
                grid.fft().forward(&mut z);
                let mut ca = vec![Complex64::default(); grid.len()];
                let mut cb = vec![Complex64::default(); grid.len()];
                for k in 0..grid.len() {
                    let zk = z[k] * scale;
                    let zm = z[grid.partner(k)].conj() * scale;
                    ca[k] = (zk + zm) * 0.5;
                    // (zk - zm) / 2i
                    let d = (zk - zm) * 0.5;
                    cb[k] = Complex64::new(d.im, -d.re);
                }
                out.push(SpectralField::from_coeffs(grid, ca)?);
                out.push(SpectralField::from_coeffs(grid, cb)?);
            }
            [a] => out.push(SpectralField::forward(grid, a)?),
            _ => unreachable!(),
        }
    }
    Ok(out)
}

/// A real vector field with one scalar component per spatial axis.
#[derive(Clone, Debug)]
pub struct VectorSpectralField {
    components: Vec<SpectralField>,
}

impl VectorSpectralField {
    pub fn new(components: Vec<SpectralField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("vector field needs components".into()))?;
        let grid = first.grid().clone();
        if components.len() != grid.dim() {
            return Err(Error::InvalidParameter(format!(
                "{}-dimensional grid needs {} components, got {}",
                grid.dim(),
                grid.dim(),
                components.len()
            )));
        }
        if components.iter().any(|c| *c.grid() != grid) {
            return Err(Error::GridMismatch(
                "vector components must share one grid".into(),
            ));
        }
        Ok(VectorSpectralField { components })
    }

    pub fn zeros(grid: &FourierGrid) -> Self {
        VectorSpectralField {
            components: (0..grid.dim()).map(|_| SpectralField::zeros(grid)).collect(),
        }
    }

    /// Samples a vector-valued function (`f(x, i)` is component `i`).
    pub fn from_fn(grid: &FourierGrid, f: impl Fn(&[f64], usize) -> f64) -> Self {
        let points: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.point(i)).collect();
        let samples: Vec<Vec<f64>> = (0..grid.dim())
            .map(|c| points.iter().map(|p| f(p, c)).collect())
            .collect();
        let refs: Vec<&[f64]> = samples.iter().map(|s| s.as_slice()).collect();
        let components = forward_many(grid, &refs).expect("sample count matches grid");
        VectorSpectralField { components }
    }

    pub fn grid(&self) -> &FourierGrid {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [SpectralField] {
        &mut self.components
    }

    pub fn component(&self, i: usize) -> &SpectralField {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<SpectralField> {
        self.components
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        VectorSpectralField {
            components: self.components.iter().map(|c| c.scaled(alpha)).collect(),
        }
    }

    pub fn axpy(&mut self, alpha: f64, other: &VectorSpectralField) {
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.axpy(alpha, b);
        }
    }

    /// Grid samples of every component.
    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        let refs: Vec<&SpectralField> = self.components.iter().collect();
        inverse_many(&refs)
    }

    pub fn mode_energy(&self) -> f64 {
        self.components.iter().map(|c| c.mode_energy()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.hermitian_defect())
            .fold(0.0, f64::max)
    }
}
