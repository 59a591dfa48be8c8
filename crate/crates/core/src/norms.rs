//! Lebesgue and homogeneous Sobolev norms of vector fields and `(u, b)` pairs.
//!
//! Conventions:
//!
//! * Vector norms sum over components, `||u||_q^q = sum_i int |u_i|^q`, and
//!   `||u||_inf` is the largest component sup.
//! * Pair norms combine the two fields the same way, so the pair behaves
//!   like one field with `2 * dim` components.
//! * `||D^m u||_q` sums over all *ordered* index tuples `(j_1, ..., j_m)`.
//!   With this choice `||D^m u||_2^2 = sum_k |k|^{2m} |u(k)|^2` holds exactly.
//! * Fourier coefficients use the mean normalization of
//!   [`SpectralField`]; the continuous-transform (unitary) form of
//!   `||u||_{H^s}^2 = int |xi|^{2s} |u^(xi)|^2 dxi` then reads
//!   `L^dim sum_k |k|^{2s} |c(k)|^2` on the box.
//! * `L^q` integrals use the rectangle rule on the grid, which is exact for
//!   trigonometric polynomials below the Nyquist limit. `q = inf` is the
//!   maximum over grid samples, a lower bound on the true supremum.

use crate::error::{Error, Result};
use crate::inequalities::{InequalityCase, InequalityReport};
use crate::spectral::{
    inverse_many, mixed_derivative, FourierGrid, SpectralField, VectorSpectralField,
};

/// Anything that can be viewed as a list of scalar components on one grid.
pub trait FieldComponents {
    fn grid(&self) -> &FourierGrid;
    fn scalar_components(&self) -> Vec<&SpectralField>;
}

impl FieldComponents for VectorSpectralField {
    fn grid(&self) -> &FourierGrid {
        VectorSpectralField::grid(self)
    }

    fn scalar_components(&self) -> Vec<&SpectralField> {
        self.components().iter().collect()
    }
}

impl FieldComponents for SpectralField {
    fn grid(&self) -> &FourierGrid {
        SpectralField::grid(self)
    }

    fn scalar_components(&self) -> Vec<&SpectralField> {
        vec![self]
    }
}

/// Velocity and magnetic field on a shared grid.
#[derive(Clone, Debug)]
pub struct PairField {
    pub u: VectorSpectralField,
    pub b: VectorSpectralField,
}

impl PairField {
    pub fn new(u: VectorSpectralField, b: VectorSpectralField) -> Result<Self> {
        if u.grid() != b.grid() {
            return Err(Error::GridMismatch("u and b must share a grid".into()));
        }
        Ok(PairField { u, b })
    }

    pub fn zeros(grid: &FourierGrid) -> Self {
        PairField {
            u: VectorSpectralField::zeros(grid),
            b: VectorSpectralField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &FourierGrid {
        self.u.grid()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        PairField {
            u: self.u.scaled(alpha),
            b: self.b.scaled(alpha),
        }
    }

    pub fn axpy(&mut self, alpha: f64, other: &PairField) {
        self.u.axpy(alpha, &other.u);
        self.b.axpy(alpha, &other.b);
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.b.is_finite()
    }
}

impl FieldComponents for PairField {
    fn grid(&self) -> &FourierGrid {
        PairField::grid(self)
    }

    fn scalar_components(&self) -> Vec<&SpectralField> {
        self.u.components().iter().chain(self.b.components()).collect()
    }
}

/// Relative spectral divergence `max_k |k . v(k)| / (sum_k |v(k)|^2)^{1/2}`;
/// zero for the zero field.
pub fn divergence_ratio(v: &VectorSpectralField) -> f64 {
    let grid = v.grid();
    let scale = v.mode_energy().sqrt();
    if scale == 0.0 {
        return 0.0;
    }
    let tables: Vec<&[f64]> = (0..grid.dim()).map(|a| grid.derivative_wavenumbers(a)).collect();
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let mut acc = num_complex::Complex64::default();
        for (a, c) in v.components().iter().enumerate() {
            acc += c.coeffs()[i] * tables[a][i];
        }
        worst = worst.max(acc.norm());
    }
    worst / scale
}

/// `||f||_{H^s}` (homogeneous). `s = 0` gives the `L^2` norm, mean included;
/// for `s > 0` the mean mode carries no weight.
pub fn hs_norm<F: FieldComponents + ?Sized>(f: &F, s: f64) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Sobolev order must be a finite s >= 0, got {s}"
        )));
    }
    let grid = f.grid();
    let k2 = grid.k_squared();
    let mut sum = 0.0;
    for comp in f.scalar_components() {
        if s == 0.0 {
            sum += comp.mode_energy();
        } else {
            for (c, &kk) in comp.coeffs().iter().zip(k2) {
                if kk > 0.0 {
                    sum += weight(kk, s) * c.norm_sqr();
                }
            }
        }
    }
    Ok((sum * grid.volume()).sqrt())
}

/// `|k|^{2s}` from `|k|^2`, exact multiplication for small integer orders.
#[inline]
fn weight(k2: f64, s: f64) -> f64 {
    if s.fract() == 0.0 && s <= 8.0 {
        let mut w = 1.0;
        for _ in 0..s as u32 {
            w *= k2;
        }
        w
    } else {
        k2.powf(s)
    }
}

fn check_q(q: f64) -> Result<()> {
    if q.is_nan() || q < 2.0 {
        return Err(Error::InvalidParameter(format!(
            "Lebesgue exponent must lie in [2, inf], got {q}"
        )));
    }
    Ok(())
}

/// Accumulates `sum |x|^q` (or the max for `q = inf`) over grid samples.
#[derive(Clone, Copy, Debug)]
struct LqAccumulator {
    q: f64,
    acc: f64,
}

impl LqAccumulator {
    fn new(q: f64) -> Self {
        LqAccumulator { q, acc: 0.0 }
    }

    fn add(&mut self, samples: &[f64], weight: f64) {
        if self.q.is_infinite() {
            let m = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            self.acc = self.acc.max(m);
        } else {
            let s: f64 = if self.q == 2.0 {
                samples.iter().map(|x| x * x).sum()
            } else if self.q == 4.0 {
                samples.iter().map(|x| (x * x) * (x * x)).sum()
            } else {
                samples.iter().map(|x| x.abs().powf(self.q)).sum()
            };
            self.acc += weight * s;
        }
    }

    fn finish(self, cell_volume: f64) -> f64 {
        if self.q.is_infinite() {
            self.acc
        } else {
            (self.acc * cell_volume).powf(1.0 / self.q)
        }
    }
}

/// `||f||_q` for `q` in `[2, inf]`; pass `f64::INFINITY` for the sup norm.
pub fn lq_norm<F: FieldComponents + ?Sized>(f: &F, q: f64) -> Result<f64> {
    check_q(q)?;
    let comps = f.scalar_components();
    let mut acc = LqAccumulator::new(q);
    for chunk in comps.chunks(2) {
        for samples in inverse_many(chunk) {
            acc.add(&samples, 1.0);
        }
    }
    Ok(acc.finish(f.grid().cell_volume()))
}

/// Nondecreasing axis tuples of length `m` together with the number of
/// ordered tuples each one represents.
pub(crate) fn derivative_multisets(dim: usize, m: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(dim: usize, m: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for a in start..dim {
            cur.push(a);
            rec(dim, m, a, cur, out);
            cur.pop();
        }
    }
    let mut sets = Vec::new();
    rec(dim, m, 0, &mut Vec::with_capacity(m), &mut sets);
    let fact = |k: usize| (1..=k).map(|x| x as f64).product::<f64>();
    sets.into_iter()
        .map(|s| {
            let mut counts = vec![0usize; dim];
            for &a in &s {
                counts[a] += 1;
            }
            let mult = fact(m) / counts.iter().map(|&c| fact(c)).product::<f64>();
            (s, mult)
        })
        .collect()
}

/// `||D^m f||_q` per the ordered multi-index sum; `q = inf` takes the max
/// over all components and index tuples.
pub fn dm_lq_norm<F: FieldComponents + ?Sized>(f: &F, m: usize, q: f64) -> Result<f64> {
    check_q(q)?;
    if m == 0 {
        return lq_norm(f, q);
    }
    let grid = f.grid();
    let sets = derivative_multisets(grid.dim(), m);
    let mut acc = LqAccumulator::new(q);
    let mut pending: Vec<(SpectralField, f64)> = Vec::with_capacity(2);
    let flush = |pending: &mut Vec<(SpectralField, f64)>, acc: &mut LqAccumulator| {
        let refs: Vec<&SpectralField> = pending.iter().map(|(f, _)| f).collect();
        for (samples, (_, w)) in inverse_many(&refs).iter().zip(pending.iter()) {
            acc.add(samples, *w);
        }
        pending.clear();
    };
    for comp in f.scalar_components() {
        for (axes, mult) in &sets {
            pending.push((mixed_derivative(comp, axes)?, *mult));
            if pending.len() == 2 {
                flush(&mut pending, &mut acc);
            }
        }
    }
    if !pending.is_empty() {
        flush(&mut pending, &mut acc);
    }
    Ok(acc.finish(grid.cell_volume()))
}

/// Which norm to compute.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormRequest {
    /// `||.||_{H^s}`
    Sobolev { s: f64 },
    /// `||.||_q`
    Lebesgue { q: f64 },
    /// `||D^m .||_q`
    DerivativeLebesgue { m: usize, q: f64 },
}

impl NormRequest {
    pub fn evaluate<F: FieldComponents + ?Sized>(&self, f: &F) -> Result<f64> {
        match *self {
            NormRequest::Sobolev { s } => hs_norm(f, s),
            NormRequest::Lebesgue { q } => lq_norm(f, q),
            NormRequest::DerivativeLebesgue { m, q } => dm_lq_norm(f, m, q),
        }
    }
}

/// Checks `||D^l f||_2 <= ||f||_2^{1-l/m} ||D^m f||_2^{l/m}`, whose constant
/// is exactly one by Hölder's inequality in Fourier space.
pub fn interpolation_check<F: FieldComponents + ?Sized>(
    f: &F,
    l: usize,
    m: usize,
) -> Result<InequalityReport> {
    let case = InequalityCase::Gn28b { l, m };
    case.validate()?;
    let theta = l as f64 / m as f64;
    let lhs = hs_norm(f, l as f64)?;
    let rhs = hs_norm(f, 0.0)?.powf(1.0 - theta) * hs_norm(f, m as f64)?.powf(theta);
    Ok(InequalityReport::new(case, lhs, rhs))
}
