use num_complex::Complex64;

use super::field::{SpectralField, VectorSpectralField};
use crate::error::{Error, Result};

/// Spectral partial derivative `D_axis f`: each coefficient times `i k_axis`.
///
/// The Nyquist index along `axis` has no conjugate partner on that axis, so
/// its derivative is set to zero; this keeps real fields real.
pub fn derivative(field: &SpectralField, axis: usize) -> Result<SpectralField> {
    let grid = field.grid();
    if axis >= grid.dim() {
        return Err(Error::AxisOutOfRange {
            axis,
            dim: grid.dim(),
        });
    }
    let kd = grid.derivative_wavenumbers(axis);
    let coeffs = field
        .coeffs()
        .iter()
        .zip(kd)
        .map(|(c, &k)| Complex64::new(-k * c.im, k * c.re))
        .collect();
    SpectralField::from_coeffs(grid, coeffs)
}

/// Applies `D_{j_1} ... D_{j_m}` for the given axes.
pub fn mixed_derivative(field: &SpectralField, axes: &[usize]) -> Result<SpectralField> {
    let grid = field.grid();
    if let Some(&axis) = axes.iter().find(|&&a| a >= grid.dim()) {
        return Err(Error::AxisOutOfRange {
            axis,
            dim: grid.dim(),
        });
    }
    let tables: Vec<&[f64]> = axes.iter().map(|&a| grid.derivative_wavenumbers(a)).collect();
    // i^m
    let phase = match axes.len() % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let coeffs = field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let symbol: f64 = tables.iter().map(|t| t[i]).product();
            c * phase * symbol
        })
        .collect();
    SpectralField::from_coeffs(grid, coeffs)
}

/// `sum_j D_j v_j`.
pub fn divergence(v: &VectorSpectralField) -> SpectralField {
    let grid = v.grid();
    let mut out = vec![Complex64::default(); grid.len()];
    for (axis, comp) in v.components().iter().enumerate() {
        let kd = grid.derivative_wavenumbers(axis);
        for ((o, c), &k) in out.iter_mut().zip(comp.coeffs()).zip(kd) {
            *o += Complex64::new(-k * c.im, k * c.re);
        }
    }
    SpectralField::from_coeffs(grid, out).expect("same grid")
}

/// Leray–Helmholtz projection onto divergence-free fields:
/// `v(k) <- v(k) - k (k . v(k)) / |k|^2` for every mode with `k != 0`.
///
/// Uses the differentiation wavenumbers, so the result has zero spectral
/// divergence exactly as computed by [`divergence`]. Modes whose
/// differentiation wavevector vanishes (the mean and pure-Nyquist modes) are
/// left unchanged.
pub fn leray_project(v: &VectorSpectralField) -> VectorSpectralField {
    let mut out = v.clone();
    leray_project_in_place(&mut out);
    out
}

/// In-place form of [`leray_project`].
pub fn leray_project_in_place(v: &mut VectorSpectralField) {
    let grid = v.grid().clone();
    let dim = grid.dim();
    let tables: Vec<&[f64]> = (0..dim).map(|a| grid.derivative_wavenumbers(a)).collect();
    let comps = v.components_mut();
    for i in 0..grid.len() {
        let mut kk = 0.0;
        let mut kv = Complex64::default();
        for a in 0..dim {
            let k = tables[a][i];
            kk += k * k;
            kv += comps[a].coeffs()[i] * k;
        }
        if kk == 0.0 {
            continue;
        }
        let s = kv / kk;
        for a in 0..dim {
            comps[a].coeffs_mut()[i] -= s * tables[a][i];
        }
    }
}

/// 2/3-rule truncation: zero every mode with some `|m_j| > n/3`.
pub fn dealias(field: &SpectralField) -> SpectralField {
    let mut out = field.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(field: &mut SpectralField) {
    let grid = field.grid().clone();
    for (i, c) in field.coeffs_mut().iter_mut().enumerate() {
        if !grid.is_resolved(i) {
            *c = Complex64::default();
        }
    }
}

pub fn dealias_vector(v: &VectorSpectralField) -> VectorSpectralField {
    let mut out = v.clone();
    for c in out.components_mut() {
        dealias_in_place(c);
    }
    out
}

/// Sets the mean (zero) mode of every component to zero.
pub fn remove_mean(v: &mut VectorSpectralField) {
    for c in v.components_mut() {
        c.coeffs_mut()[0] = Complex64::default();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn derivative_of_sine_is_cosine() {
        let g = make_grid(2, 16, 2.0 * PI).unwrap();
        let f = SpectralField::from_fn(&g, |x| x[0].sin());
        let d = derivative(&f, 0).unwrap().inverse();
        for (i, v) in d.iter().enumerate() {
            assert!((v - g.point(i)[0].cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = make_grid(3, 8, 1.0).unwrap();
        let f = SpectralField::forward(&g, &vec![2.0; g.len()]).unwrap();
        for axis in 0..3 {
            let d = derivative(&f, axis).unwrap();
            assert!(d.coeffs().iter().all(|c| c.norm() == 0.0));
        }
    }

    #[test]
    fn derivative_axis_out_of_range() {
        let g = make_grid(2, 8, 1.0).unwrap();
        let f = SpectralField::zeros(&g);
        assert!(matches!(
            derivative(&f, 2),
            Err(Error::AxisOutOfRange { axis: 2, dim: 2 })
        ));
    }

    #[test]
    fn gradient_fields_are_annihilated() {
        let g = make_grid(2, 16, 2.0 * PI).unwrap();
        let phi = SpectralField::from_fn(&g, |x| (x[0] + 2.0 * x[1]).sin() + (3.0 * x[1]).cos());
        let grad = VectorSpectralField::new(vec![
            derivative(&phi, 0).unwrap(),
            derivative(&phi, 1).unwrap(),
        ])
        .unwrap();
        let p = leray_project(&grad);
        assert!(p.mode_energy() < 1e-28);
    }

    #[test]
    fn solenoidal_fields_are_fixed() {
        let g = make_grid(2, 16, 2.0 * PI).unwrap();
        let v = VectorSpectralField::from_fn(&g, |x, c| {
            if c == 0 {
                x[0].sin() * x[1].cos()
            } else {
                -x[0].cos() * x[1].sin()
            }
        });
        let p = leray_project(&v);
        for (a, b) in p.components().iter().zip(v.components()) {
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                assert!((x - y).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn mode_at_two_thirds_is_removed() {
        let n = 24usize.next_power_of_two();
        let g = make_grid(2, n, 2.0 * PI).unwrap();
        let m = (n / 2 - 1) as f64;
        let f = SpectralField::from_fn(&g, |x| (m * x[0]).cos());
        assert!(dealias(&f).mode_energy() < 1e-26);
        let keep = (n / 3) as f64;
        let f = SpectralField::from_fn(&g, |x| (keep * x[0]).cos() + (keep * x[1]).sin());
        let d = dealias(&f);
        for (i, (a, b)) in d.coeffs().iter().zip(f.coeffs()).enumerate() {
            if g.is_resolved(i) {
                assert_eq!(a, b);
            } else {
                assert!(b.norm() < 1e-15);
            }
        }
        assert!((d.mode_energy() - 1.0).abs() < 1e-14);
    }
}
