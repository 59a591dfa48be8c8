use std::cell::RefCell;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::norms::PairField;
use crate::spectral::{inverse_many, SpectralField, VectorSpectralField};

/// Quadratic terms of the velocity and induction equations.
#[derive(Clone, Debug)]
pub struct NonlinearTerms {
    /// `P(-u.grad u + b.grad b)`
    pub nu: VectorSpectralField,
    /// `-u.grad b + b.grad u`
    pub nb: VectorSpectralField,
    /// `max_i |u_i|` over grid samples, per axis.
    pub max_u: Vec<f64>,
    /// `max_i |b_i|` over grid samples, per axis.
    pub max_b: Vec<f64>,
}

/// Evaluates the quadratic terms in divergence form,
///
/// ```text
/// (-u.grad u + b.grad b)_i = D_j (b_i b_j - u_i u_j)
/// (-u.grad b + b.grad u)_i = D_j (u_i b_j - b_i u_j)
/// ```
///
/// which equals the advective form for solenoidal fields. Products are
/// formed on the grid; with `dealias` the inputs and outputs are truncated by
/// the 2/3 rule, which makes the products alias-free. The induction term is
/// solenoidal analytically and is re-projected to remove round-off drift.
pub fn nonlinear_rhs(fields: &PairField, dealias: bool) -> Result<NonlinearTerms> {
    let grid = fields.grid();
    let dim = grid.dim();
    let len = grid.len();
    let n_products = dim * dim;
    let n_prod_bufs = n_products.div_ceil(2);
    let keep = |k: usize| !dealias || grid.is_resolved(k);

    // Products are numbered: symmetric (i <= j) first, then antisymmetric (i < j).
    let mut sym_index = [[0usize; 4]; 4];
    let mut anti_index = [[0usize; 4]; 4];
    let mut next = 0;
    for i in 0..dim {
        for j in i..dim {
            sym_index[i][j] = next;
            sym_index[j][i] = next;
            next += 1;
        }
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            anti_index[i][j] = next;
            next += 1;
        }
    }

    let mut nu_out: Vec<Vec<Complex64>> = (0..dim).map(|_| vec![Complex64::default(); len]).collect();
    let mut nb_out: Vec<Vec<Complex64>> = (0..dim).map(|_| vec![Complex64::default(); len]).collect();
    let mut max_u = vec![0.0f64; dim];
    let mut max_b = vec![0.0f64; dim];

    WORK.with(|cell| {
        let mut work = cell.borrow_mut();
        work.resize_with(dim + n_prod_bufs, Vec::new);
        for buf in work.iter_mut() {
            buf.resize(len, Complex64::default());
        }
        let (field_bufs, prod_bufs) = work.split_at_mut(dim);

        // Component c of the list (u_0.., b_0..) lives in buffer c / 2, real
        // part for even c and imaginary part for odd c.
        let component = |c: usize| {
            if c < dim {
                fields.u.component(c).coeffs()
            } else {
                fields.b.component(c - dim).coeffs()
            }
        };
        for (p, buf) in field_bufs.iter_mut().enumerate() {
            let (a, b) = (component(2 * p), component(2 * p + 1));
            for k in 0..len {
                buf[k] = if keep(k) {
                    Complex64::new(a[k].re - b[k].im, a[k].im + b[k].re)
                } else {
                    Complex64::default()
                };
            }
            grid.fft().inverse(buf);
        }

        let sample = |bufs: &[Vec<Complex64>], c: usize, x: usize| {
            let z = bufs[c / 2][x];
            if c % 2 == 0 {
                z.re
            } else {
                z.im
            }
        };
        let mut products = [0.0f64; 16];
        let mut u = [0.0f64; 4];
        let mut b = [0.0f64; 4];
        for x in 0..len {
            for i in 0..dim {
                u[i] = sample(field_bufs, i, x);
                b[i] = sample(field_bufs, dim + i, x);
                max_u[i] = max_u[i].max(u[i].abs());
                max_b[i] = max_b[i].max(b[i].abs());
            }
            for i in 0..dim {
                for j in i..dim {
                    products[sym_index[i][j]] = b[i] * b[j] - u[i] * u[j];
                }
                for j in (i + 1)..dim {
                    products[anti_index[i][j]] = u[i] * b[j] - b[i] * u[j];
                }
            }
            for (p, buf) in prod_bufs.iter_mut().enumerate() {
                let im = if 2 * p + 1 < n_products { products[2 * p + 1] } else { 0.0 };
                buf[x] = Complex64::new(products[2 * p], im);
            }
        }
        for buf in prod_bufs.iter_mut() {
            grid.fft().forward(buf);
        }

        let scale = 0.5 / len as f64;
        let tables: Vec<&[f64]> = (0..dim).map(|a| grid.derivative_wavenumbers(a)).collect();
        let mut spec = [Complex64::default(); 16];
        let mut kd = [0.0f64; 4];
        let mut acc_u = [Complex64::default(); 4];
        let mut acc_b = [Complex64::default(); 4];
        for k in 0..len {
            if !keep(k) {
                continue;
            }
            let mk = grid.partner(k);
            for (p, buf) in prod_bufs.iter().enumerate() {
                let zk = buf[k];
                let zm = buf[mk].conj();
                spec[2 * p] = (zk + zm) * scale;
                // (zk - zm) / 2i
                let d = (zk - zm) * scale;
                spec[2 * p + 1] = Complex64::new(d.im, -d.re);
            }
            let mut kk = 0.0;
            for a in 0..dim {
                kd[a] = tables[a][k];
                kk += kd[a] * kd[a];
            }
            for i in 0..dim {
                let mut su = Complex64::default();
                let mut sb = Complex64::default();
                for j in 0..dim {
                    su += spec[sym_index[i][j]] * kd[j];
                    if i < j {
                        sb += spec[anti_index[i][j]] * kd[j];
                    } else if j < i {
                        sb -= spec[anti_index[j][i]] * kd[j];
                    }
                }
                // multiply by i
                acc_u[i] = Complex64::new(-su.im, su.re);
                acc_b[i] = Complex64::new(-sb.im, sb.re);
            }
            if kk > 0.0 {
                for acc in [&mut acc_u, &mut acc_b] {
                    let mut kv = Complex64::default();
                    for a in 0..dim {
                        kv += acc[a] * kd[a];
                    }
                    let s = kv / kk;
                    for a in 0..dim {
                        acc[a] -= s * kd[a];
                    }
                }
            }
            for i in 0..dim {
                nu_out[i][k] = acc_u[i];
                nb_out[i][k] = acc_b[i];
            }
        }
    });

    let finite = |v: &[Vec<Complex64>]| v.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite());
    if !(finite(&nu_out) && finite(&nb_out)) {
        return Err(Error::Numerical(
            "non-finite values in the nonlinear terms".into(),
        ));
    }
    let wrap = |v: Vec<Vec<Complex64>>| -> Result<VectorSpectralField> {
        VectorSpectralField::new(
            v.into_iter()
                .map(|c| SpectralField::from_coeffs(grid, c))
                .collect::<Result<Vec<_>>>()?,
        )
    };
    Ok(NonlinearTerms {
        nu: wrap(nu_out)?,
        nb: wrap(nb_out)?,
        max_u,
        max_b,
    })
}

thread_local! {
    static WORK: RefCell<Vec<Vec<Complex64>>> = const { RefCell::new(Vec::new()) };
}

/// The two magnetic work terms of the energy budget,
/// `(<b.grad b, u>, <b.grad u, b>)`, computed on the grid. They cancel for
/// solenoidal `b`.
pub fn cross_term_work(fields: &PairField) -> Result<(f64, f64)> {
    let grid = fields.grid();
    let dim = grid.dim();
    let u = fields.u.to_physical();
    let b = fields.b.to_physical();
    let mut grad_u = Vec::with_capacity(dim * dim);
    let mut grad_b = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            grad_u.push(crate::spectral::derivative(fields.u.component(i), j)?);
            grad_b.push(crate::spectral::derivative(fields.b.component(i), j)?);
        }
    }
    let gu = inverse_many(&grad_u.iter().collect::<Vec<_>>());
    let gb = inverse_many(&grad_b.iter().collect::<Vec<_>>());
    let w = grid.cell_volume();
    let mut w_u = 0.0;
    let mut w_b = 0.0;
    for x in 0..grid.len() {
        for i in 0..dim {
            for j in 0..dim {
                // b_j D_j b_i u_i  and  b_j D_j u_i b_i
                w_u += b[j][x] * gb[i * dim + j][x] * u[i][x];
                w_b += b[j][x] * gu[i * dim + j][x] * b[i][x];
            }
        }
    }
    Ok((w_u * w, w_b * w))
}
