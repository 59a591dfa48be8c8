use crate::error::{Error, Result};
use crate::norms::{hs_norm, PairField};

use super::config::SolverConfig;
use super::rhs::nonlinear_rhs;
use super::stepper::{restore_invariants, MHDState, PairFactors};

/// Result of a Picard solve of the mild formulation.
#[derive(Clone, Debug)]
pub struct DuhamelOutcome {
    pub state: MHDState,
    /// `||v_{j+1}(T) - v_j(T)||_2` for `j = 0 .. n_picard - 1`, at the final
    /// time `T = t0 + horizon`.
    pub increments: Vec<f64>,
}

/// Quadrature weights (in units of the node spacing) for
/// `int_0^{tau_i} g` on the uniform nodes `tau_0 .. tau_i`.
///
/// Even `i` uses composite Simpson. Odd `i >= 3` uses Simpson up to
/// `tau_{i-3}` and the 3/8 rule on the last three intervals. `i = 1` uses the
/// third-order rule `(5 g_0 + 8 g_1 - g_2) / 12`, which reads one node past
/// the end of the interval.
fn weights(i: usize) -> Vec<f64> {
    match i {
        0 => vec![0.0],
        1 => vec![5.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0],
        _ => {
            let simpson_end = if i % 2 == 0 { i } else { i - 3 };
            let mut w = vec![0.0; i + 1];
            if simpson_end > 0 {
                for (j, wj) in w.iter_mut().enumerate().take(simpson_end + 1) {
                    *wj = if j == 0 || j == simpson_end {
                        1.0 / 3.0
                    } else if j % 2 == 1 {
                        4.0 / 3.0
                    } else {
                        2.0 / 3.0
                    };
                }
            }
            if i % 2 == 1 {
                for (o, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
                    w[simpson_end + o] += 3.0 / 8.0 * c;
                }
            }
            w
        }
    }
}

/// Picard iteration of
///
/// ```text
/// u(t) = e^{mu (t - t0) Lap} u(t0) + int_{t0}^t e^{mu (t - s) Lap} N_u(s) ds
/// b(t) = e^{nu (t - t0) Lap} b(t0) + int_{t0}^t e^{nu (t - s) Lap} N_b(s) ds
/// ```
///
/// on `2 * n_quad` uniform intervals of `[t0, t0 + horizon]`. Iterate 0 is the
/// heat flow of the data; iterate `j + 1` evaluates the nonlinear terms on
/// iterate `j` at every node. The iteration contracts when `horizon` is small
/// compared with the advective time, roughly
/// `horizon <= 0.1 dx / ||(u, b)||_inf`; growth of the iterate norm beyond ten
/// times the initial norm is reported as an error.
pub fn duhamel_solve(
    config: &SolverConfig,
    state0: &MHDState,
    horizon: f64,
    n_picard: usize,
    n_quad: usize,
) -> Result<DuhamelOutcome> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Duhamel horizon must be positive, got {horizon}"
        )));
    }
    if n_picard == 0 || n_quad < 2 {
        return Err(Error::InvalidParameter(format!(
            "need n_picard >= 1 and n_quad >= 2, got {n_picard} and {n_quad}"
        )));
    }
    let grid = &config.grid;
    let m = 2 * n_quad;
    let h = horizon / m as f64;
    let v0 = &state0.fields;
    let v0_norm = hs_norm(v0, 0.0)?;

    // Factors for offsets -1 ..= m, stored at index offset + 1.
    let factors: Vec<PairFactors> = (0..=m + 1)
        .map(|o| PairFactors::new(grid, config.mu, config.nu, (o as f64 - 1.0) * h))
        .collect();
    let flow = |offset: isize, p: &PairField| factors[(offset + 1) as usize].apply(p);

    let free: Vec<PairField> = (0..=m).map(|i| flow(i as isize, v0)).collect();
    let done = |fields: PairField, increments| {
        Ok(DuhamelOutcome {
            state: MHDState {
                t: state0.t + horizon,
                fields: restore_invariants(&fields, false),
            },
            increments,
        })
    };
    if !config.nonlinear {
        return done(free[m].clone(), vec![0.0; n_picard]);
    }

    let terms = |p: &PairField| -> Result<PairField> {
        let t = nonlinear_rhs(p, config.dealias)?;
        Ok(PairField { u: t.nu, b: t.nb })
    };
    let n0 = terms(v0)?;
    let mut iterate = free;
    let mut increments = Vec::with_capacity(n_picard);
    for pass in 0..n_picard {
        let mut forcing = Vec::with_capacity(m + 1);
        forcing.push(n0.clone());
        for node in iterate.iter().skip(1) {
            forcing.push(terms(node)?);
        }
        let last = pass + 1 == n_picard;
        let targets: Vec<usize> = if last { vec![m] } else { (1..=m).collect() };
        let mut next = iterate.clone();
        for i in targets {
            let mut acc = flow(i as isize, v0);
            for (j, w) in weights(i).into_iter().enumerate() {
                if w != 0.0 {
                    acc.axpy(w * h, &flow(i as isize - j as isize, &forcing[j]));
                }
            }
            next[i] = acc;
        }
        let mut delta = next[m].clone();
        delta.axpy(-1.0, &iterate[m]);
        increments.push(hs_norm(&delta, 0.0)?);
        let norm = hs_norm(&next[m], 0.0)?;
        if !norm.is_finite() || norm > 10.0 * v0_norm {
            return Err(Error::Numerical(format!(
                "Picard iterate {} grew to {norm:.3e} from {v0_norm:.3e}; the horizon {horizon} \
                 is too long for the iteration to contract (keep it below about \
                 0.1 dx / ||(u, b)||_inf)",
                pass + 1
            )));
        }
        iterate = next;
    }
    done(iterate.swap_remove(m), increments)
}
