use crate::error::{Error, Result};

use super::series::{NormSelector, NormSeries};

/// Slack added to the predicted exponent when none is given.
pub const DEFAULT_SLACK: f64 = 0.1;

/// Least-squares line through `(x, y)`: returns `(slope, intercept, rms)`.
pub(crate) fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

/// Log-log fit of one recorded norm over a time window.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    pub which: NormSelector,
    pub window: (f64, f64),
    pub samples: usize,
    /// `d log(norm) / d log(t)`
    pub slope: f64,
    pub intercept: f64,
    /// RMS deviation of `log(norm)` from the fitted line.
    pub residual: f64,
    /// Decay exponent `r` the theory predicts, `norm = o(t^-r)`.
    pub predicted_exponent: f64,
    pub slack: f64,
    /// `slope <= -predicted_exponent + slack`.
    pub consistent: bool,
}

/// Decay exponent paired with a norm in dimension `dim`: `s / 2` for
/// `H^s` and `dim / 4 - dim / (2 q)` for `L^q`.
pub fn predicted_exponent(which: NormSelector, dim: usize) -> f64 {
    let n = dim as f64;
    match which {
        NormSelector::L2 => 0.0,
        NormSelector::H1 => 0.5,
        NormSelector::Hs(s) => s / 2.0,
        NormSelector::Lq(q) => n / 4.0 - n / (2.0 * q),
    }
}

/// Fits `log(norm)` against `log(t)` on records with `t_a <= t <= t_b`.
pub fn fit_decay(
    series: &NormSeries,
    which: NormSelector,
    window: (f64, f64),
    dim: usize,
    slack: f64,
) -> Result<DecayFit> {
    let (ta, tb) = window;
    if !(ta > 0.0 && ta < tb) {
        return Err(Error::Series(format!(
            "fit window needs 0 < t_a < t_b, got {ta}:{tb}"
        )));
    }
    let col = series.column(which)?;
    let idx: Vec<usize> = (0..series.len())
        .filter(|&i| series.times[i] >= ta && series.times[i] <= tb)
        .collect();
    if idx.len() < 5 {
        return Err(Error::Series(format!(
            "fit window {ta}:{tb} holds {} records, need at least 5",
            idx.len()
        )));
    }
    if let Some(&i) = idx.iter().find(|&&i| !(col[i] > 0.0)) {
        return Err(Error::Series(format!(
            "norm is {} at t = {}; cannot take its logarithm",
            col[i], series.times[i]
        )));
    }
    let x: Vec<f64> = idx.iter().map(|&i| series.times[i].ln()).collect();
    let y: Vec<f64> = idx.iter().map(|&i| col[i].ln()).collect();
    let (slope, intercept, residual) = least_squares(&x, &y);
    let predicted = predicted_exponent(which, dim);
    Ok(DecayFit {
        which,
        window,
        samples: idx.len(),
        slope,
        intercept,
        residual,
        predicted_exponent: predicted,
        slack,
        consistent: slope <= -predicted + slack,
    })
}

/// Largest window usable for fits: it starts after the start-up transient
/// `5 dt record_every` (and at the first positive time) and ends at the last
/// record before `wraparound`, if any.
pub fn admissible_window(
    series: &NormSeries,
    dt: f64,
    record_every: usize,
    wraparound: Option<f64>,
) -> Result<(f64, f64)> {
    let start = 5.0 * dt * record_every as f64;
    let ok = |t: f64| t >= start && t > 0.0 && wraparound.is_none_or(|w| t < w);
    let first = series.times.iter().copied().find(|&t| ok(t));
    let last = series.times.iter().copied().rev().find(|&t| ok(t));
    match (first, last) {
        (Some(a), Some(b)) if a < b => Ok((a, b)),
        _ => Err(Error::Series("no admissible fit window in the series".into())),
    }
}
