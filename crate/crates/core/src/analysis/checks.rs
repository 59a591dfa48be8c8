use crate::error::{Error, Result};
use crate::norms::{hs_norm, PairField};

use super::series::{NormSelector, NormSeries};

/// Per-sample drift allowed by [`check_monotone_derivative`].
pub const MONOTONE_DRIFT: f64 = 1e-10;

/// Signed residual of the energy inequality between sampled times `r <= t`:
///
/// ```text
/// ||(u,b)(t)||^2 + 2 mu int_r^t ||Du||^2 + 2 nu int_r^t ||Db||^2 - ||(u,b)(r)||^2
/// ```
///
/// Nonpositive up to quadrature error for dissipative solutions, and exactly
/// zero when `r == t`.
pub fn energy_ledger(series: &NormSeries, r: f64, t: f64) -> Result<f64> {
    let i = series.index_of(r)?;
    let j = series.index_of(t)?;
    if i > j {
        return Err(Error::Series(format!("ledger needs r <= t, got r = {r}, t = {t}")));
    }
    Ok(ledger_at(series, i, j))
}

fn ledger_at(series: &NormSeries, i: usize, j: usize) -> f64 {
    let diss = (series.diss_u[j] - series.diss_u[i]) + (series.diss_b[j] - series.diss_b[i]);
    series.l2[j].powi(2) + diss - series.l2[i].powi(2)
}

/// Worst ledger residual over all sampled pairs `r <= t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerScan {
    /// Largest `residual / ||(u,b)(r)||^2` (signed).
    pub max_relative: f64,
    pub r_index: usize,
    pub t_index: usize,
}

pub fn ledger_scan(series: &NormSeries) -> Result<LedgerScan> {
    if series.is_empty() {
        return Err(Error::Series("empty series".into()));
    }
    let mut worst = LedgerScan {
        max_relative: f64::NEG_INFINITY,
        r_index: 0,
        t_index: 0,
    };
    for i in 0..series.len() {
        let e0 = series.l2[i].powi(2);
        for j in i..series.len() {
            let rel = if e0 > 0.0 { ledger_at(series, i, j) / e0 } else { 0.0 };
            if rel > worst.max_relative {
                worst = LedgerScan {
                    max_relative: rel,
                    r_index: i,
                    t_index: j,
                };
            }
        }
    }
    Ok(worst)
}

/// `C^2 ||(u0,b0)||_2 ||(Du,Db)||_2 < min(mu, nu)^2`, strict.
pub fn smallness_condition(fields: &PairField, initial_l2: f64, c: f64, mu: f64, nu: f64) -> bool {
    let d = hs_norm(fields, 1.0).expect("s = 1 is valid");
    smallness_holds(d, initial_l2, c, mu, nu)
}

pub(crate) fn smallness_holds(derivative_l2: f64, initial_l2: f64, c: f64, mu: f64, nu: f64) -> bool {
    c * c * initial_l2 * derivative_l2 < mu.min(nu).powi(2)
}

/// First record at which the smallness condition holds, judged from the
/// recorded `||(Du,Db)||_2`.
pub fn smallness_onset(series: &NormSeries, initial_l2: f64, c: f64, mu: f64, nu: f64) -> Option<usize> {
    series
        .h1
        .iter()
        .position(|&d| smallness_holds(d, initial_l2, c, mu, nu))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneReport {
    pub start_index: usize,
    /// Number of consecutive pairs inspected.
    pub pairs_checked: usize,
    /// Largest one-step increase of `||(Du,Db)||_2` (negative when strictly
    /// decreasing throughout).
    pub max_increase: f64,
    /// First index `i` with `h1[i] > h1[i-1] + MONOTONE_DRIFT`.
    pub first_violation: Option<usize>,
}

impl MonotoneReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Checks that `||(Du,Db)||_2` does not increase from record `t0_index` on.
pub fn check_monotone_derivative(series: &NormSeries, t0_index: usize) -> Result<MonotoneReport> {
    if t0_index >= series.len() {
        return Err(Error::Series(format!(
            "start index {t0_index} outside a series of {} records",
            series.len()
        )));
    }
    let h = &series.h1[t0_index..];
    let mut max_increase = f64::NEG_INFINITY;
    let mut first_violation = None;
    for (k, w) in h.windows(2).enumerate() {
        let inc = w[1] - w[0];
        max_increase = max_increase.max(inc);
        if inc > MONOTONE_DRIFT && first_violation.is_none() {
            first_violation = Some(t0_index + k + 1);
        }
    }
    Ok(MonotoneReport {
        start_index: t0_index,
        pairs_checked: h.len().saturating_sub(1),
        max_increase,
        first_violation,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrendReport {
    /// First index of the trailing half that was inspected.
    pub trailing_start: usize,
    pub end_index: usize,
    /// Largest relative one-step increase of `t f(t)^2` on the trailing half.
    pub max_relative_increase: f64,
    /// Log-log slope of `t f(t)^2` over the trailing half.
    pub trend_slope: f64,
    pub nonincreasing: bool,
}

/// Finite-horizon surrogate for `f(t) = o(t^{-1/2})`: over the trailing half
/// of the records `start ..= end`, `t f(t)^2` must be nonincreasing (relative
/// round-off of 1e-12 tolerated). Power laws `f ~ t^{-1/2}` also pass, so
/// the trend slope is reported alongside.
pub fn o_one_over_t_check(
    series: &NormSeries,
    which: NormSelector,
    start: usize,
    end: usize,
) -> Result<TrendReport> {
    let f = series.column(which)?;
    if end >= series.len() || start > end || end - start + 1 < 10 {
        return Err(Error::Series(format!(
            "need at least 10 records in the window, got {start}..={end} of {}",
            series.len()
        )));
    }
    let trailing_start = start + (end - start) / 2;
    let g: Vec<f64> = (trailing_start..=end)
        .map(|i| series.times[i] * f[i] * f[i])
        .collect();
    let max_relative_increase = g
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max);
    let xs: Vec<f64> = (trailing_start..=end).map(|i| series.times[i].ln()).collect();
    let ys: Vec<f64> = g.iter().map(|v| v.ln()).collect();
    let trend_slope = super::fit::least_squares(&xs, &ys).0;
    Ok(TrendReport {
        trailing_start,
        end_index: end,
        max_relative_increase,
        trend_slope,
        nonincreasing: max_relative_increase <= 1e-12,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedReport {
    pub m: usize,
    pub t0_index: usize,
    /// `lhs_w` at records `t0_index ..`.
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `max (lhs_w - rhs_w)`.
    pub max_excess: f64,
    pub max_rhs: f64,
}

impl WeightedReport {
    /// `lhs_w <= rhs_w + rel_tol * max(rhs_w)` at every record.
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.max_excess <= rel_tol * self.max_rhs
    }
}

/// Weighted energy comparison
///
/// ```text
/// lhs_w(t) = (t - t0)^m ||(D^m u, D^m b)(t)||_2^2
/// rhs_w(t) = m int_{t0}^t (s - t0)^{m-1} ||(D^m u, D^m b)(s)||_2^2 ds
/// ```
///
/// with the trapezoid rule on the recorded times. It holds whenever
/// `||D^m (u,b)||` is nonincreasing after `t0`.
///
/// For `m = 0` the weight disappears and the comparison reads as the energy
/// ledger from `t0`: `lhs_w` is the energy plus the dissipation accumulated
/// since `t0`, and `rhs_w` is the energy at `t0`.
pub fn weighted_energy_diagnostic(series: &NormSeries, m: usize, t0_index: usize) -> Result<WeightedReport> {
    if t0_index >= series.len() {
        return Err(Error::Series(format!(
            "start index {t0_index} outside a series of {} records",
            series.len()
        )));
    }
    let t0 = series.times[t0_index];
    let range = t0_index..series.len();
    let (lhs, rhs): (Vec<f64>, Vec<f64>) = if m == 0 {
        let e0 = series.l2[t0_index].powi(2);
        range
            .map(|j| (ledger_at(series, t0_index, j) + e0, e0))
            .unzip()
    } else {
        let col = series.column(NormSelector::Hs(m as f64)).map_err(|_| {
            Error::Series(format!("weighted diagnostic for m = {m} needs the hs:{m} column"))
        })?;
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        let mut integral = 0.0;
        let integrand = |j: usize| {
            let w = series.times[j] - t0;
            m as f64 * w.powi(m as i32 - 1) * col[j] * col[j]
        };
        for j in range {
            if j > t0_index {
                let h = series.times[j] - series.times[j - 1];
                integral += 0.5 * h * (integrand(j - 1) + integrand(j));
            }
            lhs.push((series.times[j] - t0).powi(m as i32) * col[j] * col[j]);
            rhs.push(integral);
        }
        (lhs, rhs)
    };
    let max_excess = lhs
        .iter()
        .zip(&rhs)
        .map(|(l, r)| l - r)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_rhs = rhs.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok(WeightedReport {
        m,
        t0_index,
        lhs,
        rhs,
        max_excess,
        max_rhs,
    })
}

/// Earliest recorded times from which the two smallness bounds hold at
/// every later record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonOnset {
    pub epsilon: f64,
    /// From here on `||(u,b)||_2 <= epsilon`.
    pub l2_time: Option<f64>,
    /// From here on `t^{1/2} ||(Du,Db)||_2 <= epsilon`.
    pub derivative_time: Option<f64>,
}

impl EpsilonOnset {
    /// Time from which both bounds hold.
    pub fn both(&self) -> Option<f64> {
        Some(self.l2_time?.max(self.derivative_time?))
    }
}

pub fn epsilon_onset(series: &NormSeries, epsilon: f64) -> Result<EpsilonOnset> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let from_here_on = |ok: &dyn Fn(usize) -> bool| {
        let mut first = None;
        for i in (0..series.len()).rev() {
            if !ok(i) {
                break;
            }
            first = Some(series.times[i]);
        }
        first
    };
    Ok(EpsilonOnset {
        epsilon,
        l2_time: from_here_on(&|i| series.l2[i] <= epsilon),
        derivative_time: from_here_on(&|i| series.times[i].sqrt() * series.h1[i] <= epsilon),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::series::SeriesRow;

    /// Single heat mode `|k| = k` with energy `e0`, mu = nu.
    fn heat_series(k: f64, mu: f64, n: usize, dt: f64) -> NormSeries {
        let mut s = NormSeries::new(&[2.0], &[]);
        let e0: f64 = 2.0;
        let rate = 2.0 * mu * k * k;
        for i in 0..n {
            let t = i as f64 * dt;
            let e = e0 * (-rate * t).exp();
            s.push(SeriesRow {
                t,
                l2: e.sqrt(),
                h1: k * e.sqrt(),
                hs: vec![k * k * e.sqrt()],
                lq: vec![],
                diss_u: e0 - e,
                diss_b: 0.0,
            })
            .unwrap();
        }
        s
    }

    #[test]
    fn ledger_is_zero_on_the_diagonal_and_exact_for_heat() {
        let s = heat_series(2.0, 0.1, 50, 0.01);
        assert_eq!(energy_ledger(&s, 0.2, 0.2).unwrap(), 0.0);
        assert!(energy_ledger(&s, 0.1, 0.4).unwrap().abs() < 1e-14);
        assert!(energy_ledger(&s, 0.4, 0.1).is_err());
        assert!(energy_ledger(&s, 0.105, 0.4).is_err());
        assert!(ledger_scan(&s).unwrap().max_relative < 1e-14);
    }

    #[test]
    fn smallness_is_strict() {
        let mu: f64 = 0.01;
        assert!(smallness_holds(0.0, 1.0, 1.0, mu, mu));
        assert!(!smallness_holds(1e6, 1.0, 1.0, mu, mu));
        assert!(!smallness_holds(mu * mu, 1.0, 1.0, mu, mu));
    }

    #[test]
    fn reversed_series_violates_at_index_one() {
        let mut s = heat_series(1.0, 0.1, 20, 0.1);
        s.h1.reverse();
        let r = check_monotone_derivative(&s, 0).unwrap();
        assert_eq!(r.first_violation, Some(1));
        let fwd = check_monotone_derivative(&heat_series(1.0, 0.1, 20, 0.1), 0).unwrap();
        assert!(fwd.passed());
    }

    #[test]
    fn trend_for_exponential_and_power_law() {
        let mut s = NormSeries::new(&[], &[]);
        for i in 1..=40 {
            let t = i as f64 * 0.25;
            s.push(SeriesRow { t, l2: (-t).exp(), h1: 1.0 / t, hs: vec![], lq: vec![], diss_u: 0.0, diss_b: 0.0 })
                .unwrap();
        }
        let e = o_one_over_t_check(&s, NormSelector::L2, 0, 39).unwrap();
        assert!(e.nonincreasing);
        let p = o_one_over_t_check(&s, NormSelector::H1, 0, 39).unwrap();
        assert!(p.nonincreasing);
        assert!((p.trend_slope + 1.0).abs() < 1e-12);
        assert!(o_one_over_t_check(&s, NormSelector::H1, 0, 5).is_err());
    }

    #[test]
    fn weighted_diagnostic_on_heat_mode() {
        let s = heat_series(2.0, 0.05, 200, 0.02);
        for m in [1, 2] {
            let r = weighted_energy_diagnostic(&s, m, 10).unwrap();
            assert_eq!(r.lhs[0], 0.0);
            assert_eq!(r.rhs[0], 0.0);
            assert!(r.holds(0.0), "m = {m}: {}", r.max_excess);
        }
        assert!(weighted_energy_diagnostic(&s, 3, 0).is_err());
    }

    #[test]
    fn weighted_m0_is_the_ledger() {
        let s = heat_series(1.5, 0.1, 60, 0.05);
        let r = weighted_energy_diagnostic(&s, 0, 5).unwrap();
        let ledger = (5..s.len())
            .map(|j| energy_ledger(&s, s.times[5], s.times[j]).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((r.max_excess - ledger).abs() < 1e-15);
    }

    #[test]
    fn epsilon_onset_needs_the_bound_for_all_later_records() {
        let mut s = NormSeries::new(&[], &[]);
        for (t, l2) in [(0.0, 1.0), (1.0, 0.05), (2.0, 0.2), (3.0, 0.08), (4.0, 0.01)] {
            s.push(SeriesRow { t, l2, h1: l2, hs: vec![], lq: vec![], diss_u: 0.0, diss_b: 0.0 })
                .unwrap();
        }
        let r = epsilon_onset(&s, 0.1).unwrap();
        assert_eq!(r.l2_time, Some(3.0));
        // t^{1/2} h1 = 0.1386 at t = 3, 0.02 at t = 4
        assert_eq!(r.derivative_time, Some(4.0));
        assert_eq!(r.both(), Some(4.0));
        assert_eq!(epsilon_onset(&s, 1e-3).unwrap().both(), None);
        assert!(epsilon_onset(&s, 0.0).is_err());
    }
}
