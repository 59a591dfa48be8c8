use crate::error::{Error, Result};

/// Recorded norm history of a run.
///
/// Columns are parallel vectors indexed by record. `diss_u` and `diss_b`
/// hold the accumulated dissipation `2 mu int_0^t ||Du||_2^2` and
/// `2 nu int_0^t ||Db||_2^2` measured from the first record.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NormSeries {
    pub times: Vec<f64>,
    /// `||(u, b)||_2`
    pub l2: Vec<f64>,
    /// `||(Du, Db)||_2`
    pub h1: Vec<f64>,
    /// `(s, ||(u, b)||_{H^s})` for each configured order.
    pub hs: Vec<(f64, Vec<f64>)>,
    /// `(q, ||(u, b)||_q)` for each configured exponent.
    pub lq: Vec<(f64, Vec<f64>)>,
    pub diss_u: Vec<f64>,
    pub diss_b: Vec<f64>,
}

/// One row of a [`NormSeries`].
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub l2: f64,
    pub h1: f64,
    pub hs: Vec<f64>,
    pub lq: Vec<f64>,
    pub diss_u: f64,
    pub diss_b: f64,
}

/// Which recorded norm a check or fit looks at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormSelector {
    L2,
    H1,
    Hs(f64),
    Lq(f64),
}

impl NormSeries {
    pub fn new(s_list: &[f64], q_list: &[f64]) -> Self {
        NormSeries {
            hs: s_list.iter().map(|&s| (s, Vec::new())).collect(),
            lq: q_list.iter().map(|&q| (q, Vec::new())).collect(),
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn s_list(&self) -> Vec<f64> {
        self.hs.iter().map(|(s, _)| *s).collect()
    }

    pub fn q_list(&self) -> Vec<f64> {
        self.lq.iter().map(|(q, _)| *q).collect()
    }

    pub fn push(&mut self, row: SeriesRow) -> Result<()> {
        if row.hs.len() != self.hs.len() || row.lq.len() != self.lq.len() {
            return Err(Error::Series(format!(
                "row carries {} H^s and {} L^q values, series expects {} and {}",
                row.hs.len(),
                row.lq.len(),
                self.hs.len(),
                self.lq.len()
            )));
        }
        if let Some(&last) = self.times.last() {
            if !(row.t > last) {
                return Err(Error::Series(format!(
                    "times must increase strictly: {} after {last}",
                    row.t
                )));
            }
        }
        self.times.push(row.t);
        self.l2.push(row.l2);
        self.h1.push(row.h1);
        for ((_, col), v) in self.hs.iter_mut().zip(row.hs) {
            col.push(v);
        }
        for ((_, col), v) in self.lq.iter_mut().zip(row.lq) {
            col.push(v);
        }
        self.diss_u.push(row.diss_u);
        self.diss_b.push(row.diss_b);
        Ok(())
    }

    pub fn row(&self, i: usize) -> SeriesRow {
        SeriesRow {
            t: self.times[i],
            l2: self.l2[i],
            h1: self.h1[i],
            hs: self.hs.iter().map(|(_, c)| c[i]).collect(),
            lq: self.lq.iter().map(|(_, c)| c[i]).collect(),
            diss_u: self.diss_u[i],
            diss_b: self.diss_b[i],
        }
    }

    /// Checks the structural invariants: equal column lengths, strictly
    /// increasing times, nonnegative entries, nondecreasing dissipation.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        let same = [self.l2.len(), self.h1.len(), self.diss_u.len(), self.diss_b.len()]
            .into_iter()
            .chain(self.hs.iter().map(|(_, c)| c.len()))
            .chain(self.lq.iter().map(|(_, c)| c.len()))
            .all(|l| l == n);
        if !same {
            return Err(Error::Series("columns have different lengths".into()));
        }
        if let Some(i) = (1..n).find(|&i| !(self.times[i] > self.times[i - 1])) {
            return Err(Error::Series(format!("times not increasing at row {i}")));
        }
        let columns = [&self.l2, &self.h1, &self.diss_u, &self.diss_b]
            .into_iter()
            .chain(self.hs.iter().map(|(_, c)| c))
            .chain(self.lq.iter().map(|(_, c)| c));
        for col in columns {
            if col.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::Series("negative or NaN entry".into()));
            }
        }
        for d in [&self.diss_u, &self.diss_b] {
            if d.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::Series("accumulated dissipation decreases".into()));
            }
        }
        Ok(())
    }

    /// The column picked by `which`; `Hs(1)` falls back to `h1` and `Hs(0)`
    /// to `l2` when not recorded separately.
    pub fn column(&self, which: NormSelector) -> Result<&[f64]> {
        let found = match which {
            NormSelector::L2 => Some(&self.l2),
            NormSelector::H1 => Some(&self.h1),
            NormSelector::Hs(s) => self
                .hs
                .iter()
                .find(|(x, _)| *x == s)
                .map(|(_, c)| c)
                .or(if s == 1.0 {
                    Some(&self.h1)
                } else if s == 0.0 {
                    Some(&self.l2)
                } else {
                    None
                }),
            NormSelector::Lq(q) => self.lq.iter().find(|(x, _)| *x == q).map(|(_, c)| c),
        };
        found
            .map(|c| c.as_slice())
            .ok_or_else(|| Error::Series(format!("series has no column for {which:?}")))
    }

    /// Index of the record at time `t`, allowing relative round-off of 1e-12.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&x| (x - t).abs() <= 1e-12 * t.abs().max(1.0))
            .ok_or_else(|| Error::Series(format!("time {t} is not a sampled time")))
    }
}
