use std::fs;
use std::path::Path;

use crate::analysis::{NormSeries, SeriesRow};
use crate::error::{Error, Result};

/// Header line of a series file (without the trailing newline).
pub fn series_header(series: &NormSeries) -> String {
    let mut cols = vec!["t".to_string(), "l2_pair".into(), "h1_pair".into()];
    cols.extend(series.hs.iter().map(|(s, _)| format!("hs:{s}")));
    cols.extend(series.lq.iter().map(|(q, _)| format!("lq:{q}")));
    cols.push("diss_u_acc".into());
    cols.push("diss_b_acc".into());
    cols.join(",")
}

/// Renders the series as CSV. Values use the shortest exponent notation that
/// reads back to the same `f64`.
pub fn series_to_csv(series: &NormSeries) -> String {
    let mut out = series_header(series);
    out.push('\n');
    for i in 0..series.len() {
        let row = series.row(i);
        let values = [row.t, row.l2, row.h1]
            .into_iter()
            .chain(row.hs)
            .chain(row.lq)
            .chain([row.diss_u, row.diss_b]);
        let line: Vec<String> = values.map(|v| format!("{v:e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_series(series: &NormSeries, path: impl AsRef<Path>) -> Result<()> {
    if series.is_empty() {
        return Err(Error::Series("refusing to write an empty series".into()));
    }
    let path = path.as_ref();
    fs::write(path, series_to_csv(series)).map_err(|e| Error::io(path, e))
}

pub fn parse_series_csv(text: &str) -> Result<NormSeries> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Series("empty series file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let fixed_head = ["t", "l2_pair", "h1_pair"];
    let fixed_tail = ["diss_u_acc", "diss_b_acc"];
    if cols.len() < 5 || cols[..3] != fixed_head || cols[cols.len() - 2..] != fixed_tail {
        return Err(Error::Series(format!("unexpected header `{header}`")));
    }
    let mut s_list = Vec::new();
    let mut q_list = Vec::new();
    for c in &cols[3..cols.len() - 2] {
        let bad = || Error::Series(format!("bad column name `{c}`"));
        if let Some(s) = c.strip_prefix("hs:") {
            if !q_list.is_empty() {
                return Err(bad());
            }
            s_list.push(s.parse::<f64>().map_err(|_| bad())?);
        } else if let Some(q) = c.strip_prefix("lq:") {
            q_list.push(q.parse::<f64>().map_err(|_| bad())?);
        } else {
            return Err(bad());
        }
    }
    let mut series = NormSeries::new(&s_list, &q_list);
    for (i, line) in lines {
        let vals = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Series(format!("line {}: {e}", i + 1)))?;
        if vals.len() != cols.len() {
            return Err(Error::Series(format!(
                "line {}: {} values for {} columns",
                i + 1,
                vals.len(),
                cols.len()
            )));
        }
        let ns = s_list.len();
        let nq = q_list.len();
        series.push(SeriesRow {
            t: vals[0],
            l2: vals[1],
            h1: vals[2],
            hs: vals[3..3 + ns].to_vec(),
            lq: vals[3 + ns..3 + ns + nq].to_vec(),
            diss_u: vals[3 + ns + nq],
            diss_b: vals[4 + ns + nq],
        })?;
    }
    Ok(series)
}

pub fn read_series(path: impl AsRef<Path>) -> Result<NormSeries> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_series_csv(&text)
}
