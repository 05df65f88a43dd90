//! RFC-4180 CSV writers. All tables are built in memory so output files can
//! be hashed before they hit the disk.

use depsketch_core::processes::PathSample;
use depsketch_core::verify::TrialReport;
use depsketch_core::Matrix;

use super::operator::{format_f64, FloatStyle};
use crate::Result;

pub fn num(x: f64) -> String {
    format_f64(x, FloatStyle::Decimal)
}

/// Header plus rows of pre-formatted cells.
pub fn table<S: AsRef<str>>(header: &[&str], rows: impl IntoIterator<Item = Vec<S>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(AsRef::as_ref))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?)
}

/// Columns `path,index,latent,xi,tangent`; the prior F_0, when present, is
/// row `index = 0` with empty `xi`.
pub fn paths(samples: &[PathSample]) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for (k, s) in samples.iter().enumerate() {
        if let Some(f0) = s.prior {
            rows.push(vec![k.to_string(), "0".into(), num(f0), String::new(), String::new()]);
        }
        for i in 0..s.xi.len() {
            let tangent = s.tangent.as_ref().map_or(String::new(), |t| num(t[i]));
            rows.push(vec![k.to_string(), (i + 1).to_string(), num(s.latent[i]), num(s.xi[i]), tangent]);
        }
    }
    table(&["path", "index", "latent", "xi", "tangent"], rows)
}

/// Long format `quantity,trial,value`. Series kept only as summaries emit
/// their mean with an empty trial cell.
pub fn report_long(reports: &[&TrialReport]) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for r in reports {
        for s in &r.series {
            if s.samples.is_empty() {
                rows.push(vec![s.name.clone(), String::new(), num(s.summary.mean)]);
            }
            for (t, v) in s.samples.iter().enumerate() {
                rows.push(vec![s.name.clone(), t.to_string(), num(*v)]);
            }
        }
    }
    table(&["quantity", "trial", "value"], rows)
}

pub fn checks(reports: &[&TrialReport]) -> Result<Vec<u8>> {
    let rows = reports.iter().flat_map(|r| {
        r.checks.iter().map(move |c| {
            vec![
                r.quantity.clone(),
                c.name.clone(),
                num(c.statistic),
                num(c.std_error),
                num(c.threshold),
                num(c.tolerance_se),
                c.verdict.as_str().to_string(),
            ]
        })
    });
    table(&["report", "check", "statistic", "std_error", "threshold", "tolerance_se", "verdict"], rows)
}

/// Columns `matrix,row,col,value`.
pub fn matrices(ms: &[Matrix]) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for (k, m) in ms.iter().enumerate() {
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                rows.push(vec![k.to_string(), i.to_string(), j.to_string(), num(m[(i, j)])]);
            }
        }
    }
    table(&["matrix", "row", "col", "value"], rows)
}

/// Reads a headerless CSV of numeric rows (one vector per row).
pub fn read_vectors(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|c| super::parse_f64(c).map_err(|e| crate::Error::parse(format!("CSV row {}", i + 1), e)))
            .collect::<Result<Vec<f64>>>()?;
        if !row.is_empty() {
            out.push(row);
        }
    }
    Ok(out)
}
