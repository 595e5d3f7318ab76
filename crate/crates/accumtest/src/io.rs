//! CSV readers and writers.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use accumtest_core::dosage::{DiscoveryRow, ExpressionMatrix, Group};
use accumtest_core::seqtest::OrderedPValues;
use accumtest_core::simlab::AggregateResult;

use crate::error::{CliError, CliResult};
use crate::numfmt::fmt_f64;

/// Contents of a `test` input file.
#[derive(Debug, Clone, PartialEq)]
pub enum PValueInput {
    /// Column `p`, optionally `is_null`.
    PValues(OrderedPValues),
    /// A previously emitted estimated-FDP path (`fdp_hat` or `mean_fdp_hat`).
    Path(Vec<f64>),
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))
}

fn create(path: &Path) -> CliResult<File> {
    File::create(path).map_err(|e| CliError::Data(format!("cannot create {}: {e}", path.display())))
}

fn parse_cell(text: &str, row: usize, column: &str) -> CliResult<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Data(format!("row {row}, column `{column}`: `{text}` is not a number")))
}

fn parse_bool(text: &str, row: usize) -> CliResult<bool> {
    match text.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "t" | "yes" => Ok(true),
        "0" | "false" | "f" | "no" => Ok(false),
        other => Err(CliError::Data(format!("row {row}, column `is_null`: `{other}` is not a boolean"))),
    }
}

pub fn read_pvalue_table(path: &Path, method: Option<&str>) -> CliResult<PValueInput> {
    read_pvalue_table_from(open(path)?, method)
}

/// Reads either p-values or an estimated-FDP path. Path tables with a
/// `method` column are filtered to rows matching `method`.
pub fn read_pvalue_table_from<R: Read>(reader: R, method: Option<&str>) -> CliResult<PValueInput> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);

    if let Some(p_col) = col("p") {
        let null_col = col("is_null");
        let mut values = Vec::new();
        let mut mask = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = i + 2;
            values.push(parse_cell(&rec[p_col], row, "p")?);
            if let Some(c) = null_col {
                mask.push(parse_bool(&rec[c], row)?);
            }
        }
        if values.is_empty() {
            return Err(CliError::Usage("input has no p-values".into()));
        }
        let pv = match null_col {
            Some(_) => OrderedPValues::with_mask(values, mask)?,
            None => OrderedPValues::new(values)?,
        };
        return Ok(PValueInput::PValues(pv));
    }

    let (path_col, name) = match (col("fdp_hat"), col("mean_fdp_hat")) {
        (Some(c), _) => (c, "fdp_hat"),
        (None, Some(c)) => (c, "mean_fdp_hat"),
        _ => return Err(CliError::Usage("input needs a `p` column (or an `fdp_hat` path column)".into())),
    };
    let method_col = col("method");
    if method_col.is_some() && method.is_none() {
        return Err(CliError::Usage("path table has a `method` column; pass --method to pick one".into()));
    }
    let mut path = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if let (Some(c), Some(m)) = (method_col, method) {
            if &rec[c] != m {
                continue;
            }
        }
        path.push(parse_cell(&rec[path_col], i + 2, name)?);
    }
    if path.is_empty() {
        return Err(CliError::Usage("input has no path rows".into()));
    }
    Ok(PValueInput::Path(path))
}

pub fn write_path_csv<W: Write>(out: W, path: &[f64]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "fdp_hat"])?;
    for (k, v) in path.iter().enumerate() {
        w.write_record([(k + 1).to_string(), fmt_f64(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// `method,alpha,mean_power,se_power,mean_fdp,se_fdp`.
pub fn write_power_csv<W: Write>(out: W, agg: &AggregateResult) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "alpha", "mean_power", "se_power", "mean_fdp", "se_fdp"])?;
    for c in &agg.cells {
        w.write_record([
            agg.method_names[c.method].clone(),
            fmt_f64(c.alpha),
            fmt_f64(c.power.mean),
            fmt_f64(c.power.se),
            fmt_f64(c.fdp.mean),
            fmt_f64(c.fdp.se),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `method,k,mean_fdp_hat,mean_fdp_true`.
pub fn write_paths_csv<W: Write>(out: W, agg: &AggregateResult) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "k", "mean_fdp_hat", "mean_fdp_true"])?;
    for (m, path) in agg.mean_fdp_hat.iter().enumerate() {
        for (k, (hat, truth)) in path.iter().zip(&agg.mean_fdp_true).enumerate() {
            w.write_record([agg.method_names[m].clone(), (k + 1).to_string(), fmt_f64(*hat), fmt_f64(*truth)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `method,alpha,discoveries`.
pub fn write_dosage_csv<W: Write>(out: W, rows: &[DiscoveryRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "alpha", "discoveries"])?;
    for r in rows {
        w.write_record([r.method.clone(), fmt_f64(r.alpha), r.discoveries.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_file(path: &Path, write: impl FnOnce(File) -> CliResult<()>) -> CliResult<()> {
    write(create(path)?)
}

pub fn read_expression_matrix(path: &Path) -> CliResult<ExpressionMatrix> {
    read_expression_matrix_from(open(path)?)
}

/// Header `gene_id,<label>,...` with labels starting `C`, `L` or `H`; one
/// row per gene.
pub fn read_expression_matrix_from<R: Read>(reader: R) -> CliResult<ExpressionMatrix> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 {
        return Err(CliError::Data("expression matrix needs a gene id column and trial columns".into()));
    }
    let groups = headers
        .iter()
        .skip(1)
        .enumerate()
        .map(|(j, label)| {
            Group::from_label(label)
                .ok_or_else(|| CliError::Data(format!("column {} label `{label}` must start with C, L or H", j + 2)))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        ids.push(rec[0].to_string());
        let values = rec
            .iter()
            .skip(1)
            .zip(headers.iter().skip(1))
            .map(|(cell, col)| parse_cell(cell, row, col))
            .collect::<CliResult<Vec<_>>>()?;
        rows.push(values);
    }
    Ok(ExpressionMatrix::new(ids, rows, groups)?)
}
