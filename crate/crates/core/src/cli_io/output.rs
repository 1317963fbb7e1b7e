//! CSV readers and writers. Floats are written in shortest round-trip
//! scientific form, so reading a file back recovers every value exactly.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::timestepper::DiagnosticsRecord;

pub const DIAGNOSTICS_HEADER: [&str; 7] = [
    "t",
    "linf_n",
    "w1inf_v",
    "h1beta_sq",
    "min_n",
    "cfl_number",
    "linf_n_char",
];

pub fn float(x: f64) -> String {
    format!("{x:e}")
}

/// Writes a header and rows of preformatted cells.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        let cells: Vec<String> = row.into_iter().collect();
        w.write_record(&cells).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// All rows of a numeric CSV with the expected header.
pub fn read_numeric_csv(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let found: Vec<String> = r
        .headers()
        .map_err(|e| Error::csv(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    if found != header {
        return Err(Error::Config(format!(
            "{}: expected columns {:?}, found {:?}",
            path.display(),
            header,
            found
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let row = record
            .iter()
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|_| {
                    Error::Config(format!(
                        "{}: row {}: `{cell}` is not a number",
                        path.display(),
                        line + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_diagnostics(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    write_csv(
        path,
        &DIAGNOSTICS_HEADER,
        records.iter().map(|r| {
            [
                r.t,
                r.linf_n,
                r.w1inf_v,
                r.h1beta_sq,
                r.min_n,
                r.cfl_number,
                r.linf_n_char,
            ]
            .map(float)
        }),
    )
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    Ok(read_numeric_csv(path, &DIAGNOSTICS_HEADER)?
        .into_iter()
        .map(|r| DiagnosticsRecord {
            t: r[0],
            linf_n: r[1],
            w1inf_v: r[2],
            h1beta_sq: r[3],
            min_n: r[4],
            cfl_number: r[5],
            linf_n_char: r[6],
        })
        .collect())
}

pub fn write_snapshot(path: &Path, v: &Field, n: &Field) -> Result<()> {
    let grid = v.grid();
    write_csv(
        path,
        &["x", "v", "n"],
        (0..grid.n_points()).map(|i| [grid.x(i), v.values()[i], n.values()[i]].map(float)),
    )
}

/// Reads `x, v, n` columns and rebuilds the grid from the positions.
pub fn read_snapshot(path: &Path) -> Result<(Field, Field)> {
    let rows = read_numeric_csv(path, &["x", "v", "n"])?;
    if rows.len() < 2 {
        return Err(Error::Config(format!("{}: too few rows", path.display())));
    }
    let half_width = -rows[0][0];
    let grid = Grid::new(half_width, rows.len())
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    for (i, row) in rows.iter().enumerate() {
        if (row[0] - grid.x(i)).abs() > 1e-9 * half_width.max(1.0) {
            return Err(Error::Config(format!(
                "{}: positions are not a uniform periodic grid on [-{half_width}, {half_width})",
                path.display()
            )));
        }
    }
    let v = Field::new(&grid, rows.iter().map(|r| r[1]).collect())?;
    let n = Field::new(&grid, rows.iter().map(|r| r[2]).collect())?;
    Ok((v, n))
}
