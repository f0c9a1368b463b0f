//! CSV input and output. Numbers are written with 17 significant digits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use fracdyn::fdesolve::fmt17;

use crate::error::CliError;

/// Opens the output file, or stdout when no path is given.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

/// Reads a two-column numeric CSV. A first row whose fields are not numbers
/// is taken as a header.
pub fn read_two_column(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let (mut t, mut f) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        if rec.len() != 2 {
            return Err(CliError::input(format!("{}:{line}: expected 2 columns, found {}", path.display(), rec.len())));
        }
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) if v.iter().all(|x| x.is_finite()) => {
                t.push(v[0]);
                f.push(v[1]);
            }
            _ if i == 0 => {}
            _ => return Err(CliError::input(format!("{}:{line}: expected two finite numbers", path.display()))),
        }
    }
    if t.len() < 2 {
        return Err(CliError::input(format!("{}: need at least 2 data rows", path.display())));
    }
    Ok((t, f))
}

/// Step of a uniform grid, rejecting the first row that breaks uniformity.
pub fn uniform_step(t: &[f64]) -> Result<f64, CliError> {
    let h = t[1] - t[0];
    if !(h > 0.0) {
        return Err(CliError::input("time column must be increasing"));
    }
    for (k, w) in t.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > 1e-8 * h {
            return Err(CliError::input(format!("data row {}: grid is not uniform (step {h})", k + 2)));
        }
    }
    Ok(h)
}

/// Writes a header and numeric rows.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), CliError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header)?;
    for row in rows {
        wr.write_record(row.iter().map(|v| fmt17(*v)))?;
    }
    wr.flush()?;
    Ok(())
}
