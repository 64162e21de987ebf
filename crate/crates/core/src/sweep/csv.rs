use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sweep::{RowStatus, SweepResult};

pub const CSV_HEADER: &str = "sweep_var,value,p_cov_ub,p_cov_lb,p_cov_general,quad_err,\
mc_mean,mc_ci_low,mc_ci_high,rate_d2d,status";

/// Ten significant digits in scientific notation.
pub fn format_value(x: f64) -> String {
    format!("{x:.9e}")
}

fn cell(x: Option<f64>) -> String {
    x.map(format_value).unwrap_or_default()
}

/// Writes the notes as `#` lines, the header, then one line per row.
pub fn write_csv_to<W: Write>(result: &SweepResult, mut out: W) -> io::Result<()> {
    for note in &result.notes {
        writeln!(out, "# {note}")?;
    }
    writeln!(out, "{CSV_HEADER}")?;
    for row in &result.rows {
        let status = match row.status {
            RowStatus::Ok => "ok",
            RowStatus::Failed(_) => "failed",
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            row.sweep_var,
            cell(row.value),
            cell(row.p_cov_ub),
            cell(row.p_cov_lb),
            cell(row.p_cov_general),
            cell(row.quad_err),
            cell(row.mc.map(|m| m.mean)),
            cell(row.mc.map(|m| m.ci95.0)),
            cell(row.mc.map(|m| m.ci95.1)),
            cell(row.rate_d2d),
            status
        )?;
    }
    out.flush()
}

pub fn write_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_csv_to(result, BufWriter::new(file)).map_err(io_err)
}
