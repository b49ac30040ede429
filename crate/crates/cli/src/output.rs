use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::CliResult;

const SIGNIFICANT_DIGITS: i32 = 12;

/// Fixed-point decimal with at least 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return format!("{:.*}", (SIGNIFICANT_DIGITS - 1) as usize, 0.0);
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT_DIGITS - 1 - exponent).max(1) as usize;
    format!("{x:.decimals$}")
}

pub fn fmt_opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

pub fn fmt_opt_usize(x: Option<usize>) -> String {
    x.map(|d| d.to_string()).unwrap_or_default()
}

pub fn open_sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_csv(sink: Box<dyn Write>, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header).map_err(io::Error::from)?;
    for row in rows {
        w.write_record(row).map_err(io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(mut sink: Box<dyn Write>, value: &impl Serialize) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut sink, value).map_err(io::Error::from)?;
    writeln!(sink)?;
    sink.flush()?;
    Ok(())
}
