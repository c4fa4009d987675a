//! Coefficient and power tables with their CSV forms.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::format::fmt_sig;

pub const COEFFICIENT_HEADER: [&str; 4] = ["coil", "f_hz", "r_m", "k_uw_per_a2"];
pub const POWER_HEADER: [&str; 5] = ["coil", "f_hz", "r_m", "i_a", "p_w"];

/// `P = k·I²` for one coil, frequency and distance.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRow {
    pub coil: String,
    pub f_hz: f64,
    pub r_m: f64,
    /// µW/A².
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoefficientTable {
    pub rows: Vec<CoefficientRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub coil: String,
    pub f_hz: f64,
    pub r_m: f64,
    pub i_a: f64,
    pub p_w: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerTable {
    pub rows: Vec<PowerRow>,
}

fn open_reader<R: Read>(reader: R, expected: &[&str]) -> Result<csv::Reader<R>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::parse(
            1,
            format!(
                "expected header '{}', got '{}'",
                expected.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    Ok(rdr)
}

fn number(rec: &csv::StringRecord, idx: usize) -> Result<f64> {
    let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
    let text = rec
        .get(idx)
        .ok_or_else(|| Error::parse(line, "missing column"))?;
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(line, format!("'{text}' is not a number")))
}

impl CoefficientTable {
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = open_reader(reader, &COEFFICIENT_HEADER)?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = CoefficientRow {
                coil: rec[0].to_string(),
                f_hz: number(&rec, 1)?,
                r_m: number(&rec, 2)?,
                k: number(&rec, 3)?,
            };
            if !(row.k > 0.0) {
                let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
                return Err(Error::parse(line, "coefficients must be > 0"));
            }
            rows.push(row);
        }
        Ok(Self { rows })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(COEFFICIENT_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.coil.clone(),
                fmt_sig(r.f_hz),
                fmt_sig(r.r_m),
                fmt_sig(r.k),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn find(&self, coil: &str, f_hz: f64, r_m: f64) -> Option<&CoefficientRow> {
        self.rows
            .iter()
            .find(|r| r.coil == coil && same(r.f_hz, f_hz) && same(r.r_m, r_m))
    }
}

impl PowerTable {
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = open_reader(reader, &POWER_HEADER)?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            rows.push(PowerRow {
                coil: rec[0].to_string(),
                f_hz: number(&rec, 1)?,
                r_m: number(&rec, 2)?,
                i_a: number(&rec, 3)?,
                p_w: number(&rec, 4)?,
            });
        }
        Ok(Self { rows })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(POWER_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.coil.clone(),
                fmt_sig(r.f_hz),
                fmt_sig(r.r_m),
                fmt_sig(r.i_a),
                fmt_sig(r.p_w),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Equality up to the nine-digit precision the tables are written with.
fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-8 * a.abs().max(b.abs())
}
