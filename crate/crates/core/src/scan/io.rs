//! CSV serialization of spectra and descriptor curves.
//!
//! Numbers are written with 12 significant digits in the shortest of fixed
//! or exponent notation, so identical inputs give identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::propagation::Spectrum;
use crate::units::{from_mhz, to_mhz};

use super::{DescriptorCurve, DescriptorRow};

pub const SPECTRUM_HEADER: [&str; 2] = ["delta_mhz", "transmission"];
pub const DESCRIPTOR_HEADER: [&str; 11] = [
    "delta_1photon_mhz",
    "A",
    "B",
    "C",
    "D",
    "phi_rad",
    "gamma_tilde_khz",
    "delta0_khz",
    "residual_rms",
    "converged",
    "gain_flag",
];

const SIGNIFICANT: usize = 12;

/// `%.12g`-style formatting.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-5..SIGNIFICANT as i32).contains(&exp) {
        let decimals = (SIGNIFICANT as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_lines(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = create(path)?;
    let mut emit = |line: String| w.write_all(line.as_bytes()).map_err(|e| Error::io(path, e));
    emit(header.join(",") + "\n")?;
    for row in rows {
        emit(row.join(",") + "\n")?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `delta_mhz,transmission`; the grid is converted from rad/s.
pub fn export_spectrum_csv(spectrum: &Spectrum, path: &Path) -> Result<()> {
    write_lines(
        path,
        &SPECTRUM_HEADER,
        spectrum
            .delta_grid
            .iter()
            .zip(&spectrum.transmission)
            .map(|(&d, &t)| vec![format_number(to_mhz(d)), format_number(t)]),
    )
}

pub fn export_descriptors_csv(curve: &DescriptorCurve, path: &Path) -> Result<()> {
    write_lines(
        path,
        &DESCRIPTOR_HEADER,
        curve.rows.iter().map(|r| {
            let mut v: Vec<String> = [
                r.big_delta_mhz,
                r.a,
                r.b,
                r.c,
                r.d,
                r.phi,
                r.gamma_tilde_khz,
                r.delta0_khz,
                r.residual_rms,
            ]
            .iter()
            .map(|&x| format_number(x))
            .collect();
            v.push(r.converged.to_string());
            v.push(r.gain_flag.to_string());
            v
        }),
    )
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
}

fn check_header(rdr: &mut csv::Reader<File>, expected: &[&str]) -> Result<()> {
    let found = rdr.headers().map_err(|e| Error::Parse {
        row: 1,
        column: 1,
        message: e.to_string(),
    })?;
    let found: Vec<&str> = found.iter().map(str::trim).collect();
    if found != expected {
        return Err(Error::SchemaMismatch {
            expected: expected.join(","),
            found: found.join(","),
        });
    }
    Ok(())
}

/// Reads every data row, checking the field count. Rows are numbered by
/// file line, the header being line 1.
fn records(rdr: &mut csv::Reader<File>, width: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let fallback = k + 2;
        let rec = rec.map_err(|e| Error::Parse {
            row: e.position().map_or(fallback, |p| p.line() as usize),
            column: 1,
            message: e.to_string(),
        })?;
        let row = rec.position().map_or(fallback, |p| p.line() as usize);
        if rec.len() != width {
            return Err(Error::Parse {
                row,
                column: rec.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        out.push((row, rec.iter().map(|s| s.trim().to_string()).collect()));
    }
    Ok(out)
}

fn number(field: &str, row: usize, column: usize) -> Result<f64> {
    field.parse::<f64>().map_err(|_| Error::Parse {
        row,
        column,
        message: format!("`{field}` is not a number"),
    })
}

fn boolean(field: &str, row: usize, column: usize) -> Result<bool> {
    match field {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Parse {
            row,
            column,
            message: format!("`{field}` is not true or false"),
        }),
    }
}

/// Loads a spectrum; the grid is returned in rad/s.
pub fn load_spectrum_csv(path: &Path) -> Result<Spectrum> {
    let mut rdr = reader(path)?;
    check_header(&mut rdr, &SPECTRUM_HEADER)?;
    let mut grid = Vec::new();
    let mut transmission = Vec::new();
    let mut last: Option<f64> = None;
    for (row, fields) in records(&mut rdr, 2)? {
        let d = number(&fields[0], row, 1)?;
        let t = number(&fields[1], row, 2)?;
        if !d.is_finite() {
            return Err(Error::Parse { row, column: 1, message: "detuning is not finite".into() });
        }
        if let Some(prev) = last {
            if d <= prev {
                return Err(Error::Parse {
                    row,
                    column: 1,
                    message: "detuning grid is not strictly increasing".into(),
                });
            }
        }
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Parse {
                row,
                column: 2,
                message: format!("transmission {t} is not finite and >= 0"),
            });
        }
        last = Some(d);
        grid.push(from_mhz(d));
        transmission.push(t);
    }
    if grid.is_empty() {
        return Err(Error::Parse { row: 2, column: 1, message: "no data rows".into() });
    }
    Spectrum::new(grid, transmission)
}

pub fn load_descriptors_csv(path: &Path) -> Result<DescriptorCurve> {
    let mut rdr = reader(path)?;
    check_header(&mut rdr, &DESCRIPTOR_HEADER)?;
    let mut rows = Vec::new();
    for (row, f) in records(&mut rdr, DESCRIPTOR_HEADER.len())? {
        let n = |k: usize| number(&f[k], row, k + 1);
        rows.push(DescriptorRow {
            big_delta_mhz: n(0)?,
            a: n(1)?,
            b: n(2)?,
            c: n(3)?,
            d: n(4)?,
            phi: n(5)?,
            gamma_tilde_khz: n(6)?,
            delta0_khz: n(7)?,
            residual_rms: n(8)?,
            converged: boolean(&f[9], row, 10)?,
            gain_flag: boolean(&f[10], row, 11)?,
        });
    }
    Ok(DescriptorCurve { rows })
}
