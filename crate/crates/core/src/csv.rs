//! Trajectory CSV output.
//!
//! Numbers are rounded to 9 significant digits and then printed in their
//! shortest round-trip form (exponent notation outside `[1e-5, 1e16)`), so
//! identical logs always give identical bytes.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::TrajectoryLog;

pub const SIGNIFICANT_DIGITS: usize = 9;

pub fn format_number(x: f64) -> String {
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    let magnitude = rounded.abs();
    if rounded == 0.0 {
        "0".to_string()
    } else if (1e-5..1e16).contains(&magnitude) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

pub fn header(uav_count: usize, observer: bool) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for i in 1..=uav_count {
        for name in ["x", "y", "v", "phi", "accel", "turnrate", "ep"] {
            cols.push(format!("{name}{i}"));
        }
        if observer {
            cols.push(format!("vhat{i}"));
        }
    }
    cols.push("lambda2".to_string());
    cols
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_csv<W: Write>(log: &TrajectoryLog, mut out: W) -> std::io::Result<()> {
    let n = log.uav_count();
    writeln!(out, "{}", header(n, log.observer_enabled).join(","))?;
    let mut fields = Vec::new();
    for row in &log.rows {
        fields.clear();
        fields.push(row.t);
        for i in 0..n {
            let s = &row.uavs[i];
            let u = &row.inputs[i];
            fields.extend([
                s.position.x,
                s.position.y,
                s.speed,
                s.heading,
                u.accel,
                u.turn_rate,
                row.agent_errors[i],
            ]);
            if let Some(v_hat) = &row.v_hat {
                fields.push(v_hat[i]);
            }
        }
        fields.push(row.lambda2);
        let line: Vec<String> = fields.iter().map(|&x| format_number(x)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()
}

pub fn emit_csv(log: &TrajectoryLog, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    write_csv(log, BufWriter::new(file)).map_err(io_err(path))
}

/// A parsed CSV file: header names plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<CsvTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    let mut lines = BufReader::new(file).lines();
    let header: Vec<String> = match lines.next() {
        Some(line) => line.map_err(io_err(path))?.split(',').map(str::to_string).collect(),
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty file".into(),
            })
        }
    };
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line.map_err(io_err(path))?;
        let row = line
            .split(',')
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: k + 2,
                message: e.to_string(),
            })?;
        if row.len() != header.len() {
            return Err(Error::Parse {
                line: k + 2,
                message: format!("{} fields, header has {}", row.len(), header.len()),
            });
        }
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}
