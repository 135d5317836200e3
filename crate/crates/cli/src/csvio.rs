//! The result-row schema shared by `run` (writer) and `plot`/summary
//! (readers): `k,t,f_gap,grad_norm,lyapunov,bound`, floats with 17
//! significant digits so values round-trip exactly, empty fields where a
//! column is unavailable.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

pub const HEADER: &str = "k,t,f_gap,grad_norm,lyapunov,bound";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Row {
    pub k: usize,
    pub t: f64,
    pub f_gap: Option<f64>,
    pub grad_norm: Option<f64>,
    pub lyapunov: Option<f64>,
    pub bound: Option<f64>,
}

fn field(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

pub fn write_rows(path: &Path, rows: &[Row]) -> Result<(), String> {
    let file = std::fs::File::create(path)
        .map_err(|e| format!("cannot create {}: {e}", path.display()))?;
    let mut w = BufWriter::new(file);
    let io_err = |e: std::io::Error| format!("cannot write {}: {e}", path.display());
    writeln!(w, "{HEADER}").map_err(io_err)?;
    for r in rows {
        writeln!(
            w,
            "{},{:.16e},{},{},{},{}",
            r.k,
            r.t,
            field(r.f_gap),
            field(r.grad_norm),
            field(r.lyapunov),
            field(r.bound),
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn parse_field(s: &str, path: &Path, line: usize) -> Result<Option<f64>, String> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|e| format!("{}:{line}: bad float '{s}': {e}", path.display()))
}

pub fn read_rows(path: &Path) -> Result<Vec<Row>, String> {
    let file =
        std::fs::File::open(path).map_err(|e| format!("cannot open {}: {e}", path.display()))?;
    let reader = std::io::BufReader::new(file);
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        if idx == 0 {
            if line.trim() != HEADER {
                return Err(format!(
                    "{}: unexpected header '{line}', want '{HEADER}'",
                    path.display()
                ));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 6 {
            return Err(format!(
                "{}:{}: expected 6 fields, got {}",
                path.display(),
                idx + 1,
                parts.len()
            ));
        }
        rows.push(Row {
            k: parts[0]
                .parse()
                .map_err(|e| format!("{}:{}: bad k: {e}", path.display(), idx + 1))?,
            t: parts[1]
                .parse()
                .map_err(|e| format!("{}:{}: bad t: {e}", path.display(), idx + 1))?,
            f_gap: parse_field(parts[2], path, idx + 1)?,
            grad_norm: parse_field(parts[3], path, idx + 1)?,
            lyapunov: parse_field(parts[4], path, idx + 1)?,
            bound: parse_field(parts[5], path, idx + 1)?,
        });
    }
    Ok(rows)
}
