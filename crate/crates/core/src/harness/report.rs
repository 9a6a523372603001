//! Versioned CSV output. Every file starts with a `# esdg-csv v1 <kind>`
//! comment line; floats carry 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::reference::ElementType;
use crate::solver::MonitorSample;

pub const CSV_VERSION: &str = "v1";

pub const VAR_NAMES: [&str; 5] = ["rho", "rho_v1", "rho_v2", "rho_v3", "energy"];

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

fn write_csv(path: &Path, kind: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# esdg-csv {CSV_VERSION} {kind}").map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// One row of `errors.csv`; `order` is filled in by convergence studies.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub element: ElementType,
    pub q: usize,
    pub p: usize,
    pub m: usize,
    pub var: &'static str,
    pub error: f64,
    pub order: Option<f64>,
}

pub fn write_errors(path: &Path, rows: &[ErrorRow]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.element.short_name().to_string(),
                r.q.to_string(),
                r.p.to_string(),
                r.m.to_string(),
                r.var.to_string(),
                float(r.error),
                opt_float(r.order),
            ]
        })
        .collect();
    write_csv(path, "errors", &["element", "q", "p", "M", "var", "error", "order"], &rows)
}

pub fn write_monitors(path: &Path, dim: usize, samples: &[MonitorSample]) -> Result<()> {
    let mut header = vec!["t", "mass"];
    header.extend(["momentum_1", "momentum_2", "momentum_3"].iter().take(dim));
    header.extend(["energy", "entropy", "entropy_rate"]);
    let vars: Vec<usize> = crate::euler::active_vars(dim).to_vec();
    let rows: Vec<Vec<String>> = samples
        .iter()
        .map(|s| {
            let mut r = vec![float(s.t)];
            r.extend(vars.iter().map(|&e| float(s.totals[e])));
            r.push(float(s.entropy));
            r.push(float(s.entropy_rate));
            r
        })
        .collect();
    write_csv(path, "monitors", &header, &rows)
}

/// One row of `fluxcount.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxCountRow {
    pub q: usize,
    pub tensor_count: usize,
    pub md_count: Option<usize>,
    pub ratio: Option<f64>,
}

pub fn write_fluxcount(path: &Path, element: ElementType, rows: &[FluxCountRow]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.q.to_string(),
                r.tensor_count.to_string(),
                r.md_count.map(|c| c.to_string()).unwrap_or_default(),
                opt_float(r.ratio),
            ]
        })
        .collect();
    write_csv(
        path,
        &format!("fluxcount {}", element.short_name()),
        &["q", "tensor_count", "md_count", "ratio"],
        &rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn files_carry_version_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/fluxcount.csv");
        let rows = [FluxCountRow {
            q: 2,
            tensor_count: 54,
            md_count: Some(84),
            ratio: Some(84.0 / 54.0),
        }];
        write_fluxcount(&path, ElementType::Triangle, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# esdg-csv v1 fluxcount tri"));
        assert_eq!(lines.next(), Some("q,tensor_count,md_count,ratio"));
        assert_eq!(lines.next(), Some("2,54,84,1.5555555555555556e0"));
    }
}
