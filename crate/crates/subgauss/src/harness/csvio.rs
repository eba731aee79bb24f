//! CSV emission and parsing.
//!
//! Files are RFC-4180 (CRLF line ends, UTF-8, `.` decimal) with one
//! provenance line prepended: `# config_hash=<hex> base_seed=<n>
//! version=<semver>`. Reals carry 17 significant digits so parsing them
//! back is exact.

use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// A parsed or to-be-written table: provenance, header, string cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub config_hash: u64,
    pub base_seed: u64,
    pub version: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(config_hash: u64, base_seed: u64, columns: &[&str]) -> Self {
        CsvTable {
            config_hash,
            base_seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_real(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.16e}")
}

pub fn parse_real(s: &str) -> Result<f64> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        other => other
            .parse()
            .map_err(|_| Error::Config(format!("bad real '{other}'"))),
    }
}

fn escape(cell: &str) -> String {
    if cell.contains(',') || cell.contains('"') || cell.contains('\n') || cell.contains('\r') {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

pub fn write_csv(table: &CsvTable, path: &Path) -> Result<()> {
    let mut out = String::new();
    writeln!(
        out,
        "# config_hash={:016x} base_seed={} version={}\r",
        table.config_hash, table.base_seed, table.version
    )
    .expect("string write");
    writeln!(
        out,
        "{}\r",
        table
            .columns
            .iter()
            .map(|c| escape(c))
            .collect::<Vec<_>>()
            .join(",")
    )
    .expect("string write");
    for row in &table.rows {
        writeln!(
            out,
            "{}\r",
            row.iter().map(|c| escape(c)).collect::<Vec<_>>().join(",")
        )
        .expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn split_line(line: &str) -> Vec<String> {
    let mut cells = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    cur.push('"');
                } else {
                    quoted = false;
                }
            }
            '"' => quoted = true,
            ',' if !quoted => {
                cells.push(std::mem::take(&mut cur));
            }
            c => cur.push(c),
        }
    }
    cells.push(cur);
    cells
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let meta = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: empty file", path.display())))?;
    let meta = meta
        .strip_prefix("# ")
        .ok_or_else(|| Error::Config(format!("{}: missing provenance line", path.display())))?;
    let mut config_hash = 0u64;
    let mut base_seed = 0u64;
    let mut version = String::new();
    for field in meta.split_whitespace() {
        if let Some(v) = field.strip_prefix("config_hash=") {
            config_hash = u64::from_str_radix(v, 16)
                .map_err(|_| Error::Config(format!("bad config hash '{v}'")))?;
        } else if let Some(v) = field.strip_prefix("base_seed=") {
            base_seed = v
                .parse()
                .map_err(|_| Error::Config(format!("bad base seed '{v}'")))?;
        } else if let Some(v) = field.strip_prefix("version=") {
            version = v.to_string();
        }
    }
    let header = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: missing header row", path.display())))?;
    let columns = split_line(header);
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells = split_line(line);
        if cells.len() != columns.len() {
            return Err(Error::Config(format!(
                "{}: row {} has {} cells, header has {}",
                path.display(),
                i + 3,
                cells.len(),
                columns.len()
            )));
        }
        rows.push(cells);
    }
    Ok(CsvTable {
        config_hash,
        base_seed,
        version,
        columns: columns.into_iter().collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = CsvTable::new(0xdead_beef, 42, &["k", "value", "note"]);
        t.push_row(vec![
            "16".into(),
            format_real(std::f64::consts::PI),
            "has,comma".into(),
        ]);
        t.push_row(vec!["32".into(), format_real(-1.0 / 3.0), "q\"q".into()]);
        write_csv(&t, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back, t);
        assert_eq!(
            parse_real(&back.rows[0][1]).unwrap(),
            std::f64::consts::PI
        );
        let raw = std::fs::read(&path).unwrap();
        assert!(raw.windows(2).any(|w| w == b"\r\n"), "CRLF line endings");
    }

    #[test]
    fn format_real_round_trips_extremes() {
        for v in [
            0.0,
            -0.0,
            1.0,
            1e-300,
            -2.2250738585072014e-308,
            9.9e307,
            f64::INFINITY,
        ] {
            let s = format_real(v);
            let b = parse_real(&s).unwrap();
            assert_eq!(v.to_bits(), b.to_bits(), "{v} -> {s} -> {b}");
        }
    }
}
