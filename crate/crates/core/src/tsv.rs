//! Minimal tab-separated file helpers.
//!
//! Every TSV file in this project, input or output, carries a single header
//! row naming its columns. Fields must not contain tabs or newlines; the
//! writer rejects them and the reader never sees them because rows are
//! split on `\t` only.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Read a TSV file, check its header against `expected`, and return the
/// data rows. Rows are paired with their 1-based line number for error
/// reporting. Blank lines are skipped.
pub fn read_rows(path: &Path, expected: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l,
            None => {
                return Err(Error::parse(path, 1, "empty file, expected a header row"));
            }
        }
    };
    let got: Vec<&str> = header.split('\t').collect();
    if got != expected {
        return Err(Error::parse(
            path,
            1,
            format!("bad header: expected {expected:?}, found {got:?}"),
        ));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split('\t').map(|s| s.to_string()).collect();
        if fields.len() != expected.len() {
            return Err(Error::parse(
                path,
                idx + 1,
                format!("expected {} fields, found {}", expected.len(), fields.len()),
            ));
        }
        rows.push((idx + 1, fields));
    }
    Ok(rows)
}

/// A table on its way to disk: header plus rows, all strings.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Render to the on-disk form. Fails if any field contains a tab or
    /// newline, which would corrupt the format.
    pub fn render(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(&self.header.join("\t"));
        out.push('\n');
        for row in &self.rows {
            for field in row {
                if field.contains('\t') || field.contains('\n') {
                    return Err(Error::Config(format!(
                        "field {field:?} contains a tab or newline and cannot be written as TSV"
                    )));
                }
            }
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render()?).map_err(|e| Error::io(path, e))
    }
}

/// Full-precision decimal rendering for f64 (shortest round-trip form).
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Render an optional f64, using `NA` for absent values.
pub fn fmt_opt_f64(v: Option<f64>) -> String {
    match v {
        Some(v) => fmt_f64(v),
        None => "NA".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_mismatch_is_line_precise() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.tsv");
        std::fs::write(&p, "a\tb\n1\t2\n").unwrap();
        assert!(read_rows(&p, &["a", "b"]).is_ok());
        let err = read_rows(&p, &["a", "c"]).unwrap_err();
        assert!(err.to_string().contains("bad header"));
    }

    #[test]
    fn field_count_checked() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.tsv");
        std::fs::write(&p, "a\tb\n1\n").unwrap();
        let err = read_rows(&p, &["a", "b"]).unwrap_err();
        assert!(err.to_string().contains("expected 2 fields"));
    }

    #[test]
    fn tabs_in_fields_rejected_on_write() {
        let mut t = Table::new(&["x"]);
        t.push(vec!["has\ttab".into()]);
        assert!(t.render().is_err());
    }
}
