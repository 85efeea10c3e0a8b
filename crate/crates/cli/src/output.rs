//! CSV output: `#` metadata lines, one header row, fixed 12-significant-digit
//! scientific notation so identical runs give identical bytes.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::CliError;

pub fn number(v: f64) -> String {
    format!("{v:.11e}")
}

#[derive(Debug, Default)]
pub struct Table {
    meta: Vec<(String, String)>,
    header: Vec<&'static str>,
    body: String,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), ..Table::default() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn comment(&mut self, text: impl AsRef<str>) {
        let _ = writeln!(self.body, "# {}", text.as_ref());
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.header.len());
        let line: Vec<String> = values.iter().map(|v| number(*v)).collect();
        let _ = writeln!(self.body, "{}", line.join(","));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        out + &self.body
    }

    /// To `path`, or stdout when `None`.
    pub fn write(&self, path: Option<&Path>) -> Result<(), CliError> {
        emit(path, &self.render())
    }
}

pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Invalid(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Invalid(format!("stdout: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(number(1.0), "1.00000000000e0");
        assert_eq!(number(-0.000123456789012345), "-1.23456789012e-4");
    }

    #[test]
    fn layout() {
        let mut t = Table::new(&["x", "c"]);
        t.meta("lambda", 2.0);
        t.row(&[0.0, 0.5]);
        assert_eq!(t.render(), "# lambda=2\nx,c\n0.00000000000e0,5.00000000000e-1\n");
    }
}
