//! Versioned CSV output: every file starts with the schema line
//! `# shape-uq v1`, then a header row, then data rows. All numbers are
//! written with Rust's shortest-roundtrip formatting, so identical runs
//! produce identical bytes.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

pub const SCHEMA_LINE: &str = "# shape-uq v1";

pub struct CsvDoc {
    lines: Vec<String>,
}

impl CsvDoc {
    pub fn new(header: &str) -> Self {
        Self {
            lines: vec![SCHEMA_LINE.to_string(), header.to_string()],
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.lines.push(fields.join(","));
    }

    pub fn render(&self) -> String {
        let mut text = self.lines.join("\n");
        text.push('\n');
        text
    }

    /// Write to the output path, or stdout when none is given.
    pub fn emit(&self, out: Option<&PathBuf>) -> Result<(), CliError> {
        let text = self.render();
        match out {
            Some(path) => write_file(path, &text),
            None => {
                std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| CliError::Numerical(format!("stdout: {e}")))?;
                Ok(())
            }
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Numerical(format!("{}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, text).map_err(|e| CliError::Numerical(format!("{}: {e}", path.display())))
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_line_heads_every_document() {
        let mut doc = CsvDoc::new("a,b");
        doc.row(&[fmt_f64(0.5), fmt_f64(1.0 / 3.0)]);
        let text = doc.render();
        assert!(text.starts_with("# shape-uq v1\na,b\n0.5,"));
    }
}
