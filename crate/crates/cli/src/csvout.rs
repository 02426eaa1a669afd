//! Deterministic CSV and manifest output: floats rendered with 17
//! significant digits, '.' decimal separator, '\n' line endings, so
//! identical configurations produce byte-identical files.

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};
use std::path::Path;

pub fn fmt_float(x: f64) -> String {
    format!("{:.16e}", x)
}

pub struct CsvWriter {
    buf: String,
}

impl CsvWriter {
    pub fn new(comment: &str, header: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str("# ");
        buf.push_str(comment);
        buf.push('\n');
        buf.push_str(&header.join(","));
        buf.push('\n');
        CsvWriter { buf }
    }

    pub fn row(&mut self, values: &[f64]) {
        let mut first = true;
        for v in values {
            if !first {
                self.buf.push(',');
            }
            self.buf.push_str(&fmt_float(*v));
            first = false;
        }
        self.buf.push('\n');
    }

    pub fn bytes(&self) -> &[u8] {
        self.buf.as_bytes()
    }

    /// Write the CSV and its manifest sidecar (config echo plus checksum).
    pub fn write(
        &self,
        path: &str,
        config_echo: &str,
        rows: usize,
        extra: &[(String, String)],
    ) -> Result<()> {
        std::fs::write(path, self.bytes()).with_context(|| format!("writing {path}"))?;
        let mut hasher = Sha256::new();
        hasher.update(self.bytes());
        let digest = hasher.finalize();
        let mut manifest = String::new();
        manifest.push_str(config_echo);
        manifest.push_str(&format!("rows={rows}\n"));
        manifest.push_str(&format!("csv_sha256={digest:x}\n"));
        for (k, v) in extra {
            manifest.push_str(&format!("{k}={v}\n"));
        }
        let mpath = format!("{path}.manifest");
        std::fs::write(Path::new(&mpath), manifest).with_context(|| format!("writing {mpath}"))?;
        Ok(())
    }
}
