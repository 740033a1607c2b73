use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

/// Writes floats with 17 significant digits so every value survives a JSON
/// round trip bit for bit.
struct SignificantDigits;

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{value:.8e}")
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SignificantDigits);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

/// Collects the files written by one command.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path.display().to_string());
        Ok(path)
    }

    pub fn files(&self) -> &[String] {
        &self.written
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub argv: Vec<String>,
    pub params: serde_json::Value,
    pub seed: u64,
    pub version: &'a str,
    pub outputs: Vec<String>,
    pub duration_secs: f64,
}

impl<'a> RunManifest<'a> {
    pub fn new(command: &'a str, params: serde_json::Value, seed: u64, outputs: &Outputs, elapsed: Duration) -> Self {
        RunManifest {
            command,
            argv: std::env::args().collect(),
            params,
            seed,
            version: env!("CARGO_PKG_VERSION"),
            outputs: outputs.files().to_vec(),
            duration_secs: elapsed.as_secs_f64(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let text = to_json(&serde_json::json!({ "x": 1.0f64 / 3.0 })).unwrap();
        assert_eq!(text.trim(), r#"{"x":3.3333333333333331e-1}"#);
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64().unwrap(), 1.0 / 3.0);
    }
}
