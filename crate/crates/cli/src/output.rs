//! CSV formatting and atomic output: files are staged in a hidden directory
//! inside the output directory and renamed into place only on success.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Shortest representation that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v}")
}

/// `x0,y0,value` rows; `None` values are written as `NA`.
pub fn surface_csv(rows: &[(f64, f64, Option<f64>)]) -> String {
    let mut s = String::from("x0,y0,value\n");
    for (x, y, v) in rows {
        let v = v.map_or_else(|| "NA".to_string(), num);
        let _ = writeln!(s, "{},{},{}", num(*x), num(*y), v);
    }
    s
}

/// `param,value,stderr` rows; a `None` stderr is written as `NA`.
pub fn curve_csv(rows: &[(f64, f64, Option<f64>)]) -> String {
    let mut s = String::from("param,value,stderr\n");
    for (p, v, e) in rows {
        let e = e.map_or_else(|| "NA".to_string(), num);
        let _ = writeln!(s, "{},{},{}", num(*p), num(*v), e);
    }
    s
}

/// Quotes a free-text CSV field.
pub fn quoted(text: &str) -> String {
    format!("\"{}\"", text.replace('"', "\"\""))
}

pub struct Staging {
    dir: PathBuf,
    tmp: PathBuf,
    files: Vec<String>,
}

impl Staging {
    pub fn new(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!(".staging-{}", std::process::id()));
        if tmp.exists() {
            fs::remove_dir_all(&tmp)?;
        }
        fs::create_dir(&tmp)?;
        Ok(Self { dir: dir.to_path_buf(), tmp, files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<()> {
        fs::write(self.tmp.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// Moves every staged file into the output directory.
    pub fn commit(self) -> io::Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        for f in &self.files {
            let dest = self.dir.join(f);
            fs::rename(self.tmp.join(f), &dest)?;
            out.push(dest);
        }
        Ok(out)
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.tmp);
    }
}

/// Key-value run manifest, one `key=value` per line in insertion order.
#[derive(Debug, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string().replace('\n', " ")));
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}
