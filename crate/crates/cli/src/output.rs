//! File emitters. Every file goes through [`Writer`], which keeps the list of
//! written paths and their SHA-256 sums for the manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

pub struct Writer {
    dir: PathBuf,
    pub files: Vec<FileEntry>,
}

impl Writer {
    pub fn new(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        // fail early on an unwritable directory
        let probe = dir.join(".ratchet-probe");
        fs::write(&probe, b"")?;
        fs::remove_file(&probe)?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> io::Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: contents.len() as u64,
            sha256: hex::encode(Sha256::digest(contents)),
        });
        Ok(())
    }

    /// CSV with a header row; `rows` are already formatted cells.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
        let mut s = header.join(",");
        s.push('\n');
        for r in rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        self.write(name, s.as_bytes())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    /// Whitespace-separated `.dat` file plus a `.plt` script that reads it by
    /// relative path.
    pub fn gnuplot(
        &mut self,
        stem: &str,
        header: &[&str],
        rows: &[Vec<String>],
        script_body: &str,
    ) -> io::Result<()> {
        let mut dat = format!("# {}\n", header.join(" "));
        for r in rows {
            dat.push_str(&r.join(" "));
            dat.push('\n');
        }
        self.write(&format!("{stem}.dat"), dat.as_bytes())?;
        let plt = format!(
            "# usage: gnuplot {stem}.plt (from this directory)\n\
             set terminal pngcairo size 900,600\n\
             set output '{stem}.png'\n\
             datafile = '{stem}.dat'\n{script_body}"
        );
        self.write(&format!("{stem}.plt"), plt.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for x in [0.1, 1.0 / 3.0, 0.364_520_000_000_000_1, -2.5e-300, 1e300] {
            assert_eq!(real(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(real(0.5), "5.0000000000000000e-1");
    }
}
