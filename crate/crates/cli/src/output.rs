//! File emission: CSV tables, a JSON summary and gnuplot-ready plot data.
//!
//! All outputs are deterministic for a fixed seed and configuration apart
//! from the single timestamp header line (CSV) / field (JSON).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub struct OutputDir {
    dir: PathBuf,
}

impl OutputDir {
    pub fn create(dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(OutputDir { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes a CSV file: a `# generated <unix time>` comment, the header
    /// row, then the records.
    pub fn write_csv(
        &self,
        name: &str,
        header: &str,
        rows: impl IntoIterator<Item = String>,
    ) -> std::io::Result<PathBuf> {
        let path = self.path(name);
        let mut f = std::fs::File::create(&path)?;
        writeln!(f, "# generated {}", timestamp())?;
        writeln!(f, "{header}")?;
        for row in rows {
            writeln!(f, "{row}")?;
        }
        Ok(path)
    }

    pub fn write_json(&self, name: &str, value: &serde_json::Value) -> std::io::Result<PathBuf> {
        let path = self.path(name);
        let mut f = std::fs::File::create(&path)?;
        writeln!(f, "{}", serde_json::to_string_pretty(value)?)?;
        Ok(path)
    }

    /// Plain two-column data file for plotting.
    pub fn write_plot_data(
        &self,
        name: &str,
        points: impl IntoIterator<Item = (f64, f64)>,
    ) -> std::io::Result<PathBuf> {
        let path = self.path(name);
        let mut f = std::fs::File::create(&path)?;
        writeln!(f, "# generated {}", timestamp())?;
        for (x, y) in points {
            writeln!(f, "{x:.16e} {y:.16e}")?;
        }
        Ok(path)
    }

    /// A gnuplot script referencing the emitted data files.
    pub fn write_gnuplot(&self, name: &str, body: &str) -> std::io::Result<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, body)?;
        Ok(path)
    }
}

pub fn fmt_c64(z: num_complex::Complex64) -> String {
    format!("{:.16e},{:.16e}", z.re, z.im)
}
