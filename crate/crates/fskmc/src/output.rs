//! CSV emission. All files use header rows, UTF-8, `\n` line endings, and
//! `.` decimal separators; floating-point values print in Rust's shortest
//! round-trip form, so identical data yields byte-identical files.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// One row of the results file.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub run_id: String,
    pub time: f64,
    pub observable: String,
    pub value: f64,
    /// Empty for instantaneous samples; set on time-averaged summaries.
    pub stderr: Option<f64>,
}

/// One row of the benchmark timing file.
#[derive(Debug, Clone)]
pub struct TimingRow {
    pub size: u64,
    pub workers: usize,
    pub schedule: String,
    pub dt: f64,
    pub wall_seconds: f64,
    pub jumps_per_second: f64,
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// `run_id,time,observable,value,stderr`.
pub fn write_results_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut out = String::from("run_id,time,observable,value,stderr\n");
    for r in rows {
        let se = r.stderr.map(fmt).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.run_id,
            fmt(r.time),
            r.observable,
            fmt(r.value),
            se
        ));
    }
    write_atomically(path, out.as_bytes())
}

/// `window,cell,jumps` — the per-window workload matrix.
pub fn write_workload_csv(path: &Path, workload: &[Vec<u64>]) -> Result<()> {
    let mut out = String::from("window,cell,jumps\n");
    for (w, cells) in workload.iter().enumerate() {
        for (c, jumps) in cells.iter().enumerate() {
            out.push_str(&format!("{w},{c},{jumps}\n"));
        }
    }
    write_atomically(path, out.as_bytes())
}

/// `size,workers,schedule,dt,wall_seconds,jumps_per_second`.
pub fn write_timing_csv(path: &Path, rows: &[TimingRow]) -> Result<()> {
    let mut out = String::from("size,workers,schedule,dt,wall_seconds,jumps_per_second\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.size,
            r.workers,
            r.schedule,
            fmt(r.dt),
            fmt(r.wall_seconds),
            fmt(r.jumps_per_second)
        ));
    }
    write_atomically(path, out.as_bytes())
}

fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)?;
    f.flush()?;
    Ok(())
}
