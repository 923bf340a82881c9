use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};
use crate::runner::RunReport;

pub const REPORT_FILE: &str = "report.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const SAMPLER_FILE: &str = "sampler.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

/// Header of the sampler table; followed by one `count_<x>` column per point.
pub const SAMPLER_HEADER: &str = "n,tv,envelope";

fn write_atomic(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    let path = dir.join(name);
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents.as_bytes())
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(&path)
        .map_err(|e| CliError::io(&path, e.error))?;
    Ok(path)
}

pub fn sampler_csv(report: &RunReport) -> Option<String> {
    let s = report.sampler.as_ref()?;
    let n_points = s.ensemble.weights.len();
    let mut out = String::from(SAMPLER_HEADER);
    for x in 0..n_points {
        out.push_str(&format!(",count_{x}"));
    }
    out.push('\n');
    for (d, counts) in s.discrepancies.iter().zip(&s.ensemble.counts) {
        out.push_str(&format!("{},{:e},{:e}", d.n, d.tv, d.envelope));
        for c in counts {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
    }
    Some(out)
}

/// Writes the full JSON report, the trace tables that exist, and the
/// one-line summary into `out_dir`, creating it if needed.
pub fn emit_reports(report: &RunReport, out_dir: &Path) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut written = Vec::new();
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    written.push(write_atomic(out_dir, REPORT_FILE, &json)?);
    if let Some(conv) = &report.convergence {
        written.push(write_atomic(out_dir, TRACE_FILE, &conv.to_csv())?);
    }
    if let Some(csv) = sampler_csv(report) {
        written.push(write_atomic(out_dir, SAMPLER_FILE, &csv)?);
    }
    written.push(write_atomic(
        out_dir,
        SUMMARY_FILE,
        &format!("{}\n", report.summary_line()),
    )?);
    Ok(written)
}
