//! Aggregation of a sample-size sweep output directory into plot data.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::io::{format_table, parse_table, parse_trials, read_file, write_file};

/// Builds `size,success_pct,cpu_ms` from the raw trial records of a sweep
/// (`n<size>-<trial>` ids); CPU time comes from `sizes.csv` when recorded.
pub fn sweep_plot_data(dir: &Path) -> Result<String> {
    let trials = parse_trials(&read_file(&dir.join("trials.csv"))?)?;
    let mut per_size: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for t in &trials {
        let size = t
            .trial_id
            .strip_prefix('n')
            .and_then(|rest| rest.split('-').next())
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| CliError::data(format!("trial id {} is not from a sample-size sweep", t.trial_id)))?;
        let e = per_size.entry(size).or_default();
        e.0 += t.success as usize;
        e.1 += 1;
    }
    if per_size.is_empty() {
        return Err(CliError::data("no trials to report"));
    }
    let mut cpu: BTreeMap<usize, String> = BTreeMap::new();
    let sizes_path = dir.join("sizes.csv");
    if sizes_path.exists() {
        let (header, rows) = parse_table(&read_file(&sizes_path)?)?;
        let col = header.iter().position(|h| h == "cpu_ms");
        for r in rows {
            if let (Some(c), Ok(size)) = (col, r[0].parse::<usize>()) {
                cpu.insert(size, r.get(c).cloned().unwrap_or_default());
            }
        }
    }
    format_table(
        &["size", "success_pct", "cpu_ms"],
        per_size.iter().map(|(size, (s, n))| {
            let pct = (100.0 * *s as f64 / *n as f64).round() as u32;
            vec![size.to_string(), pct.to_string(), cpu.get(size).cloned().unwrap_or_default()]
        }),
    )
}

/// Writes `plot.csv` next to the sweep outputs and returns its contents.
pub fn write_report(dir: &Path) -> Result<String> {
    let text = sweep_plot_data(dir)?;
    write_file(&dir.join("plot.csv"), &text)?;
    Ok(text)
}
