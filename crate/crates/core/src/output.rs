//! Trajectory files: CSV (with a sibling events file) or one JSON document.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::atlas::ChartId;
use crate::error::{Error, Result};
use crate::integrate::{Sample, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::config("format", format!("expected csv or json, got `{s}`"))),
        }
    }
}

/// Seventeen significant digits, enough to round-trip any f64.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn samples_csv(traj: &Trajectory) -> String {
    let mut out = String::from("s,chart");
    for c in traj.state_columns() {
        out.push(',');
        out.push_str(&c);
    }
    out.push('\n');
    for sample in &traj.samples {
        write!(out, "{},{}", real(sample.s), sample.chart).unwrap();
        for v in &sample.state {
            write!(out, ",{}", real(*v)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn events_csv(traj: &Trajectory) -> String {
    let mut out = String::from("s,from,to\n");
    for e in &traj.events {
        writeln!(out, "{},{},{}", real(e.s), e.from, e.to).unwrap();
    }
    out
}

pub fn trajectory_json(traj: &Trajectory) -> serde_json::Value {
    json!({
        "side": traj.kind.name(),
        "columns": traj.state_columns(),
        "samples": traj.samples,
        "events": traj.events,
    })
}

/// `<dir>/<stem>.events.csv` next to `path`.
pub fn events_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "trajectory".into());
    path.with_file_name(format!("{stem}.events.csv"))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_trajectory(traj: &Trajectory, path: &Path, format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            write(path, &samples_csv(traj))?;
            write(&events_path(path), &events_csv(traj))
        }
        Format::Json => {
            let text = serde_json::to_string_pretty(&trajectory_json(traj)).expect("trajectory serializes");
            write(path, &text)
        }
    }
}

/// Parses the samples CSV written by [`samples_csv`].
pub fn parse_samples_csv(text: &str) -> Result<Vec<Sample>> {
    let bad = |line: usize, msg: &str| Error::config(format!("line {line}"), msg.to_string());
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.starts_with("s,chart") => {}
        _ => return Err(bad(1, "missing header")),
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let mut cells = l.split(',');
            let s = cells.next().and_then(|c| c.parse().ok()).ok_or_else(|| bad(i + 1, "bad s"))?;
            let chart = cells.next().and_then(|c| c.parse().ok()).ok_or_else(|| bad(i + 1, "bad chart"))?;
            let state = cells.map(|c| c.parse().map_err(|_| bad(i + 1, "bad real"))).collect::<Result<_>>()?;
            Ok(Sample { s, chart: ChartId(chart), state })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::section::SectionKind;

    #[test]
    fn seventeen_digits() {
        assert_eq!(real(0.1), "1.0000000000000001e-1");
        assert_eq!(real(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn events_file_name() {
        assert_eq!(events_path(Path::new("out/run.csv")), PathBuf::from("out/run.events.csv"));
    }

    #[test]
    fn csv_round_trip() {
        let traj = Trajectory {
            kind: SectionKind::Lagrangian,
            dim: 1,
            samples: vec![
                Sample { s: 0.0, chart: ChartId(0), state: vec![1.0, 1.0 / 3.0, -0.0] },
                Sample { s: 0.1, chart: ChartId(1), state: vec![std::f64::consts::PI, 1e-300, 7.0] },
            ],
            events: Vec::new(),
        };
        let text = samples_csv(&traj);
        assert!(text.starts_with("s,chart,x1,xd1,t\n"));
        assert_eq!(parse_samples_csv(&text).unwrap(), traj.samples);
    }
}
