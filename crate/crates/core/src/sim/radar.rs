//! Radar-chart data: mean z-scores per cluster, condition and phase.

use std::path::Path;

use serde::Serialize;

use super::experiment::RunReport;
use crate::error::{Error, Result};
use crate::lexicon::DIMENSIONS;
use crate::session::Condition;

pub const RADAR_CSV: &str = "radar.csv";
pub const RADAR_MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadarRow {
    pub cluster: usize,
    pub condition: Condition,
    pub phase: &'static str,
    pub cognitive: f64,
    pub emotional: f64,
    pub intuitive: f64,
}

#[derive(Debug, Serialize)]
struct ManifestGroup {
    cluster: usize,
    condition: Condition,
    n: usize,
    /// Persona name → number of sessions in the group.
    personas: std::collections::BTreeMap<String, usize>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    data: &'static str,
    columns: [&'static str; 6],
    dimensions: [&'static str; 3],
    phases: [&'static str; 2],
    scale: &'static str,
    seed: u64,
    n_per_condition: usize,
    groups: Vec<ManifestGroup>,
    centroids: &'a [[f64; 3]],
}

/// Two rows (unaided, assisted) per cluster and condition, in cluster order.
pub fn radar_rows(report: &RunReport) -> Vec<RadarRow> {
    let mut rows = Vec::new();
    for g in &report.analysis.groups {
        for (phase, z) in [("unaided", g.unaided_mean_z), ("assisted", g.assisted_mean_z)] {
            rows.push(RadarRow {
                cluster: g.cluster,
                condition: g.condition,
                phase,
                cognitive: z[0],
                emotional: z[1],
                intuitive: z[2],
            });
        }
    }
    rows
}

/// Writes `radar.csv` and `manifest.json` into `dir`, creating it if needed.
pub fn export_radar(report: &RunReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join(RADAR_CSV)).map_err(csv_error)?;
    for row in radar_rows(report) {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;

    let a = &report.analysis;
    let groups = a
        .groups
        .iter()
        .map(|g| {
            let mut personas = std::collections::BTreeMap::new();
            for (s, &c) in report.sessions.iter().zip(&a.clusters.assignments) {
                if c == g.cluster && s.condition == g.condition {
                    *personas.entry(s.persona.to_string()).or_insert(0) += 1;
                }
            }
            ManifestGroup { cluster: g.cluster, condition: g.condition, n: g.n, personas }
        })
        .collect();
    let manifest = Manifest {
        data: RADAR_CSV,
        columns: ["cluster", "condition", "phase", "cognitive", "emotional", "intuitive"],
        dimensions: DIMENSIONS,
        phases: ["unaided", "assisted"],
        scale: "z-scores pooled over all sessions and both phases",
        seed: report.config.seed,
        n_per_condition: report.config.n_per_condition,
        groups,
        centroids: &a.clusters.centroids,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(dir.join(RADAR_MANIFEST), text)?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!(),
        }
    } else {
        Error::validation(format!("csv: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run_experiment, ExperimentConfig};

    #[test]
    fn schema_and_determinism() {
        let report = run_experiment(&ExperimentConfig { n_per_condition: 6, ..Default::default() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        export_radar(&report, dir.path()).unwrap();
        let first = std::fs::read(dir.path().join(RADAR_CSV)).unwrap();
        let manifest = std::fs::read(dir.path().join(RADAR_MANIFEST)).unwrap();
        export_radar(&report, dir.path()).unwrap();
        assert_eq!(std::fs::read(dir.path().join(RADAR_CSV)).unwrap(), first);
        assert_eq!(std::fs::read(dir.path().join(RADAR_MANIFEST)).unwrap(), manifest);
        let text = String::from_utf8(first).unwrap();
        assert_eq!(text.lines().next().unwrap(), "cluster,condition,phase,cognitive,emotional,intuitive");
        assert_eq!(text.lines().count() - 1, 2 * report.analysis.groups.len());
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let report = run_experiment(&ExperimentConfig { n_per_condition: 3, turns: 2, ..Default::default() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("occupied");
        std::fs::write(&file, "x").unwrap();
        assert!(matches!(export_radar(&report, &file), Err(Error::Io(_))));
    }
}
