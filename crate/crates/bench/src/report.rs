use std::fs;
use std::io::Write;
use std::path::Path;

use msp_core::evolution::RunTrace;
use serde::Serialize;

use crate::spec::ExperimentSpec;
use crate::BenchError;

/// Result of one solver on one seed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub solver: String,
    pub trial: usize,
    pub seed: u64,
    pub best: Option<Vec<u32>>,
    /// Objective in its own direction.
    pub value: Option<f64>,
    /// Final penalized fitness of the trace.
    pub fitness: Option<f64>,
    /// Whether `best` satisfies the experiment's constraints.
    pub valid: Option<bool>,
    pub evaluations: Option<usize>,
    pub generation_to_best: Option<usize>,
    pub millis: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmergencyRecord {
    pub headcount_after: Vec<u32>,
    pub total_time_after: f64,
    pub cost_after: f64,
}

/// Attendance and roster stages run on one trial's headcounts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineRecord {
    pub trial: usize,
    pub seed: u64,
    pub headcount: Vec<u32>,
    pub headcount_valid: bool,
    pub emergency: Option<EmergencyRecord>,
    pub assignment_value: Option<f64>,
    pub assignment_valid: Option<bool>,
    pub roster_total_time: Option<f64>,
    pub roster_valid: Option<bool>,
    /// Every job table re-validates against its admissibility policy.
    pub replay_ok: Option<bool>,
    pub millis: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RotationRecord {
    pub trial: usize,
    pub seed: u64,
    pub order: Vec<usize>,
    pub loads: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParetoRecord {
    pub trial: usize,
    pub seed: u64,
    pub archive_size: usize,
    pub nondominated: bool,
    /// Archive members as headcounts followed by objective values.
    pub points: Vec<(Vec<i64>, Vec<f64>)>,
    pub millis: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableTimingRecord {
    pub horizon: usize,
    pub trial: usize,
    pub seed: u64,
    pub assignments: Option<usize>,
    pub replay_ok: Option<bool>,
    pub millis: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub algorithm: String,
    pub median_time_ms: Option<f64>,
    pub accuracy: Option<f64>,
    pub convergence_rank: usize,
    pub median_value: Option<f64>,
    pub stability: f64,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimingSummary {
    pub horizon: usize,
    pub median_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub spec: ExperimentSpec,
    pub trials: Vec<TrialRecord>,
    pub comparison: Vec<ComparisonRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pipeline: Vec<PipelineRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rotation: Vec<RotationRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pareto: Vec<ParetoRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<TableTimingRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub timing: Vec<TimingSummary>,
    /// Per-trial traces, keyed by file stem.
    #[serde(skip)]
    pub traces: Vec<(String, RunTrace)>,
    /// Pareto archive CSVs, keyed by file stem.
    #[serde(skip)]
    pub archives: Vec<(String, Vec<u8>)>,
}

impl Report {
    /// Clears every wall-clock field so reruns compare byte for byte.
    pub fn strip_timing(&mut self) {
        for t in &mut self.trials {
            t.millis = None;
        }
        for r in &mut self.comparison {
            r.median_time_ms = None;
        }
        for p in &mut self.pipeline {
            p.millis = None;
        }
        for p in &mut self.pareto {
            p.millis = None;
        }
        for t in &mut self.tables {
            t.millis = None;
        }
        for t in &mut self.timing {
            t.median_ms = None;
        }
        for (_, trace) in &mut self.traces {
            for r in &mut trace.rows {
                r.millis = 0.0;
            }
        }
    }

    pub fn to_json(&self) -> Result<String, BenchError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn comparison_csv(&self) -> Result<Vec<u8>, BenchError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record([
            "algorithm",
            "median_time_ms",
            "accuracy",
            "convergence_rank",
            "median_value",
            "stability",
            "failures",
        ])?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
        for r in &self.comparison {
            w.write_record([
                r.algorithm.clone(),
                opt(r.median_time_ms),
                opt(r.accuracy),
                r.convergence_rank.to_string(),
                opt(r.median_value),
                r.stability.to_string(),
                r.failures.to_string(),
            ])?;
        }
        w.into_inner().map_err(|e| BenchError::Io(e.into_error()))
    }

    /// Writes `report.json`, `comparison.csv`, `traces/*.csv` and
    /// `pareto/*.csv` under `out`. Trace timing columns are left empty
    /// unless `with_timing`.
    pub fn write(&self, out: &Path, with_timing: bool) -> Result<(), BenchError> {
        fs::create_dir_all(out)?;
        write_atomic(&out.join("report.json"), self.to_json()?.as_bytes())?;
        write_atomic(&out.join("comparison.csv"), &self.comparison_csv()?)?;
        if !self.traces.is_empty() {
            let dir = out.join("traces");
            fs::create_dir_all(&dir)?;
            for (stem, trace) in &self.traces {
                let mut buf = Vec::new();
                trace.write_csv(&mut buf, with_timing)?;
                write_atomic(&dir.join(format!("{stem}.csv")), &buf)?;
            }
        }
        if !self.archives.is_empty() {
            let dir = out.join("pareto");
            fs::create_dir_all(&dir)?;
            for (stem, bytes) in &self.archives {
                write_atomic(&dir.join(format!("{stem}.csv")), bytes)?;
            }
        }
        Ok(())
    }
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
