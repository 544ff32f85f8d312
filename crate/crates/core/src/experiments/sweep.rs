use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::params::{ExperimentParams, GridPoint, SweepSpec};
use super::procedure::{generate_ground_truths, run_arm, GroundTruth, PointLabel, RunManifest};
use super::report::{
    aggregate_instantiations, summarize_instantiations, write_instantiations_csv, write_summary_csv,
    InstantiationSummary, SummaryRow,
};
use crate::dynamics::{RegimeName, Task};
use crate::error::{Error, Result};
use crate::evaluation::{write_metrics_csv, MetricRecord, ModelKind};

/// A sweep or grid point that could not be run.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub point: String,
    pub regime: Option<RegimeName>,
    pub message: String,
}

/// Everything produced by a sweep or grid search.
#[derive(Debug, Clone, Default)]
pub struct SweepOutcome {
    /// Ordered by regime, point, arm, instantiation, span.
    pub records: Vec<MetricRecord>,
    pub instantiations: Vec<InstantiationSummary>,
    pub summary: Vec<SummaryRow>,
    pub failed_points: Vec<PointFailure>,
    /// Scored forecasts that stopped early or never trained.
    pub forecast_failures: Vec<String>,
    /// `(regime, realization, fingerprint)` of every ground-truth record used.
    pub ground_truth: Vec<(RegimeName, usize, u64)>,
}

impl SweepOutcome {
    pub fn is_complete(&self) -> bool {
        self.failed_points.is_empty()
    }
}

/// One labelled set of parameters to run every arm at.
struct Point {
    file_stem: String,
    label: PointLabel,
    params: Result<ExperimentParams>,
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn run_points(
    manifest: &RunManifest,
    points: Vec<Point>,
    arms: &[ModelKind],
    out_dir: Option<&Path>,
    progress: &mut dyn FnMut(&str),
) -> Result<SweepOutcome> {
    manifest.validate()?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    let mut outcome = SweepOutcome::default();
    let mut truths: Vec<(RegimeName, std::result::Result<Vec<GroundTruth>, String>)> = Vec::new();
    for &regime in &manifest.regimes {
        let t = generate_ground_truths(manifest, regime).map_err(|e| e.to_string());
        if let Ok(ts) = &t {
            for g in ts {
                outcome.ground_truth.push((regime, g.realization, g.fingerprint()));
            }
        }
        truths.push((regime, t));
    }

    // (regime position, point position, records) for canonical reordering.
    let mut blocks: Vec<(usize, usize, Vec<MetricRecord>)> = Vec::new();
    let n_points = points.len();
    for (pi, point) in points.into_iter().enumerate() {
        progress(&format!("point {}/{n_points}: {}", pi + 1, point.file_stem));
        let params = match point.params {
            Ok(p) => p,
            Err(e) => {
                outcome.failed_points.push(PointFailure {
                    point: point.file_stem,
                    regime: None,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let mut point_records = Vec::new();
        let mut point_ok = true;
        for (ri, (regime, t)) in truths.iter().enumerate() {
            let ts = match t {
                Ok(ts) => ts,
                Err(msg) => {
                    outcome.failed_points.push(PointFailure {
                        point: point.file_stem.clone(),
                        regime: Some(*regime),
                        message: msg.clone(),
                    });
                    point_ok = false;
                    continue;
                }
            };
            let mut regime_records = Vec::new();
            for &arm in arms {
                match run_arm(manifest, arm, &params, &point.label, ts) {
                    Ok(out) => {
                        regime_records.extend(out.records);
                        outcome.forecast_failures.extend(out.failures);
                    }
                    Err(e) => {
                        outcome.failed_points.push(PointFailure {
                            point: point.file_stem.clone(),
                            regime: Some(*regime),
                            message: e.to_string(),
                        });
                        point_ok = false;
                    }
                }
            }
            point_records.extend(regime_records.iter().cloned());
            blocks.push((ri, pi, regime_records));
        }
        if let Some(dir) = out_dir {
            if point_ok || !point_records.is_empty() {
                let path = dir.join(format!("{}.csv", point.file_stem));
                write_file(&path, |w| write_metrics_csv(w, &point_records))?;
            }
        }
    }
    blocks.sort_by_key(|b| (b.0, b.1));
    outcome.records = blocks.into_iter().flat_map(|b| b.2).collect();
    if !outcome.records.is_empty() {
        outcome.instantiations = summarize_instantiations(&outcome.records)?;
        outcome.summary = aggregate_instantiations(&outcome.instantiations)?;
    }
    if let Some(dir) = out_dir {
        if !outcome.summary.is_empty() {
            write_file(&dir.join("summary.csv"), |w| write_summary_csv(w, &outcome.summary))?;
        }
    }
    Ok(outcome)
}

/// Runs `arms` at every value of `sweep`, all other parameters at `base`.
/// Point `i` seeds its reservoirs and experts with sweep index `i`.
pub fn run_sweep(
    manifest: &RunManifest,
    base: &ExperimentParams,
    sweep: &SweepSpec,
    arms: &[ModelKind],
    out_dir: Option<&Path>,
    progress: &mut dyn FnMut(&str),
) -> Result<SweepOutcome> {
    sweep.validate()?;
    let points = sweep
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| Point {
            file_stem: format!("{}_{i:02}", sweep.parameter),
            label: PointLabel {
                sweep_index: i,
                param_name: sweep.parameter.as_str().into(),
                param_value: v,
            },
            params: base.with(sweep.parameter, v),
        })
        .collect();
    run_points(manifest, points, arms, out_dir, progress)
}

pub const GRID_REGIMES: [RegimeName; 3] = [
    RegimeName::Synchrony,
    RegimeName::HeteroclinicCycles,
    RegimeName::PartialSynchrony,
];

/// Standard and hybrid arms at the eight grid corners. Records carry
/// `param_name = "grid"` and `param_value` = corner index (A = 0).
/// Writes `grid_<label>.csv` per corner, `grid_instantiations.csv` and
/// `summary.csv` when `out_dir` is given.
pub fn run_grid_search(
    manifest: &RunManifest,
    base: &ExperimentParams,
    out_dir: Option<&Path>,
    progress: &mut dyn FnMut(&str),
) -> Result<SweepOutcome> {
    if manifest.task != Task::ResidualPhysics {
        return Err(Error::InvalidParameter("grid search runs on the residual_physics task".into()));
    }
    if let Some(r) = manifest.regimes.iter().find(|r| !GRID_REGIMES.contains(r)) {
        return Err(Error::InvalidParameter(format!(
            "regime {r} is not part of the grid search (use synchrony, heteroclinic_cycles, partial_synchrony)"
        )));
    }
    let points = GridPoint::all()
        .iter()
        .map(|g| Point {
            file_stem: format!("grid_{}", g.label),
            label: PointLabel {
                sweep_index: g.index(),
                param_name: "grid".into(),
                param_value: g.index() as f64,
            },
            params: g.apply(base),
        })
        .collect();
    let outcome = run_points(
        manifest,
        points,
        &[ModelKind::Standard, ModelKind::Hybrid],
        out_dir,
        progress,
    )?;
    if let Some(dir) = out_dir {
        if !outcome.instantiations.is_empty() {
            write_file(&dir.join("grid_instantiations.csv"), |w| {
                write_instantiations_csv(w, &outcome.instantiations)
            })?;
        }
    }
    Ok(outcome)
}
