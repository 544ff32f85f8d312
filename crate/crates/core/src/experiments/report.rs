use std::collections::HashMap;
use std::io::Write;

use crate::dynamics::{RegimeName, Task};
use crate::error::{Error, Result};
use crate::evaluation::{format_float, MetricRecord, ModelKind};

/// Identifies one (task, regime, arm, sweep point) group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupKey {
    pub task: Task,
    pub regime: RegimeName,
    pub model: ModelKind,
    pub param_name: String,
    pub param_value: f64,
}

impl GroupKey {
    fn of(r: &MetricRecord) -> Self {
        Self {
            task: r.task,
            regime: r.regime,
            model: r.model,
            param_name: r.param_name.clone(),
            param_value: r.param_value,
        }
    }

    fn hash_key(&self) -> (Task, RegimeName, ModelKind, String, u64) {
        (self.task, self.regime, self.model, self.param_name.clone(), self.param_value.to_bits())
    }
}

/// Per-instantiation average over all of its forecasts.
#[derive(Debug, Clone, PartialEq)]
pub struct InstantiationSummary {
    pub key: GroupKey,
    pub instantiation: usize,
    pub n_forecasts: usize,
    pub mean_nmse: f64,
    pub valid_time: f64,
}

/// Cross-instantiation statistics of the per-instantiation means.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub key: GroupKey,
    pub n_instantiations: usize,
    pub mean_nmse_mean: f64,
    pub mean_nmse_std: f64,
    pub mean_nmse_max: f64,
    pub valid_time_mean: f64,
    pub valid_time_std: f64,
    pub valid_time_max: f64,
}

/// Groups in order of first appearance, instantiations likewise.
pub fn summarize_instantiations(records: &[MetricRecord]) -> Result<Vec<InstantiationSummary>> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no metric records to aggregate".into()));
    }
    let mut index = HashMap::new();
    let mut acc: Vec<(GroupKey, usize, usize, f64, f64)> = Vec::new();
    for r in records {
        let key = GroupKey::of(r);
        let slot = *index.entry((key.hash_key(), r.instantiation)).or_insert_with(|| {
            acc.push((key, r.instantiation, 0, 0.0, 0.0));
            acc.len() - 1
        });
        let a = &mut acc[slot];
        a.2 += 1;
        a.3 += r.mean_nmse;
        a.4 += r.valid_time;
    }
    Ok(acc
        .into_iter()
        .map(|(key, instantiation, n, m, v)| InstantiationSummary {
            key,
            instantiation,
            n_forecasts: n,
            mean_nmse: m / n as f64,
            valid_time: v / n as f64,
        })
        .collect())
}

/// Population mean and standard deviation, and the maximum.
fn stats(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (mean, var.sqrt(), max)
}

/// Averages within each instantiation first, then across instantiations.
pub fn aggregate_report(records: &[MetricRecord]) -> Result<Vec<SummaryRow>> {
    aggregate_instantiations(&summarize_instantiations(records)?)
}

pub fn aggregate_instantiations(insts: &[InstantiationSummary]) -> Result<Vec<SummaryRow>> {
    if insts.is_empty() {
        return Err(Error::InvalidParameter("no instantiation summaries to aggregate".into()));
    }
    let mut index = HashMap::new();
    let mut groups: Vec<(GroupKey, Vec<f64>, Vec<f64>)> = Vec::new();
    for s in insts {
        let slot = *index.entry(s.key.hash_key()).or_insert_with(|| {
            groups.push((s.key.clone(), Vec::new(), Vec::new()));
            groups.len() - 1
        });
        groups[slot].1.push(s.mean_nmse);
        groups[slot].2.push(s.valid_time);
    }
    Ok(groups
        .into_iter()
        .map(|(key, m, v)| {
            let (mm, ms, mx) = stats(&m);
            let (vm, vs, vx) = stats(&v);
            SummaryRow {
                key,
                n_instantiations: m.len(),
                mean_nmse_mean: mm,
                mean_nmse_std: ms,
                mean_nmse_max: mx,
                valid_time_mean: vm,
                valid_time_std: vs,
                valid_time_max: vx,
            }
        })
        .collect())
}

pub const SUMMARY_HEADER: &str = "task,regime,model,param_name,param_value,n_instantiations,\
mean_nmse_mean,mean_nmse_std,mean_nmse_max,valid_time_mean_s,valid_time_std_s,valid_time_max_s";

pub const INSTANTIATION_HEADER: &str =
    "task,regime,model,param_name,param_value,instantiation,n_forecasts,mean_nmse,valid_time_s";

fn key_fields(k: &GroupKey) -> String {
    format!(
        "{},{},{},{},{}",
        k.task,
        k.regime,
        k.model,
        k.param_name,
        format_float(k.param_value)
    )
}

pub fn write_summary_csv<W: Write>(w: &mut W, rows: &[SummaryRow]) -> Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            key_fields(&r.key),
            r.n_instantiations,
            format_float(r.mean_nmse_mean),
            format_float(r.mean_nmse_std),
            format_float(r.mean_nmse_max),
            format_float(r.valid_time_mean),
            format_float(r.valid_time_std),
            format_float(r.valid_time_max)
        )?;
    }
    Ok(())
}

pub fn write_instantiations_csv<W: Write>(w: &mut W, rows: &[InstantiationSummary]) -> Result<()> {
    writeln!(w, "{INSTANTIATION_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            key_fields(&r.key),
            r.instantiation,
            r.n_forecasts,
            format_float(r.mean_nmse),
            format_float(r.valid_time)
        )?;
    }
    Ok(())
}
