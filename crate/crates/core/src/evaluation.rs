//! Span segmentation, NMSE / valid-time metrics and metric records.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{RegimeName, Task};
use crate::error::{Error, Result};
use crate::Matrix;

/// Step counts of the training / warm-up / test division of a record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpanLayout {
    pub training: usize,
    pub train_test_gap: usize,
    pub warmup: usize,
    pub test: usize,
    pub test_test_gap: usize,
    pub n_tests: usize,
    pub dt: f64,
}

impl Default for SpanLayout {
    fn default() -> Self {
        Self {
            training: 1000,
            train_test_gap: 1000,
            warmup: 100,
            test: 2500,
            test_test_gap: 400,
            n_tests: 20,
            dt: 0.1,
        }
    }
}

impl SpanLayout {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("training", self.training),
            ("train_test_gap", self.train_test_gap),
            ("warmup", self.warmup),
            ("test", self.test),
            ("test_test_gap", self.test_test_gap),
            ("n_tests", self.n_tests),
        ];
        for (name, v) in fields {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("layout.{name} must be >= 1")));
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("layout.dt must be > 0, got {}", self.dt)));
        }
        Ok(())
    }

    fn period(&self) -> usize {
        self.warmup + self.test + self.test_test_gap
    }

    /// `training + gap + n_tests (warmup + test + test_gap)`.
    pub fn total_steps(&self) -> usize {
        self.training + self.train_test_gap + self.n_tests * self.period()
    }

    pub fn warmup_start(&self, k: usize) -> usize {
        self.training + self.train_test_gap + k * self.period()
    }

    pub fn test_start(&self, k: usize) -> usize {
        self.warmup_start(k) + self.warmup
    }

    /// Samples a record must hold for [`segment`] to succeed. The training
    /// span includes its final target sample.
    pub fn required_samples(&self) -> usize {
        (self.training + 1).max(self.test_start(self.n_tests - 1) + self.test)
    }

    /// Test span duration `test * dt`.
    pub fn horizon_seconds(&self) -> f64 {
        self.test as f64 * self.dt
    }
}

/// A training span followed by `(warm-up, test)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Segments {
    /// `D_u x (training + 1)`: `training` input/target transitions.
    pub training: Matrix,
    pub spans: Vec<(Matrix, Matrix)>,
}

pub fn segment(record: &Matrix, layout: &SpanLayout) -> Result<Segments> {
    layout.validate()?;
    let required = layout.required_samples();
    if record.ncols() < required {
        return Err(Error::RecordTooShort {
            required,
            found: record.ncols(),
        });
    }
    let training = record.columns(0, layout.training + 1).into_owned();
    let spans = (0..layout.n_tests)
        .map(|k| {
            (
                record.columns(layout.warmup_start(k), layout.warmup).into_owned(),
                record.columns(layout.test_start(k), layout.test).into_owned(),
            )
        })
        .collect();
    Ok(Segments { training, spans })
}

/// Prediction and truth over one test span; column `k` is at `t = (k + 1) dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastResult {
    prediction: Matrix,
    truth: Matrix,
    dt: f64,
}

impl ForecastResult {
    pub fn new(prediction: Matrix, truth: Matrix, dt: f64) -> Result<Self> {
        if prediction.shape() != truth.shape() {
            return Err(Error::DimensionMismatch {
                what: "prediction columns",
                expected: truth.ncols(),
                found: prediction.ncols(),
            });
        }
        if truth.ncols() == 0 || truth.nrows() == 0 {
            return Err(Error::InvalidParameter("forecast horizon must be >= 1".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        Ok(Self {
            prediction,
            truth,
            dt,
        })
    }

    pub fn prediction(&self) -> &Matrix {
        &self.prediction
    }

    pub fn truth(&self) -> &Matrix {
        &self.truth
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> usize {
        self.truth.ncols()
    }
}

fn nmse_denominator(truth: &Matrix) -> Result<f64> {
    let denom = (truth.norm_squared() / truth.ncols() as f64).sqrt();
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::InvalidParameter("ground truth has zero RMS norm".into()));
    }
    Ok(denom)
}

/// `||u(t) - u*(t)|| / <||u*||^2>^{1/2}`, normalised by the test-span truth.
pub fn nmse_series(fr: &ForecastResult) -> Result<Vec<f64>> {
    nmse_series_partial(&fr.prediction, &fr.truth)
}

/// NMSE of a possibly truncated forecast (`prefix.ncols() <= truth.ncols()`),
/// padded with 2.0 past the end of the prefix.
pub fn nmse_series_partial(prefix: &Matrix, truth: &Matrix) -> Result<Vec<f64>> {
    if truth.ncols() == 0 {
        return Err(Error::InvalidParameter("forecast horizon must be >= 1".into()));
    }
    if prefix.ncols() > truth.ncols() || (prefix.ncols() > 0 && prefix.nrows() != truth.nrows()) {
        return Err(Error::DimensionMismatch {
            what: "prediction prefix",
            expected: truth.ncols(),
            found: prefix.ncols(),
        });
    }
    let denom = nmse_denominator(truth)?;
    let mut out = Vec::with_capacity(truth.ncols());
    for (p, t) in prefix.column_iter().zip(truth.column_iter()) {
        out.push((p - t).norm() / denom);
    }
    out.resize(truth.ncols(), FAILED_NMSE);
    Ok(out)
}

/// NMSE assigned to steps a failed forecast never reached.
pub const FAILED_NMSE: f64 = 2.0;

pub fn mean_nmse(fr: &ForecastResult) -> Result<f64> {
    Ok(mean(&nmse_series(fr)?))
}

fn mean(series: &[f64]) -> f64 {
    series.iter().sum::<f64>() / series.len() as f64
}

/// Valid time on the forecast grid; 0 if the first sample exceeds `epsilon`.
pub fn valid_time(fr: &ForecastResult, epsilon: f64) -> Result<f64> {
    valid_time_from_series(&nmse_series(fr)?, fr.dt, epsilon)
}

pub fn valid_time_from_series(series: &[f64], dt: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be > 0, got {epsilon}")));
    }
    let steps = series.iter().take_while(|&&e| e <= epsilon).count();
    Ok(steps as f64 * dt)
}

/// Mean NMSE and valid time of a forecast that may have stopped early.
pub fn score_forecast(prefix: &Matrix, truth: &Matrix, dt: f64, epsilon: f64) -> Result<(f64, f64)> {
    let series = nmse_series_partial(prefix, truth)?;
    Ok((mean(&series), valid_time_from_series(&series, dt, epsilon)?))
}

/// `(lag * dt, ||u(t + lag) - u(t)||)` for every lag up to `max_lag` and every
/// `stride`-th start time.
pub fn space_time_separation(
    record: &Matrix,
    dt: f64,
    max_lag: usize,
    stride: usize,
) -> Result<Vec<(f64, f64)>> {
    if max_lag >= record.ncols() {
        return Err(Error::InvalidParameter(format!(
            "max_lag {max_lag} must be below the record length {}",
            record.ncols()
        )));
    }
    if stride == 0 {
        return Err(Error::InvalidParameter("stride must be >= 1".into()));
    }
    let mut out = Vec::new();
    for lag in 0..=max_lag {
        for t in (0..record.ncols() - lag).step_by(stride) {
            out.push((lag as f64 * dt, (record.column(t + lag) - record.column(t)).norm()));
        }
    }
    Ok(out)
}

/// Forecasting arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Standard,
    Hybrid,
    Ode,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Standard, ModelKind::Hybrid, ModelKind::Ode];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Standard => "standard",
            ModelKind::Hybrid => "hybrid",
            ModelKind::Ode => "ode",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model '{s}' (expected standard, hybrid or ode)")))
    }
}

/// Metrics of one forecast of one model instantiation.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub task: Task,
    pub regime: RegimeName,
    pub model: ModelKind,
    pub param_name: String,
    pub param_value: f64,
    pub instantiation: usize,
    pub span: usize,
    pub mean_nmse: f64,
    pub valid_time: f64,
}

pub const METRIC_HEADER: &str =
    "task,regime,model,param_name,param_value,instantiation,span,mean_nmse,valid_time_s";

/// Nine significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn write_metrics_csv<W: Write>(w: &mut W, records: &[MetricRecord]) -> Result<()> {
    writeln!(w, "{METRIC_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.task,
            r.regime,
            r.model,
            r.param_name,
            format_float(r.param_value),
            r.instantiation,
            r.span,
            format_float(r.mean_nmse),
            format_float(r.valid_time)
        )?;
    }
    Ok(())
}

fn parse_field<T: FromStr>(field: Option<&str>, name: &str, line: usize) -> Result<T> {
    let raw = field.ok_or_else(|| Error::Io(format!("line {line}: missing field {name}")))?;
    raw.trim()
        .parse()
        .map_err(|_| Error::Io(format!("line {line}: cannot parse {name} from '{raw}'")))
}

pub fn read_metrics_csv<R: Read>(r: R) -> Result<Vec<MetricRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Io(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.join(",") != METRIC_HEADER {
        return Err(Error::Io(format!("unexpected metric header '{}'", header.join(","))));
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::Io(e.to_string()))?;
        let line = i + 2;
        out.push(MetricRecord {
            task: parse_field(row.get(0), "task", line)?,
            regime: parse_field(row.get(1), "regime", line)?,
            model: parse_field(row.get(2), "model", line)?,
            param_name: parse_field(row.get(3), "param_name", line)?,
            param_value: parse_field(row.get(4), "param_value", line)?,
            instantiation: parse_field(row.get(5), "instantiation", line)?,
            span: parse_field(row.get(6), "span", line)?,
            mean_nmse: parse_field(row.get(7), "mean_nmse", line)?,
            valid_time: parse_field(row.get(8), "valid_time_s", line)?,
        });
    }
    Ok(out)
}
