use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use hybrid_esn::dynamics::{write_trajectory_csv, Model, RegimeName, Task};
use hybrid_esn::evaluation::{read_metrics_csv, score_forecast, MetricRecord, ModelKind, METRIC_HEADER};
use hybrid_esn::experiments::{
    aggregate_report, generate_ground_truth, run_grid_search, run_sweep, write_summary_csv, GroundTruth,
    RunManifest, StreamRole, SummaryRow, SweepOutcome, TrainedModel, GRID_REGIMES,
};
use hybrid_esn::hybrid::{ExpertModel, HybridReservoir};
use hybrid_esn::reservoir::{
    read_dump, write_dump, EchoStateNetwork, InputMatrix, ModelDump, Readout, ReservoirConfig,
    ReservoirMatrices, SparseMatrix,
};
use hybrid_esn::Matrix;
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig, SCHEMA_VERSION};
use crate::plot::{self, Metric};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration.
    Usage(String),
    /// Some sweep points or forecasts did not complete.
    Partial(String),
    /// I/O and numerical failures.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Partial(_) => 3,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Partial(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.0)
    }
}

impl From<hybrid_esn::Error> for CliError {
    fn from(e: hybrid_esn::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Failed(format!("{}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Failed(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Failed(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::Failed(e.to_string()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn install_thread_pool(threads: Option<usize>) -> CliResult {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Failed(format!("cannot start thread pool: {e}")))?;
    }
    Ok(())
}

fn truth_for(manifest: &RunManifest, regime: RegimeName, realization: usize) -> CliResult<GroundTruth> {
    if realization >= manifest.n_realizations {
        return Err(CliError::Usage(format!(
            "realization {realization} out of range (n_realizations = {})",
            manifest.n_realizations
        )));
    }
    Ok(generate_ground_truth(manifest, regime, realization)?)
}

#[derive(Serialize)]
struct TrajectoryMeta<'a> {
    version: &'static str,
    task: Task,
    regime: RegimeName,
    realization: usize,
    master_seed: u64,
    seed_source: &'static str,
    /// ChaCha20 key of the ground-truth stream.
    stream_key: String,
    dt: f64,
    substeps_per_sample: usize,
    n_steps: usize,
    n_oscillators: usize,
    model: &'a Model,
    initial_phases: Vec<f64>,
    fingerprint: String,
}

pub struct GenerateArgs {
    pub config: Option<PathBuf>,
    pub regime: String,
    pub realization: usize,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

/// Sidecar path `<stem>.meta.json` next to `out`.
pub fn meta_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

pub fn generate(args: &GenerateArgs) -> CliResult {
    let cfg = ExperimentConfig::load_or_default(args.config.as_deref())?;
    let (seed, source) = cfg.resolve_seed(args.seed)?;
    let regime = cfg.parse_regime(&args.regime)?;
    let manifest = cfg.manifest(seed);
    let truth = truth_for(&manifest, regime, args.realization)?;

    let mut w = create(&args.out)?;
    write_trajectory_csv(&mut w, &truth.record, manifest.layout.dt)?;
    w.flush().map_err(|e| CliError::Failed(e.to_string()))?;

    let first = truth.record.column(0);
    let meta = TrajectoryMeta {
        version: env!("CARGO_PKG_VERSION"),
        task: manifest.task,
        regime,
        realization: args.realization,
        master_seed: seed,
        seed_source: source,
        stream_key: hex(&manifest.key(regime, args.realization, 0, 0, StreamRole::GroundTruth).seed_bytes()),
        dt: manifest.layout.dt,
        substeps_per_sample: manifest.integrator.substeps_per_sample,
        n_steps: truth.record.ncols() - 1,
        n_oscillators: truth.model.n_oscillators(),
        model: &truth.model,
        initial_phases: (0..truth.model.n_oscillators())
            .map(|i| first[2 * i + 1].atan2(first[2 * i]))
            .collect(),
        fingerprint: format!("{:016x}", truth.fingerprint()),
    };
    write_json(&meta_path(&args.out), &meta)?;
    println!(
        "wrote {} samples of {} / {} to {}",
        truth.record.ncols(),
        manifest.task,
        regime,
        args.out.display()
    );
    Ok(())
}

pub struct TrainArgs {
    pub config: Option<PathBuf>,
    pub regime: String,
    pub kind: ModelKind,
    pub realization: usize,
    pub instantiation: usize,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

fn to_dump(model: &TrainedModel) -> Option<ModelDump> {
    let (m, readout, expert) = match model {
        TrainedModel::Standard(esn) => (&esn.matrices, &esn.readout, None),
        TrainedModel::Hybrid(h) => (&h.matrices, &h.readout, Some((h.expert.params().clone(), h.expert.dt()))),
        TrainedModel::Ode(_) => return None,
    };
    Some(ModelDump {
        internal: m.internal.to_dense(),
        input: m.input.to_dense(),
        readout: readout.weights().clone(),
        expert,
    })
}

fn from_dump(dump: ModelDump, config: ReservoirConfig) -> CliResult<TrainedModel> {
    let matrices = ReservoirMatrices::new(
        SparseMatrix::from_dense(&dump.internal)?,
        InputMatrix::from_dense(&dump.input)?,
    )?;
    let readout = Readout::new(dump.readout)?;
    let config = ReservoirConfig {
        size: matrices.size(),
        ..config
    };
    Ok(match dump.expert {
        None => TrainedModel::Standard(EchoStateNetwork {
            config,
            matrices,
            readout,
        }),
        Some((params, dt)) => TrainedModel::Hybrid(HybridReservoir {
            config,
            expert: ExpertModel::new(params, dt)?,
            matrices,
            readout,
        }),
    })
}

pub fn train(args: &TrainArgs) -> CliResult {
    if args.kind == ModelKind::Ode {
        return Err(CliError::Usage("the ode arm has no trained weights; use --kind standard or hybrid".into()));
    }
    let cfg = ExperimentConfig::load_or_default(args.config.as_deref())?;
    let (seed, _) = cfg.resolve_seed(args.seed)?;
    let regime = cfg.parse_regime(&args.regime)?;
    let manifest = cfg.manifest(seed);
    if args.instantiation >= manifest.n_instantiations {
        return Err(CliError::Usage(format!(
            "instantiation {} out of range (n_instantiations = {})",
            args.instantiation, manifest.n_instantiations
        )));
    }
    let truth = truth_for(&manifest, regime, args.realization)?;
    let model = TrainedModel::build(args.kind, &manifest, &truth, &cfg.model, 0, args.instantiation)?;
    let dump = to_dump(&model).expect("reservoir arm");
    let mut w = create(&args.out)?;
    write_dump(&mut w, &dump)?;
    w.flush().map_err(|e| CliError::Failed(e.to_string()))?;
    println!(
        "trained {} reservoir ({} nodes, {} features) on {} samples; wrote {}",
        args.kind,
        dump.internal.nrows(),
        dump.readout.ncols(),
        truth.segments.training.ncols(),
        args.out.display()
    );
    Ok(())
}

pub struct ForecastArgs {
    pub config: Option<PathBuf>,
    pub model: PathBuf,
    pub regime: String,
    pub realization: usize,
    pub span: usize,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

pub fn forecast(args: &ForecastArgs) -> CliResult {
    let cfg = ExperimentConfig::load_or_default(args.config.as_deref())?;
    let (seed, _) = cfg.resolve_seed(args.seed)?;
    let regime = cfg.parse_regime(&args.regime)?;
    let manifest = cfg.manifest(seed);
    let layout = manifest.layout;
    if args.span >= layout.n_tests {
        return Err(CliError::Usage(format!(
            "span {} out of range (n_tests = {})",
            args.span, layout.n_tests
        )));
    }
    let file = File::open(&args.model)
        .map_err(|e| CliError::Failed(format!("cannot open {}: {e}", args.model.display())))?;
    let dump = read_dump(&mut BufReader::new(file))?;
    let model = from_dump(dump, cfg.model.reservoir)?;
    let truth = truth_for(&manifest, regime, args.realization)?;
    let (warmup, test) = &truth.segments.spans[args.span];
    let (pred, failure) = model.forecast(warmup, test.ncols());

    let mut w = create(&args.out)?;
    write_forecast_csv(&mut w, &pred, layout.test_start(args.span), layout.dt)
        .map_err(|e| CliError::Failed(e.to_string()))?;
    let (nmse, vt) = score_forecast(&pred, test, layout.dt, manifest.epsilon)?;
    println!(
        "{} forecast of {} span {}: {} steps, mean NMSE {nmse:.6}, valid time {vt:.1} s",
        model.kind(),
        regime,
        args.span,
        pred.ncols()
    );
    match failure {
        Some(e) => Err(CliError::Partial(format!("forecast stopped early: {e}"))),
        None => Ok(()),
    }
}

/// `t, x_1, y_1, ...` with `t` the absolute time of each predicted sample.
fn write_forecast_csv<W: Write>(w: &mut W, pred: &Matrix, first_step: usize, dt: f64) -> std::io::Result<()> {
    let mut header = String::from("t");
    for i in 1..=pred.nrows() / 2 {
        header.push_str(&format!(",x_{i},y_{i}"));
    }
    writeln!(w, "{header}")?;
    for (k, col) in pred.column_iter().enumerate() {
        write!(w, "{:.16e}", (first_step + k) as f64 * dt)?;
        for v in col.iter() {
            write!(w, ",{v:.16e}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub struct RunArgs {
    pub config: PathBuf,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Serialize)]
struct GroundTruthEntry {
    regime: RegimeName,
    realization: usize,
    fingerprint: String,
}

#[derive(Serialize)]
struct PointTiming {
    point: String,
    seconds: f64,
}

#[derive(Serialize)]
struct FailureEntry {
    point: String,
    regime: Option<RegimeName>,
    message: String,
}

/// Run log written next to the CSVs as `manifest.json`.
#[derive(Serialize)]
struct RunLog {
    tool: &'static str,
    version: &'static str,
    schema_version: u32,
    command: &'static str,
    master_seed: u64,
    seed_source: &'static str,
    threads: usize,
    manifest: RunManifest,
    config: ExperimentConfig,
    ground_truth: Vec<GroundTruthEntry>,
    points: Vec<PointTiming>,
    failed_points: Vec<FailureEntry>,
    forecast_failures: Vec<String>,
    total_seconds: f64,
}

type Runner = dyn Fn(&RunManifest, &ExperimentConfig, &Path, &mut dyn FnMut(&str)) -> hybrid_esn::Result<SweepOutcome>;

fn run_experiment(
    command: &'static str,
    args: &RunArgs,
    manifest_of: fn(&ExperimentConfig, u64) -> CliResult<RunManifest>,
    runner: &Runner,
) -> CliResult {
    let cfg = ExperimentConfig::load(&args.config)?;
    install_thread_pool(args.threads.or(cfg.threads))?;
    let (seed, source) = cfg.resolve_seed(args.seed)?;
    let manifest = manifest_of(&cfg, seed)?;
    let out_dir = args.out.clone().unwrap_or_else(|| cfg.output_dir.clone());

    let start = Instant::now();
    let mut marks: Vec<(String, Instant)> = Vec::new();
    let mut progress = |msg: &str| {
        eprintln!("[{:>8.1} s] {command} {msg}", start.elapsed().as_secs_f64());
        marks.push((msg.split(": ").nth(1).unwrap_or(msg).to_owned(), Instant::now()));
    };
    let outcome = runner(&manifest, &cfg, &out_dir, &mut progress)?;
    let end = Instant::now();
    let points = marks
        .iter()
        .enumerate()
        .map(|(i, (name, t))| PointTiming {
            point: name.clone(),
            seconds: marks.get(i + 1).map_or(end, |m| m.1).duration_since(*t).as_secs_f64(),
        })
        .collect();

    let log = RunLog {
        tool: "hybrid-esn",
        version: env!("CARGO_PKG_VERSION"),
        schema_version: SCHEMA_VERSION,
        command,
        master_seed: seed,
        seed_source: source,
        threads: rayon::current_num_threads(),
        manifest: manifest.clone(),
        config: cfg.clone(),
        ground_truth: outcome
            .ground_truth
            .iter()
            .map(|&(regime, realization, fp)| GroundTruthEntry {
                regime,
                realization,
                fingerprint: format!("{fp:016x}"),
            })
            .collect(),
        points,
        failed_points: outcome
            .failed_points
            .iter()
            .map(|f| FailureEntry {
                point: f.point.clone(),
                regime: f.regime,
                message: f.message.clone(),
            })
            .collect(),
        forecast_failures: outcome.forecast_failures.clone(),
        total_seconds: start.elapsed().as_secs_f64(),
    };
    fs::create_dir_all(&out_dir).map_err(|e| CliError::Failed(format!("{}: {e}", out_dir.display())))?;
    write_json(&out_dir.join("manifest.json"), &log)?;

    println!(
        "{command}: {} records, {} summary rows, {} failed points, {} early-stopped forecasts -> {}",
        outcome.records.len(),
        outcome.summary.len(),
        outcome.failed_points.len(),
        outcome.forecast_failures.len(),
        out_dir.display()
    );
    if outcome.is_complete() {
        Ok(())
    } else {
        for f in &outcome.failed_points {
            eprintln!(
                "failed point {}{}: {}",
                f.point,
                f.regime.map(|r| format!(" ({r})")).unwrap_or_default(),
                f.message
            );
        }
        Err(CliError::Partial(format!(
            "{} of the sweep points did not complete; completed points were kept",
            outcome.failed_points.len()
        )))
    }
}

pub fn sweep(args: &RunArgs) -> CliResult {
    run_experiment(
        "sweep",
        args,
        |cfg, seed| {
            let Some(spec) = &cfg.sweep else {
                return Err(CliError::Usage("config has no \"sweep\" section".into()));
            };
            let extra = spec.extrapolated(cfg.task, &cfg.model);
            if !extra.is_empty() {
                eprintln!(
                    "note: {} values {extra:?} lie outside the published range; treated as extrapolation",
                    spec.parameter
                );
            }
            Ok(cfg.manifest(seed))
        },
        &|m, cfg, dir, p| run_sweep(m, &cfg.model, cfg.sweep.as_ref().expect("checked"), &cfg.arms, Some(dir), p),
    )
}

pub fn grid(args: &RunArgs) -> CliResult {
    run_experiment(
        "grid",
        args,
        |cfg, seed| {
            if cfg.task != Task::ResidualPhysics {
                return Err(CliError::Usage(format!(
                    "grid search runs on the residual_physics task, config has {}",
                    cfg.task
                )));
            }
            let m = cfg.grid_manifest(seed);
            if let Some(r) = m.regimes.iter().find(|r| !GRID_REGIMES.contains(r)) {
                let valid: Vec<_> = GRID_REGIMES.iter().map(|r| r.as_str()).collect();
                return Err(CliError::Usage(format!(
                    "regime {r} is not part of the grid search; valid regimes: {}",
                    valid.join(", ")
                )));
            }
            Ok(m)
        },
        &|m, cfg, dir, p| run_grid_search(m, &cfg.model, Some(dir), p),
    )
}

pub fn print_config(path: Option<&Path>) -> CliResult {
    println!("{}", ExperimentConfig::load_or_default(path)?.to_json());
    Ok(())
}

pub struct ReportArgs {
    pub inputs: Vec<PathBuf>,
    pub out: Option<PathBuf>,
    pub plot: bool,
}

fn is_metric_file(path: &Path) -> CliResult<bool> {
    let f = File::open(path).map_err(|e| CliError::Failed(format!("cannot open {}: {e}", path.display())))?;
    let mut first = String::new();
    BufReader::new(f)
        .read_line(&mut first)
        .map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
    Ok(first.trim_end() == METRIC_HEADER)
}

fn metric_files(inputs: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| CliError::Failed(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == "csv"))
                .collect();
            files.sort();
            for f in files {
                if is_metric_file(&f)? {
                    out.push(f);
                }
            }
        } else if p.is_file() {
            if !is_metric_file(p)? {
                return Err(CliError::Usage(format!("{} is not a metric record file", p.display())));
            }
            out.push(p.clone());
        } else {
            return Err(CliError::Usage(format!("input {} does not exist", p.display())));
        }
    }
    Ok(out)
}

pub fn report(args: &ReportArgs) -> CliResult {
    if args.inputs.is_empty() {
        return Err(CliError::Usage("report needs at least one --in path".into()));
    }
    let files = metric_files(&args.inputs)?;
    let mut records: Vec<MetricRecord> = Vec::new();
    for f in &files {
        let file = File::open(f).map_err(|e| CliError::Failed(format!("cannot open {}: {e}", f.display())))?;
        records.extend(read_metrics_csv(BufReader::new(file)).map_err(|e| CliError::Failed(format!("{}: {e}", f.display())))?);
    }
    if records.is_empty() {
        return Err(CliError::Usage("no metric records found in the input".into()));
    }
    let summary = aggregate_report(&records)?;
    let out_dir = match &args.out {
        Some(d) => d.clone(),
        None if args.inputs[0].is_dir() => args.inputs[0].clone(),
        None => args.inputs[0].parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let path = out_dir.join("summary.csv");
    let mut w = create(&path)?;
    write_summary_csv(&mut w, &summary)?;
    w.flush().map_err(|e| CliError::Failed(e.to_string()))?;
    println!(
        "{} records from {} files -> {} summary rows in {}",
        records.len(),
        files.len(),
        summary.len(),
        path.display()
    );
    if args.plot {
        let written = write_plots(&summary, &out_dir.join("plots"))?;
        println!("wrote {written} plots to {}", out_dir.join("plots").display());
    }
    Ok(())
}

/// One SVG per (task, regime, swept parameter) and metric.
fn write_plots(summary: &[SummaryRow], dir: &Path) -> CliResult<usize> {
    let mut groups: Vec<((Task, RegimeName, String), Vec<&SummaryRow>)> = Vec::new();
    for r in summary {
        let key = (r.key.task, r.key.regime, r.key.param_name.clone());
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => g.1.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    let mut n = 0;
    for ((task, regime, param), rows) in &groups {
        for metric in Metric::ALL {
            let svg = plot::render(&format!("{task} / {regime}"), param, rows, metric);
            let path = dir.join(format!("{task}_{regime}_{param}_{}.svg", metric.file_suffix()));
            let mut w = create(&path)?;
            w.write_all(svg.as_bytes())
                .and_then(|_| w.flush())
                .map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
            n += 1;
        }
    }
    Ok(n)
}
