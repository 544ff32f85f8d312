//! Acceptance suite. Prints one PASS/FAIL line per criterion. Set
//! `ACCEPTANCE_STRICT=1` to exit non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use hybrid_esn::dynamics::{
    integrate_phase_step, integrate_step, phases_to_components, IntegratorConfig, KuramotoParams,
    Model, PhaseVector, RegimeName, Task,
};
use hybrid_esn::evaluation::{
    mean_nmse, nmse_series, valid_time, valid_time_from_series, ForecastResult, ModelKind,
    SpanLayout,
};
use hybrid_esn::experiments::{
    run_grid_search, run_sweep, ExperimentParams, RunManifest, SummaryRow, SweepOutcome,
    SweepParameter, SweepSpec,
};
use hybrid_esn::reservoir::{train_readout, StateHistory};
use hybrid_esn::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

const MASTER_SEED: u64 = 20240611;

fn desk_manifest(task: Task, regimes: Vec<RegimeName>) -> RunManifest {
    RunManifest {
        regimes,
        n_instantiations: 8,
        n_realizations: 1,
        layout: SpanLayout {
            n_tests: 5,
            ..SpanLayout::default()
        },
        ..RunManifest::new(task, MASTER_SEED)
    }
}

fn row<'a>(rows: &'a [SummaryRow], regime: RegimeName, model: ModelKind, value: f64) -> &'a SummaryRow {
    rows.iter()
        .find(|r| r.key.regime == regime && r.key.model == model && r.key.param_value == value)
        .unwrap_or_else(|| panic!("no summary row for {regime} {model} {value}"))
}

fn sweep(
    task: Task,
    regime: RegimeName,
    parameter: SweepParameter,
    values: Vec<f64>,
    arms: &[ModelKind],
    out: Option<&Path>,
) -> SweepOutcome {
    let spec = SweepSpec { parameter, values };
    run_sweep(
        &desk_manifest(task, vec![regime]),
        &ExperimentParams::default(),
        &spec,
        arms,
        out,
        &mut |_| {},
    )
    .expect("sweep runs")
}

/// Gaussian elimination with partial pivoting on the normal equations.
fn brute_force_ridge(phi: &Matrix, y: &Matrix, beta: f64) -> Matrix {
    let d = phi.nrows();
    let mut c = Matrix::zeros(y.nrows(), d);
    for out_row in 0..y.nrows() {
        let mut a = vec![vec![0.0; d + 1]; d];
        for i in 0..d {
            for j in 0..d {
                a[i][j] = (0..phi.ncols()).map(|t| phi[(i, t)] * phi[(j, t)]).sum::<f64>();
            }
            a[i][i] += beta;
            a[i][d] = (0..phi.ncols()).map(|t| phi[(i, t)] * y[(out_row, t)]).sum::<f64>();
        }
        for col in 0..d {
            let piv = (col..d).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).unwrap();
            a.swap(col, piv);
            for r in col + 1..d {
                let f = a[r][col] / a[col][col];
                for k in col..=d {
                    a[r][k] -= f * a[col][k];
                }
            }
        }
        for i in (0..d).rev() {
            let s: f64 = (i + 1..d).map(|k| a[i][k] * c[(out_row, k)]).sum();
            c[(out_row, i)] = (a[i][d] - s) / a[i][i];
        }
    }
    c
}

fn criterion_1() -> (bool, String) {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let d_feat = rng.random_range(1..=32);
        let n_t = rng.random_range(d_feat..=100);
        let d_u = rng.random_range(1..=10);
        let beta = 10f64.powf(rng.random_range(-6.0..0.0));
        let phi = Matrix::from_fn(d_feat, n_t, |_, _| rng.random_range(-1.0..1.0));
        let y = Matrix::from_fn(d_u, n_t, |_, _| rng.random_range(-1.0..1.0));
        let c = train_readout(&StateHistory::new(phi.clone()).unwrap(), &y, beta).unwrap();
        let oracle = brute_force_ridge(&phi, &y, beta);
        worst = worst.max((c.weights() - &oracle).norm() / oracle.norm());
    }
    (worst < 1e-8, format!("max relative deviation {worst:.2e} over 50 instances"))
}

fn random_kuramoto(rng: &mut ChaCha20Rng) -> (Model, PhaseVector) {
    let omega = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
    let k = rng.random_range(0.5..4.0);
    let theta = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
    (
        Model::Standard(KuramotoParams::new(omega, k).unwrap()),
        PhaseVector::new(theta).unwrap(),
    )
}

fn criterion_2() -> (bool, String) {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let mut ratios = Vec::new();
    let mut worst_rep: f64 = 0.0;
    for _ in 0..10 {
        let (model, theta) = random_kuramoto(&mut rng);
        let u0 = phases_to_components(&theta);
        let run = |substeps: usize| {
            let cfg = IntegratorConfig {
                dt: 2.0,
                substeps_per_sample: substeps,
            };
            integrate_step(&u0, &model, &cfg, 2.0).unwrap().into_inner()
        };
        let reference = run(2560);
        let errs: Vec<f64> = [10, 20, 40]
            .iter()
            .map(|&s| {
                run(s)
                    .iter()
                    .zip(&reference)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        ratios.push(errs[0] / errs[1]);
        ratios.push(errs[1] / errs[2]);

        let cfg = IntegratorConfig::default();
        let c = integrate_step(&u0, &model, &cfg, 10.0).unwrap();
        let p = phases_to_components(&integrate_phase_step(&theta, &model, &cfg, 10.0).unwrap());
        for (a, b) in c.as_slice().iter().zip(p.as_slice()) {
            worst_rep = worst_rep.max((a - b).abs());
        }
    }
    let ok_order = ratios.iter().all(|r| (8.0..=32.0).contains(r));
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    (
        ok_order && worst_rep < 1e-6,
        format!("halving ratios in [{lo:.2}, {hi:.2}]; component vs phase form max deviation {worst_rep:.2e} over 10 s"),
    )
}

fn criterion_3() -> (bool, String) {
    let n = 5;
    let truth = Matrix::from_fn(2 * n, 50, |i, t| {
        let th = 0.21 * t as f64 * (i / 2 + 1) as f64;
        if i % 2 == 0 {
            th.cos()
        } else {
            th.sin()
        }
    });
    let denom_err = {
        let probe = ForecastResult::new(Matrix::zeros(2 * n, 50), truth.clone(), 0.1).unwrap();
        // Zero prediction: NMSE(t) = ||u*(t)|| / denominator = sqrt(N) / denominator.
        nmse_series(&probe)
            .unwrap()
            .iter()
            .map(|v| (v - 1.0).abs())
            .fold(0.0, f64::max)
    };
    let anti = ForecastResult::new(-&truth, truth.clone(), 0.1).unwrap();
    let anti_ok = nmse_series(&anti).unwrap().iter().all(|v| (v - 2.0).abs() < 1e-12)
        && (mean_nmse(&anti).unwrap() - 2.0).abs() < 1e-12;
    let perfect = ForecastResult::new(truth.clone(), truth.clone(), 0.1).unwrap();
    let vt_ok = (valid_time_from_series(&[0.1, 0.2, 0.5, 0.3], 0.1, 0.4).unwrap() - 0.2).abs() < 1e-12
        && valid_time_from_series(&[0.41], 0.1, 0.4).unwrap() == 0.0
        && (valid_time(&perfect, 0.4).unwrap() - 5.0).abs() < 1e-12
        && (valid_time_from_series(&vec![0.0; 2500], 0.1, 0.4).unwrap() - 250.0).abs() < 1e-9;
    (
        denom_err < 1e-9 && anti_ok && vt_ok,
        format!("denominator deviation {denom_err:.1e}, antipodal ok = {anti_ok}, valid-time cases ok = {vt_ok}"),
    )
}

fn criteria_4_5(rho_sweep: &SweepOutcome) -> [(bool, String); 2] {
    let s = &rho_sweep.summary;
    let sync = RegimeName::Synchrony;
    let h = row(s, sync, ModelKind::Hybrid, 0.4).mean_nmse_mean;
    let st = row(s, sync, ModelKind::Standard, 0.4).mean_nmse_mean;
    let ode = row(s, sync, ModelKind::Ode, 0.4).mean_nmse_mean;
    let c4 = (
        h < 0.05 && h < st && h < ode,
        format!("mean-of-mean NMSE hybrid {h:.4}, standard {st:.4}, ode {ode:.4}"),
    );
    let st2 = row(s, sync, ModelKind::Standard, 2.0).mean_nmse_mean;
    let h2 = row(s, sync, ModelKind::Hybrid, 2.0).mean_nmse_mean;
    let c5 = (
        st2 >= 5.0 * st && (h2 - h) < (st2 - st),
        format!(
            "standard {st:.4} -> {st2:.4} (x{:.1}); hybrid {h:.4} -> {h2:.4}",
            st2 / st
        ),
    );
    [c4, c5]
}

fn criterion_6() -> (bool, String) {
    let out = sweep(
        Task::ResidualPhysics,
        RegimeName::Asynchrony,
        SweepParameter::SpectralRadius,
        vec![0.4],
        &[ModelKind::Standard, ModelKind::Hybrid],
        None,
    );
    let st = row(&out.summary, RegimeName::Asynchrony, ModelKind::Standard, 0.4).valid_time_mean;
    let h = row(&out.summary, RegimeName::Asynchrony, ModelKind::Hybrid, 0.4).valid_time_mean;
    (st < 1.0 && h < 1.0, format!("mean valid time standard {st:.3} s, hybrid {h:.3} s"))
}

fn criteria_7_8() -> [(bool, String); 2] {
    let m = desk_manifest(
        Task::ResidualPhysics,
        vec![RegimeName::Synchrony, RegimeName::HeteroclinicCycles],
    );
    let out = run_grid_search(&m, &ExperimentParams::default(), None, &mut |_| {}).expect("grid runs");
    let max_over = |model| {
        out.summary
            .iter()
            .filter(|r| r.key.regime == RegimeName::HeteroclinicCycles && r.key.model == model)
            .map(|r| r.valid_time_max)
            .fold(0.0, f64::max)
    };
    let hm = max_over(ModelKind::Hybrid);
    let sm = max_over(ModelKind::Standard);
    let c7 = (
        sm > 0.0 && hm / sm > 1.1,
        format!("max valid time hybrid {hm:.3} s, standard {sm:.3} s (ratio {:.3})", hm / sm),
    );
    let a_st = row(&out.summary, RegimeName::Synchrony, ModelKind::Standard, 0.0).valid_time_mean;
    let a_h = row(&out.summary, RegimeName::Synchrony, ModelKind::Hybrid, 0.0).valid_time_mean;
    let c8 = (
        a_st >= 200.0 && a_h >= 200.0 && a_h >= 240.0,
        format!("grid point A mean valid time standard {a_st:.1} s, hybrid {a_h:.1} s"),
    );
    [c7, c8]
}

/// Width in decades of the set of values reaching half of the best mean valid time.
fn good_range(rows: &[SummaryRow], model: ModelKind, betas: &[f64]) -> (f64, Vec<f64>) {
    let vt: Vec<f64> = betas
        .iter()
        .map(|&b| row(rows, RegimeName::HeteroclinicCycles, model, b).valid_time_mean)
        .collect();
    let best = vt.iter().copied().fold(0.0, f64::max);
    let good: Vec<f64> = betas
        .iter()
        .zip(&vt)
        .filter(|(_, &v)| best > 0.0 && v >= 0.5 * best)
        .map(|(&b, _)| b)
        .collect();
    let width = match (good.first(), good.last()) {
        (Some(lo), Some(hi)) => (hi / lo).log10(),
        _ => 0.0,
    };
    (width, vt)
}

fn criterion_9() -> (bool, String) {
    let betas = vec![1e-8, 1e-6, 1e-4, 1e-2, 0.5];
    let out = sweep(
        Task::ResidualPhysics,
        RegimeName::HeteroclinicCycles,
        SweepParameter::Regularization,
        betas.clone(),
        &[ModelKind::Standard, ModelKind::Hybrid],
        None,
    );
    let (hw, hv) = good_range(&out.summary, ModelKind::Hybrid, &betas);
    let (sw, sv) = good_range(&out.summary, ModelKind::Standard, &betas);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join("/");
    (
        hw >= sw,
        format!(
            "half-max range hybrid {hw:.2} decades (valid times {}), standard {sw:.2} decades ({})",
            fmt(&hv),
            fmt(&sv)
        ),
    )
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().unwrap().is_file())
        .map(|e| {
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn criterion_10() -> (bool, String) {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in [1usize, 4] {
        let dir = tmp.path().join(format!("t{threads}"));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            sweep(
                Task::ParameterError,
                RegimeName::Synchrony,
                SweepParameter::SpectralRadius,
                vec![0.4, 2.0],
                &ModelKind::ALL,
                Some(&dir),
            )
        });
        let m = RunManifest {
            n_instantiations: 3,
            layout: SpanLayout {
                n_tests: 2,
                ..SpanLayout::default()
            },
            ..desk_manifest(Task::ResidualPhysics, vec![RegimeName::HeteroclinicCycles])
        };
        let grid_dir = dir.join("grid");
        pool.install(|| run_grid_search(&m, &ExperimentParams::default(), Some(&grid_dir), &mut |_| {}))
            .unwrap();
        let mut files = read_dir_bytes(&dir);
        for (k, v) in read_dir_bytes(&grid_dir) {
            files.insert(format!("grid/{k}"), v);
        }
        outputs.push(files);
    }
    let same = outputs[0] == outputs[1];
    (
        same && outputs[0].len() >= 13,
        format!("{} CSV files compared between 1 and 4 threads, identical = {same}", outputs[0].len()),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, (bool, String), f64)> = Vec::new();
    let mut timed = |id: usize, name: &'static str, f: &mut dyn FnMut() -> (bool, String)| {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        println!(
            "{} criterion {id} ({name}): {} [{secs:.1} s]",
            if r.0 { "PASS" } else { "FAIL" },
            r.1
        );
        results.push((id, name, r, secs));
    };

    timed(1, "ridge oracle", &mut criterion_1);
    timed(2, "integrator oracle", &mut criterion_2);
    timed(3, "metric fidelity", &mut criterion_3);

    let t = Instant::now();
    let rho = sweep(
        Task::ParameterError,
        RegimeName::Synchrony,
        SweepParameter::SpectralRadius,
        vec![0.4, 2.0],
        &ModelKind::ALL,
        None,
    );
    let shared = t.elapsed().as_secs_f64();
    let [c4, c5] = criteria_4_5(&rho);
    let mut c4 = Some(c4);
    let mut c5 = Some(c5);
    timed(4, "parameter error synchrony", &mut || c4.take().unwrap());
    timed(5, "spectral radius failure mode", &mut || c5.take().unwrap());
    println!("  (criteria 4 and 5 share one spectral radius sweep: {shared:.1} s)");

    timed(6, "residual physics asynchrony", &mut criterion_6);
    let t = Instant::now();
    let [c7, c8] = criteria_7_8();
    let shared = t.elapsed().as_secs_f64();
    let mut c7 = Some(c7);
    let mut c8 = Some(c8);
    timed(7, "heteroclinic grid maximum", &mut || c7.take().unwrap());
    timed(8, "synchrony grid point A", &mut || c8.take().unwrap());
    println!("  (criteria 7 and 8 share one grid search: {shared:.1} s)");
    timed(9, "regularization robustness", &mut criterion_9);
    timed(10, "determinism across thread counts", &mut criterion_10);

    let failed: Vec<usize> = results.iter().filter(|r| !r.2 .0).map(|r| r.0).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        results.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" (criteria {failed:?})")
        }
    );
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && !failed.is_empty() {
        std::process::exit(1);
    }
}
