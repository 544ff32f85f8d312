use std::f64::consts::PI;

use hybrid_esn::dynamics::{
    biharmonic_rhs, component_rhs, generate_trajectory, integrate_step, kuramoto_rhs, phases_to_components,
    BiHarmonicParams, ComponentVector, IntegratorConfig, KuramotoParams, Model, PhaseVector, RegimeName,
    RegimeSpec, Task,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn phases(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-PI..PI, n)
}

fn kuramoto(n: usize) -> impl Strategy<Value = KuramotoParams> {
    (proptest::collection::vec(-2.0f64..2.0, n), 0.0f64..6.0)
        .prop_map(|(omega, k)| KuramotoParams::new(omega, k).unwrap())
}

fn biharmonic(n: usize) -> impl Strategy<Value = BiHarmonicParams> {
    (kuramoto(n), -2.0 * PI..2.0 * PI, -PI..PI, 0.0f64..1.0)
        .prop_map(|(base, g1, g2, a)| BiHarmonicParams::new(base, g1, g2, a).unwrap())
}

fn sized<T: std::fmt::Debug, S: Strategy<Value = T>>(f: fn(usize) -> S) -> impl Strategy<Value = (Vec<f64>, T)> {
    (1usize..12).prop_flat_map(move |n| (phases(n), f(n)))
}

proptest! {
    #[test]
    fn coupling_is_antisymmetric((theta, p) in sized(kuramoto)) {
        let d = kuramoto_rhs(&PhaseVector::new(theta).unwrap(), &p).unwrap();
        let drift: f64 = d.iter().sum::<f64>() - p.omega.iter().sum::<f64>();
        prop_assert!(drift.abs() <= 1e-12 * (1.0 + p.coupling * p.n_oscillators() as f64), "drift {drift}");
    }

    #[test]
    fn component_field_is_tangent_standard((theta, p) in sized(kuramoto)) {
        let u = phases_to_components(&PhaseVector::new(theta).unwrap());
        let d = component_rhs(&u, &Model::Standard(p)).unwrap();
        radial_is_zero(&u, &d)?;
    }

    #[test]
    fn component_field_is_tangent_biharmonic((theta, p) in sized(biharmonic)) {
        let u = phases_to_components(&PhaseVector::new(theta).unwrap());
        let d = component_rhs(&u, &Model::BiHarmonic(p)).unwrap();
        radial_is_zero(&u, &d)?;
    }

    #[test]
    fn biharmonic_reduces_to_standard((theta, p) in sized(kuramoto), gamma2 in -PI..PI) {
        let theta = PhaseVector::new(theta).unwrap();
        let bi = BiHarmonicParams::new(p.clone(), 0.0, gamma2, 0.0).unwrap();
        let a = kuramoto_rhs(&theta, &p).unwrap();
        let b = biharmonic_rhs(&theta, &bi).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-15);
        }
    }

    #[test]
    fn trajectories_are_deterministic(seed in any::<u64>(), residual in any::<bool>(), which in 0usize..3) {
        let task = if residual { Task::ResidualPhysics } else { Task::ParameterError };
        let spec = RegimeSpec::new(task, task.regimes()[which]).unwrap();
        let cfg = IntegratorConfig::default();
        let a = generate_trajectory(&spec, &cfg, 40, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
        let b = generate_trajectory(&spec, &cfg, 40, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
        let bits = |m: &hybrid_esn::Matrix| m.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a.samples), bits(&b.samples));
        prop_assert_eq!(a.model, b.model);
    }
}

fn radial_is_zero(u: &ComponentVector, d: &[f64]) -> Result<(), TestCaseError> {
    for (xy, dd) in u.as_slice().chunks_exact(2).zip(d.chunks_exact(2)) {
        let radial = xy[0] * dd[0] + xy[1] * dd[1];
        prop_assert!(radial.abs() <= 1e-12, "radial {radial}");
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rk4_global_error_is_fourth_order(seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let omega = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let model = Model::Standard(KuramotoParams::new(omega, rng.random_range(0.0..4.0)).unwrap());
        let u = phases_to_components(&PhaseVector::new((0..5).map(|_| rng.random_range(-PI..PI)).collect()).unwrap());
        let cfg = |h: f64| IntegratorConfig { dt: h, substeps_per_sample: 1 };
        let reference = integrate_step(&u, &model, &cfg(0.00025), 1.0).unwrap();
        let err = |h: f64| {
            let v = integrate_step(&u, &model, &cfg(h), 1.0).unwrap();
            v.as_slice().iter().zip(reference.as_slice()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        };
        let e: Vec<f64> = [0.01, 0.005, 0.0025].iter().map(|&h| err(h)).collect();
        for w in e.windows(2) {
            let ratio = w[0] / w[1];
            prop_assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}, errors {e:?}");
        }
    }
}

#[test]
fn regimes_listed_for_each_task() {
    assert_eq!(Task::ParameterError.regimes().len(), 3);
    assert!(Task::ResidualPhysics.regimes().contains(&RegimeName::HeteroclinicCycles));
}
