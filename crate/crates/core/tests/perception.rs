use monoland::optics::{ColorBand, LandmarkObservation, LandmarkView, Occlusion};
use monoland::perception::*;
use monoland::scene::{RelativePose, Scene};
use nalgebra::{Vector2, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

const PROBE_HULL: PoseSampler = PoseSampler::Uniform {
    depth: [1.0, 20.0],
    altitude: [0.5, 10.0],
    bearing_deg: [-35.0, 35.0],
};

fn fit(noise: &NoiseModel, n: usize, seed: u64) -> EstimatorModel {
    let scene = Scene::default();
    let samples = collect_training_set(&scene, &PoseSampler::default(), noise, n, seed).unwrap();
    fit_estimators(&samples, &scene.camera, scene.landmark.offset_from_pad, &FitOptions::default()).unwrap()
}

fn noiseless_model() -> &'static EstimatorModel {
    static M: OnceLock<EstimatorModel> = OnceLock::new();
    M.get_or_init(|| fit(&NoiseModel::noiseless(), 20_000, 7))
}

fn view() -> LandmarkObservation {
    LandmarkObservation::visible(LandmarkView {
        apparent_diameter_px: 40.0,
        viewing_angle: 0.3,
        color_band: ColorBand::B,
        ellipse_ratio: 0.3f64.cos(),
        centroid_px: Vector2::new(480.0, 300.0),
    })
}

fn std_dev(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

#[test]
fn corrupt_identity_and_dropout() {
    let lm = Scene::default().landmark;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        assert_eq!(corrupt(&view(), &NoiseModel::noiseless(), &lm, &mut rng), view());
    }
    let always = NoiseModel {
        dropout_prob: 1.0,
        ..NoiseModel::noiseless()
    };
    for _ in 0..100 {
        let o = corrupt(&view(), &always, &lm, &mut rng);
        assert!(!o.is_visible());
        assert_eq!(o.occlusion, Some(Occlusion::Dropout));
    }
}

#[test]
fn diameter_noise_has_requested_spread() {
    let lm = Scene::default().landmark;
    let nm = NoiseModel {
        sigma_diameter_px: 1.0,
        ..NoiseModel::noiseless()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let d: Vec<f64> = (0..10_000)
        .map(|_| corrupt(&view(), &nm, &lm, &mut rng).view.unwrap().apparent_diameter_px)
        .collect();
    let s = std_dev(&d);
    assert!((s - 1.0).abs() <= 0.05, "std {s}");
}

#[test]
fn corrupt_is_deterministic_given_rng_state() {
    let lm = Scene::default().landmark;
    let nm = NoiseModel::nominal();
    let run = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..200).map(|_| corrupt(&view(), &nm, &lm, &mut rng)).collect::<Vec<_>>()
    };
    assert_eq!(run(5), run(5));
}

#[test]
fn single_zero_noise_sample_matches_projection() {
    let scene = Scene::default();
    let pose = RelativePose {
        altitude: scene.landmark.height,
        depth: 10.0,
        lateral: 0.0,
    };
    let s = collect_training_set(&scene, &PoseSampler::Fixed(vec![pose]), &NoiseModel::noiseless(), 1, 0).unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!(Some(s[0].view), scene.observe(&drone_at(&scene, &pose, 0.0)).view);
}

#[test]
fn blind_region_poses_are_resampled() {
    let scene = Scene::default();
    let blind = RelativePose {
        altitude: 3.0,
        depth: 0.2,
        lateral: 0.0,
    };
    let seen = RelativePose {
        altitude: 1.0,
        depth: 12.0,
        lateral: 0.0,
    };
    let s = collect_training_set(&scene, &PoseSampler::Fixed(vec![blind, seen]), &NoiseModel::noiseless(), 4, 0)
        .unwrap();
    assert!(s.iter().all(|x| (x.truth.depth - 12.0).abs() < 1e-9));
    assert!(matches!(
        collect_training_set(&scene, &PoseSampler::Fixed(vec![blind]), &NoiseModel::noiseless(), 1, 0),
        Err(PerceptionError::NoVisiblePose(_))
    ));
}

#[test]
fn dataset_is_deterministic() {
    let scene = Scene::default();
    let a = collect_training_set(&scene, &PoseSampler::default(), &NoiseModel::nominal(), 10_000, 4).unwrap();
    let b = collect_training_set(&scene, &PoseSampler::default(), &NoiseModel::nominal(), 10_000, 4).unwrap();
    assert_eq!(a, b);
}

#[test]
fn single_pose_is_insufficient() {
    let scene = Scene::default();
    let pose = RelativePose {
        altitude: 2.0,
        depth: 8.0,
        lateral: 0.0,
    };
    let s = collect_training_set(&scene, &PoseSampler::Fixed(vec![pose]), &NoiseModel::noiseless(), 100, 0).unwrap();
    let r = fit_estimators(&s, &scene.camera, 1.0, &FitOptions::default());
    assert!(matches!(r, Err(PerceptionError::InsufficientData(_))));
    let few = &s[..10];
    assert!(matches!(
        fit_estimators(few, &scene.camera, 1.0, &FitOptions::default()),
        Err(PerceptionError::InsufficientData(_))
    ));
}

#[test]
fn model_bytes_are_deterministic_and_roundtrip() {
    let a = fit(&NoiseModel::nominal(), 3000, 21);
    let b = fit(&NoiseModel::nominal(), 3000, 21);
    assert_eq!(a.to_bytes(), b.to_bytes());
    assert_eq!(&a.to_bytes()[..4], b"LLEM");
    let back = EstimatorModel::from_bytes(&a.to_bytes()).unwrap();
    assert_eq!(back.to_bytes(), a.to_bytes());
}

#[test]
fn round_trip_inside_training_hull() {
    let scene = Scene::default();
    let m = noiseless_model();
    assert!(m.fit_residual_rms <= 0.02, "altitude rms {}", m.fit_residual_rms);
    let probes = collect_training_set(&scene, &PROBE_HULL, &NoiseModel::noiseless(), 1000, 12345).unwrap();
    let within = probes
        .iter()
        .filter(|p| (m.measure(&p.view).altitude - p.truth.altitude).abs() <= 3.0 * m.fit_residual_rms)
        .count();
    assert!(within >= 990, "{within}/1000 within 3x rms");
}

#[test]
fn altitude_bias_has_no_sign_flip_along_range() {
    let scene = Scene::default();
    let m = noiseless_model();
    let probes = collect_training_set(&scene, &PROBE_HULL, &NoiseModel::noiseless(), 1000, 777).unwrap();
    let mut bins = [(0.0, 0usize); 4];
    for p in &probes {
        let k = (((p.truth.depth - 1.0) / 19.0 * 4.0) as usize).min(3);
        bins[k].0 += m.measure(&p.view).altitude - p.truth.altitude;
        bins[k].1 += 1;
    }
    let bias: Vec<f64> = bins.iter().map(|(s, n)| s / *n as f64).collect();
    // Bias per range quartile stays inside the noise floor of the fit.
    for b in &bias {
        assert!(b.abs() <= m.fit_residual_rms, "{bias:?}");
    }
}

#[test]
fn noisy_fit_stays_accurate_at_ten_metres() {
    let noisy = NoiseModel {
        sigma_diameter_px: 2.0,
        seed: 1,
        ..NoiseModel::noiseless()
    };
    let scene = Scene::default();
    let m = fit(&noisy, 20_000, 7);
    assert!(m.fit_residual_rms > noiseless_model().fit_residual_rms);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut sq = 0.0;
    let n = 1000;
    for _ in 0..n {
        let pose = RelativePose {
            altitude: rng.random_range(0.5..3.0),
            depth: 10.0 - scene.landmark.offset_from_pad,
            lateral: rng.random_range(-1.0..1.0),
        };
        let obs = scene.observe(&drone_at(&scene, &pose, 0.0));
        sq += (m.measure(&obs.view.unwrap()).altitude - pose.altitude).powi(2);
    }
    let rms = (sq / n as f64).sqrt();
    assert!(rms <= 0.15, "rms {rms}");
}

#[test]
fn head_on_estimate_example() {
    let scene = Scene::default();
    let pose = RelativePose {
        altitude: 2.0,
        depth: 10.0,
        lateral: 0.0,
    };
    let obs = scene.observe(&drone_at(&scene, &pose, 0.0));
    let e = estimate(&obs, noiseless_model(), None, &Vector3::zeros(), 0.05).unwrap();
    assert!((e.altitude - 2.0).abs() <= 0.05 && (e.depth - 10.0).abs() <= 0.25, "{e:?}");
    assert_eq!((e.confidence, e.stale_for), (1.0, 0.0));
}

#[test]
fn invisible_without_prior() {
    let hidden = LandmarkObservation::hidden(Occlusion::BelowFrame);
    assert_eq!(
        estimate(&hidden, noiseless_model(), None, &Vector3::zeros(), 0.05),
        Err(PerceptionError::NoPriorEstimate)
    );
}

#[test]
fn dead_reckoning_example() {
    let scene = Scene::default();
    let pose = RelativePose {
        altitude: 1.5,
        depth: 5.0,
        lateral: 0.3,
    };
    let obs = scene.observe(&drone_at(&scene, &pose, 0.0));
    let v = Vector3::new(0.5, -0.2, -0.3);
    let first = estimate(&obs, noiseless_model(), None, &v, 0.05).unwrap();
    let hidden = LandmarkObservation::hidden(Occlusion::BelowFrame);
    let mut e = first;
    for _ in 0..4 {
        e = estimate(&hidden, noiseless_model(), Some(&e), &v, 0.05).unwrap();
    }
    assert!((e.depth - (first.depth - 0.5 * 0.2)).abs() < 1e-12);
    assert!((e.lateral_offset - (first.lateral_offset - 0.2 * 0.2)).abs() < 1e-12);
    assert!((e.altitude - (first.altitude - 0.3 * 0.2)).abs() < 1e-12);
    assert!((e.confidence - 0.8).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dead_reckoning_is_continuous(
        alt in 0.8..3.0f64, depth in 3.0..15.0f64, vx in -1.0..1.0f64, vy in -1.0..1.0f64, vz in -1.0..1.0f64,
        gap in 1usize..30,
    ) {
        let scene = Scene::default();
        let obs = scene.observe(&drone_at(&scene, &RelativePose { altitude: alt, depth, lateral: 0.0 }, 0.0));
        prop_assume!(obs.is_visible());
        let v = Vector3::new(vx, vy, vz);
        let dt = 0.05;
        let mut e = estimate(&obs, noiseless_model(), None, &v, dt).unwrap();
        let hidden = LandmarkObservation::hidden(Occlusion::Dropout);
        for _ in 0..gap {
            let n = estimate(&hidden, noiseless_model(), Some(&e), &v, dt).unwrap();
            let jump = Vector3::new(n.depth - e.depth, n.lateral_offset - e.lateral_offset, n.altitude - e.altitude);
            prop_assert!(jump.norm() <= v.norm() * dt + 1e-12);
            prop_assert!(n.confidence <= e.confidence);
            prop_assert!(n.stale_for <= STALENESS_HORIZON || n.confidence == 0.0);
            e = n;
        }
    }
}
