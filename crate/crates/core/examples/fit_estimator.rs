//! Fits the altitude and depth tables from self-labeled simulator samples
//! and checks them on a few held-out poses, with and without sensor noise.

use monoland::perception::*;
use monoland::scene::{RelativePose, Scene};

fn main() -> Result<(), PerceptionError> {
    let scene = Scene::default();
    for (label, noise) in [("noiseless", NoiseModel::noiseless()), ("nominal noise", NoiseModel::nominal())] {
        let samples = collect_training_set(&scene, &PoseSampler::default(), &noise, 20_000, 7)?;
        let model = fit_estimators(&samples, &scene.camera, scene.landmark.offset_from_pad, &FitOptions::default())?;
        println!(
            "{label}: {} samples, altitude rms {:.2e} m, depth rms {:.2e} m, {} bytes",
            model.training_sample_count,
            model.fit_residual_rms,
            model.depth_residual_rms,
            model.to_bytes().len()
        );
        for (depth, altitude, lateral) in [(12.0, 3.0, 1.0), (6.0, 1.2, -0.8), (2.5, 0.8, 0.0)] {
            let pose = RelativePose {
                altitude,
                depth,
                lateral,
            };
            let view = scene.observe(&drone_at(&scene, &pose, 0.0)).view.expect("visible pose");
            let e = model.measure(&view);
            println!(
                "  truth (alt {altitude:.2}, depth {depth:.2}, lat {lateral:.2})  estimate (alt {:.3}, depth {:.3}, lat {:.3})",
                e.altitude, e.depth, e.lateral_offset
            );
        }
    }
    Ok(())
}
