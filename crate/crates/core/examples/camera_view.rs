//! What the front camera sees of the lenticular landmark along a straight
//! approach, including where it drops out of frame near the pad.

use monoland::optics::{blind_region_boundary, project_landmark};
use monoland::scene::{RelativePose, Scene};

fn main() {
    let scene = Scene::default();
    for altitude in [1.0, 2.5, 5.0] {
        let r = blind_region_boundary(&scene.camera, &scene.landmark, altitude).expect("above the landmark");
        println!("altitude {altitude} m: landmark below frame within {r:.2} m of it");
    }
    println!("\n depth  alt   D1 px   theta deg  band  ratio  status");
    for (depth, altitude) in [(15.0, 2.5), (10.0, 2.5), (5.0, 2.0), (3.0, 1.5), (1.0, 1.0), (0.0, 0.3), (0.0, 2.0)] {
        let pose = RelativePose {
            altitude,
            depth,
            lateral: 0.0,
        };
        let drone = monoland::perception::drone_at(&scene, &pose, 0.0);
        let obs = project_landmark(&drone, &scene.camera, &scene.landmark, &scene.pad);
        match obs.view {
            Some(v) => println!(
                "{depth:6.1} {altitude:4.1} {:7.2} {:10.2}  {:?}    {:5.3}  visible",
                v.apparent_diameter_px,
                v.viewing_angle.to_degrees(),
                v.color_band,
                v.ellipse_ratio
            ),
            None => println!("{depth:6.1} {altitude:4.1}       -          -    -        -  {:?}", obs.occlusion.unwrap()),
        }
    }
}
