//! Tour of the SO(3)/SE(3) helpers: hat/vee, exponentials, distance and
//! re-orthonormalization.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Vector3};
use slam_observer::lie::{hat3, project_orthonormal, rotation_distance, se3_exp, so3_exp, wedge6, Twist};

fn main() {
    let phi = Vector3::new(0.0, 0.0, FRAC_PI_2);
    let k = hat3(&phi);
    println!("[phi]x ={:.3}", k.matrix());
    println!("vee([phi]x) = {:?}", k.vee().as_slice());

    let r = so3_exp(&phi);
    println!("exp quarter turn about z ={:.3}", r.matrix());
    println!("distance to identity: {:.3}", rotation_distance(&r));
    println!("distance of a half turn: {:.3}", rotation_distance(&so3_exp(&Vector3::new(PI, 0.0, 0.0))));

    // Quarter turn while moving forward: the vehicle ends up on an arc.
    let u = Twist::new(phi, Vector3::x());
    println!("wedge(u) ={:.3}", wedge6(&u));
    let pose = se3_exp(&u, 1.0);
    println!("exp(wedge(u)) position: {:.5?}", pose.position.as_slice());

    // Re-orthonormalize a slightly corrupted rotation.
    let noisy = r.matrix() + Matrix3::new(1e-4, 0.0, 2e-4, 0.0, -1e-4, 0.0, 3e-5, 0.0, 0.0);
    let fixed = project_orthonormal(&noisy).expect("close to a rotation");
    println!(
        "projection: |RRt - I| {:.1e} -> {:.1e}",
        (noisy * noisy.transpose() - Matrix3::identity()).norm(),
        fixed.orthonormality_error()
    );
}
