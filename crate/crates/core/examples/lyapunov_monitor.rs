//! Steps the co-simulation by hand and watches the Lyapunov function and the
//! stiffness of the explicit update, step by step.

use slam_observer::harness::simulate;
use slam_observer::observer::{correction_stiffness, landmark_errors, lyapunov_value};
use slam_observer::scenario::reference_scenario;

fn main() {
    let mut config = reference_scenario();
    config.duration = 10.0;

    let mut prev = f64::INFINITY;
    let mut worst_rise = f64::NEG_INFINITY;
    let mut peak_stiffness: f64 = 0.0;
    simulate(&config, |v| {
        let e = landmark_errors(v.estimate, v.frame)?;
        let lyap = lyapunov_value(v.estimate, &e, &config.bias, &config.gains)?;
        let stiffness = correction_stiffness(v.estimate, v.frame, &config.gains)?;
        peak_stiffness = peak_stiffness.max(stiffness);
        if prev.is_finite() {
            worst_rise = worst_rise.max(lyap - prev);
        }
        prev = lyap;
        if v.k % 20_000 == 0 {
            println!("t = {:>5.2}  V = {lyap:>12.5e}  stiffness = {stiffness:>9.1} 1/s", v.t);
        }
        Ok(())
    })
    .expect("stable at the default step");

    println!("largest one-step rise of V: {worst_rise:.3e}");
    println!(
        "peak stiffness {peak_stiffness:.0} 1/s -> explicit update needs dt < {:.2e} s (using {:.0e})",
        2.0 / peak_stiffness,
        config.dt
    );
}
