//! The observer update is explicit and stiff: too large a step makes it blow
//! up even though the continuous-time observer converges.

use slam_observer::harness::simulate;
use slam_observer::observer::{correction_stiffness, landmark_errors};
use slam_observer::scenario::reference_scenario;
use slam_observer::RunError;

fn main() {
    let base = reference_scenario();
    let mut initial = 0.0;
    simulate(&base, |v| {
        if v.k == 0 {
            initial = correction_stiffness(v.estimate, v.frame, &base.gains)?;
        }
        Ok(())
    })
    .ok();
    println!("initial stiffness {initial:.0} 1/s -> dt < {:.2e} s at t = 0\n", 2.0 / initial);

    for dt in [1e-3, 1e-4, 5e-5, 2.5e-5] {
        let mut config = base.clone();
        config.dt = dt;
        config.duration = 10.0;
        let mut last_e = 0.0;
        let outcome = simulate(&config, |v| {
            let e = landmark_errors(v.estimate, v.frame)?;
            last_e = e.iter().map(|x| x.norm()).fold(0.0, f64::max);
            Ok(())
        });
        match outcome {
            Ok(()) => println!("dt = {dt:.1e}: max|e| at 10 s = {last_e:.3e}"),
            Err(RunError::Aborted { step, source }) => {
                println!("dt = {dt:.1e}: diverged at t = {:.3} s ({source})", step as f64 * dt)
            }
            Err(e) => println!("dt = {dt:.1e}: {e}"),
        }
    }
}
