//! Loads a scenario from TOML (default: scenarios/survey_noisy.toml), runs
//! it and reports how well pose and map were recovered.

use slam_observer::harness::run;
use slam_observer::scenario::{load_scenario, to_toml};

fn main() {
    let default = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/survey_noisy.toml");
    let source = std::env::args().nth(1).unwrap_or_else(|| default.to_string());
    let mut config = match load_scenario(&source) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{source}: {e}");
            std::process::exit(1);
        }
    };
    // Keep the demo quick.
    config.duration = config.duration.min(8.0);

    println!(
        "{} landmarks, {} twist knots, {} steps",
        config.landmarks.len(),
        config.twist_profile.knots().len(),
        config.step_count()
    );
    let records = run(&config).unwrap();
    let last = records.last().unwrap();
    println!("t = {}: max|e| {:.3e}, |P~| {:.3}, R~ distance {:.2e}", last.t, last.max_e(), last.p_tilde_norm, last.r_tilde_dist);
    for (i, (e, p)) in last.e_norm.iter().zip(&last.p_err).enumerate() {
        println!("  landmark {}: |e| {e:.3e}  |p - p^| {p:.3}", i + 1);
    }

    println!("\nround-tripped config:\n{}", to_toml(&config));
}
