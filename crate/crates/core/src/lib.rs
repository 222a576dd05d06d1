//! Fast-adaptation nonlinear observer for simultaneous localization and
//! mapping on the matrix Lie group SLAM_n(3).
//!
//! The observer estimates a vehicle's attitude and position together with
//! the positions of `n ≥ 3` fixed landmarks, using body-frame landmark
//! measurements and biased angular / translational velocity readings. The
//! velocity biases are estimated online.
//!
//! - [`lie`]: SO(3)/SE(3) maps (hat, vee, wedge, exponentials, distance, projection).
//! - [`world`]: ground-truth kinematics and the sensor model.
//! - [`observer`]: the observer update and its truth-aware diagnostics.
//! - [`scenario`]: scenario configuration, TOML format, the built-in reference scenario.
//! - [`harness`]: co-simulation, CSV metrics and parameter sweeps.
//!
//! ```no_run
//! use slam_observer::{harness, scenario};
//!
//! let config = scenario::reference_scenario();
//! let records = harness::run(&config).unwrap();
//! let last = records.last().unwrap();
//! println!("max |e_i| at t = {}: {}", last.t, last.max_e());
//! ```

pub mod error;
pub mod harness;
pub mod lie;
pub mod observer;
pub mod scenario;
pub mod world;

pub use error::{ConfigError, LieError, ObserverError, RunError, WorldError};
pub use harness::{run, simulate, sweep, MetricsRecord, SweepAxis};
pub use lie::{Pose, Rotation3, SkewMatrix3, Twist};
pub use observer::{observer_step, GainConfig, ObserverState};
pub use scenario::{load_scenario, ScenarioConfig};
pub use world::{NoiseSpec, SensorBias, SensorFrame, TrueState};
