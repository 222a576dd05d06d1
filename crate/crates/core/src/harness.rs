//! Co-simulation of the true vehicle and the observer, metric recording and
//! parameter sweeps.
//!
//! Each step `k` senses the truth at `t = k·dt`, hands the pre-update state to
//! the caller (metrics are recorded here), then advances the observer and the
//! truth. Everything is deterministic given the configuration, including the
//! noise seed.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{ConfigError, ObserverError, RunError};
use crate::lie::rotation_distance;
use crate::observer::{bias_error, landmark_errors, lyapunov_value, observer_step, pose_error, ObserverState};
use crate::scenario::ScenarioConfig;
use crate::world::{sense, true_step, SensorFrame, TrueState};

/// `max‖eᵢ‖` below which a run counts as settled.
pub const SETTLING_THRESHOLD: f64 = 0.05;
/// How long the threshold must hold, in seconds.
pub const SETTLING_WINDOW: f64 = 1.0;

/// Everything visible at one step, before the update.
#[derive(Debug)]
pub struct StepView<'a> {
    pub k: usize,
    pub t: f64,
    pub truth: &'a TrueState,
    pub estimate: &'a ObserverState,
    pub frame: &'a SensorFrame,
}

/// Owned copy of a [`StepView`], for saved traces.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSample {
    pub k: usize,
    pub t: f64,
    pub truth: TrueState,
    pub estimate: ObserverState,
    pub frame: SensorFrame,
}

impl StateSample {
    pub fn view(&self) -> StepView<'_> {
        StepView {
            k: self.k,
            t: self.t,
            truth: &self.truth,
            estimate: &self.estimate,
            frame: &self.frame,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub t: f64,
    /// `‖eᵢ‖` per landmark.
    pub e_norm: Vec<f64>,
    /// `‖pᵢ − p̂ᵢ‖` per landmark.
    pub p_err: Vec<f64>,
    pub r_tilde_dist: f64,
    pub p_tilde_norm: f64,
    pub b_omega_tilde_norm: f64,
    pub b_v_tilde_norm: f64,
    pub lyapunov: f64,
}

impl MetricsRecord {
    pub fn max_e(&self) -> f64 {
        self.e_norm.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_p_err(&self) -> f64 {
        self.p_err.iter().copied().fold(0.0, f64::max)
    }
}

/// Runs the co-simulation, calling `visit` once per step (including the final
/// state at `k = step_count`).
pub fn simulate<F>(config: &ScenarioConfig, mut visit: F) -> Result<(), RunError>
where
    F: FnMut(&StepView<'_>) -> Result<(), ObserverError>,
{
    let steps = config.step_count();
    let dt = config.dt;
    let mut truth = config.initial_truth();
    let mut estimate = config.initial_estimates.clone();
    let mut rng = config.noise.source();
    for k in 0..=steps {
        let t = k as f64 * dt;
        let u = config.twist_profile.at(t);
        let frame = sense(&truth, &config.bias, &config.noise, &u, t, &mut rng);
        let view = StepView {
            k,
            t,
            truth: &truth,
            estimate: &estimate,
            frame: &frame,
        };
        visit(&view).map_err(|source| RunError::Aborted { step: k, source })?;
        if k == steps {
            break;
        }
        estimate = observer_step(&estimate, &frame, &config.gains, dt)
            .map_err(|source| RunError::Aborted { step: k, source })?;
        truth = true_step(truth, &u, dt);
    }
    Ok(())
}

/// Metrics for one step. A pure function of the step's state.
pub fn metrics_at(config: &ScenarioConfig, view: &StepView<'_>) -> Result<MetricsRecord, ObserverError> {
    let errors = landmark_errors(view.estimate, view.frame)?;
    let e_norm = errors.iter().map(Vector3::norm).collect();
    let p_err = view
        .truth
        .landmarks
        .iter()
        .zip(&view.estimate.landmarks_hat)
        .map(|(p, p_hat)| (p - p_hat).norm())
        .collect();
    let pose = pose_error(view.estimate, view.truth);
    let bias = bias_error(view.estimate, &config.bias);
    Ok(MetricsRecord {
        t: view.t,
        e_norm,
        p_err,
        r_tilde_dist: rotation_distance(&pose.r_tilde),
        p_tilde_norm: pose.p_tilde.norm(),
        b_omega_tilde_norm: bias.b_omega_tilde.norm(),
        b_v_tilde_norm: bias.b_v_tilde.norm(),
        lyapunov: lyapunov_value(view.estimate, &errors, &config.bias, &config.gains)?,
    })
}

/// Runs a scenario and returns one record every `config.stride` steps.
pub fn run(config: &ScenarioConfig) -> Result<Vec<MetricsRecord>, RunError> {
    let mut records = Vec::with_capacity(config.step_count() / config.stride + 1);
    simulate(config, |view| {
        if view.k % config.stride == 0 {
            records.push(metrics_at(config, view)?);
        }
        Ok(())
    })?;
    Ok(records)
}

/// Like [`run`] but keeps the raw states instead of metrics.
pub fn run_trace(config: &ScenarioConfig) -> Result<Vec<StateSample>, RunError> {
    let mut samples = Vec::new();
    simulate(config, |view| {
        if view.k % config.stride == 0 {
            samples.push(StateSample {
                k: view.k,
                t: view.t,
                truth: view.truth.clone(),
                estimate: view.estimate.clone(),
                frame: view.frame.clone(),
            });
        }
        Ok(())
    })?;
    Ok(samples)
}

/// Recomputes metrics from a saved trace.
pub fn metrics_from_trace(config: &ScenarioConfig, trace: &[StateSample]) -> Result<Vec<MetricsRecord>, ObserverError> {
    trace.iter().map(|s| metrics_at(config, &s.view())).collect()
}

/// Writes `t,e1..en,perr1..perrn,rtilde,ptilde,bomega,bv,lyap` CSV.
pub fn write_csv<W: Write>(mut w: W, records: &[MetricsRecord]) -> io::Result<()> {
    let n = records.first().map_or(0, |r| r.e_norm.len());
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("e{i}")));
    header.extend((1..=n).map(|i| format!("perr{i}")));
    header.extend(["rtilde", "ptilde", "bomega", "bv", "lyap"].map(String::from));
    writeln!(w, "{}", header.join(","))?;
    for r in records {
        let cells: Vec<String> = std::iter::once(r.t)
            .chain(r.e_norm.iter().copied())
            .chain(r.p_err.iter().copied())
            .chain([r.r_tilde_dist, r.p_tilde_norm, r.b_omega_tilde_norm, r.b_v_tilde_norm, r.lyapunov])
            .map(|x| x.to_string())
            .collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn csv_string(records: &[MetricsRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, records).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}

/// First time after which `max‖eᵢ‖ < threshold` holds for a full `window`.
/// `None` if that never happens within the recorded series.
pub fn settling_time(records: &[MetricsRecord], threshold: f64, window: f64) -> Option<f64> {
    let end = records.last()?.t;
    let tol = 1e-9 * window.max(1.0);
    let mut next_violation = f64::INFINITY;
    let mut settled = None;
    for r in records.iter().rev() {
        if r.max_e() >= threshold {
            next_violation = r.t;
            continue;
        }
        if r.t + window <= end + tol && next_violation > r.t + window - tol {
            settled = Some(r.t);
        }
    }
    settled
}

/// Parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    KP,
    KW,
    GammaScale,
    AlphaScale,
    SigmaOmega,
    SigmaV,
    SigmaY,
    Dt,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 8] = [
        SweepAxis::KP,
        SweepAxis::KW,
        SweepAxis::GammaScale,
        SweepAxis::AlphaScale,
        SweepAxis::SigmaOmega,
        SweepAxis::SigmaV,
        SweepAxis::SigmaY,
        SweepAxis::Dt,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::KP => "k_p",
            SweepAxis::KW => "k_w",
            SweepAxis::GammaScale => "gamma_scale",
            SweepAxis::AlphaScale => "alpha_scale",
            SweepAxis::SigmaOmega => "sigma_omega",
            SweepAxis::SigmaV => "sigma_v",
            SweepAxis::SigmaY => "sigma_y",
            SweepAxis::Dt => "dt",
        }
    }

    /// Returns `base` with this axis set to `value`. Scale axes multiply.
    pub fn apply(&self, base: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut c = base.clone();
        match self {
            SweepAxis::KP => c.gains.k_p = value,
            SweepAxis::KW => c.gains.k_w = value,
            SweepAxis::GammaScale => c.gains.gamma *= value,
            SweepAxis::AlphaScale => c.gains.alpha.iter_mut().for_each(|a| *a *= value),
            SweepAxis::SigmaOmega => c.noise.sigma_omega = value,
            SweepAxis::SigmaV => c.noise.sigma_v = value,
            SweepAxis::SigmaY => c.noise.sigma_y = value,
            SweepAxis::Dt => c.dt = value,
        }
        c
    }
}

impl FromStr for SweepAxis {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| ConfigError::UnknownAxis(s.to_string()))
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Summary of one sweep run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub settling_time: Option<f64>,
    pub final_max_e: f64,
    pub final_max_p_err: f64,
    pub final_lyapunov: f64,
    /// Step at which the run aborted, if it did.
    pub aborted_at: Option<usize>,
}

/// One run per value, executed in parallel; rows come back in input order.
pub fn sweep(base: &ScenarioConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>, ConfigError> {
    let configs: Vec<ScenarioConfig> = values.iter().map(|v| axis.apply(base, *v)).collect();
    for (c, v) in configs.iter().zip(values) {
        c.validate()
            .map_err(|e| ConfigError::Invalid(format!("{axis} = {v}: {e}")))?;
    }
    Ok(configs
        .par_iter()
        .zip(values.par_iter())
        .map(|(c, value)| summarize(c, *value))
        .collect())
}

fn summarize(config: &ScenarioConfig, value: f64) -> SweepRow {
    let mut records = Vec::new();
    let outcome = simulate(config, |view| {
        if view.k % config.stride == 0 {
            records.push(metrics_at(config, view)?);
        }
        Ok(())
    });
    let aborted_at = match outcome {
        Ok(()) => None,
        Err(RunError::Aborted { step, .. }) => Some(step),
        Err(RunError::Io(_)) => unreachable!("simulation performs no I/O"),
    };
    let last = records.last();
    SweepRow {
        value,
        settling_time: if aborted_at.is_none() {
            settling_time(&records, SETTLING_THRESHOLD, SETTLING_WINDOW)
        } else {
            None
        },
        final_max_e: last.map_or(f64::NAN, MetricsRecord::max_e),
        final_max_p_err: last.map_or(f64::NAN, MetricsRecord::max_p_err),
        final_lyapunov: last.map_or(f64::NAN, |r| r.lyapunov),
        aborted_at,
    }
}

/// Sweep summary as CSV, one row per value.
pub fn write_sweep_csv<W: Write>(mut w: W, axis: SweepAxis, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "{axis},settling_time,final_max_e,final_max_perr,final_lyap,aborted_at")?;
    for r in rows {
        let settle = r.settling_time.map_or_else(String::new, |t| t.to_string());
        let abort = r.aborted_at.map_or_else(String::new, |k| k.to_string());
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.value, settle, r.final_max_e, r.final_max_p_err, r.final_lyapunov, abort
        )?;
    }
    Ok(())
}
