//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion, with
//! indented notes underneath; exits non-zero if any criterion fails.
//!
//! Notes marked `(stable dt)` repeat a check at the default step size. They
//! are informational and never change the verdict.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{expm_taylor, linear_fit};
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slam_observer::harness::{csv_string, run, simulate};
use slam_observer::lie::{hat3, se3_exp, so3_exp, vee3, wedge6, Twist};
use slam_observer::observer::{
    bias_error, error_geometry, error_rate, landmark_errors, lyapunov_value, pose_error, ObserverState,
};
use slam_observer::scenario::{reference_scenario, ScenarioConfig};
use slam_observer::world::SensorFrame;
use slam_observer::RunError;

const E_THRESHOLD: f64 = 0.05;
const P_THRESHOLD: f64 = 0.1;
const RUNTIME_LIMIT: Duration = Duration::from_secs(10);
const SETTLE_STEP_TOL: f64 = 1e-6;

struct Report {
    failed: usize,
}

impl Report {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed += 1;
        }
    }

    fn note(&self, text: String) {
        println!("       {text}");
    }
}

/// Everything the run-based criteria look at, recorded every step.
struct Trajectory {
    dt: f64,
    t: Vec<f64>,
    max_e: Vec<f64>,
    max_p_err: Vec<f64>,
    lyapunov: Vec<f64>,
    bias_sq: Vec<f64>,
    weighted_e: Vec<f64>,
    r_tilde: Vec<Matrix3<f64>>,
    p_tilde: Vec<Vector3<f64>>,
    aborted_at: Option<usize>,
    elapsed: Duration,
}

impl Trajectory {
    fn record(c: &ScenarioConfig) -> Self {
        let mut tr = Trajectory {
            dt: c.dt,
            t: Vec::new(),
            max_e: Vec::new(),
            max_p_err: Vec::new(),
            lyapunov: Vec::new(),
            bias_sq: Vec::new(),
            weighted_e: Vec::new(),
            r_tilde: Vec::new(),
            p_tilde: Vec::new(),
            aborted_at: None,
            elapsed: Duration::ZERO,
        };
        let start = Instant::now();
        let result = simulate(c, |v| {
            let e = landmark_errors(v.estimate, v.frame)?;
            tr.t.push(v.t);
            tr.max_e.push(e.iter().map(|x| x.norm()).fold(0.0, f64::max));
            tr.weighted_e
                .push(e.iter().zip(&c.gains.alpha).map(|(x, a)| x.norm_squared() / a).sum());
            tr.max_p_err.push(
                v.truth
                    .landmarks
                    .iter()
                    .zip(&v.estimate.landmarks_hat)
                    .map(|(p, q)| (p - q).norm())
                    .fold(0.0, f64::max),
            );
            tr.lyapunov.push(lyapunov_value(v.estimate, &e, &c.bias, &c.gains)?);
            let b = bias_error(v.estimate, &c.bias);
            tr.bias_sq.push(b.b_omega_tilde.norm_squared() + b.b_v_tilde.norm_squared());
            let pe = pose_error(v.estimate, v.truth);
            tr.r_tilde.push(*pe.r_tilde.matrix());
            tr.p_tilde.push(pe.p_tilde);
            Ok(())
        });
        tr.elapsed = start.elapsed();
        match result {
            Ok(()) => {}
            Err(RunError::Aborted { step, .. }) => tr.aborted_at = Some(step),
            Err(e) => panic!("unexpected run failure: {e}"),
        }
        tr
    }

    fn status(&self) -> String {
        match self.aborted_at {
            Some(k) => format!("diverged at step {k} (t = {:.3} s)", k as f64 * self.dt),
            None => "completed".into(),
        }
    }

    /// Largest single-step increase of V.
    fn worst_lyapunov_increase(&self) -> f64 {
        self.lyapunov.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }

    fn worst_bias_sq(&self) -> f64 {
        self.bias_sq.iter().copied().fold(0.0, f64::max)
    }

    /// Largest per-step change of (R̃, P̃) over the final 20% of the run.
    fn final_pose_drift(&self) -> (f64, f64) {
        let from = self.r_tilde.len() * 4 / 5;
        let dr = self.r_tilde[from..].windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max);
        let dp = self.p_tilde[from..].windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max);
        (dr, dp)
    }
}

fn reference(dt: f64) -> ScenarioConfig {
    let mut c = reference_scenario();
    c.dt = dt;
    c.duration = 30.0;
    c
}

fn convergence(report: &mut Report, literal: &Trajectory, stable: &Trajectory) {
    let finished = |tr: &Trajectory| tr.aborted_at.is_none() && tr.max_e.last().is_some_and(|x| x.is_finite());
    let e0 = literal.max_e[0];
    let ok = finished(literal)
        && *literal.max_e.last().unwrap() <= E_THRESHOLD
        && *literal.max_p_err.last().unwrap() <= P_THRESHOLD
        && literal.elapsed <= RUNTIME_LIMIT;
    report.check(
        "reference run convergence (dt = 1e-3, 30 s)",
        ok,
        format!(
            "max|e| {e0:.4} -> {:.3e} (need <= {E_THRESHOLD}), max|p - p^| {:.3e} (need <= {P_THRESHOLD}), {}, {:.2?}",
            literal.max_e.last().unwrap(),
            literal.max_p_err.last().unwrap(),
            literal.status(),
            literal.elapsed,
        ),
    );
    report.note(format!(
        "(stable dt {:.0e}) max|e| {e0:.4} -> {:.3e}, max|p - p^| {:.4}, {}, runtime {:.2?}",
        stable.dt,
        stable.max_e.last().unwrap(),
        stable.max_p_err.last().unwrap(),
        stable.status(),
        stable.elapsed,
    ));
}

fn lyapunov_descent(report: &mut Report, literal: &Trajectory, stable: &Trajectory) {
    let tol = |tr: &Trajectory| 1e-8 + 10.0 * tr.dt * tr.dt;
    let worst = literal.worst_lyapunov_increase();
    let ok = literal.aborted_at.is_none() && worst <= tol(literal);
    report.check(
        "Lyapunov descent along the reference run",
        ok,
        format!("largest step increase {worst:.3e} (tolerance {:.3e}), {}", tol(literal), literal.status()),
    );
    report.note(format!(
        "(stable dt {:.0e}) largest step increase {:.3e} (tolerance {:.3e}), V {:.4} -> {:.3e}",
        stable.dt,
        stable.worst_lyapunov_increase(),
        tol(stable),
        stable.lyapunov[0],
        stable.lyapunov.last().unwrap(),
    ));
}

fn exponential_regulation(report: &mut Report, stable: &Trajectory) {
    let (t, log_w): (Vec<f64>, Vec<f64>) = stable
        .t
        .iter()
        .zip(&stable.weighted_e)
        .filter(|(t, _)| **t <= 5.0 + 1e-12)
        .map(|(t, w)| (*t, w.ln()))
        .unzip();
    let (_, slope, r2) = linear_fit(&t, &log_w);
    let rate = -slope;
    report.check(
        "exponential regulation of sum |e_i|^2/alpha_i on [0, 5] s",
        rate > 0.0 && r2 >= 0.9,
        format!("rate {rate:.4} 1/s, R^2 {r2:.4} (dt {:.0e}, {} samples)", stable.dt, t.len()),
    );
}

fn psi_identity(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let k_p = reference_scenario().gains.k_p;
    let mut worst = 0.0f64;
    let mut trace_ok = true;
    for _ in 0..100_000 {
        let dir = loop {
            let d = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if d.norm() > 1e-6 {
                break d.normalize();
            }
        };
        let e = dir * rng.random_range(0.0..=100.0);
        let g = error_geometry(&e, k_p);
        let n2 = e.norm_squared();
        worst = worst.max((g.psi - k_p * (1.0 + n2) / 4.0).abs() / (1.0 + n2));
        let tr = g.r_e.trace();
        trace_ok &= (-1.0..=3.0).contains(&tr);
    }
    let at_zero = error_geometry(&Vector3::zeros(), k_p);
    let zero_exact = at_zero.psi == k_p / 4.0;
    report.check(
        "fast-adaptation gain identity (1e5 samples)",
        worst <= 1e-9 && zero_exact && trace_ok && at_zero.r_e.trace() == 3.0,
        format!(
            "max scaled deviation {worst:.3e}, psi(0) = {} (k_p/4 = {}), trace in [-1, 3]: {trace_ok}",
            at_zero.psi,
            k_p / 4.0
        ),
    );
}

fn lie_oracle(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut worst_so3 = 0.0f64;
    let mut worst_se3 = 0.0f64;
    let mut vee_exact = true;
    for _ in 0..10_000 {
        let dt = rng.random_range(1e-4..=1.0);
        let axis = loop {
            let a = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if a.norm() > 1e-3 {
                break a.normalize();
            }
        };
        let omega = axis * rng.random_range(0.0..=PI) / dt;
        let vel = Vector3::new(
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
        );
        let u = Twist::new(omega, vel);
        let phi = omega * dt;
        let h = hat3(&phi);
        vee_exact &= vee3(h.matrix()).unwrap() == phi;
        worst_so3 = worst_so3.max((so3_exp(&phi).matrix() - expm_taylor(h.matrix())).norm());
        let oracle = expm_taylor(&(wedge6(&u) * dt));
        worst_se3 = worst_se3.max((se3_exp(&u, dt).to_homogeneous() - oracle).norm());
    }

    // 1e5 chained steps of the reference scenario at its default step.
    let mut c = reference_scenario();
    c.duration = 100_000.0 * c.dt;
    let mut drift = 0.0f64;
    let mut steps = 0usize;
    simulate(&c, |v| {
        drift = drift
            .max(v.estimate.r_hat.orthonormality_error())
            .max(v.truth.pose.rotation.orthonormality_error());
        steps = v.k;
        Ok(())
    })
    .expect("reference scenario runs at its default step");

    report.check(
        "Lie-group maps vs Taylor oracle (1e4 twists)",
        worst_so3 <= 1e-10 && worst_se3 <= 1e-10 && vee_exact && drift <= 1e-9 && steps == 100_000,
        format!(
            "so3 {worst_so3:.2e}, se3 {worst_se3:.2e}, vee(hat) exact: {vee_exact}, orthonormality drift {drift:.2e} over {steps} steps"
        ),
    );
}

/// Largest `‖(eᵢ[k+1] − eᵢ[k])/dt − ėᵢ[k]‖` over the first `steps` steps.
fn error_rate_residual(dt: f64, steps: usize) -> f64 {
    let mut c = reference_scenario();
    c.dt = dt;
    c.duration = steps as f64 * dt;
    let mut samples: Vec<(ObserverState, SensorFrame)> = Vec::with_capacity(steps + 1);
    simulate(&c, |v| {
        samples.push((v.estimate.clone(), v.frame.clone()));
        Ok(())
    })
    .expect("short run stays finite");
    samples
        .windows(2)
        .map(|w| {
            let (s0, f0) = &w[0];
            let (s1, f1) = &w[1];
            let e0 = landmark_errors(s0, f0).unwrap();
            let e1 = landmark_errors(s1, f1).unwrap();
            let rhs = error_rate(s0, f0, &c.gains, &c.bias).unwrap();
            e0.iter()
                .zip(&e1)
                .zip(&rhs)
                .map(|((a, b), r)| ((b - a) / dt - r).norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// C is fitted on the dt run, so that run meets `≤ C·dt` by construction; what
/// shows first-order agreement is the residual halving along with dt.
fn error_dynamics(report: &mut Report) {
    let dt = 1e-4;
    let coarse = error_rate_residual(dt, 1000);
    let c_fit = coarse / dt;
    let fine = error_rate_residual(dt / 2.0, 2000);
    let ratio = fine / coarse;
    report.check(
        "finite differences of e follow the error dynamics (dt = 1e-4, 1000 steps)",
        coarse.is_finite() && (0.4..=0.6).contains(&ratio),
        format!("fitted C = {c_fit:.4e}; residual {coarse:.3e} at dt, {fine:.3e} at dt/2 (ratio {ratio:.3})"),
    );
}

fn bias_and_pose(report: &mut Report, literal: &Trajectory, stable: &Trajectory) {
    let gamma_max = reference_scenario().gains.gamma_max_eigenvalue();
    let bound = |tr: &Trajectory| 2.0 * gamma_max * tr.lyapunov[0] + 1e-6;
    let (dr, dp) = literal.final_pose_drift();
    let ok = literal.aborted_at.is_none()
        && literal.worst_bias_sq() <= bound(literal)
        && dr <= SETTLE_STEP_TOL
        && dp <= SETTLE_STEP_TOL;
    report.check(
        "bias boundedness and pose-error settling along the reference run",
        ok,
        format!(
            "max |b~|^2 {:.3e} (bound {:.3e}), final-20% step change R~ {dr:.2e}, P~ {dp:.2e}, {}",
            literal.worst_bias_sq(),
            bound(literal),
            literal.status(),
        ),
    );
    let (dr, dp) = stable.final_pose_drift();
    report.note(format!(
        "(stable dt {:.0e}) max |b~|^2 {:.3e} (bound {:.3e}), final-20% step change R~ {dr:.2e}, P~ {dp:.2e}",
        stable.dt,
        stable.worst_bias_sq(),
        bound(stable),
    ));
}

fn determinism(report: &mut Report) {
    let mut c = reference_scenario();
    c.duration = 5.0;
    c.noise.sigma_omega = 0.01;
    c.noise.sigma_v = 0.02;
    c.noise.sigma_y = 0.01;
    c.noise.seed = 42;
    let a = csv_string(&run(&c).unwrap());
    let b = csv_string(&run(&c).unwrap());
    report.check(
        "determinism (same config and seed)",
        a.as_bytes() == b.as_bytes(),
        format!("{} CSV bytes, identical: {}", a.len(), a == b),
    );
}

fn main() -> ExitCode {
    // libtest-style filtering: `cargo test foo` passes "foo" to every target.
    if std::env::args().skip(1).any(|a| !a.starts_with('-')) {
        return ExitCode::SUCCESS;
    }
    let mut report = Report { failed: 0 };
    let literal = Trajectory::record(&reference(1e-3));
    let stable = Trajectory::record(&reference(reference_scenario().dt));

    convergence(&mut report, &literal, &stable);
    lyapunov_descent(&mut report, &literal, &stable);
    exponential_regulation(&mut report, &stable);
    psi_identity(&mut report);
    lie_oracle(&mut report);
    error_dynamics(&mut report);
    bias_and_pose(&mut report, &literal, &stable);
    determinism(&mut report);

    println!("\n{} of 8 criteria failed", report.failed);
    if report.failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
