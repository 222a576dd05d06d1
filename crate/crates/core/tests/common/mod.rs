//! Test-only oracles, independent of the closed-form maps under test.
#![allow(dead_code)]

use nalgebra::SMatrix;

/// Number of Taylor terms in the matrix-exponential oracle.
pub const TAYLOR_TERMS: usize = 20;

/// Generic matrix exponential: 20-term Taylor series on `A / 2ˢ`, with `s`
/// chosen so the scaled matrix has Frobenius norm ≤ 0.5, then squared `s` times.
pub fn expm_taylor<const D: usize>(a: &SMatrix<f64, D, D>) -> SMatrix<f64, D, D> {
    let mut squarings = 0;
    let mut scaled = *a;
    while scaled.norm() > 0.5 {
        scaled /= 2.0;
        squarings += 1;
    }
    let identity = SMatrix::<f64, D, D>::identity();
    let mut term = identity;
    let mut sum = identity;
    for k in 1..TAYLOR_TERMS {
        term = term * scaled / k as f64;
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// Ordinary least squares `y ≈ a + b x`; returns `(a, b, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (intercept, slope, 1.0 - ss_res / ss_tot)
}
