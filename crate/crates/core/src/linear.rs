//! Amplitude recovery at a fixed fundamental and residual diagnostics.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::criterion::{compute_moments, invert_gram, joint_gram};
use crate::error::{domain, Error, Result};
use crate::signal::harmonic_sum;
use crate::spectrum::check_harmonic_range;

/// How the least squares amplitudes are solved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeSolve {
    /// One `2p × 2p` system over all harmonics; the exact least squares fit.
    #[default]
    Joint,
    /// Independent `2 × 2` systems per harmonic, ignoring cross terms.
    PerHarmonic,
}

/// Least squares amplitudes `(A_j, B_j)` at `lambda` from the joint fit.
pub fn lse_linear(y: &[f64], lambda: f64, p: usize) -> Result<Vec<(f64, f64)>> {
    lse_linear_with(y, lambda, p, AmplitudeSolve::Joint)
}

pub fn lse_linear_with(
    y: &[f64],
    lambda: f64,
    p: usize,
    solve: AmplitudeSolve,
) -> Result<Vec<(f64, f64)>> {
    if p == 0 {
        return domain("at least one harmonic is required");
    }
    check_harmonic_range(lambda, p)?;
    match solve {
        AmplitudeSolve::Joint => {
            let (m_xx, v_xy) = joint_gram(y, p, lambda)?;
            let coef = invert_gram(&m_xx, y.len(), lambda)? * v_xy;
            Ok(coef
                .as_slice()
                .chunks_exact(2)
                .map(|c| (c[0], c[1]))
                .collect())
        }
        AmplitudeSolve::PerHarmonic => (1..=p)
            .map(|j| {
                let m = compute_moments(y, j, lambda)?;
                let coef: Vector2<f64> = m.m_xx_inverse()? * m.v_xy;
                Ok((coef[0], coef[1]))
            })
            .collect(),
    }
}

/// Approximate least squares amplitudes `(2/n) Σ y(t) (cos, sin)(jλt)`.
pub fn alse_linear(y: &[f64], lambda: f64, p: usize) -> Result<Vec<(f64, f64)>> {
    if p == 0 {
        return domain("at least one harmonic is required");
    }
    check_harmonic_range(lambda, p)?;
    if y.is_empty() {
        return domain("empty signal");
    }
    let scale = 2.0 / y.len() as f64;
    Ok((1..=p)
        .map(|j| {
            let omega = j as f64 * lambda;
            let (c, s) = y.iter().enumerate().fold((0.0, 0.0), |(c, s), (i, &v)| {
                let (sn, cs) = (omega * (i + 1) as f64).sin_cos();
                (c + v * cs, s + v * sn)
            });
            (scale * c, scale * s)
        })
        .collect())
}

/// `y(t)` minus the fitted harmonic sum.
pub fn residuals(y: &[f64], lambda: f64, amplitudes: &[(f64, f64)]) -> Vec<f64> {
    y.iter()
        .enumerate()
        .map(|(i, &v)| v - harmonic_sum(lambda, amplitudes, i + 1))
        .collect()
}

/// Sample autocorrelations `r_0..=r_max_lag` with the biased (divide by n)
/// autocovariance.
pub fn sample_acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if max_lag >= n {
        return domain(format!(
            "max_lag {max_lag} must be below the series length {n}"
        ));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0: f64 = centered.iter().map(|x| x * x).sum();
    let scale = series.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if c0 <= (f64::EPSILON * scale).powi(2) * n as f64 {
        return Err(Error::UndefinedAcf);
    }
    Ok((0..=max_lag)
        .map(|k| {
            centered
                .iter()
                .zip(&centered[k..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / c0
        })
        .collect())
}
