//! Closed-form asymptotic variances of the frequency estimators.
//!
//! With `β* = Σ j²(A_j² + B_j²)`, `δ_G = Σ j²(A_j² + B_j²) c(j)` and `c(j)`
//! the noise transfer gain at `jλ`, the least squares estimator satisfies
//! `n^{3/2}(λ̂ − λ) → N(0, 24σ²δ_G/β*²)`. The reported variances are divided
//! by `n³`, so they compare directly with empirical variances at size `n`.

use serde::Serialize;

use crate::signal::{HarmonicModel, LinearProcessSpec};

/// `c(j) = |Σ_k a(k) e^{−ijkλ}|²`.
pub fn spectral_weight_c(spec: &LinearProcessSpec, j: usize, lambda: f64) -> f64 {
    let w = j as f64 * lambda;
    let (re, im) = spec
        .coeffs()
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(re, im), (k, a)| {
            let (s, c) = (w * k as f64).sin_cos();
            (re + a * c, im - a * s)
        });
    re * re + im * im
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub beta_star: f64,
    pub delta_g: f64,
    pub c_weights: Vec<f64>,
    pub sigma2: f64,
    pub n: usize,
    pub var_lse: f64,
    pub var_mnr: f64,
}

/// `Σ j²(A_j² + B_j²)`.
pub fn beta_star(model: &HarmonicModel) -> f64 {
    model
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, (a, b))| ((i + 1) as f64).powi(2) * (a * a + b * b))
        .sum()
}

pub fn asymptotic_variances(
    model: &HarmonicModel,
    spec: &LinearProcessSpec,
    n: usize,
) -> AsymptoticReport {
    let lambda = model.lambda();
    let c_weights: Vec<f64> = (1..=model.p())
        .map(|j| spectral_weight_c(spec, j, lambda))
        .collect();
    let beta = beta_star(model);
    let delta_g = model
        .amplitudes()
        .iter()
        .zip(&c_weights)
        .enumerate()
        .map(|(i, ((a, b), c))| ((i + 1) as f64).powi(2) * (a * a + b * b) * c)
        .sum::<f64>();
    let base = spec.sigma2() * delta_g / (beta * beta * (n as f64).powi(3));
    AsymptoticReport {
        beta_star: beta,
        delta_g,
        c_weights,
        sigma2: spec.sigma2(),
        n,
        var_lse: 24.0 * base,
        var_mnr: 6.0 * base,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ma1(sigma2: f64) -> LinearProcessSpec {
        LinearProcessSpec::new(vec![1.0, 0.5], sigma2).unwrap()
    }

    #[test]
    fn white_noise_has_unit_weights() {
        let spec = LinearProcessSpec::iid(2.0).unwrap();
        for j in 1..5 {
            assert_relative_eq!(spectral_weight_c(&spec, j, 0.37), 1.0, epsilon = 1e-15);
        }
        let r = asymptotic_variances(&HarmonicModel::model1(), &spec, 100);
        assert_relative_eq!(r.delta_g, r.beta_star, max_relative = 1e-14);
    }

    #[test]
    fn ma1_weights() {
        assert_relative_eq!(
            spectral_weight_c(&ma1(1.0), 1, 0.25),
            2.21891,
            epsilon = 5e-6
        );
        assert_relative_eq!(
            spectral_weight_c(&ma1(1.0), 4, 0.25),
            1.79030,
            epsilon = 5e-6
        );
        // |1 + 0.5 e^{-iw}|² = 1.25 + cos w
        for w in [0.1, 0.9, 2.0, 3.1] {
            assert_relative_eq!(
                spectral_weight_c(&ma1(1.0), 1, w),
                1.25 + w.cos(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn beta_star_presets() {
        assert_eq!(
            beta_star(&HarmonicModel::model1()),
            25.0 + 9.0 + 4.0 * (16.0 + 6.25) + 9.0 * (9.0 + 5.0625) + 16.0 * 8.0
        );
        assert_relative_eq!(beta_star(&HarmonicModel::model1()), 377.5625);
        assert_relative_eq!(beta_star(&HarmonicModel::model2()), 147.0625);
    }

    #[test]
    fn scaling_laws() {
        let m = HarmonicModel::model2();
        let a = asymptotic_variances(&m, &ma1(0.5), 300);
        let b = asymptotic_variances(&m, &ma1(0.5), 600);
        assert_relative_eq!(a.var_lse / 8.0, b.var_lse, max_relative = 1e-14);
        assert_relative_eq!(a.var_lse / a.var_mnr, 4.0, max_relative = 1e-15);

        let doubled = HarmonicModel::new(
            m.lambda(),
            m.amplitudes()
                .iter()
                .map(|&(a, b)| (2.0 * a, 2.0 * b))
                .collect(),
        )
        .unwrap();
        let c = asymptotic_variances(&doubled, &ma1(0.5), 300);
        assert_relative_eq!(c.beta_star, 4.0 * a.beta_star, max_relative = 1e-14);
        assert_relative_eq!(c.var_mnr, a.var_mnr / 4.0, max_relative = 1e-14);
    }
}
