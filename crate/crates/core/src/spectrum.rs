//! Periodogram, the harmonic-sum criterion `Q_N`, and the Fourier-grid
//! initializer.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Which spectral criterion the coarse grid search maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Periodogram `I(λ)` of the fundamental only.
    Plain,
    /// Sum of the periodogram over the `p` harmonics.
    #[default]
    HarmonicSum,
}

/// `(Σ y(t) cos(ωt), Σ y(t) sin(ωt))` over `t = 1..n`.
pub(crate) fn dft_pair(y: &[f64], omega: f64) -> (f64, f64) {
    y.iter().enumerate().fold((0.0, 0.0), |(c, s), (i, &v)| {
        let (sn, cs) = (omega * (i + 1) as f64).sin_cos();
        (c + v * cs, s + v * sn)
    })
}

/// `I(λ) = (1/n) |Σ y(t) e^{-iλt}|²`.
pub fn periodogram(y: &[f64], lambda: f64) -> Result<f64> {
    if y.len() < 2 {
        return domain("periodogram needs at least two samples");
    }
    if !(lambda > 0.0 && lambda < PI) {
        return domain(format!("periodogram frequency {lambda} outside (0, pi)"));
    }
    let (c, s) = dft_pair(y, lambda);
    Ok((c * c + s * s) / y.len() as f64)
}

/// `Q_N(λ) = Σ_j |(1/n) Σ_t y(t) e^{itjλ}|²`.
pub fn harmonic_criterion_qn(y: &[f64], lambda: f64, p: usize) -> Result<f64> {
    check_harmonic_range(lambda, p)?;
    let n = y.len() as f64;
    Ok(harmonic_dft(y, lambda, p)
        .iter()
        .map(|(c, s)| (c * c + s * s) / (n * n))
        .sum())
}

/// `dft_pair` at `λ, 2λ, ..., pλ` in one pass, harmonics by angle addition.
fn harmonic_dft(y: &[f64], lambda: f64, p: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); p];
    for (i, &v) in y.iter().enumerate() {
        let (s1, c1) = (lambda * (i + 1) as f64).sin_cos();
        let (mut c, mut s) = (c1, s1);
        for acc in out.iter_mut() {
            acc.0 += v * c;
            acc.1 += v * s;
            (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
        }
    }
    out
}

pub(crate) fn check_harmonic_range(lambda: f64, p: usize) -> Result<()> {
    if p == 0 {
        return domain("number of harmonics must be positive");
    }
    if !(lambda > 0.0 && p as f64 * lambda < PI) {
        return domain(format!(
            "lambda={lambda} puts a harmonic outside (0, pi) for p={p}"
        ));
    }
    Ok(())
}

/// Fourier frequencies `2πk/n`, `k ≥ 1`, lying strictly below `π/p`.
pub fn fourier_grid(n: usize, p: usize) -> Vec<f64> {
    if p == 0 {
        return Vec::new();
    }
    let upper = PI / p as f64;
    (1..=n / 2)
        .map(|k| 2.0 * PI * k as f64 / n as f64)
        .take_while(|&w| w < upper)
        .collect()
}

/// Grid point maximizing the selected criterion. Ties go to the smaller
/// frequency.
pub fn fourier_grid_init(y: &[f64], p: usize, mode: InitMode) -> Result<f64> {
    let n = y.len();
    if p == 0 || n < 10 * p {
        return domain(format!("need n >= 10p for initialization (n={n}, p={p})"));
    }
    let grid = fourier_grid(n, p);
    if grid.is_empty() {
        return domain(format!("no Fourier frequency below pi/{p} for n={n}"));
    }
    let mut best = (grid[0], f64::NEG_INFINITY);
    for &w in &grid {
        let value = match mode {
            InitMode::Plain => periodogram(y, w)?,
            InitMode::HarmonicSum => harmonic_criterion_qn(y, w, p)?,
        };
        if value > best.1 {
            best = (w, value);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{synthesize, HarmonicModel, LinearProcessSpec};
    use approx::assert_relative_eq;

    #[test]
    fn zero_signal() {
        let y = vec![0.0; 64];
        assert_eq!(periodogram(&y, 0.3).unwrap(), 0.0);
        assert_eq!(harmonic_criterion_qn(&y, 0.3, 3).unwrap(), 0.0);
    }

    #[test]
    fn on_grid_cosine_has_quarter_n_power() {
        let n = 256;
        let w = 2.0 * PI * 12.0 / n as f64;
        let y: Vec<f64> = (1..=n).map(|t| (w * t as f64).cos()).collect();
        assert_relative_eq!(
            periodogram(&y, w).unwrap(),
            n as f64 / 4.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn qn_matches_periodogram_for_one_harmonic() {
        let y: Vec<f64> = (1..=50)
            .map(|t| (0.4 * t as f64).sin() + 0.1 * t as f64)
            .collect();
        let i = periodogram(&y, 0.7).unwrap();
        let q = harmonic_criterion_qn(&y, 0.7, 1).unwrap();
        assert_relative_eq!(q, i / 50.0, max_relative = 1e-12);
    }

    #[test]
    fn domain_errors() {
        let y = vec![1.0; 40];
        assert!(periodogram(&y, 0.0).is_err());
        assert!(periodogram(&y, PI).is_err());
        assert!(periodogram(&[1.0], 0.5).is_err());
        assert!(harmonic_criterion_qn(&y, 0.8, 4).is_err());
        assert!(fourier_grid_init(&y, 5, InitMode::HarmonicSum).is_err());
    }

    #[test]
    fn grid_excludes_upper_edge() {
        // 2π·2/16 = π/4 exactly, so p = 4 admits k = 1 only.
        assert_eq!(fourier_grid(16, 4).len(), 1);
        assert_eq!(fourier_grid(16, 1).len(), 7);
        assert_eq!(fourier_grid(512, 4).len(), 63);
    }

    #[test]
    fn on_grid_tone_is_found_exactly() {
        let n = 512;
        let w = 2.0 * PI * 10.0 / n as f64;
        let m = HarmonicModel::new(w, vec![(1.0, 0.0)]).unwrap();
        let s = synthesize(&m, n, None, 0).unwrap();
        for mode in [InitMode::Plain, InitMode::HarmonicSum] {
            assert_eq!(fourier_grid_init(s.samples(), 1, mode).unwrap(), w);
        }
    }

    #[test]
    fn model1_harmonic_sum_init() {
        let noise = LinearProcessSpec::new(vec![1.0, 0.5], 0.01).unwrap();
        let s = synthesize(&HarmonicModel::model1(), 500, Some(&noise), 3).unwrap();
        let w = fourier_grid_init(s.samples(), 4, InitMode::HarmonicSum).unwrap();
        assert!((w - 0.25).abs() <= 2.0 * PI / 500.0, "{w}");
    }

    #[test]
    fn dominant_second_harmonic() {
        let m = HarmonicModel::new(0.3, vec![(0.1, 0.0), (5.0, 0.0)]).unwrap();
        let s = synthesize(&m, 400, None, 0).unwrap();
        let step = 2.0 * PI / 400.0;
        let hs = fourier_grid_init(s.samples(), 2, InitMode::HarmonicSum).unwrap();
        assert!((hs - 0.3).abs() <= step, "{hs}");
        // The plain periodogram is searched over (0, π/2) and finds 2λ = 0.6.
        let plain = fourier_grid_init(s.samples(), 2, InitMode::Plain).unwrap();
        assert!((plain - 0.6).abs() <= step, "{plain}");
    }
}
