//! Harmonic model, sampled signals and stationary linear-process noise.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Parameters of `y(t) = Σ_j [A_j cos(jλt) + B_j sin(jλt)]`.
///
/// The number of harmonics `p` is the number of amplitude pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct HarmonicModel {
    lambda: f64,
    amplitudes: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    lambda: f64,
    amplitudes: Vec<(f64, f64)>,
}

impl TryFrom<RawModel> for HarmonicModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        HarmonicModel::new(raw.lambda, raw.amplitudes)
    }
}

impl From<HarmonicModel> for RawModel {
    fn from(m: HarmonicModel) -> Self {
        RawModel {
            lambda: m.lambda,
            amplitudes: m.amplitudes,
        }
    }
}

impl HarmonicModel {
    pub fn new(lambda: f64, amplitudes: Vec<(f64, f64)>) -> Result<Self> {
        let p = amplitudes.len();
        if p == 0 {
            return domain("a harmonic model needs at least one harmonic");
        }
        if !(lambda.is_finite() && lambda > 0.0 && lambda < PI / p as f64) {
            return domain(format!("lambda={lambda} must lie in (0, pi/{p})"));
        }
        for (j, &(a, b)) in amplitudes.iter().enumerate() {
            if !(a.is_finite() && b.is_finite()) {
                return domain(format!("amplitudes of harmonic {} are not finite", j + 1));
            }
            if a * a + b * b <= 0.0 {
                return domain(format!("harmonic {} has zero amplitude", j + 1));
            }
        }
        Ok(Self { lambda, amplitudes })
    }

    /// Four harmonics at λ = 0.25.
    pub fn model1() -> Self {
        Self::new(0.25, vec![(5.0, 3.0), (4.0, 2.5), (3.0, 2.25), (2.0, 2.0)])
            .expect("preset is valid")
    }

    /// Four harmonics at λ = 0.3141.
    pub fn model2() -> Self {
        Self::new(
            0.3141,
            vec![(4.0, 2.0), (3.0, 1.5), (2.0, 1.25), (1.0, 1.0)],
        )
        .expect("preset is valid")
    }

    pub fn p(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn amplitudes(&self) -> &[(f64, f64)] {
        &self.amplitudes
    }

    /// Noise-free value at time index `t` (1-based).
    pub fn value_at(&self, t: usize) -> f64 {
        harmonic_sum(self.lambda, &self.amplitudes, t)
    }
}

pub(crate) fn harmonic_sum(lambda: f64, amplitudes: &[(f64, f64)], t: usize) -> f64 {
    let t = t as f64;
    amplitudes
        .iter()
        .enumerate()
        .map(|(idx, &(a, b))| {
            let (s, c) = ((idx + 1) as f64 * lambda * t).sin_cos();
            a * c + b * s
        })
        .sum()
}

/// A finite sample `y(1..n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: Option<f64>,
}

impl Signal {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return domain("a signal needs at least one sample");
        }
        if let Some(t) = samples.iter().position(|v| !v.is_finite()) {
            return domain(format!("sample {} is not finite", t + 1));
        }
        Ok(Self {
            samples,
            sample_rate: None,
        })
    }

    pub fn with_sample_rate(mut self, rate: Option<f64>) -> Result<Self> {
        if let Some(r) = rate {
            if !(r.is_finite() && r > 0.0) {
                return domain(format!("sample rate {r} must be positive"));
            }
        }
        self.sample_rate = rate;
        Ok(self)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> Option<f64> {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

impl AsRef<[f64]> for Signal {
    fn as_ref(&self) -> &[f64] {
        &self.samples
    }
}

/// Finite moving-average noise `e(t) = Σ_k a(k) ε(t-k)` with Gaussian
/// innovations of variance `sigma2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProcessSpec {
    coeffs: Vec<f64>,
    sigma2: f64,
}

impl LinearProcessSpec {
    pub fn new(coeffs: Vec<f64>, sigma2: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return domain("linear process needs at least one coefficient");
        }
        if coeffs.iter().any(|a| !a.is_finite()) {
            return domain("linear process coefficients must be finite");
        }
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return domain(format!("innovation variance {sigma2} must be positive"));
        }
        Ok(Self { coeffs, sigma2 })
    }

    pub fn iid(sigma2: f64) -> Result<Self> {
        Self::new(vec![1.0], sigma2)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Moving-average order `q`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Stationary variance `σ² Σ a(k)²`.
    pub fn variance(&self) -> f64 {
        self.sigma2 * self.coeffs.iter().map(|a| a * a).sum::<f64>()
    }

    /// Autocovariance at `lag`.
    pub fn autocovariance(&self, lag: usize) -> f64 {
        if lag > self.order() {
            return 0.0;
        }
        self.sigma2
            * self.coeffs[..self.coeffs.len() - lag]
                .iter()
                .zip(&self.coeffs[lag..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }
}

/// Draws `n` values of the linear process. `q` innovations are drawn before
/// `t = 1` so the first output already has its full history.
pub fn generate_linear_process(spec: &LinearProcessSpec, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    generate_linear_process_with(spec, n, &mut rng)
}

pub fn generate_linear_process_with<R: rand::Rng + ?Sized>(
    spec: &LinearProcessSpec,
    n: usize,
    rng: &mut R,
) -> Vec<f64> {
    let q = spec.order();
    let normal = Normal::new(0.0, spec.sigma2.sqrt()).expect("sigma2 validated positive");
    let innovations: Vec<f64> = (0..n + q).map(|_| normal.sample(rng)).collect();
    // innovations[i] holds ε(i + 1 - q)
    (0..n)
        .map(|t| {
            spec.coeffs
                .iter()
                .enumerate()
                .map(|(k, a)| a * innovations[t + q - k])
                .sum()
        })
        .collect()
}

/// Samples the model at `t = 1..n`, adding seeded linear-process noise when
/// `noise` is given.
pub fn synthesize(
    model: &HarmonicModel,
    n: usize,
    noise: Option<&LinearProcessSpec>,
    seed: u64,
) -> Result<Signal> {
    if n == 0 {
        return domain("sample size must be positive");
    }
    let mut samples: Vec<f64> = (1..=n).map(|t| model.value_at(t)).collect();
    if let Some(spec) = noise {
        let e = generate_linear_process(spec, n, seed);
        samples.iter_mut().zip(e).for_each(|(y, e)| *y += e);
    }
    Signal::new(samples)
}

/// Subtracts the sample mean.
pub fn mean_correct(signal: &Signal) -> Signal {
    let n = signal.len() as f64;
    let mean = signal.samples.iter().sum::<f64>() / n;
    Signal {
        samples: signal.samples.iter().map(|y| y - mean).collect(),
        sample_rate: signal.sample_rate,
    }
}

/// `ρ cos(tjλ - φ)` written as `A cos(tjλ) + B sin(tjλ)`.
pub fn polar_to_cartesian(rho: f64, phi: f64) -> (f64, f64) {
    (rho * phi.cos(), -rho * phi.sin())
}

/// Inverse of [`polar_to_cartesian`]; `φ` is returned in `(-π, π]`.
pub fn cartesian_to_polar(a: f64, b: f64) -> (f64, f64) {
    (a.hypot(b), (-b).atan2(a))
}
