//! Fundamental frequency estimation for harmonic signals in stationary
//! correlated noise.
//!
//! The signal model is
//!
//! ```text
//! y(t) = sum_{j=1..p} [A_j cos(j λ t) + B_j sin(j λ t)] + e(t),   t = 1..n
//! ```
//!
//! with `e(t)` a finite moving-average linear process. The fundamental
//! frequency `λ` is estimated by maximizing the projection norm of the data
//! onto the harmonic design, with a Newton iteration whose step is scaled by
//! 1/4. The iteration starts from the best Fourier-grid frequency, is warmed
//! up on consecutive subsamples of growing size up to `n^(6/7)`, and then
//! runs on the full sample.
//!
//! ```
//! use fundfreq::{estimate_fundamental, lse_linear, HarmonicModel, MnrConfig};
//! use fundfreq::signal::synthesize;
//!
//! let model = HarmonicModel::model1();
//! let signal = synthesize(&model, 512, None, 0).unwrap();
//! let config = MnrConfig { tol: 1e-10, ..MnrConfig::default() };
//! let est = estimate_fundamental(signal.samples(), 4, &config).unwrap();
//! assert!((est.lambda_hat - 0.25).abs() < 1e-8);
//!
//! let amps = lse_linear(signal.samples(), est.lambda_hat, 4).unwrap();
//! assert!((amps[0].0 - 5.0).abs() < 1e-6);
//! ```

pub mod asymptotics;
pub mod cli;
pub mod criterion;
mod error;
pub mod io;
pub mod linear;
pub mod mnr;
pub mod montecarlo;
pub mod signal;
pub mod spectrum;

pub use asymptotics::{asymptotic_variances, spectral_weight_c, AsymptoticReport};
pub use criterion::Criterion;
pub use error::{Error, Result};
pub use linear::{alse_linear, lse_linear, residuals, sample_acf, AmplitudeSolve};
pub use mnr::{
    estimate_fundamental, mnr_step, mnr_step_with, Estimate, EstimationTrace, MnrConfig,
    TerminalStatus,
};
pub use signal::{HarmonicModel, LinearProcessSpec, Signal};
pub use spectrum::InitMode;
