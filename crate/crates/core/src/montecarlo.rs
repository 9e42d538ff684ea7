//! Replicated estimation experiments over a grid of sample sizes and noise
//! levels.
//!
//! Each replication draws its own seed from the tuple
//! `(master_seed, n, σ², index)`:
//!
//! ```text
//! s = mix(mix(mix(mix(master_seed) ^ n) ^ bits(σ²)) ^ index)
//! ```
//!
//! where `mix` is the SplitMix64 output function (add `0x9E3779B97F4A7C15`,
//! then xor-shift-multiply by `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`)
//! and `bits(σ²)` is the IEEE-754 bit pattern. Results therefore do not depend
//! on scheduling, and adding cells or replications never changes the streams
//! of existing ones.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::asymptotic_variances;
use crate::error::{domain, Error, Result};
use crate::mnr::{estimate_fundamental, MnrConfig, TerminalStatus};
use crate::signal::{synthesize, HarmonicModel, LinearProcessSpec};

/// Fraction of failed replications above which a cell is flagged.
pub const FAILURE_FLAG_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model: HarmonicModel,
    /// Moving-average coefficients of the noise; `[1.0]` is white noise.
    pub noise_coeffs: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    pub sigma2_values: Vec<f64>,
    pub replications: usize,
    pub master_seed: u64,
    pub mnr_config: MnrConfig,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return domain("replications must be at least 1");
        }
        if self.sample_sizes.is_empty() || self.sigma2_values.is_empty() {
            return domain("sample sizes and noise levels must be nonempty");
        }
        let p = self.model.p();
        if let Some(n) = self.sample_sizes.iter().find(|&&n| n < 10 * p) {
            return domain(format!("sample size {n} is below 10p = {}", 10 * p));
        }
        for &s2 in &self.sigma2_values {
            LinearProcessSpec::new(self.noise_coeffs.clone(), s2)?;
        }
        self.mnr_config.validate()
    }
}

/// One `(n, σ²)` cell. Mean and variance are over successful replications;
/// the variance uses the `n − 1` divisor and is NaN with fewer than two.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub sigma2: f64,
    pub mean_estimate: f64,
    pub empirical_variance: f64,
    pub asym_var_lse: f64,
    pub asym_var_mnr: f64,
    pub failure_count: usize,
    pub replications: usize,
}

impl SummaryRow {
    /// More than 10% of the replications failed.
    pub fn flagged(&self) -> bool {
        self.failure_count as f64 > FAILURE_FLAG_FRACTION * self.replications as f64
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `index` in cell `(n, sigma2)`.
pub fn replication_seed(master_seed: u64, n: usize, sigma2: f64, index: usize) -> u64 {
    let mut s = splitmix64(master_seed);
    for word in [n as u64, sigma2.to_bits(), index as u64] {
        s = splitmix64(s ^ word);
    }
    s
}

/// Runs one replication; `None` marks a failure (boundary exit or a
/// numerical error).
fn replicate(
    spec: &ExperimentSpec,
    noise: &LinearProcessSpec,
    n: usize,
    index: usize,
) -> Result<Option<f64>> {
    let seed = replication_seed(spec.master_seed, n, noise.sigma2(), index);
    let y = synthesize(&spec.model, n, Some(noise), seed)?;
    Ok(
        match estimate_fundamental(y.samples(), spec.model.p(), &spec.mnr_config) {
            Ok(est) if est.trace.status != TerminalStatus::Boundary => Some(est.lambda_hat),
            Ok(_) => None,
            Err(
                Error::DegenerateFrequency { .. }
                | Error::DegenerateCurvature { .. }
                | Error::Boundary { .. },
            ) => None,
            Err(e) => return Err(e),
        },
    )
}

/// Runs every cell on the current rayon pool, cells in `n`-major order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<SummaryRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.sample_sizes.len() * spec.sigma2_values.len());
    for &n in &spec.sample_sizes {
        for &sigma2 in &spec.sigma2_values {
            let noise = LinearProcessSpec::new(spec.noise_coeffs.clone(), sigma2)?;
            let outcomes = (0..spec.replications)
                .into_par_iter()
                .map(|i| replicate(spec, &noise, n, i))
                .collect::<Result<Vec<_>>>()?;
            // sequential reduction in index order keeps the sums bit-stable
            let ok: Vec<f64> = outcomes.iter().flatten().copied().collect();
            let k = ok.len() as f64;
            let mean = ok.iter().sum::<f64>() / k;
            let variance = if ok.len() < 2 {
                f64::NAN
            } else {
                ok.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)
            };
            let asym = asymptotic_variances(&spec.model, &noise, n);
            rows.push(SummaryRow {
                n,
                sigma2,
                mean_estimate: mean,
                empirical_variance: variance,
                asym_var_lse: asym.var_lse,
                asym_var_mnr: asym.var_mnr,
                failure_count: spec.replications - ok.len(),
                replications: spec.replications,
            });
        }
    }
    Ok(rows)
}

/// Runs the experiment on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(
    spec: &ExperimentSpec,
    threads: usize,
) -> Result<Vec<SummaryRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_experiment(spec))
}

pub const CSV_HEADER: [&str; 7] = [
    "n",
    "sigma2",
    "average",
    "variance",
    "asym_var_lse",
    "asym_var_mnr",
    "failures",
];

/// Writes rows as CSV with reals in 6-significant-digit scientific notation.
pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(e.into());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            sci(r.sigma2),
            sci(r.mean_estimate),
            sci(r.empirical_variance),
            sci(r.asym_var_lse),
            sci(r.asym_var_mnr),
            r.failure_count.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn sci(x: f64) -> String {
    format!("{x:.5e}")
}
