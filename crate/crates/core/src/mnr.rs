//! Modified Newton-Raphson estimation of the fundamental frequency.
//!
//! Each update is `λ ← λ - s · g'(λ) / g''(λ)` with step factor `s = 1/4`.
//! A run has three stages:
//!
//! 1. start from the Fourier-grid maximizer;
//! 2. update on consecutive subsamples whose length ends at `⌊n^(6/7)⌋`;
//! 3. update on the full sample until two iterates differ by less than
//!    `tol`, `g` stops increasing, or `max_iter` updates were taken.
//!
//! With `warmup` disabled, stage 2 is a single update on the `⌊n^(6/7)⌋`
//! subsample. With `warmup` enabled (the default), stage 2 starts on a
//! subsample short enough that a grid point lies inside the main lobe of
//! the highest harmonic, iterates to convergence there, and doubles the
//! length until it reaches `⌊n^(6/7)⌋`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::criterion::{criterion_value, evaluate, Criterion, CriterionPoint};
use crate::error::{domain, Error, Result};
use crate::spectrum::{check_harmonic_range, fourier_grid_init, InitMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnrConfig {
    pub step_factor: f64,
    /// Stop once two consecutive iterates differ by less than this.
    pub tol: f64,
    /// Cap on updates per stage.
    pub max_iter: usize,
    pub subsample_exponent: f64,
    pub subsample_start: usize,
    pub init_mode: InitMode,
    pub criterion: Criterion,
    pub warmup: bool,
}

impl Default for MnrConfig {
    fn default() -> Self {
        Self {
            step_factor: 0.25,
            tol: 1e-7,
            max_iter: 50,
            subsample_exponent: 6.0 / 7.0,
            subsample_start: 0,
            init_mode: InitMode::HarmonicSum,
            criterion: Criterion::Joint,
            warmup: true,
        }
    }
}

impl MnrConfig {
    /// The classic schedule: separable criterion, one update on
    /// the subsample, no warm-up.
    pub fn classic() -> Self {
        Self {
            criterion: Criterion::Separable,
            warmup: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_factor > 0.0 && self.step_factor <= 1.0) {
            return domain(format!(
                "step factor {} must lie in (0, 1]",
                self.step_factor
            ));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return domain(format!("tolerance {} must be positive", self.tol));
        }
        if self.max_iter == 0 {
            return domain("max_iter must be positive");
        }
        if !(self.subsample_exponent > 0.0 && self.subsample_exponent <= 1.0) {
            return domain(format!(
                "subsample exponent {} must lie in (0, 1]",
                self.subsample_exponent
            ));
        }
        Ok(())
    }

    /// Size of the subsample that ends stage 2.
    pub fn subsample_size(&self, n: usize) -> usize {
        // exact powers such as 128^(6/7) = 64 must not round down to 63
        ((n as f64).powf(self.subsample_exponent) + 1e-9).floor() as usize
    }

    /// Subsample lengths used by stage 2, shortest first.
    pub fn subsample_schedule(&self, n: usize, p: usize) -> Vec<usize> {
        let last = self.subsample_size(n);
        if !self.warmup {
            return vec![last];
        }
        // a grid start is within π/n of the truth; keep p·m·π/n <= 1
        let first = ((n as f64 / (p as f64 * PI)).floor() as usize).clamp(10 * p, last.max(10 * p));
        let mut sizes = Vec::new();
        let mut m = first;
        while m < last {
            sizes.push(m);
            m *= 2;
        }
        sizes.push(last);
        sizes
    }
}

/// One record per iterate. Iteration 0 is the grid start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub lambda: f64,
    /// Number of samples the update producing this iterate used.
    pub sample_size: usize,
    /// Criterion value at this iterate on the full sample.
    pub g_value: f64,
    pub correction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalStatus {
    ConvergedTol,
    ConvergedObjective,
    MaxIter,
    /// A proposed iterate left `(0, π/p)`; the best earlier iterate is kept.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationTrace {
    pub records: Vec<IterationRecord>,
    pub status: TerminalStatus,
    /// The out-of-range proposal when `status` is `Boundary`.
    pub rejected_lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub lambda_hat: f64,
    pub trace: EstimationTrace,
}

fn step_from(pt: &CriterionPoint, n: usize, p: usize, step_factor: f64) -> Result<(f64, f64)> {
    let curvature = pt.g_double_prime;
    // g'' ~ n² g near a peak; anything this flat is numerically meaningless
    let n = n as f64;
    let floor = 1e-12 * n * n * pt.g;
    if !curvature.is_finite() || curvature == 0.0 || curvature.abs() <= floor {
        return Err(Error::DegenerateCurvature {
            lambda: pt.lambda,
            curvature,
        });
    }
    let correction = -step_factor * pt.g_prime / curvature;
    let lambda_next = pt.lambda + correction;
    let upper = PI / p as f64;
    if !(lambda_next > 0.0 && lambda_next < upper) {
        return Err(Error::Boundary { lambda_next, upper });
    }
    Ok((lambda_next, correction))
}

/// One damped Newton update on the separable criterion `g = Σ_j R_j`.
/// Returns `(λ_next, correction)`.
pub fn mnr_step(y: &[f64], p: usize, lambda: f64, step_factor: f64) -> Result<(f64, f64)> {
    mnr_step_with(y, p, lambda, step_factor, Criterion::Separable)
}

/// One damped Newton update on the chosen criterion.
pub fn mnr_step_with(
    y: &[f64],
    p: usize,
    lambda: f64,
    step_factor: f64,
    criterion: Criterion,
) -> Result<(f64, f64)> {
    let pt = evaluate(y, p, lambda, criterion)?;
    step_from(&pt, y.len(), p, step_factor)
}

enum StageEnd {
    Tol,
    Objective,
    MaxIter,
    Boundary(f64),
}

struct Run<'a> {
    y: &'a [f64],
    p: usize,
    config: &'a MnrConfig,
    records: Vec<IterationRecord>,
}

impl Run<'_> {
    /// Iterates on `data` from `lambda`; returns where the stage ended and
    /// the last accepted iterate.
    fn stage(&mut self, data: &[f64], lambda: f64, single_step: bool) -> Result<(StageEnd, f64)> {
        let cfg = self.config;
        let full = data.len() == self.y.len();
        // a warm-up stage only has to land well inside the next stage's basin
        let m = data.len() as f64;
        let tol = if full {
            cfg.tol
        } else {
            cfg.tol.max(1.0 / (self.p as f64 * m * m))
        };
        let mut pt = evaluate(data, self.p, lambda, cfg.criterion)?;
        let mut steps = 0;
        loop {
            let (next, correction) = match step_from(&pt, data.len(), self.p, cfg.step_factor) {
                Ok(s) => s,
                Err(Error::Boundary { lambda_next, .. }) => {
                    return Ok((StageEnd::Boundary(lambda_next), pt.lambda))
                }
                Err(e) => return Err(e),
            };
            steps += 1;
            let pt_next = evaluate(data, self.p, next, cfg.criterion)?;
            let g_full = if full {
                pt_next.g
            } else {
                criterion_value(self.y, self.p, next, cfg.criterion)?
            };
            self.records.push(IterationRecord {
                iteration: self.records.len(),
                lambda: next,
                sample_size: data.len(),
                g_value: g_full,
                correction,
            });
            if single_step {
                return Ok((StageEnd::MaxIter, next));
            }
            if (next - pt.lambda).abs() < tol {
                return Ok((StageEnd::Tol, next));
            }
            if pt_next.g <= pt.g {
                return Ok((StageEnd::Objective, pt.lambda));
            }
            if steps >= cfg.max_iter {
                return Ok((StageEnd::MaxIter, next));
            }
            pt = pt_next;
        }
    }

    fn finish(self, status: TerminalStatus, rejected_lambda: Option<f64>) -> Estimate {
        let best = self.records.iter().fold(&self.records[0], |best, r| {
            if r.g_value > best.g_value {
                r
            } else {
                best
            }
        });
        Estimate {
            lambda_hat: best.lambda,
            trace: EstimationTrace {
                records: self.records,
                status,
                rejected_lambda,
            },
        }
    }
}

/// Runs the three-stage estimator on `y` with `p` harmonics.
pub fn estimate_fundamental(y: &[f64], p: usize, config: &MnrConfig) -> Result<Estimate> {
    config.validate()?;
    let n = y.len();
    if p == 0 || n < 10 * p {
        return domain(format!("need n >= 10p for estimation (n={n}, p={p})"));
    }
    let schedule = config.subsample_schedule(n, p);
    let start = config.subsample_start;
    let longest = *schedule.last().expect("schedule is never empty");
    if longest < 10 * p || start + longest > n {
        return domain(format!(
            "subsample of {longest} samples at offset {start} does not fit a signal of {n} samples"
        ));
    }

    let lambda0 = fourier_grid_init(y, p, config.init_mode)?;
    check_harmonic_range(lambda0, p)?;
    let mut run = Run {
        y,
        p,
        config,
        records: vec![IterationRecord {
            iteration: 0,
            lambda: lambda0,
            sample_size: n,
            g_value: criterion_value(y, p, lambda0, config.criterion)?,
            correction: 0.0,
        }],
    };

    let mut current = lambda0;
    for &m in &schedule {
        let (end, last) = run.stage(&y[start..start + m], current, !config.warmup)?;
        if let StageEnd::Boundary(raw) = end {
            return Ok(run.finish(TerminalStatus::Boundary, Some(raw)));
        }
        current = last;
    }

    let (end, _) = run.stage(y, current, false)?;
    Ok(match end {
        StageEnd::Tol => run.finish(TerminalStatus::ConvergedTol, None),
        StageEnd::Objective => run.finish(TerminalStatus::ConvergedObjective, None),
        StageEnd::MaxIter => run.finish(TerminalStatus::MaxIter, None),
        StageEnd::Boundary(raw) => run.finish(TerminalStatus::Boundary, Some(raw)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{synthesize, HarmonicModel, LinearProcessSpec};

    #[test]
    fn zero_step_factor_is_identity() {
        let y = synthesize(&HarmonicModel::model1(), 200, None, 0)
            .unwrap()
            .into_samples();
        let (next, corr) = mnr_step(&y, 4, 0.251, 0.0).unwrap();
        assert_eq!(next, 0.251);
        assert_eq!(corr, 0.0);
    }

    #[test]
    fn no_correction_at_noiseless_truth() {
        let y = synthesize(&HarmonicModel::model1(), 1000, None, 0)
            .unwrap()
            .into_samples();
        let (_, corr) = mnr_step_with(&y, 4, 0.25, 0.25, Criterion::Joint).unwrap();
        assert!(corr.abs() < 1e-8, "{corr}");
    }

    #[test]
    fn step_is_scale_invariant() {
        let noise = LinearProcessSpec::iid(0.5).unwrap();
        let y = synthesize(&HarmonicModel::model1(), 300, Some(&noise), 5)
            .unwrap()
            .into_samples();
        let scaled: Vec<f64> = y.iter().map(|v| -42.0 * v).collect();
        for criterion in [Criterion::Separable, Criterion::Joint] {
            let (a, _) = mnr_step_with(&y, 4, 0.2505, 0.25, criterion).unwrap();
            let (b, _) = mnr_step_with(&scaled, 4, 0.2505, 0.25, criterion).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_signal_has_degenerate_curvature() {
        let y = vec![0.0; 100];
        assert!(matches!(
            mnr_step(&y, 1, 0.5, 0.25),
            Err(Error::DegenerateCurvature { .. })
        ));
    }

    #[test]
    fn boundary_proposal_is_an_error() {
        // a tone at 0.7 seen from 0.05 with p = 4 pushes the iterate out of (0, π/4)
        let y: Vec<f64> = (1..=200)
            .map(|t| (0.05 * t as f64).cos() + 0.01 * (t as f64).sin())
            .collect();
        let res = mnr_step(&y, 4, 0.77, 1.0);
        assert!(res.is_ok() || matches!(res, Err(Error::Boundary { .. })));
    }

    #[test]
    fn config_validation() {
        let bad = MnrConfig {
            step_factor: 0.0,
            ..MnrConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = MnrConfig {
            subsample_exponent: 1.5,
            ..MnrConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = MnrConfig {
            tol: 0.0,
            ..MnrConfig::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(MnrConfig::default().subsample_size(128), 64);
        assert_eq!(MnrConfig::default().subsample_size(500), 205);
    }

    #[test]
    fn schedules() {
        let cfg = MnrConfig::default();
        assert_eq!(cfg.subsample_schedule(512, 4), vec![40, 80, 160, 210]);
        assert_eq!(cfg.subsample_schedule(100, 4), vec![40, 51]);
        assert_eq!(MnrConfig::classic().subsample_schedule(512, 4), vec![210]);
        let one = cfg.subsample_schedule(4096, 1);
        assert_eq!(one.last(), Some(&cfg.subsample_size(4096)));
        assert!(one.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn short_signal_rejected() {
        let y = vec![1.0; 39];
        assert!(estimate_fundamental(&y, 4, &MnrConfig::default()).is_err());
    }

    #[test]
    fn noiseless_model1() {
        let y = synthesize(&HarmonicModel::model1(), 512, None, 0)
            .unwrap()
            .into_samples();
        // damped steps contract by 3/4, so a 1e-7 step still sits ~3e-7 away
        let cfg = MnrConfig {
            tol: 1e-10,
            ..MnrConfig::default()
        };
        let est = estimate_fundamental(&y, 4, &cfg).unwrap();
        assert!((est.lambda_hat - 0.25).abs() < 1e-8, "{:?}", est);
        let loose = estimate_fundamental(&y, 4, &MnrConfig::default()).unwrap();
        assert!((loose.lambda_hat - 0.25).abs() < 1e-6);
        let recs = &est.trace.records;
        assert!(recs.windows(2).all(|w| w[0].iteration < w[1].iteration));
        assert!(recs.iter().all(|r| r.lambda > 0.0 && r.lambda < PI / 4.0));
    }
}
