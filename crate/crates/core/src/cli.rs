//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on a runtime or numerical failure, 2 on a
//! usage error (bad flags, unreadable input file).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::asymptotics::{asymptotic_variances, AsymptoticReport};
use crate::criterion::Criterion;
use crate::error::Error;
use crate::io::{read_signal, read_signal_csv, write_series, write_signal};
use crate::linear::{lse_linear_with, residuals, sample_acf, AmplitudeSolve};
use crate::mnr::{estimate_fundamental, MnrConfig};
use crate::montecarlo::{run_experiment_with_threads, write_summary_csv, ExperimentSpec};
use crate::signal::{
    cartesian_to_polar, mean_correct, synthesize, HarmonicModel, LinearProcessSpec,
};
use crate::spectrum::{fourier_grid, harmonic_criterion_qn, periodogram, InitMode};

#[derive(Debug, Parser)]
#[command(
    name = "fundfreq",
    version,
    about = "Fundamental frequency estimation for harmonic signals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic harmonic signal, one sample per line.
    Synth(SynthArgs),
    /// Estimate the fundamental frequency and amplitudes of a signal file.
    Estimate(EstimateArgs),
    /// Periodogram and harmonic-sum criterion over the Fourier grid.
    Periodogram(PeriodogramArgs),
    /// Replicated estimation over sample sizes and noise levels.
    Simulate(SimulateArgs),
    /// Asymptotic variances of the frequency estimators.
    Asymvar(AsymvarArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Built-in model.
    #[arg(long, value_parser = ["1", "2"], conflicts_with = "model_file")]
    preset: Option<String>,
    /// JSON model file: {"lambda": 0.25, "amplitudes": [[5, 3], [4, 2.5]]}.
    #[arg(long)]
    model_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NoiseArgs {
    /// `iid` or `ma:<a0,a1,...>`.
    #[arg(long, default_value = "iid", value_parser = parse_noise)]
    noise: NoiseCoeffs,
}

#[derive(Debug, Clone)]
struct NoiseCoeffs(Vec<f64>);

fn parse_noise(s: &str) -> Result<NoiseCoeffs, String> {
    if s == "iid" {
        return Ok(NoiseCoeffs(vec![1.0]));
    }
    let list = s
        .strip_prefix("ma:")
        .ok_or_else(|| format!("expected `iid` or `ma:<coeffs>`, got {s:?}"))?;
    let coeffs = parse_list::<f64>(list)?;
    LinearProcessSpec::new(coeffs.clone(), 1.0).map_err(|e| e.to_string())?;
    Ok(NoiseCoeffs(coeffs))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<T>()
                .map_err(|_| format!("cannot parse {x:?}"))
        })
        .collect()
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Innovation variance; omit for a noiseless signal.
    #[arg(long, value_parser = positive_f64)]
    sigma2: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = positive_f64)]
    sample_rate: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MnrArgs {
    #[arg(long, default_value_t = 0.25)]
    step_factor: f64,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    #[arg(long, default_value_t = 6.0 / 7.0)]
    subsample_exponent: f64,
    #[arg(long, default_value_t = 0)]
    subsample_start: usize,
    #[arg(long, value_enum, default_value_t = InitMode::HarmonicSum)]
    init_mode: InitMode,
    #[arg(long, value_enum, default_value_t = Criterion::Joint)]
    criterion: Criterion,
    /// Take the single subsample step without the doubling warm-up.
    #[arg(long)]
    no_warmup: bool,
}

impl MnrArgs {
    fn config(&self) -> MnrConfig {
        MnrConfig {
            step_factor: self.step_factor,
            tol: self.tol,
            max_iter: self.max_iter,
            subsample_exponent: self.subsample_exponent,
            subsample_start: self.subsample_start,
            init_mode: self.init_mode,
            criterion: self.criterion,
            warmup: !self.no_warmup,
        }
    }
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Signal file: one sample per line, or CSV with --column.
    #[arg(long)]
    input: PathBuf,
    /// Read this named column of a CSV file.
    #[arg(long)]
    column: Option<String>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of harmonics.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    p: u64,
    #[command(flatten)]
    mnr: MnrArgs,
    #[arg(long, value_enum, default_value_t = AmplitudeSolve::Joint)]
    amplitudes: AmplitudeSolve,
    /// Subtract the sample mean first.
    #[arg(long)]
    mean_correct: bool,
    /// Noise shape used for the asymptotic variances.
    #[command(flatten)]
    noise: NoiseArgs,
    /// Innovation variance for the asymptotic variances; estimated from the
    /// residuals when omitted.
    #[arg(long, value_parser = positive_f64)]
    sigma2: Option<f64>,
    /// Emit the full JSON report.
    #[arg(long)]
    json: bool,
    /// Write residuals here, one per line.
    #[arg(long)]
    residuals_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PeriodogramArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Harmonics in the criterion; also restricts the grid to below π/p.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    p: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// `1`, `2` or a JSON model file.
    #[arg(long, default_value = "1")]
    model: String,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Comma-separated sample sizes.
    #[arg(long, value_parser = parse_sizes)]
    n: Sizes,
    /// Comma-separated innovation variances.
    #[arg(long, value_parser = parse_variances)]
    sigma2: Variances,
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; all cores when neither this nor the variable is set.
    #[arg(long, env = "FUNDFREQ_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    #[command(flatten)]
    mnr: MnrArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
struct Sizes(Vec<usize>);
#[derive(Debug, Clone)]
struct Variances(Vec<f64>);

fn parse_sizes(s: &str) -> Result<Sizes, String> {
    let v = parse_list::<usize>(s)?;
    if v.contains(&0) {
        return Err("sample sizes must be positive".into());
    }
    Ok(Sizes(v))
}

fn parse_variances(s: &str) -> Result<Variances, String> {
    s.split(',')
        .map(|x| positive_f64(x.trim()))
        .collect::<Result<_, _>>()
        .map(Variances)
}

#[derive(Debug, Args)]
struct AsymvarArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, value_parser = positive_f64)]
    sigma2: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Print a CSV header and row instead of JSON.
    #[arg(long)]
    csv: bool,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Periodogram(a) => cmd_periodogram(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Asymvar(a) => cmd_asymvar(a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p).map_err(|e| {
            Failure::Usage(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn read_model_file(path: &Path) -> Result<HarmonicModel, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("bad model file {}: {e}", path.display())))
}

fn preset(name: &str) -> Option<HarmonicModel> {
    match name {
        "1" => Some(HarmonicModel::model1()),
        "2" => Some(HarmonicModel::model2()),
        _ => None,
    }
}

impl ModelArgs {
    fn resolve(&self) -> Result<HarmonicModel, Failure> {
        match (&self.preset, &self.model_file) {
            (Some(name), None) => Ok(preset(name).expect("validated by clap")),
            (None, Some(path)) => read_model_file(path),
            _ => Err(Failure::Usage(
                "one of --preset or --model-file is required".into(),
            )),
        }
    }
}

fn load_input(args: &InputArgs) -> Result<crate::signal::Signal, Failure> {
    let result = match &args.column {
        Some(col) => read_signal_csv(&args.input, col),
        None => read_signal(&args.input),
    };
    result.map_err(|e| match e {
        Error::Io(err) => Failure::Usage(format!("cannot read {}: {err}", args.input.display())),
        other => Failure::Usage(format!("{}: {other}", args.input.display())),
    })
}

fn cmd_synth(a: SynthArgs) -> CliResult {
    let model = a.model.resolve()?;
    let noise = a
        .sigma2
        .map(|s2| LinearProcessSpec::new(a.noise.noise.0.clone(), s2))
        .transpose()?;
    let signal = synthesize(&model, a.n as usize, noise.as_ref(), a.seed)?
        .with_sample_rate(a.sample_rate)?;
    write_signal(&signal, output(a.out.as_deref())?)?;
    Ok(())
}

#[derive(Serialize)]
struct AmplitudeReport {
    j: usize,
    a: f64,
    b: f64,
    rho: f64,
    phi: f64,
}

fn cmd_estimate(a: EstimateArgs) -> CliResult {
    let mut signal = load_input(&a.input)?;
    if a.mean_correct {
        signal = mean_correct(&signal);
    }
    let y = signal.samples();
    let p = a.p as usize;
    let config = a.mnr.config();
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;

    let est = estimate_fundamental(y, p, &config)?;
    let lambda = est.lambda_hat;
    let amps = lse_linear_with(y, lambda, p, a.amplitudes)?;
    let resid = residuals(y, lambda, &amps);

    let n = y.len();
    let rss: f64 = resid.iter().map(|e| e * e).sum();
    let mean = resid.iter().sum::<f64>() / n as f64;
    let dof = n.saturating_sub(2 * p + 1).max(1) as f64;
    let residual_variance = rss / dof;
    let acf = sample_acf(&resid, 5.min(n - 1)).ok();

    let coeffs = a.noise.noise.0.clone();
    let gain: f64 = coeffs.iter().map(|c| c * c).sum();
    let (sigma2, sigma2_source) = match a.sigma2 {
        Some(s) => (s, "given"),
        None => (residual_variance / gain, "residuals"),
    };
    let asym: Option<AsymptoticReport> =
        match (HarmonicModel::new(lambda, amps.clone()), sigma2 > 0.0) {
            (Ok(fitted), true) => Some(asymptotic_variances(
                &fitted,
                &LinearProcessSpec::new(coeffs.clone(), sigma2)?,
                n,
            )),
            _ => None,
        };

    if let Some(path) = &a.residuals_out {
        write_series(&resid, File::create(path)?)?;
    }

    let mut out = io::stdout().lock();
    if a.json {
        let amplitudes: Vec<AmplitudeReport> = amps
            .iter()
            .enumerate()
            .map(|(i, &(am, bm))| {
                let (rho, phi) = cartesian_to_polar(am, bm);
                AmplitudeReport {
                    j: i + 1,
                    a: am,
                    b: bm,
                    rho,
                    phi,
                }
            })
            .collect();
        let report = json!({
            "lambda_hat": lambda,
            "amplitudes": amplitudes,
            "residual_summary": {
                "n": n,
                "mean": mean,
                "rss": rss,
                "variance": residual_variance,
                "acf": acf,
            },
            "asym": asym.map(|r| json!({
                "noise_coeffs": coeffs,
                "sigma2_source": sigma2_source,
                "report": r,
            })),
            "trace": est.trace,
            "config": {
                "p": p,
                "mnr": config,
                "amplitude_solve": a.amplitudes,
                "mean_correct": a.mean_correct,
                "sample_rate": signal.sample_rate(),
            },
        });
        serde_json::to_writer_pretty(&mut out, &report).map_err(io::Error::from)?;
        writeln!(out)?;
    } else {
        writeln!(out, "lambda_hat = {lambda}")?;
        if let Some(fs) = signal.sample_rate() {
            writeln!(
                out,
                "frequency  = {} Hz",
                lambda * fs / (2.0 * std::f64::consts::PI)
            )?;
        }
        writeln!(
            out,
            "status     = {:?} after {} iterates",
            est.trace.status,
            est.trace.records.len() - 1
        )?;
        for (i, (am, bm)) in amps.iter().enumerate() {
            writeln!(out, "harmonic {}: A = {am:.6}, B = {bm:.6}", i + 1)?;
        }
        writeln!(out, "residual variance = {residual_variance:.6e}")?;
        if let Some(r) = &asym {
            writeln!(
                out,
                "asymptotic variance: lse {:.5e}, mnr {:.5e}",
                r.var_lse, r.var_mnr
            )?;
        }
    }
    Ok(())
}

fn cmd_periodogram(a: PeriodogramArgs) -> CliResult {
    let signal = load_input(&a.input)?;
    let y = signal.samples();
    let p = a.p as usize;
    let mut w = csv::Writer::from_writer(output(a.out.as_deref())?);
    let csv_err = |e: csv::Error| Failure::Runtime(e.to_string());
    w.write_record(["lambda", "I", "Q_N"]).map_err(csv_err)?;
    for lambda in fourier_grid(y.len(), p) {
        let i = periodogram(y, lambda)?;
        let q = harmonic_criterion_qn(y, lambda, p)?;
        w.write_record([
            format!("{lambda:.5e}"),
            format!("{i:.5e}"),
            format!("{q:.5e}"),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> CliResult {
    let model = match preset(&a.model) {
        Some(m) => m,
        None => read_model_file(Path::new(&a.model))?,
    };
    let spec = ExperimentSpec {
        model,
        noise_coeffs: a.noise.noise.0.clone(),
        sample_sizes: a.n.0.clone(),
        sigma2_values: a.sigma2.0.clone(),
        replications: a.reps as usize,
        master_seed: a.seed,
        mnr_config: a.mnr.config(),
    };
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let threads = a
        .threads
        .map_or_else(rayon::current_num_threads, |t| t as usize);
    let rows = run_experiment_with_threads(&spec, threads)?;
    for r in rows.iter().filter(|r| r.flagged()) {
        eprintln!(
            "warning: n={} sigma2={}: {} of {} replications failed",
            r.n, r.sigma2, r.failure_count, r.replications
        );
    }
    write_summary_csv(&rows, output(a.out.as_deref())?)?;
    Ok(())
}

fn cmd_asymvar(a: AsymvarArgs) -> CliResult {
    let model = a.model.resolve()?;
    let spec = LinearProcessSpec::new(a.noise.noise.0.clone(), a.sigma2)?;
    let r = asymptotic_variances(&model, &spec, a.n as usize);
    let mut out = io::stdout().lock();
    if a.csv {
        writeln!(out, "n,sigma2,beta_star,delta_g,var_lse,var_mnr")?;
        writeln!(
            out,
            "{},{:.5e},{:.5e},{:.5e},{:.5e},{:.5e}",
            r.n, r.sigma2, r.beta_star, r.delta_g, r.var_lse, r.var_mnr
        )?;
    } else {
        serde_json::to_writer_pretty(&mut out, &r).map_err(io::Error::from)?;
        writeln!(out)?;
    }
    Ok(())
}
