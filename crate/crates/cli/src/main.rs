use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use memlab::farima::simulate;
use memlab::harness::{self, parse_innovation, TableId};
use memlab::memory_theory::{
    classify_covariance, classify_spectral, classify_square_antipersistent, classify_type1_square,
};
use memlab::power_rank::{
    analytic_option_derivatives, analytic_put_derivatives, option_rank, power_rank, EmpiricalMarginal,
    MarginalSampler, RankTolerance,
};
use memlab::scalar::{format_ratio_decimal, parse_decimal_ratio};
use memlab::series::{read_series, read_values, write_series, write_values};
use memlab::spectral::{gph_estimate, Bandwidth, Regressor};
use memlab::transforms::apply;
use memlab::verification::{self, VerifyConfig};
use memlab::{ExactMemoryClass, ProcessKind, ProcessSpec, Rational, Series, Transform};
use num_rational::Ratio;

#[derive(Parser)]
#[command(name = "memlab", version, about = "Memory of nonlinear transforms of long-memory linear processes")]
struct Cli {
    /// Base random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (defaults to standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Experiment config file, used by `run`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a FARIMA or Type-I path; writes values plus a JSON sidecar.
    Simulate(SimulateArgs),
    /// Apply a pointwise transform to a series file.
    Transform {
        #[arg(long)]
        input: PathBuf,
        /// e.g. pow:2, poly:0,-3,0,1, sin, exp, ind:0.1, call:45.5, callm:0.06
        #[arg(long, allow_hyphen_values = true)]
        transform: String,
    },
    /// GPH log-periodogram estimate of the memory parameter.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        /// `default` (⌊n^0.8⌋) or a fixed number of frequencies.
        #[arg(long, default_value = "default")]
        bandwidth: String,
        #[arg(long, default_value = "log-sin")]
        regressor: String,
    },
    /// Power rank of a transform under a process marginal or an empirical sample.
    Rank(RankArgs),
    /// Theoretical memory class, in exact arithmetic.
    Theory(TheoryArgs),
    /// Reproduce one of the preset simulation tables as CSV.
    Table {
        /// T1, T2, T4 or T5.
        id: String,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Run the experiment described by --config.
    Run,
    /// Run the numerical verification suite.
    Verify {
        /// Reduced sizes.
        #[arg(long)]
        quick: bool,
        /// CSV instead of a table.
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Memory parameter.
    #[arg(long, allow_hyphen_values = true)]
    d: f64,
    /// farima or type1.
    #[arg(long, default_value = "farima")]
    kind: String,
    /// Comma-separated AR coefficients φ₁, …, φ_p.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ar: Vec<f64>,
    /// Comma-separated MA coefficients θ₁, …, θ_q.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ma: Vec<f64>,
    /// gaussian, t:<nu>, abs-t:<nu>; append :raw to keep the unit scale.
    #[arg(long, default_value = "gaussian")]
    innovation: String,
}

impl ModelArgs {
    fn spec(&self) -> memlab::Result<ProcessSpec<f64>> {
        let kind = match self.kind.as_str() {
            "farima" => ProcessKind::StationaryFarima,
            "type1" => ProcessKind::TypeI,
            other => return Err(memlab::Error::Parse(format!("unknown process kind {other:?}"))),
        };
        let spec = ProcessSpec {
            d: self.d,
            ar: self.ar.clone(),
            ma: self.ma.clone(),
            kind,
            innovation: parse_innovation(&self.innovation)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: usize,
    /// Filter truncation M (default 2n).
    #[arg(long)]
    truncation: Option<usize>,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long, allow_hyphen_values = true)]
    transform: String,
    /// Use the empirical law of this series instead of a model marginal.
    #[arg(long, conflicts_with = "d")]
    input: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    d: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ar: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ma: Vec<f64>,
    #[arg(long, default_value = "gaussian")]
    innovation: String,
    /// Draws in the frozen marginal sample.
    #[arg(long, default_value_t = 200_000)]
    samples: usize,
    #[arg(long, default_value_t = 4)]
    max_rank: usize,
    /// Filter truncation for the model marginal.
    #[arg(long, default_value_t = 4000)]
    truncation: usize,
    /// Threshold for option payoff ranks.
    #[arg(long, default_value_t = 1e-3)]
    tolerance: f64,
}

#[derive(Args)]
struct TheoryArgs {
    /// Memory parameter as a decimal or fraction, e.g. 0.4 or 2/5.
    #[arg(long, allow_hyphen_values = true)]
    d: String,
    /// Power rank.
    #[arg(long)]
    k: Option<u32>,
    /// Covariance sense with β = 1 − d; needs --k.
    #[arg(long)]
    covariance: bool,
    /// Slowly varying part is not constant (covariance sense only).
    #[arg(long)]
    varying: bool,
    /// X² for an antipersistent process, −1 < d < 0.
    #[arg(long)]
    square: bool,
    /// X² for a Type-I process, 1/2 < d < 1.
    #[arg(long)]
    type1: bool,
}

enum Failure {
    Invalid(String),
    ChecksFailed,
}

impl From<memlab::Error> for Failure {
    fn from(e: memlab::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)?
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_series(out: Option<&Path>, series: &Series<f64>) -> Result<(), Failure> {
    match out {
        Some(p) => write_series(p, series)?,
        None => {
            let mut text = String::with_capacity(series.values.len() * 20);
            for v in &series.values {
                text.push_str(&v.to_string());
                text.push('\n');
            }
            emit(None, &text)?;
        }
    }
    Ok(())
}

fn parse_transform(text: &str) -> Result<Transform<f64>, Failure> {
    Ok(text.parse()?)
}

fn theory(args: &TheoryArgs) -> Result<String, Failure> {
    let d: Rational = parse_decimal_ratio(&args.d)
        .ok_or_else(|| Failure::Invalid(format!("cannot read d = {:?} as an exact decimal", args.d)))?;
    let class: ExactMemoryClass = if args.type1 {
        classify_type1_square(d)?
    } else if args.square {
        classify_square_antipersistent(d)?
    } else {
        let k = args
            .k
            .ok_or_else(|| Failure::Invalid("--k is required unless --square or --type1 is given".into()))?;
        if args.covariance {
            classify_covariance(Ratio::from_integer(1) - d, k, !args.varying)?
        } else {
            classify_spectral(d, k)?
        }
    };
    Ok(class.render(format_ratio_decimal))
}

fn rank(args: &RankArgs, seed: u64) -> Result<String, Failure> {
    let t = parse_transform(&args.transform)?;
    let mut out = String::new();
    if let Some(path) = &args.input {
        let values = read_values(path)?;
        if t.is_payoff() {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let centred: Vec<f64> = values.iter().map(|x| x - mean).collect();
            let g = EmpiricalMarginal::new(&centred)?;
            let (first, second) = match t {
                Transform::Call(k) => analytic_option_derivatives(k - mean, |x| g.cdf(x), |x| g.pdf(x)),
                Transform::CallFromMean(o) => analytic_option_derivatives(o, |x| g.cdf(x), |x| g.pdf(x)),
                Transform::Put(k) => analytic_put_derivatives(k - mean, |x| g.cdf(x), |x| g.pdf(x)),
                Transform::PutFromMean(o) => analytic_put_derivatives(o, |x| g.cdf(x), |x| g.pdf(x)),
                _ => unreachable!("payoff transforms only"),
            };
            out.push_str(&format!("H1 = {first:.6e}\nH2 = {second:.6e}\n"));
            out.push_str(&format!("rank = {}\n", option_rank(first, second, args.tolerance)));
            return Ok(out);
        }
        let sample = MarginalSampler::empirical(values).sample()?;
        let r = power_rank(&t, &sample, args.max_rank, RankTolerance::default())?;
        return Ok(render_rank(&r));
    }
    let d = args
        .d
        .ok_or_else(|| Failure::Invalid("give --d for a model marginal or --input for an empirical one".into()))?;
    let model = ModelArgs {
        d,
        kind: "farima".into(),
        ar: args.ar.clone(),
        ma: args.ma.clone(),
        innovation: args.innovation.clone(),
    };
    let sample = MarginalSampler::farima(model.spec()?, args.truncation, args.samples, seed).sample()?;
    let r = power_rank(&t, &sample, args.max_rank, RankTolerance::default())?;
    Ok(render_rank(&r))
}

fn render_rank(r: &memlab::power_rank::PowerRankResult<f64>) -> String {
    let mut out = String::new();
    for (e, th) in r.estimates.iter().zip(&r.thresholds) {
        out.push_str(&format!(
            "K{} = {:+.6e}  se {:.2e}  threshold {:.2e}\n",
            e.order, e.value, e.std_error, th
        ));
    }
    out.push_str(&format!("rank = {}\n", r.rank_label()));
    out
}

fn run(cli: Cli) -> Result<(), Failure> {
    let seed = cli.seed.unwrap_or(harness::DEFAULT_SEED);
    let out = cli.out.as_deref();
    match cli.command {
        Command::Simulate(a) => {
            let spec = a.model.spec()?;
            let series = simulate(&spec, a.n, a.truncation, seed)?;
            emit_series(out, &series)
        }
        Command::Transform { input, transform } => {
            let t = parse_transform(&transform)?;
            let (series, _) = read_series(&input)?;
            let result = apply(&t, &series);
            match out {
                Some(p) if series.meta.spec.is_some() => write_series(p, &result)?,
                Some(p) => write_values(p, &result.values)?,
                None => emit_series(None, &result)?,
            }
            Ok(())
        }
        Command::Estimate {
            input,
            bandwidth,
            regressor,
        } => {
            let values = read_values(&input)?;
            let bw = if bandwidth == "default" {
                Bandwidth::Default
            } else {
                Bandwidth::Fixed(
                    bandwidth
                        .parse()
                        .map_err(|_| Failure::Invalid(format!("bad bandwidth {bandwidth:?}")))?,
                )
            };
            let reg: Regressor = regressor.parse()?;
            let e = gph_estimate(&values, bw, reg)?;
            emit(
                out,
                &format!(
                    "d_hat = {:.6}\nstd_error = {:.6}\nbandwidth = {}\nn = {}\n",
                    e.d_hat, e.std_error, e.bandwidth, e.n
                ),
            )
        }
        Command::Rank(a) => emit(out, &rank(&a, seed)?),
        Command::Theory(a) => emit(out, &(theory(&a)? + "\n")),
        Command::Table { id, scale } => {
            let id: TableId = id.parse()?;
            let cfg = harness::table_config(id, scale, seed)?;
            emit(out, &harness::render_csv(&harness::run_experiment(&cfg)?))
        }
        Command::Run => {
            let path = cli
                .config
                .ok_or_else(|| Failure::Invalid("run needs --config <file>".into()))?;
            let mut cfg = harness::load_config(&path)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let csv = harness::render_csv(&harness::run_experiment(&cfg)?);
            emit(out.or(cfg.output.as_deref()), &csv)
        }
        Command::Verify { quick, csv } => {
            let mut cfg = if quick { VerifyConfig::quick() } else { VerifyConfig::default() };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let reports = verification::run_all(&cfg);
            let text = if csv {
                verification::render_csv(&reports)
            } else {
                verification::render_table(&reports)
            };
            emit(out, &text)?;
            if reports.iter().all(|r| r.passed) {
                Ok(())
            } else {
                Err(Failure::ChecksFailed)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::ChecksFailed) => {
            eprintln!("verification failed");
            ExitCode::from(2)
        }
    }
}
