//! Command-line pipeline for bivariate extremal dependence analysis:
//! simulate benchmark data, fit GEV margins and standardize, run the
//! trans-dimensional sampler, summarize the posterior, and compute
//! predictive exceedance probabilities.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 I/O or corrupt
//! file, 4 numeric failure (non-convergence, degenerate data).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use bexdep::io::{self, ChainMeta, MarginsFile};
use bexdep::margins::fit_gev;
use bexdep::mcmc::{self, McmcConfig};
use bexdep::prior::PriorConfig;
use bexdep::summary::{self, default_grid};
use bexdep::{DependenceModel, Error, FrechetSample, GevParams};

#[derive(Parser)]
#[command(
    name = "bexdep",
    version,
    about = "Bayesian nonparametric inference of bivariate extremal dependence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate unit-Fréchet pairs from a parametric dependence model.
    Simulate(SimulateArgs),
    /// Fit GEV margins to two-column block maxima and standardize to the
    /// unit-Fréchet scale.
    Transform(TransformArgs),
    /// Run the trans-dimensional sampler on unit-Fréchet pairs.
    Fit(FitArgs),
    /// Posterior summaries (function bands, order posterior, vertex masses).
    Summarize(SummarizeArgs),
    /// Predictive joint and conditional exceedance probabilities.
    Predict(PredictArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Model spec: sl:a | al:a,t1,t2 | hr:l | et:w,v
    #[arg(long)]
    model: String,
    /// Number of pairs
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path (columns y1,y2)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TransformArgs {
    /// Input CSV with two numeric columns of block maxima
    #[arg(long)]
    input: PathBuf,
    /// Output CSV of unit-Fréchet pairs
    #[arg(long)]
    out_data: PathBuf,
    /// Output JSON with the fitted margins
    #[arg(long)]
    out_margins: Option<PathBuf>,
    /// Skip fitting and use margins from this JSON file
    #[arg(long)]
    fixed_margins: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Input CSV of unit-Fréchet pairs (header y1,y2)
    #[arg(long)]
    input: PathBuf,
    /// Output chain file (JSON lines)
    #[arg(long)]
    out: PathBuf,
    /// Order prior: `poisson:<mean>` or `negbin:<mean>,<variance>`
    #[arg(long, default_value = "poisson:7")]
    k_prior: String,
    #[arg(long, default_value_t = 500_000)]
    iterations: usize,
    #[arg(long, default_value_t = 400_000)]
    burn_in: usize,
    #[arg(long, default_value_t = 4)]
    thin: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Starting order (defaults to the prior mode)
    #[arg(long)]
    init_k: Option<usize>,
    /// Probability of the within-order refresh move per iteration
    #[arg(long, default_value_t = 0.5)]
    refresh_prob: f64,
    /// Number of independent chains (derived seeds, one file per chain)
    #[arg(long, default_value_t = 1)]
    chains: usize,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Chain file produced by `fit`
    #[arg(long)]
    chain: PathBuf,
    /// Output CSV with pointwise bands
    #[arg(long)]
    out_csv: PathBuf,
    /// Output JSON report (order posterior, vertex masses, chi)
    #[arg(long)]
    out_json: PathBuf,
    /// Number of grid points on [0, 1]
    #[arg(long, default_value_t = 101)]
    grid: usize,
}

#[derive(Args)]
struct PredictArgs {
    /// Chain file produced by `fit`
    #[arg(long)]
    chain: PathBuf,
    /// Joint-exceedance query "y1,y2" on the unit-Fréchet scale (repeatable)
    #[arg(long = "y")]
    y: Vec<String>,
    /// Conditional query: coordinate to condition on (1 or 2)
    #[arg(long)]
    condition_on: Option<usize>,
    /// Conditional query: data-scale threshold
    #[arg(long)]
    q: Option<f64>,
    /// Conditional query: margins JSON (as written by `transform`)
    #[arg(long)]
    margins: Option<PathBuf>,
    /// Output JSON path
    #[arg(long)]
    out: PathBuf,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

/// Errors raised while running a command (after argument validation).
fn run_error(e: Error) -> CliError {
    let code = match &e {
        Error::Domain(_) | Error::InvalidCoefficients(_) => 2,
        Error::Io(_) | Error::Format(_) | Error::EmptyChain => 3,
        _ => 4,
    };
    CliError { code, message: e.to_string() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Transform(args) => cmd_transform(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Summarize(args) => cmd_summarize(args),
        Command::Predict(args) => cmd_predict(args),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let model: DependenceModel =
        args.model.parse().map_err(|e: Error| CliError::usage(e.to_string()))?;
    if args.n == 0 {
        return Err(CliError::usage("--n must be at least 1"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
    let sample = model.sample(args.n, &mut rng).map_err(run_error)?;
    io::write_pairs_csv(&args.out, sample.pairs()).map_err(run_error)
}

fn cmd_transform(args: TransformArgs) -> Result<(), CliError> {
    let rows = io::read_pairs_csv(&args.input).map_err(run_error)?;
    let (col1, col2): (Vec<f64>, Vec<f64>) = rows.iter().copied().unzip();

    let margins_file = match &args.fixed_margins {
        Some(path) => io::read_json::<MarginsFile>(path).map_err(run_error)?,
        None => {
            let fit1 = fit_gev(&col1).map_err(run_error)?;
            let fit2 = fit_gev(&col2).map_err(run_error)?;
            MarginsFile::from_fits(&fit1, &fit2)
        }
    };
    let (m1, m2) = margins_file.params().map_err(run_error)?;

    let mut frechet = Vec::with_capacity(rows.len());
    for &(z1, z2) in &rows {
        let y1 = m1.to_unit_frechet(z1).map_err(run_error)?;
        let y2 = m2.to_unit_frechet(z2).map_err(run_error)?;
        frechet.push((y1, y2));
    }
    io::write_pairs_csv(&args.out_data, &frechet).map_err(run_error)?;
    if let Some(out_margins) = &args.out_margins {
        io::write_json(out_margins, &margins_file).map_err(run_error)?;
    }
    Ok(())
}

/// Output path for chain `index` when several chains run: `stem-chain<i>.ext`.
fn chain_path(base: &Path, index: usize, n_chains: usize) -> PathBuf {
    if n_chains == 1 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default();
    let ext = base.extension().map(|s| s.to_string_lossy());
    let name = match ext {
        Some(ext) => format!("{stem}-chain{index}.{ext}"),
        None => format!("{stem}-chain{index}"),
    };
    base.with_file_name(name)
}

fn max_threads() -> usize {
    if let Ok(v) = std::env::var("BEXDEP_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let prior: PriorConfig =
        args.k_prior.parse().map_err(|e: Error| CliError::usage(e.to_string()))?;
    if args.chains == 0 {
        return Err(CliError::usage("--chains must be at least 1"));
    }
    let cfg = McmcConfig {
        iterations: args.iterations,
        burn_in: args.burn_in,
        thin: args.thin,
        seed: args.seed,
        prior,
        init_k: args.init_k,
        refresh_prob: args.refresh_prob,
    };
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;

    let raw = std::fs::read(&args.input).map_err(|e| run_error(e.into()))?;
    let digest = format!("{:016x}", io::fnv1a64(&raw));
    let data: FrechetSample = io::read_frechet_csv(&args.input).map_err(run_error)?;

    let outputs =
        mcmc::run_chains(&cfg, Some(&data), args.chains, max_threads()).map_err(run_error)?;
    for (i, out) in outputs.iter().enumerate() {
        let meta = ChainMeta {
            seed: mcmc::chain_seed(cfg.seed, i),
            iterations: cfg.iterations,
            burn_in: cfg.burn_in,
            thin: cfg.thin,
            prior,
            init_k: cfg.init_k,
            refresh_prob: cfg.refresh_prob,
            n_obs: data.len(),
            data_digest: digest.clone(),
            acceptance_rate: out.acceptance_rate,
            refresh_acceptance_rate: if out.refresh_acceptance_rate.is_nan() {
                None
            } else {
                Some(out.refresh_acceptance_rate)
            },
        };
        // single-chain runs use the base seed, not a derived one
        let meta = if args.chains == 1 { ChainMeta { seed: cfg.seed, ..meta } } else { meta };
        let path = chain_path(&args.out, i, args.chains);
        io::write_chain(&path, &meta, &out.states).map_err(run_error)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SummaryReport {
    n_states: usize,
    n_obs: usize,
    acceptance_rate: f64,
    data_digest: String,
    k_posterior: BTreeMap<usize, f64>,
    k_median: usize,
    ess_log_likelihood: f64,
    p0: summary::ScalarSummary,
    p1: summary::ScalarSummary,
    chi: summary::ScalarSummary,
}

fn cmd_summarize(args: SummarizeArgs) -> Result<(), CliError> {
    if args.grid < 2 {
        return Err(CliError::usage("--grid must be at least 2"));
    }
    let (meta, states) = io::read_chain(&args.chain).map_err(run_error)?;
    let grid = default_grid(args.grid);
    let posterior = summary::summarize(&states, &grid).map_err(run_error)?;
    let diag = mcmc::diagnostics(&bexdep::mcmc::ChainOutput {
        states: states.clone(),
        k_trace: vec![],
        acceptance_rate: meta.acceptance_rate,
        refresh_acceptance_rate: meta.refresh_acceptance_rate.unwrap_or(f64::NAN),
    })
    .map_err(run_error)?;

    io::write_summary_csv(&args.out_csv, &posterior).map_err(run_error)?;
    let report = SummaryReport {
        n_states: states.len(),
        n_obs: meta.n_obs,
        acceptance_rate: meta.acceptance_rate,
        data_digest: meta.data_digest,
        k_posterior: posterior.k_posterior.clone(),
        k_median: diag.k_median,
        ess_log_likelihood: diag.ess_log_likelihood,
        p0: posterior.p0,
        p1: posterior.p1,
        chi: posterior.chi,
    };
    io::write_json(&args.out_json, &report).map_err(run_error)
}

#[derive(Serialize)]
struct JointQuery {
    y1: f64,
    y2: f64,
    probability: f64,
}

#[derive(Serialize)]
struct ConditionalReport {
    condition_on: usize,
    q: f64,
    y_star1: f64,
    y_star2: f64,
    joint: f64,
    marginal: f64,
    conditional: f64,
}

#[derive(Serialize)]
struct PredictReport {
    joint: Vec<JointQuery>,
    #[serde(skip_serializing_if = "Option::is_none")]
    conditional: Option<ConditionalReport>,
}

fn parse_pair(s: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| CliError::usage(format!("--y takes `y1,y2`, got `{s}`")))?;
    let y1: f64 =
        a.trim().parse().map_err(|_| CliError::usage(format!("bad threshold `{a}`")))?;
    let y2: f64 =
        b.trim().parse().map_err(|_| CliError::usage(format!("bad threshold `{b}`")))?;
    Ok((y1, y2))
}

fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let conditional_requested =
        args.condition_on.is_some() || args.q.is_some() || args.margins.is_some();
    if conditional_requested
        && (args.condition_on.is_none() || args.q.is_none() || args.margins.is_none())
    {
        return Err(CliError::usage(
            "conditional queries need --condition-on, --q and --margins together",
        ));
    }
    if args.y.is_empty() && !conditional_requested {
        return Err(CliError::usage("nothing to do: pass --y and/or a conditional query"));
    }
    let queries: Vec<(f64, f64)> =
        args.y.iter().map(|s| parse_pair(s)).collect::<Result<_, _>>()?;

    let (_meta, states) = io::read_chain(&args.chain).map_err(run_error)?;

    let mut joint = Vec::with_capacity(queries.len());
    for (y1, y2) in queries {
        let probability =
            summary::predictive_exceedance(&states, y1, y2).map_err(run_error)?;
        joint.push(JointQuery { y1, y2, probability });
    }

    let conditional = if conditional_requested {
        let condition_on = args.condition_on.unwrap();
        let q = args.q.unwrap();
        let margins_file: MarginsFile =
            io::read_json(&args.margins.unwrap()).map_err(run_error)?;
        let (m1, m2): (GevParams, GevParams) = margins_file.params().map_err(run_error)?;
        let c = summary::conditional_exceedance(&states, (&m1, &m2), q, condition_on)
            .map_err(run_error)?;
        Some(ConditionalReport {
            condition_on,
            q,
            y_star1: c.y_star.0,
            y_star2: c.y_star.1,
            joint: c.joint,
            marginal: c.marginal,
            conditional: c.conditional,
        })
    } else {
        None
    };

    io::write_json(&args.out, &PredictReport { joint, conditional }).map_err(run_error)
}
