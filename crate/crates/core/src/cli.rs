//! `condcop` command line: `simulate | fit | summarize | predict`.
//!
//! Settings come from flags or from a flat TOML file passed with `--config`
//! (keys as in [`FileConfig`]); flags win over the file. `fit` writes the
//! fully resolved settings back out as `run.toml`, so
//! `condcop fit --config <out>/run.toml` replays a run exactly.
//!
//! Exit codes: 0 success, 2 validation error, 3 runtime error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calibration::{BetaVector, Calibration};
use crate::error::{Error, Result};
use crate::io::{self, InputData};
use crate::posterior::{component_summary, linear_grid, predictive_sample, ranked_components, tau_curve};
use crate::pseudo::{quantile_from_sorted, to_pseudo, CovariateScaling, PseudoDataset};
use crate::sampler::{run_chain, ChainTrace, McmcConfig, PriorConfig};
use crate::stats::Summary;
use crate::synth::{simulate_dataset, CopulaFamily, SimulationPlan};

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

/// Smallest dataset `fit` accepts.
pub const MIN_FIT_N: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "condcop", version, about = "Bayesian nonparametric conditional copula estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset with known covariate-dependent dependence.
    Simulate(SimulateArgs),
    /// Fit the Dirichlet-process mixture and write trace and summaries.
    Fit(FitArgs),
    /// Summary statistics of the occupied-component count of a trace.
    Summarize(SummarizeArgs),
    /// Posterior-predictive pairs from a trace.
    Predict(PredictArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Standardize {
    /// On for raw (y1, y2) data, off for (u, v) data.
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictAt {
    Observed,
    Grid,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub family: Option<CopulaFamily>,
    #[arg(long)]
    pub calibration: Option<Calibration>,
    /// Generating coefficients, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta: Option<Vec<f64>>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long, default_value = "data.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with columns (y1, y2, x) or (u, v, x).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "fit-out")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub calibration: Option<Calibration>,
    #[arg(long)]
    pub rw_step: Option<f64>,
    /// Keep the random-walk scale fixed during burn-in.
    #[arg(long)]
    pub no_adapt: bool,
    /// Use one random-walk scale for all components instead of dividing it
    /// by the square root of each component's occupancy.
    #[arg(long)]
    pub shared_step: bool,
    /// Skip the Metropolis relabelling moves.
    #[arg(long)]
    pub no_label_swaps: bool,
    /// Random-walk steps fitting the initial atom to all rows (0 disables).
    #[arg(long)]
    pub warm_start: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub standardize: Option<Standardize>,
    /// Independent chains, seeded `seed, seed + 1, ...`, run concurrently.
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long, value_enum)]
    pub predict_at: Option<PredictAt>,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    /// trace.csv or components.csv
    #[arg(long)]
    pub trace: PathBuf,
    /// Defaults to summary.csv next to the trace.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Dataset supplying covariates and, for raw data, the data-scale reference.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    pub standardize: Standardize,
    /// Covariate grid on the fitted scale, used when no dataset is given.
    #[arg(long, default_value_t = 21)]
    pub grid_points: usize,
    #[arg(long, default_value_t = 1)]
    pub draws_per_x: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "predictive.csv")]
    pub out: PathBuf,
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub family: Option<CopulaFamily>,
    pub calibration: Option<Calibration>,
    pub beta: Option<Vec<f64>>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub iters: Option<usize>,
    pub burnin: Option<usize>,
    pub thin: Option<usize>,
    pub lambda: Option<f64>,
    pub sigma2: Option<f64>,
    pub rw_step: Option<f64>,
    pub adapt: Option<bool>,
    pub shared_step: Option<bool>,
    pub no_label_swaps: Option<bool>,
    pub warm_start: Option<usize>,
    pub standardize: Option<Standardize>,
    pub chains: Option<usize>,
    pub grid_points: Option<usize>,
    pub predict_at: Option<PredictAt>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                toml::from_str(&text).map_err(|e| Error::invalid(format!("config {}: {e}", p.display())))
            }
        }
    }
}

/// Fully resolved settings of a `fit` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub calibration: Calibration,
    pub prior: PriorConfig,
    pub mcmc: McmcConfig,
    pub standardize: Standardize,
    pub chains: usize,
    pub grid_points: usize,
    pub predict_at: PredictAt,
}

impl RunConfig {
    pub fn resolve(args: &FitArgs, file: &FileConfig) -> Result<Self> {
        let defaults = McmcConfig::default();
        let prior_defaults = PriorConfig::default();
        let cfg = RunConfig {
            calibration: args.calibration.or(file.calibration).unwrap_or(Calibration::Quadratic),
            prior: PriorConfig {
                total_mass: args.lambda.or(file.lambda).unwrap_or(prior_defaults.total_mass),
                sigma2: args.sigma2.or(file.sigma2).unwrap_or(prior_defaults.sigma2),
            },
            mcmc: McmcConfig {
                iterations: args.iters.or(file.iters).unwrap_or(defaults.iterations),
                burn_in: args.burnin.or(file.burnin).unwrap_or(defaults.burn_in),
                rw_step: args.rw_step.or(file.rw_step).unwrap_or(defaults.rw_step),
                seed: args.seed.or(file.seed).unwrap_or(defaults.seed),
                thin: args.thin.or(file.thin).unwrap_or(defaults.thin),
                adapt: if args.no_adapt { false } else { file.adapt.unwrap_or(defaults.adapt) },
                prior_only: false,
                occupancy_scaled: !(args.shared_step || file.shared_step.unwrap_or(false)),
                label_swaps: !(args.no_label_swaps || file.no_label_swaps.unwrap_or(false)),
                warm_start: args.warm_start.or(file.warm_start).unwrap_or(defaults.warm_start),
            },
            standardize: args.standardize.or(file.standardize).unwrap_or(Standardize::Auto),
            chains: args.chains.or(file.chains).unwrap_or(1),
            grid_points: args.grid_points.or(file.grid_points).unwrap_or(21),
            predict_at: args.predict_at.or(file.predict_at).unwrap_or(PredictAt::Observed),
        };
        cfg.prior.validate()?;
        cfg.mcmc.validate()?;
        if cfg.chains == 0 {
            return Err(Error::invalid("chains must be positive"));
        }
        if cfg.grid_points < 2 {
            return Err(Error::invalid("grid_points must be at least 2"));
        }
        Ok(cfg)
    }

    fn to_file_config(&self) -> FileConfig {
        FileConfig {
            calibration: Some(self.calibration),
            seed: Some(self.mcmc.seed),
            iters: Some(self.mcmc.iterations),
            burnin: Some(self.mcmc.burn_in),
            thin: Some(self.mcmc.thin),
            lambda: Some(self.prior.total_mass),
            sigma2: Some(self.prior.sigma2),
            rw_step: Some(self.mcmc.rw_step),
            adapt: Some(self.mcmc.adapt),
            shared_step: Some(!self.mcmc.occupancy_scaled),
            no_label_swaps: Some(!self.mcmc.label_swaps),
            warm_start: Some(self.mcmc.warm_start),
            standardize: Some(self.standardize),
            chains: Some(self.chains),
            grid_points: Some(self.grid_points),
            predict_at: Some(self.predict_at),
            ..FileConfig::default()
        }
    }
}

/// What `fit` records next to its outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub data: PathBuf,
    pub input_kind: String,
    pub n: usize,
    pub chain: usize,
    pub chain_seed: u64,
    pub config: RunConfig,
    pub covariate_scaling: Option<CovariateScaling>,
    pub acceptance_rate: f64,
    pub final_rw_step: f64,
    pub outputs: Vec<String>,
}

/// Parses the process arguments and runs the command.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let mut stdout = std::io::stdout().lock();
    match run(cli, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_RUNTIME
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Fit(a) => cmd_fit(&a, out).map(|_| ()),
        Command::Summarize(a) => cmd_summarize(&a, out).map(|_| ()),
        Command::Predict(a) => cmd_predict(&a, out),
    }
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let family = args.family.or(file.family).unwrap_or(CopulaFamily::Gaussian);
    let calibration = args.calibration.or(file.calibration).unwrap_or(Calibration::Quadratic);
    let n = args.n.or(file.n).unwrap_or(500);
    let seed = args.seed.or(file.seed).unwrap_or(1);
    let mut plan = SimulationPlan::new(family, calibration, n, seed);
    if let Some(beta) = args.beta.clone().or(file.beta.clone()) {
        plan.truth_beta = BetaVector::new(beta)?;
    }
    plan.covariate_range = (
        args.x_min.or(file.x_min).unwrap_or(-2.0),
        args.x_max.or(file.x_max).unwrap_or(2.0),
    );
    let data = simulate_dataset(&plan)?;
    io::write_pseudo(io::create(&args.out)?, &data)?;
    let meta = sidecar_path(&args.out);
    serde_json::to_writer_pretty(io::create(&meta)?, &plan)?;
    writeln!(out, "wrote {} rows to {} (plan: {})", data.len(), args.out.display(), meta.display())?;
    Ok(())
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Copula-scale data with the covariate on the fitted scale.
struct Prepared {
    pseudo: PseudoDataset,
    scaling: Option<CovariateScaling>,
    /// Sorted raw columns for mapping predictive pairs back to the data scale.
    reference: Option<(Vec<f64>, Vec<f64>)>,
    kind: &'static str,
}

fn prepare(input: InputData, standardize: Standardize) -> Result<Prepared> {
    let raw = matches!(input, InputData::Raw(_));
    let on = match standardize {
        Standardize::Auto => raw,
        Standardize::On => true,
        Standardize::Off => false,
    };
    let (mut pseudo, reference) = match input {
        InputData::Raw(d) => {
            let p = to_pseudo(&d);
            let mut y1 = d.y1;
            let mut y2 = d.y2;
            y1.sort_by(f64::total_cmp);
            y2.sort_by(f64::total_cmp);
            (p, Some((y1, y2)))
        }
        InputData::Pseudo(p) => (p, None),
    };
    let scaling = if on {
        let s = CovariateScaling::fit(&pseudo.x)?;
        pseudo.x.iter_mut().for_each(|x| *x = s.forward(*x));
        Some(s)
    } else {
        None
    };
    Ok(Prepared {
        pseudo,
        scaling,
        reference,
        kind: if raw { "raw" } else { "pseudo" },
    })
}

fn to_data_scale(scaling: Option<&CovariateScaling>, x: f64) -> f64 {
    scaling.map_or(x, |s| s.inverse(x))
}

pub struct FitOutcome {
    pub traces: Vec<ChainTrace>,
    pub out_dirs: Vec<PathBuf>,
}

pub fn cmd_fit(args: &FitArgs, out: &mut dyn Write) -> Result<FitOutcome> {
    let file = FileConfig::load(args.config.as_deref())?;
    let cfg = RunConfig::resolve(args, &file)?;
    let input = io::read_input_path(&args.data)?;
    if input.len() < MIN_FIT_N {
        return Err(Error::invalid(format!(
            "need at least {MIN_FIT_N} observations, got {}",
            input.len()
        )));
    }
    let prep = prepare(input, cfg.standardize)?;

    let seeds: Vec<u64> = (0..cfg.chains as u64).map(|c| cfg.mcmc.seed.wrapping_add(c)).collect();
    let traces: Vec<Result<ChainTrace>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let mcmc = McmcConfig { seed, ..cfg.mcmc.clone() };
                let pseudo = &prep.pseudo;
                let (prior, spec) = (cfg.prior, cfg.calibration);
                scope.spawn(move || run_chain(pseudo, prior, spec, mcmc))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Consistency("chain thread panicked".into()))))
            .collect()
    });
    let traces = traces.into_iter().collect::<Result<Vec<_>>>()?;

    let mut out_dirs = Vec::new();
    for (c, trace) in traces.iter().enumerate() {
        let dir = if cfg.chains == 1 {
            args.out_dir.clone()
        } else {
            args.out_dir.join(format!("chain_{}", c + 1))
        };
        write_fit_outputs(&dir, args, &cfg, &prep, trace, c, seeds[c], out)?;
        out_dirs.push(dir);
    }
    Ok(FitOutcome { traces, out_dirs })
}

#[allow(clippy::too_many_arguments)]
fn write_fit_outputs(
    dir: &Path,
    args: &FitArgs,
    cfg: &RunConfig,
    prep: &Prepared,
    trace: &ChainTrace,
    chain: usize,
    seed: u64,
    out: &mut dyn Write,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let scaling = prep.scaling.as_ref();
    io::write_trace(io::create(&dir.join("trace.csv"))?, trace)?;

    let (lo, hi) = prep
        .pseudo
        .x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let grid = linear_grid(lo, hi, cfg.grid_points);
    let mut curve = tau_curve(trace, &grid)?;
    curve.x_grid.iter_mut().for_each(|x| *x = to_data_scale(scaling, *x));
    io::write_tau_curve(io::create(&dir.join("tau_curve.csv"))?, &curve)?;

    let comps = component_summary(trace)?;
    io::write_components(io::create(&dir.join("components.csv"))?, &comps)?;
    io::write_summary(io::create(&dir.join("summary.csv"))?, &comps.stats)?;

    let covariates = match cfg.predict_at {
        PredictAt::Observed => prep.pseudo.x.clone(),
        PredictAt::Grid => grid.clone(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut draws = predictive_sample(trace, &covariates, &mut rng)?;
    draws.iter_mut().for_each(|d| d.x = to_data_scale(scaling, d.x));
    let ys: Option<Vec<(f64, f64)>> = prep.reference.as_ref().map(|(y1, y2)| {
        draws
            .iter()
            .map(|d| (quantile_from_sorted(d.pair.u, y1), quantile_from_sorted(d.pair.v, y2)))
            .collect()
    });
    io::write_predictive(io::create(&dir.join("predictive.csv"))?, &draws, ys.as_deref())?;

    let run_toml = RunConfig {
        mcmc: McmcConfig { seed, ..cfg.mcmc.clone() },
        chains: 1,
        ..cfg.clone()
    }
    .to_file_config();
    std::fs::write(
        dir.join("run.toml"),
        toml::to_string(&run_toml).map_err(|e| Error::invalid(e.to_string()))?,
    )?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        data: args.data.clone(),
        input_kind: prep.kind.to_string(),
        n: prep.pseudo.len(),
        chain: chain + 1,
        chain_seed: seed,
        config: cfg.clone(),
        covariate_scaling: prep.scaling,
        acceptance_rate: trace.acceptance_rate(),
        final_rw_step: trace.rw_step,
        outputs: ["trace.csv", "tau_curve.csv", "components.csv", "summary.csv", "predictive.csv", "run.toml"]
            .map(String::from)
            .to_vec(),
    };
    serde_json::to_writer_pretty(io::create(&dir.join("manifest.json"))?, &manifest)?;

    writeln!(out, "chain {} (seed {seed}) -> {}", chain + 1, dir.display())?;
    writeln!(
        out,
        "  kept {} iterations, MH acceptance {:.3}, step {:.4}",
        trace.len(),
        trace.acceptance_rate(),
        trace.rw_step
    )?;
    print_summary(out, &comps.stats)?;
    let ranked = ranked_components(trace, &prep.pseudo.x, 2)?;
    for r in ranked {
        writeln!(
            out,
            "  component rank {}: mean weight {:.4}, mean rho {:.4} ({} iterations)",
            r.rank + 1,
            r.mean_weight,
            r.mean_rho,
            r.iterations
        )?;
    }
    Ok(())
}

fn print_summary(out: &mut dyn Write, s: &Summary) -> Result<()> {
    writeln!(out, "  {:>6} {:>9} {:>7} {:>7} {:>9} {:>6}", "Min.", "1st Qu.", "Median", "Mean", "3rd Qu.", "Max.")?;
    writeln!(
        out,
        "  {:>6} {:>9} {:>7} {:>7.3} {:>9} {:>6}",
        s.min, s.q1, s.median, s.mean, s.q3, s.max
    )?;
    Ok(())
}

pub fn cmd_summarize(args: &SummarizeArgs, out: &mut dyn Write) -> Result<Summary> {
    let d_star = io::read_d_star(std::fs::File::open(&args.trace)?)?;
    let stats = Summary::of(&d_star)?;
    let dest = args.out.clone().unwrap_or_else(|| {
        args.trace
            .parent()
            .map(|p| p.join("summary.csv"))
            .unwrap_or_else(|| PathBuf::from("summary.csv"))
    });
    io::write_summary(io::create(&dest)?, &stats)?;
    writeln!(out, "number of occupied components over {} iterations", d_star.len())?;
    print_summary(out, &stats)?;
    Ok(stats)
}

pub fn cmd_predict(args: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    let trace = io::read_trace_path(&args.trace)?;
    if args.draws_per_x == 0 {
        return Err(Error::invalid("draws_per_x must be positive"));
    }
    let (covariates, scaling, reference) = match &args.data {
        Some(path) => {
            let prep = prepare(io::read_input_path(path)?, args.standardize)?;
            (prep.pseudo.x, prep.scaling, prep.reference)
        }
        None => (linear_grid(-2.0, 2.0, args.grid_points), None, None),
    };
    let xs: Vec<f64> = covariates
        .iter()
        .flat_map(|&x| std::iter::repeat_n(x, args.draws_per_x))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut draws = predictive_sample(&trace, &xs, &mut rng)?;
    draws.iter_mut().for_each(|d| d.x = to_data_scale(scaling.as_ref(), d.x));
    let ys: Option<Vec<(f64, f64)>> = reference.as_ref().map(|(y1, y2)| {
        draws
            .iter()
            .map(|d| (quantile_from_sorted(d.pair.u, y1), quantile_from_sorted(d.pair.v, y2)))
            .collect()
    });
    io::write_predictive(io::create(&args.out)?, &draws, ys.as_deref())?;
    writeln!(out, "wrote {} predictive pairs to {}", draws.len(), args.out.display())?;
    Ok(())
}
