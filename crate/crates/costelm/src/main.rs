use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use costelm::config::RunConfig;
use costelm::runner;

#[derive(Parser)]
#[command(name = "costelm", version, about = "Cost-sensitive ELM / LDA toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a method on a CSV dataset and write an evaluation report.
    Train(Box<TrainArgs>),
    /// Run the optimizer on a standard benchmark function.
    BsaBench(BsaBenchArgs),
    /// Extract the cumulative-score curve from a training report.
    Cumscore(CumscoreArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// CSV dataset: feature columns followed by a label/target column.
    #[arg(long)]
    data: PathBuf,
    /// `key = value` configuration file; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    // Every config key is also available as a flag of the same name.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    c_grid: Option<String>,
    #[arg(long)]
    l: Option<String>,
    #[arg(long)]
    l_grid: Option<String>,
    #[arg(long)]
    activation: Option<String>,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    population: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    bound_low: Option<String>,
    #[arg(long)]
    bound_high: Option<String>,
    #[arg(long)]
    mixrate: Option<String>,
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    train_fraction: Option<String>,
    #[arg(long)]
    train_size: Option<String>,
    #[arg(long)]
    folds: Option<String>,
    #[arg(long)]
    stratified: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    repetitions: Option<String>,
    #[arg(long)]
    metrics: Option<String>,
    #[arg(long)]
    within_class_normalize: Option<String>,
    #[arg(long)]
    objective_holdout_fraction: Option<String>,
    #[arg(long)]
    objective: Option<String>,
    #[arg(long)]
    subspace_dim: Option<String>,
    #[arg(long)]
    cost_b: Option<String>,
}

impl TrainArgs {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        let mut put = |key: &str, value: &Option<String>| {
            if let Some(v) = value {
                map.insert(key.to_string(), v.clone());
            }
        };
        put("method", &self.method);
        put("c", &self.c);
        put("c_grid", &self.c_grid);
        put("l", &self.l);
        put("l_grid", &self.l_grid);
        put("activation", &self.activation);
        put("kernel", &self.kernel);
        put("gamma", &self.gamma);
        put("population", &self.population);
        put("epochs", &self.epochs);
        put("bound_low", &self.bound_low);
        put("bound_high", &self.bound_high);
        put("mixrate", &self.mixrate);
        put("split", &self.split);
        put("train_fraction", &self.train_fraction);
        put("train_size", &self.train_size);
        put("folds", &self.folds);
        put("stratified", &self.stratified);
        put("seed", &self.seed);
        put("repetitions", &self.repetitions);
        put("metrics", &self.metrics);
        put("within_class_normalize", &self.within_class_normalize);
        put(
            "objective_holdout_fraction",
            &self.objective_holdout_fraction,
        );
        put("objective", &self.objective);
        put("subspace_dim", &self.subspace_dim);
        put("cost_b", &self.cost_b);
        map
    }
}

#[derive(Args)]
struct BsaBenchArgs {
    /// Benchmark function: sphere, rosenbrock, or rastrigin.
    #[arg(long = "fn")]
    function: String,
    #[arg(long, default_value_t = 10)]
    dim: usize,
    #[arg(long, default_value_t = 30)]
    pop: usize,
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    #[arg(long, default_value_t = -5.12)]
    bound_low: f64,
    #[arg(long, default_value_t = 5.12)]
    bound_high: f64,
    #[arg(long, default_value_t = 1.0)]
    mixrate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CumscoreArgs {
    /// A report produced by `costelm train`.
    #[arg(long)]
    report: PathBuf,
    /// Output destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(text: &str, out: Option<&PathBuf>) -> costelm::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> costelm::Result<()> {
    match cli.command {
        Command::Train(args) => {
            let config = RunConfig::load(args.config.as_deref(), &args.overrides())?;
            let report = runner::cmd_train_eval(&config, &args.data)?;
            emit(&report.render(), args.out.as_ref())
        }
        Command::BsaBench(args) => {
            let spec = runner::BenchSpec {
                function: args.function,
                dim: args.dim,
                population: args.pop,
                epochs: args.epochs,
                bound_low: args.bound_low,
                bound_high: args.bound_high,
                mixrate: args.mixrate,
                seed: args.seed,
            };
            let text = runner::cmd_bsa_bench(&spec)?;
            emit(&text, args.out.as_ref())
        }
        Command::Cumscore(args) => {
            let report = std::fs::read_to_string(&args.report)?;
            let text = runner::cmd_emit_cumscore(&report)?;
            emit(&text, args.out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
