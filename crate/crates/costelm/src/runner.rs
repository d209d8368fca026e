//! Pipelines behind the CLI subcommands: train/evaluate with repetitions,
//! optimizer benchmarking, and cumulative-score curve emission.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::bsa::{self, benchmarks, BsaConfig};
use crate::config::{CostVectorInit, Method, Metric, RunConfig};
use crate::cost::{
    self, cost_info_vector, train_cselm, EcselmConfig, ObjectiveMode, SampleCostMatrix,
};
use crate::dataset::{load_dataset, Dataset, LoadMode, Targets};
use crate::elm::{
    self, encode_targets, hidden_output_matrix, init_hidden_layer, ElmModel, WeightScheme,
};
use crate::error::{Error, Result};
use crate::eval::{self, make_splits};
use crate::numerics::{Matrix, Rng};
use crate::report::{join_f64, join_usize, mean_std, Report};
use crate::subspace::{self, EcsldaConfig};

#[derive(Debug, Clone, Default)]
struct RepOutcome {
    predicted_labels: Vec<usize>,
    truth_labels: Vec<usize>,
    predicted_scores: Vec<f64>,
    truth_scores: Vec<f64>,
    cost_vector: Option<Vec<f64>>,
    class_costs: Option<Vec<f64>>,
    fitness_history: Option<Vec<f64>>,
}

fn unit_class_costs(class_count: usize) -> Matrix {
    let mut m = Matrix::from_element(class_count, class_count, 1.0);
    m.fill_diagonal(0.0);
    m
}

fn require_labels(dataset: &Dataset) -> Result<(&[usize], usize)> {
    match &dataset.targets {
        Targets::Classes { labels, class_count } => Ok((labels, *class_count)),
        Targets::Reals(_) => Err(Error::InvalidDataset(
            "this method needs class labels".into(),
        )),
    }
}

fn target_matrix(dataset: &Dataset) -> Result<Matrix> {
    match &dataset.targets {
        Targets::Classes { labels, class_count } => encode_targets(labels, *class_count),
        Targets::Reals(v) => Ok(Matrix::from_fn(v.len(), 1, |i, _| v[i])),
    }
}

/// Train on one split and predict the test rows.
fn fit_predict(
    config: &RunConfig,
    c_reg: f64,
    hidden_nodes: usize,
    train: &Dataset,
    test: &Dataset,
    rng: &mut Rng,
    outcome: &mut RepOutcome,
) -> Result<()> {
    let classification = config.objective_mode == ObjectiveMode::Classification01;
    let scores = match config.method {
        Method::Elm | Method::Welm1 | Method::Welm2 | Method::Cselm => {
            let hidden = init_hidden_layer(
                train.feature_count(),
                hidden_nodes,
                config.activation,
                rng,
            )?;
            let h = hidden_output_matrix(&train.x, &hidden)?;
            let t = target_matrix(train)?;
            let beta = match config.method {
                Method::Elm => elm::train_elm(&h, &t, c_reg)?,
                Method::Welm1 | Method::Welm2 => {
                    let (labels, class_count) = require_labels(train)?;
                    let scheme = if config.method == Method::Welm1 {
                        WeightScheme::W1
                    } else {
                        WeightScheme::W2
                    };
                    cost::train_weighted_elm(&h, &t, c_reg, labels, class_count, scheme)?
                }
                Method::Cselm => {
                    let b = match config.cost_b {
                        CostVectorInit::Ones => vec![1.0; train.sample_count()],
                        CostVectorInit::Default => {
                            let (labels, class_count) = require_labels(train)?;
                            let w = elm::class_weights(labels, class_count, WeightScheme::W1)?;
                            let m = SampleCostMatrix::uniform(train.sample_count());
                            cost_info_vector(&w, &m)?
                        }
                    };
                    train_cselm(&h, &t, c_reg, &b)?
                }
                _ => unreachable!(),
            };
            let model = ElmModel::Explicit { hidden, beta };
            elm::predict_scores(&model, &test.x)?
        }
        Method::Kelm => {
            let spec = config
                .kernel
                .ok_or_else(|| Error::Config("kelm requires a kernel".into()))?;
            let t = target_matrix(train)?;
            let model = elm::train_kernel_elm(&train.x, &t, c_reg, spec)?;
            elm::predict_scores(&model, &test.x)?
        }
        Method::Ecselm => {
            let ecfg = EcselmConfig {
                c_reg,
                hidden_nodes,
                activation: config.activation,
                kernel: config.kernel,
                population: config.population,
                epochs: config.epochs,
                bound_low: config.bound_low,
                bound_high: config.bound_high,
                mixrate: config.mixrate,
                objective_mode: config.objective_mode,
                holdout_fraction: config.objective_holdout_fraction,
            };
            let fit = cost::ecselm_fit(train, &ecfg, rng)?;
            outcome.cost_vector = Some(fit.cost_vector.clone());
            outcome.fitness_history = Some(fit.history.clone());
            elm::predict_scores(&fit.model, &test.x)?
        }
        Method::Lda | Method::Ecslda | Method::PcaNn => {
            let (labels, class_count) = require_labels(train)?;
            let (train_proj, test_proj) = match config.method {
                Method::Lda => {
                    let d = config
                        .subspace_dim
                        .unwrap_or_else(|| (class_count - 1).min(train.feature_count()));
                    let pair = subspace::lda_scatter(&train.x, labels, class_count)?;
                    let proj = subspace::solve_projection(&pair, d)?;
                    (proj.apply(&train.x)?, proj.apply(&test.x)?)
                }
                Method::Ecslda => {
                    let scfg = EcsldaConfig {
                        dim: config.subspace_dim,
                        population: config.population,
                        epochs: config.epochs,
                        bound_low: config.bound_low,
                        bound_high: config.bound_high,
                        mixrate: config.mixrate,
                        normalize_within: config.within_class_normalize,
                    };
                    let fit = subspace::ecslda_fit(train, &scfg, rng)?;
                    outcome.class_costs =
                        Some(fit.class_costs.iter().copied().collect::<Vec<f64>>());
                    outcome.fitness_history = Some(fit.history.clone());
                    (
                        fit.projection.apply(&train.x)?,
                        fit.projection.apply(&test.x)?,
                    )
                }
                Method::PcaNn => {
                    let d = config.subspace_dim.unwrap_or_else(|| {
                        train
                            .feature_count()
                            .min(train.sample_count().saturating_sub(1))
                    });
                    let (proj, mean) = subspace::pca(&train.x, d)?;
                    (
                        subspace::pca_apply(&proj, &mean, &train.x)?,
                        subspace::pca_apply(&proj, &mean, &test.x)?,
                    )
                }
                _ => unreachable!(),
            };
            let predicted = subspace::nn_classify(&train_proj, labels, &test_proj)?;
            let (truth, _) = require_labels(test)?;
            outcome.predicted_labels.extend(predicted);
            outcome.truth_labels.extend_from_slice(truth);
            return Ok(());
        }
    };

    if classification {
        let predicted = elm::decide(&scores);
        let (truth, _) = require_labels(test)?;
        outcome.predicted_labels.extend(predicted);
        outcome.truth_labels.extend_from_slice(truth);
    } else {
        let truth = match &test.targets {
            Targets::Reals(v) => v.clone(),
            Targets::Classes { labels, .. } => labels.iter().map(|&l| l as f64).collect(),
        };
        outcome
            .predicted_scores
            .extend((0..scores.nrows()).map(|i| scores[(i, 0)]));
        outcome.truth_scores.extend(truth);
    }
    Ok(())
}

fn run_repetition(
    config: &RunConfig,
    dataset: &Dataset,
    c_reg: f64,
    hidden_nodes: usize,
    seed: u64,
) -> Result<RepOutcome> {
    let mut rng = Rng::from_seed(seed);
    let splits = make_splits(dataset, &config.split, &mut rng)?;
    let mut outcome = RepOutcome::default();
    for split in &splits {
        let train = dataset.subset(&split.train);
        let test = dataset.subset(&split.test);
        fit_predict(config, c_reg, hidden_nodes, &train, &test, &mut rng, &mut outcome)?;
    }
    Ok(outcome)
}

fn scalar_metrics(
    config: &RunConfig,
    outcome: &RepOutcome,
    class_count: Option<usize>,
) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for metric in &config.metrics {
        match metric {
            Metric::Rank1 => {
                out.push((
                    "rank1".to_string(),
                    eval::rank1_accuracy(&outcome.predicted_labels, &outcome.truth_labels)?,
                ));
            }
            Metric::Mae => {
                let value = if outcome.predicted_scores.is_empty() {
                    // classification-as-regression: integer levels directly
                    let p: Vec<f64> =
                        outcome.predicted_labels.iter().map(|&l| l as f64).collect();
                    let t: Vec<f64> = outcome.truth_labels.iter().map(|&l| l as f64).collect();
                    eval::mae(&p, &t)?
                } else {
                    eval::mae(&outcome.predicted_scores, &outcome.truth_scores)?
                };
                out.push(("mae".to_string(), value));
            }
            Metric::Arr | Metric::Trr => {
                let c = class_count
                    .ok_or_else(|| Error::InvalidInput("arr/trr need class labels".into()))?;
                let (arr, trr) =
                    eval::arr_trr(&outcome.predicted_labels, &outcome.truth_labels, c)?;
                match metric {
                    Metric::Arr => out.push(("arr".to_string(), arr)),
                    _ => out.push(("trr".to_string(), trr)),
                }
            }
            Metric::TotalCost => {
                let c = class_count
                    .ok_or_else(|| Error::InvalidInput("total_cost needs class labels".into()))?;
                let costs = unit_class_costs(c);
                out.push((
                    "total_cost".to_string(),
                    eval::total_cost(&outcome.predicted_labels, &outcome.truth_labels, &costs)?,
                ));
            }
            Metric::CumScore => {} // emitted as a vector, not a scalar
        }
    }
    Ok(out)
}

/// Run the full train/evaluate pipeline and build the report.
pub fn cmd_train_eval(config: &RunConfig, data_path: &Path) -> Result<Report> {
    let started = Instant::now();
    let mode = match config.objective_mode {
        ObjectiveMode::Classification01 => LoadMode::Classification,
        ObjectiveMode::RegressionSse => LoadMode::Regression,
    };
    let dataset = load_dataset(data_path, mode)?;
    let class_count = dataset.targets.class_count();

    let mut report = Report::new();
    report.push_header("method", config.method.name());
    report.push_header("data", data_path.display());
    report.push_header("samples", dataset.sample_count());
    report.push_header("features", dataset.feature_count());
    if let Some(c) = class_count {
        report.push_header("class_count", c);
    }
    report.push_header("seed", config.seed);
    report.push_header("repetitions", config.repetitions);
    report.push_header("population", config.population);
    report.push_header("epochs", config.epochs);
    report.push_header("bound_low", config.bound_low);
    report.push_header("bound_high", config.bound_high);
    report.push_header("mixrate", config.mixrate);
    report.push_header("c_grid", join_f64(&config.c_grid));
    report.push_header(
        "l_grid",
        config
            .l_grid
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    report.push_header(
        "metrics",
        config
            .metrics
            .iter()
            .map(|m| m.name())
            .collect::<Vec<_>>()
            .join(","),
    );

    // C and L only matter for the ELM-family methods; subspace methods run
    // a single grid point
    let uses_grid = !matches!(config.method, Method::Lda | Method::Ecslda | Method::PcaNn);
    let c_grid: Vec<f64> = if uses_grid {
        config.c_grid.clone()
    } else {
        vec![config.c_grid[0]]
    };
    let l_grid: Vec<usize> = if uses_grid && config.method != Method::Kelm {
        config.l_grid.clone()
    } else {
        vec![config.l_grid[0]]
    };

    let pool = build_pool()?;
    for &c_reg in &c_grid {
        for &hidden_nodes in &l_grid {
            let outcomes: Vec<Result<RepOutcome>> = pool.install(|| {
                (0..config.repetitions)
                    .into_par_iter()
                    .map(|rep| {
                        let seed = config.seed.wrapping_add(rep as u64);
                        run_repetition(config, &dataset, c_reg, hidden_nodes, seed)
                    })
                    .collect()
            });
            let mut per_metric: Vec<(String, Vec<f64>)> = Vec::new();
            for (rep, outcome) in outcomes.into_iter().enumerate() {
                let outcome = outcome?;
                let scalars = scalar_metrics(config, &outcome, class_count)?;
                let section =
                    report.section(format!("run c={c_reg} l={hidden_nodes} rep={rep}"));
                section.push("seed", config.seed.wrapping_add(rep as u64));
                for (name, value) in &scalars {
                    section.push(name, value);
                }
                if config.metrics.contains(&Metric::CumScore) {
                    if let Some(c) = class_count {
                        let curve = eval::cum_score(
                            &outcome.predicted_labels,
                            &outcome.truth_labels,
                            c - 1,
                        )?;
                        section.push("cumscore", join_f64(&curve));
                    }
                }
                if !outcome.predicted_labels.is_empty() {
                    section.push("predictions", join_usize(&outcome.predicted_labels));
                    section.push("truths", join_usize(&outcome.truth_labels));
                } else {
                    section.push("predictions", join_f64(&outcome.predicted_scores));
                    section.push("truths", join_f64(&outcome.truth_scores));
                }
                if let Some(b) = &outcome.cost_vector {
                    section.push("cost_vector", join_f64(b));
                }
                if let Some(costs) = &outcome.class_costs {
                    section.push("class_costs", join_f64(costs));
                }
                if let Some(history) = &outcome.fitness_history {
                    section.push("fitness_history", join_f64(history));
                }
                for (name, value) in scalars {
                    match per_metric.iter_mut().find(|(n, _)| *n == name) {
                        Some((_, values)) => values.push(value),
                        None => per_metric.push((name, vec![value])),
                    }
                }
            }
            let summary = report.section(format!("summary c={c_reg} l={hidden_nodes}"));
            for (name, values) in per_metric {
                let (mean, std) = mean_std(&values);
                summary.push(&format!("{name}_mean"), mean);
                summary.push(&format!("{name}_std"), std);
            }
        }
    }

    let timing = report.section("timing");
    timing.push("wall_clock_ms", started.elapsed().as_millis());
    Ok(report)
}

fn build_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("COSTELM_THREADS") {
        let threads: usize = raw
            .parse()
            .map_err(|_| Error::Config(format!("COSTELM_THREADS '{raw}' is not a count")))?;
        builder = builder.num_threads(threads.max(1));
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Settings for one optimizer benchmark run.
#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub function: String,
    pub dim: usize,
    pub population: usize,
    pub epochs: usize,
    pub bound_low: f64,
    pub bound_high: f64,
    pub mixrate: f64,
    pub seed: u64,
}

/// Benchmark the optimizer on a standard test function. Emits commented
/// metadata followed by `epoch,best` rows.
pub fn cmd_bsa_bench(spec: &BenchSpec) -> Result<String> {
    let BenchSpec {
        function,
        dim,
        population,
        epochs,
        bound_low,
        bound_high,
        mixrate,
        seed,
    } = spec.clone();
    let objective: fn(&[f64]) -> f64 = match function.as_str() {
        "sphere" => benchmarks::sphere,
        "rosenbrock" => benchmarks::rosenbrock,
        "rastrigin" => benchmarks::rastrigin,
        other => return Err(Error::InvalidInput(format!("unknown function '{other}'"))),
    };
    if dim == 0 {
        return Err(Error::InvalidInput("dim must be >= 1".into()));
    }
    let config = BsaConfig {
        population_size: population,
        dim,
        low: vec![bound_low; dim],
        high: vec![bound_high; dim],
        epochs,
        mixrate,
    };
    let mut rng = Rng::from_seed(seed);
    let result = bsa::optimize(objective, &config, &mut rng)?;
    let mut out = String::new();
    out.push_str(&format!("# function = {function}\n"));
    out.push_str(&format!("# dim = {dim}\n"));
    out.push_str(&format!("# population = {population}\n"));
    out.push_str(&format!("# epochs = {epochs}\n"));
    out.push_str(&format!("# seed = {seed}\n"));
    out.push_str(&format!("# best_fitness = {}\n", result.best_fitness));
    out.push_str(&format!("# best_solution = {}\n", join_f64(&result.best_solution)));
    out.push_str("# epoch,best\n");
    for (epoch, best) in result.history.iter().enumerate() {
        out.push_str(&format!("{epoch},{best}\n"));
    }
    Ok(out)
}

/// Pool per-sample predictions from a training report and emit the
/// cumulative-score curve as `level,percentage` rows for levels
/// `0..class_count`.
pub fn cmd_emit_cumscore(report_text: &str) -> Result<String> {
    let report = Report::parse(report_text)?;
    let class_count: usize = report
        .header_value("class_count")
        .ok_or_else(|| Error::InvalidInput("report has no class_count".into()))?
        .parse()
        .map_err(|_| Error::InvalidInput("bad class_count in report".into()))?;
    let mut predicted = Vec::new();
    let mut truths = Vec::new();
    for section in &report.sections {
        if !section.name.starts_with("run ") {
            continue;
        }
        let (Some(p), Some(t)) = (section.value("predictions"), section.value("truths")) else {
            continue;
        };
        let parse = |s: &str| -> Result<Vec<usize>> {
            s.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidInput("non-integer prediction in report".into()))
                })
                .collect()
        };
        predicted.extend(parse(p)?);
        truths.extend(parse(t)?);
    }
    if predicted.is_empty() {
        return Err(Error::InvalidInput(
            "report contains no per-sample predictions".into(),
        ));
    }
    let curve = eval::cum_score(&predicted, &truths, class_count - 1)?;
    let mut out = String::from("# level,percentage\n");
    for (level, pct) in curve.iter().enumerate() {
        out.push_str(&format!("{level},{pct}\n"));
    }
    Ok(out)
}
