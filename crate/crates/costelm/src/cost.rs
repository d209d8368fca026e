//! Cost-sensitive ELM: cost matrix and cost-information-vector handling,
//! the weighted closed-form solve, and the evolutionary outer loop that
//! learns the cost vector with the backtracking search optimizer.

use crate::bsa::{self, BsaConfig};
use crate::dataset::{Dataset, Targets};
use crate::elm::{
    self, encode_targets, hidden_output_matrix, init_hidden_layer, kernel_matrix, Activation,
    ElmModel, KernelSpec, WeightScheme,
};
use crate::error::{Error, Result};
use crate::numerics::{solve_linear, Matrix, Rng};

/// Per-sample misclassification-loss matrix with a zero diagonal.
#[derive(Debug, Clone)]
pub struct SampleCostMatrix {
    m: Matrix,
}

impl SampleCostMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Shape(format!(
                "cost matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        for i in 0..m.nrows() {
            if m[(i, i)] != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "cost matrix diagonal entry {i} is {}, expected 0",
                    m[(i, i)]
                )));
            }
        }
        Ok(Self { m })
    }

    /// Zero-diagonal all-ones default used when the caller supplies no costs.
    pub fn uniform(n: usize) -> Self {
        let mut m = Matrix::from_element(n, n, 1.0);
        m.fill_diagonal(0.0);
        Self { m }
    }

    pub fn inner(&self) -> &Matrix {
        &self.m
    }

    pub fn size(&self) -> usize {
        self.m.nrows()
    }
}

/// Cost information vector: `B_i = W_ii * sum_j M_ij`.
pub fn cost_info_vector(weights: &[f64], costs: &SampleCostMatrix) -> Result<Vec<f64>> {
    if weights.len() != costs.size() {
        return Err(Error::Shape(format!(
            "{} weights for a {0}x{1} cost matrix",
            weights.len(),
            costs.size()
        )));
    }
    Ok((0..costs.size())
        .map(|i| weights[i] * costs.inner().row(i).sum())
        .collect())
}

/// Expand a c x c class cost matrix to sample level:
/// `M_ij = N_{class(i), class(j)}`.
pub fn expand_class_costs(class_costs: &Matrix, labels: &[usize]) -> Result<SampleCostMatrix> {
    let c = class_costs.nrows();
    if class_costs.ncols() != c {
        return Err(Error::Shape("class cost matrix must be square".into()));
    }
    for &l in labels {
        if l < 1 || l > c {
            return Err(Error::InvalidLabel { label: l, class_count: c });
        }
    }
    let n = labels.len();
    let m = Matrix::from_fn(n, n, |i, j| class_costs[(labels[i] - 1, labels[j] - 1)]);
    SampleCostMatrix::new(m)
}

/// Closed-form output weights with per-sample costs `B`:
/// `H^T (I/C + diag(B) H H^T)^-1 diag(B) T` when `N < L`, otherwise
/// `(I/C + H^T diag(B) H)^-1 H^T diag(B) T`.
pub fn train_cselm(h: &Matrix, t: &Matrix, c_reg: f64, b: &[f64]) -> Result<Matrix> {
    let (n, l) = (h.nrows(), h.ncols());
    if t.nrows() != n {
        return Err(Error::Shape(format!("H has {n} rows, T has {}", t.nrows())));
    }
    if b.len() != n {
        return Err(Error::Shape(format!("B has {} entries for {n} samples", b.len())));
    }
    if c_reg <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "regularization C must be positive, got {c_reg}"
        )));
    }
    // diag(B) * T
    let bt = Matrix::from_fn(n, t.ncols(), |i, j| b[i] * t[(i, j)]);
    if n < l {
        // diag(B) * H * H^T is non-symmetric for non-uniform B
        let hht = h * h.transpose();
        let mut sys = Matrix::from_fn(n, n, |i, j| b[i] * hht[(i, j)]);
        for i in 0..n {
            sys[(i, i)] += 1.0 / c_reg;
        }
        let inner = solve_linear(&sys, &bt)?;
        Ok(h.transpose() * inner)
    } else {
        let bh = Matrix::from_fn(n, l, |i, j| b[i] * h[(i, j)]);
        let sys = h.transpose() * &bh + Matrix::identity(l, l) / c_reg;
        solve_linear(&sys, &(h.transpose() * bt))
    }
}

/// Weighted ELM is the cost-sensitive solve with `B` set to the diagonal
/// class-weight matrix.
pub fn train_weighted_elm(
    h: &Matrix,
    t: &Matrix,
    c_reg: f64,
    labels: &[usize],
    class_count: usize,
    scheme: WeightScheme,
) -> Result<Matrix> {
    let w = elm::class_weights(labels, class_count, scheme)?;
    train_cselm(h, t, c_reg, &w)
}

/// Kernel-form cost-sensitive solve: coefficients
/// `A = (I/C + diag(B) Omega)^-1 diag(B) T`, prediction `k(y)^T A`.
pub fn train_kernel_cselm(
    x: &Matrix,
    t: &Matrix,
    c_reg: f64,
    spec: KernelSpec,
    b: &[f64],
) -> Result<ElmModel> {
    let n = x.nrows();
    if b.len() != n {
        return Err(Error::Shape(format!("B has {} entries for {n} samples", b.len())));
    }
    let omega = kernel_matrix(x, x, spec)?;
    let mut sys = Matrix::from_fn(n, n, |i, j| b[i] * omega[(i, j)]);
    for i in 0..n {
        sys[(i, i)] += 1.0 / c_reg;
    }
    let bt = Matrix::from_fn(n, t.ncols(), |i, j| b[i] * t[(i, j)]);
    let coeff = solve_linear(&sys, &bt)?;
    Ok(ElmModel::Kernel {
        spec,
        train_x: x.clone(),
        coeff,
    })
}

/// Loss driving the evolutionary search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveMode {
    /// Count of argmax mispredictions.
    Classification01,
    /// Sum of squared errors.
    RegressionSse,
}

fn loss_on_rows(
    beta_scores: &Matrix,
    t: &Matrix,
    eval_indices: &[usize],
    mode: ObjectiveMode,
) -> f64 {
    match mode {
        ObjectiveMode::Classification01 => {
            let pred = elm::decide(beta_scores);
            let truth = elm::decide(t);
            eval_indices
                .iter()
                .filter(|&&i| pred[i] != truth[i])
                .count() as f64
        }
        ObjectiveMode::RegressionSse => eval_indices
            .iter()
            .map(|&i| {
                (0..t.ncols())
                    .map(|j| (beta_scores[(i, j)] - t[(i, j)]).powi(2))
                    .sum::<f64>()
            })
            .sum(),
    }
}

fn objective_with(
    b: &[f64],
    h: &Matrix,
    t: &Matrix,
    c_reg: f64,
    fit_indices: Option<&[usize]>,
    eval_indices: &[usize],
    mode: ObjectiveMode,
) -> f64 {
    let beta = match fit_indices {
        None => train_cselm(h, t, c_reg, b),
        Some(fit) => {
            let hf = Matrix::from_fn(fit.len(), h.ncols(), |i, j| h[(fit[i], j)]);
            let tf = Matrix::from_fn(fit.len(), t.ncols(), |i, j| t[(fit[i], j)]);
            let bf: Vec<f64> = fit.iter().map(|&i| b[i]).collect();
            train_cselm(&hf, &tf, c_reg, &bf)
        }
    };
    match beta {
        Ok(beta) => {
            let scores = h * beta;
            if scores.iter().any(|v| !v.is_finite()) {
                return f64::INFINITY;
            }
            loss_on_rows(&scores, t, eval_indices, mode)
        }
        Err(_) => f64::INFINITY,
    }
}

/// Evaluate a candidate cost vector against the precomputed hidden output
/// matrix. Singular or non-finite solves map to `+infinity` so the search
/// stays total.
pub fn cselm_objective(
    b: &[f64],
    h: &Matrix,
    t: &Matrix,
    c_reg: f64,
    eval_indices: &[usize],
    mode: ObjectiveMode,
) -> f64 {
    objective_with(b, h, t, c_reg, None, eval_indices, mode)
}

#[derive(Debug, Clone)]
pub struct EcselmConfig {
    pub c_reg: f64,
    pub hidden_nodes: usize,
    pub activation: Activation,
    /// Kernel form when set; the random hidden layer is skipped.
    pub kernel: Option<KernelSpec>,
    pub population: usize,
    pub epochs: usize,
    pub bound_low: f64,
    pub bound_high: f64,
    pub mixrate: f64,
    pub objective_mode: ObjectiveMode,
    /// Fraction of training rows held out for the search objective;
    /// 0 evaluates on the full training set.
    pub holdout_fraction: f64,
}

impl Default for EcselmConfig {
    fn default() -> Self {
        Self {
            c_reg: 1.0,
            hidden_nodes: 100,
            activation: Activation::Radbas,
            kernel: None,
            population: 100,
            epochs: 100,
            bound_low: -1.0,
            bound_high: 1.0,
            mixrate: 1.0,
            objective_mode: ObjectiveMode::Classification01,
            holdout_fraction: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EcselmFit {
    pub model: ElmModel,
    pub cost_vector: Vec<f64>,
    pub best_objective: f64,
    pub history: Vec<f64>,
}

fn target_matrix(dataset: &Dataset) -> Result<Matrix> {
    match &dataset.targets {
        Targets::Classes { labels, class_count } => encode_targets(labels, *class_count),
        Targets::Reals(v) => Ok(Matrix::from_fn(v.len(), 1, |i, _| v[i])),
    }
}

/// Stratified holdout of the training rows for the search objective.
fn holdout_indices(dataset: &Dataset, fraction: f64, rng: &mut Rng) -> Result<Vec<usize>> {
    let n = dataset.sample_count();
    let take = ((n as f64) * fraction).round() as usize;
    let take = take.clamp(1, n - 1);
    match &dataset.targets {
        Targets::Reals(_) => {
            let perm = rng.permutation(n);
            Ok(perm[..take].to_vec())
        }
        Targets::Classes { labels, class_count } => {
            let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); *class_count];
            for (i, &l) in labels.iter().enumerate() {
                by_class[l - 1].push(i);
            }
            let mut held = Vec::new();
            for group in by_class.iter().filter(|g| !g.is_empty()) {
                let perm = rng.permutation(group.len());
                let k = ((group.len() as f64) * fraction).round() as usize;
                let k = k.min(group.len().saturating_sub(1));
                held.extend(perm[..k].iter().map(|&p| group[p]));
            }
            held.sort_unstable();
            if held.is_empty() {
                held.push(n - 1);
            }
            Ok(held)
        }
    }
}

/// Learn the cost information vector with the evolutionary search and
/// return the model trained at the best vector found.
///
/// The hidden layer is drawn first and its output matrix is computed once;
/// every candidate reuses it. The all-ones vector and the vector derived
/// from the default weighting and cost matrices are injected into the
/// initial population, so the result can never be worse than either.
pub fn ecselm_fit(dataset: &Dataset, config: &EcselmConfig, rng: &mut Rng) -> Result<EcselmFit> {
    let n = dataset.sample_count();
    let t = target_matrix(dataset)?;

    // feature map, precomputed once per run
    enum Features {
        Explicit(crate::elm::HiddenLayer, Matrix),
        Kernel(KernelSpec),
    }
    let features = match config.kernel {
        Some(spec) => Features::Kernel(spec),
        None => {
            let hidden = init_hidden_layer(
                dataset.feature_count(),
                config.hidden_nodes,
                config.activation,
                rng,
            )?;
            let h = hidden_output_matrix(&dataset.x, &hidden)?;
            Features::Explicit(hidden, h)
        }
    };
    // kernel form: substitute Omega for H H^T, i.e. treat Omega columns as
    // the feature map with an N x N "H" and always take the N < L route
    let h = match &features {
        Features::Explicit(_, h) => h.clone(),
        Features::Kernel(spec) => kernel_matrix(&dataset.x, &dataset.x, *spec)?,
    };

    let (fit_idx, eval_idx): (Option<Vec<usize>>, Vec<usize>) = if config.holdout_fraction > 0.0 {
        let held = holdout_indices(dataset, config.holdout_fraction, rng)?;
        let held_set: std::collections::HashSet<usize> = held.iter().copied().collect();
        let fit: Vec<usize> = (0..n).filter(|i| !held_set.contains(i)).collect();
        (Some(fit), held)
    } else {
        (None, (0..n).collect())
    };

    let objective = |b: &[f64]| {
        objective_with(
            b,
            &h,
            &t,
            config.c_reg,
            fit_idx.as_deref(),
            &eval_idx,
            config.objective_mode,
        )
    };

    // seeds: all-ones (plain reduction) and the Algorithm-1 initialization
    // B_i = W_ii * sum_j M_ij with W1 weights and uniform costs
    let ones = vec![1.0; n];
    let mut seeds = vec![ones.clone()];
    if let Targets::Classes { labels, class_count } = &dataset.targets {
        if let Ok(w) = elm::class_weights(labels, *class_count, WeightScheme::W1) {
            let m = SampleCostMatrix::uniform(n);
            if let Ok(b0) = cost_info_vector(&w, &m) {
                seeds.push(b0);
            }
        }
    }

    let bsa_config = BsaConfig {
        population_size: config.population,
        dim: n,
        low: vec![config.bound_low; n],
        high: vec![config.bound_high; n],
        epochs: config.epochs,
        mixrate: config.mixrate,
    };
    let result = bsa::optimize_seeded(objective, &bsa_config, &seeds, rng)?;

    let b_star = result.best_solution.clone();
    let model = match features {
        Features::Explicit(hidden, h_full) => {
            let beta = train_cselm(&h_full, &t, config.c_reg, &b_star)?;
            ElmModel::Explicit { hidden, beta }
        }
        Features::Kernel(spec) => train_kernel_cselm(&dataset.x, &t, config.c_reg, spec, &b_star)?,
    };
    Ok(EcselmFit {
        model,
        cost_vector: b_star,
        best_objective: result.best_fitness,
        history: result.history,
    })
}

/// Classification decision at the learned cost vector; delegates to the
/// shared score/argmax path.
pub fn predict_ecselm_labels(model: &ElmModel, y: &Matrix) -> Result<Vec<usize>> {
    Ok(elm::decide(&elm::predict_scores(model, y)?))
}

/// Regression output (raw scores) at the learned cost vector.
pub fn predict_ecselm_scores(model: &ElmModel, y: &Matrix) -> Result<Matrix> {
    elm::predict_scores(model, y)
}
