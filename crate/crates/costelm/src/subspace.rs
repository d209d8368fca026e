//! Discriminant subspace learning: LDA and cost-sensitive scatter
//! construction, generalized-eigenvector projection, nearest-neighbor
//! decision, the evolutionary class-cost-matrix search, and PCA
//! preprocessing.

use crate::bsa::{self, BsaConfig};
use crate::dataset::{Dataset, Targets};
use crate::error::{Error, Result};
use crate::numerics::{sym_generalized_eig, Matrix, Rng, Vector};

#[derive(Debug, Clone)]
pub struct ScatterPair {
    pub between: Matrix,
    pub within: Matrix,
}

#[derive(Debug, Clone)]
pub struct Projection {
    /// D x d transformation, unit-norm columns sorted by descending eigenvalue.
    pub w: Matrix,
    pub eigenvalues: Vec<f64>,
}

impl Projection {
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.ncols() != self.w.nrows() {
            return Err(Error::Shape(format!(
                "projection expects {} features, got {}",
                self.w.nrows(),
                x.ncols()
            )));
        }
        Ok(x * &self.w)
    }
}

/// Per-class mean rows and class sizes. Every class in `1..=class_count`
/// must be represented.
pub fn class_means(x: &Matrix, labels: &[usize], class_count: usize) -> Result<(Matrix, Vec<usize>)> {
    if x.nrows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} samples but {} labels",
            x.nrows(),
            labels.len()
        )));
    }
    let mut counts = vec![0usize; class_count];
    let mut means = Matrix::zeros(class_count, x.ncols());
    for (i, &l) in labels.iter().enumerate() {
        if l < 1 || l > class_count {
            return Err(Error::InvalidLabel { label: l, class_count });
        }
        counts[l - 1] += 1;
        for j in 0..x.ncols() {
            means[(l - 1, j)] += x[(i, j)];
        }
    }
    for k in 0..class_count {
        if counts[k] == 0 {
            return Err(Error::InvalidDataset(format!("class {} has no samples", k + 1)));
        }
        for j in 0..x.ncols() {
            means[(k, j)] /= counts[k] as f64;
        }
    }
    Ok((means, counts))
}

fn outer_accumulate(acc: &mut Matrix, v: &Vector, scale: f64) {
    if scale == 0.0 {
        return;
    }
    for a in 0..v.len() {
        for b in 0..v.len() {
            acc[(a, b)] += scale * v[a] * v[b];
        }
    }
}

/// Plain LDA scatter: between-class sum over ordered mean pairs,
/// within-class sum weighted by `1/N_k`.
pub fn lda_scatter(x: &Matrix, labels: &[usize], class_count: usize) -> Result<ScatterPair> {
    let (means, counts) = class_means(x, labels, class_count)?;
    let d = x.ncols();
    let mut between = Matrix::zeros(d, d);
    for k in 0..class_count {
        for l in 0..class_count {
            if k == l {
                continue;
            }
            let diff: Vector = (means.row(k) - means.row(l)).transpose();
            outer_accumulate(&mut between, &diff, 1.0);
        }
    }
    let mut within = Matrix::zeros(d, d);
    for (i, &l) in labels.iter().enumerate() {
        let diff: Vector = (x.row(i) - means.row(l - 1)).transpose();
        outer_accumulate(&mut within, &diff, 1.0 / counts[l - 1] as f64);
    }
    Ok(ScatterPair { between, within })
}

/// Row sums of the class cost matrix: the per-class importance weights.
pub fn importance(class_costs: &Matrix) -> Vec<f64> {
    (0..class_costs.nrows())
        .map(|k| class_costs.row(k).sum())
        .collect()
}

/// Cost-sensitive scatter: mean-pair terms weighted by the class costs,
/// within-class terms weighted by the importance of the sample's class.
/// `normalize_within` additionally divides each class's within-class
/// contribution by its size (the plain-LDA convention).
pub fn cs_scatter(
    x: &Matrix,
    labels: &[usize],
    class_costs: &Matrix,
    normalize_within: bool,
) -> Result<ScatterPair> {
    let c = class_costs.nrows();
    if class_costs.ncols() != c {
        return Err(Error::Shape("class cost matrix must be square".into()));
    }
    let (means, counts) = class_means(x, labels, c)?;
    let sigma = importance(class_costs);
    let d = x.ncols();
    let mut between = Matrix::zeros(d, d);
    for k in 0..c {
        for l in 0..c {
            let cost = class_costs[(k, l)];
            if k == l || cost == 0.0 {
                continue;
            }
            let diff: Vector = (means.row(k) - means.row(l)).transpose();
            outer_accumulate(&mut between, &diff, cost);
        }
    }
    let mut within = Matrix::zeros(d, d);
    for (i, &l) in labels.iter().enumerate() {
        let diff: Vector = (x.row(i) - means.row(l - 1)).transpose();
        let scale = if normalize_within {
            sigma[l - 1] / counts[l - 1] as f64
        } else {
            sigma[l - 1]
        };
        outer_accumulate(&mut within, &diff, scale);
    }
    Ok(ScatterPair { between, within })
}

/// Top-`d` generalized eigenvectors of the scatter pencil after a
/// scale-aware ridge on the within-class matrix.
pub fn solve_projection(pair: &ScatterPair, d: usize) -> Result<Projection> {
    let dim = pair.within.nrows();
    let eps = (1e-6 * pair.within.trace() / dim as f64).max(1e-12);
    let sw = &pair.within + Matrix::identity(dim, dim) * eps;
    let (eigenvalues, w) = sym_generalized_eig(&pair.between, &sw, d)?;
    Ok(Projection { w, eigenvalues })
}

/// 1-nearest-neighbor under Euclidean distance; ties go to the lowest
/// training index.
pub fn nn_classify(
    train: &Matrix,
    train_labels: &[usize],
    query: &Matrix,
) -> Result<Vec<usize>> {
    if train.nrows() == 0 {
        return Err(Error::EmptyInput);
    }
    if train.nrows() != train_labels.len() {
        return Err(Error::Shape("training labels do not match rows".into()));
    }
    if train.ncols() != query.ncols() {
        return Err(Error::Shape(format!(
            "train has {} columns, query has {}",
            train.ncols(),
            query.ncols()
        )));
    }
    Ok((0..query.nrows())
        .map(|q| {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for i in 0..train.nrows() {
                let d2: f64 = (0..train.ncols())
                    .map(|j| (train[(i, j)] - query[(q, j)]).powi(2))
                    .sum();
                if d2 < best_d {
                    best_d = d2;
                    best = i;
                }
            }
            train_labels[best]
        })
        .collect())
}

/// Training 0/1 loss of leave-one-out 1-NN in the projected space. The
/// query sample itself is excluded, otherwise every point is its own
/// zero-distance neighbor and the loss is always zero.
fn loo_nn_errors(projected: &Matrix, labels: &[usize]) -> usize {
    let n = projected.nrows();
    let mut errors = 0;
    for q in 0..n {
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for i in 0..n {
            if i == q {
                continue;
            }
            let d2: f64 = (0..projected.ncols())
                .map(|j| (projected[(i, j)] - projected[(q, j)]).powi(2))
                .sum();
            if d2 < best_d {
                best_d = d2;
                best = Some(i);
            }
        }
        if let Some(i) = best {
            if labels[i] != labels[q] {
                errors += 1;
            }
        }
    }
    errors
}

#[derive(Debug, Clone)]
pub struct EcsldaConfig {
    /// Target dimension; defaults to `min(c - 1, D)`.
    pub dim: Option<usize>,
    pub population: usize,
    pub epochs: usize,
    pub bound_low: f64,
    pub bound_high: f64,
    pub mixrate: f64,
    pub normalize_within: bool,
}

impl Default for EcsldaConfig {
    fn default() -> Self {
        Self {
            dim: None,
            population: 100,
            epochs: 100,
            bound_low: -1.0,
            bound_high: 1.0,
            mixrate: 1.0,
            normalize_within: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EcsldaFit {
    pub projection: Projection,
    pub class_costs: Matrix,
    pub best_objective: f64,
    pub history: Vec<f64>,
    /// True when every candidate was degenerate and the uniform-cost LDA
    /// fallback was returned.
    pub fallback: bool,
}

/// Row-major decode of the `c(c-1)` off-diagonal search coordinates into a
/// zero-diagonal class cost matrix.
pub fn decode_class_costs(vector: &[f64], class_count: usize) -> Result<Matrix> {
    let expected = class_count * (class_count - 1);
    if vector.len() != expected {
        return Err(Error::Shape(format!(
            "expected {expected} off-diagonal entries, got {}",
            vector.len()
        )));
    }
    let mut m = Matrix::zeros(class_count, class_count);
    let mut idx = 0;
    for i in 0..class_count {
        for j in 0..class_count {
            if i != j {
                m[(i, j)] = vector[idx];
                idx += 1;
            }
        }
    }
    Ok(m)
}

/// Learn the class cost matrix with the evolutionary search against the
/// leave-one-out 1-NN training loss in the induced subspace.
pub fn ecslda_fit(dataset: &Dataset, config: &EcsldaConfig, rng: &mut Rng) -> Result<EcsldaFit> {
    let (labels, class_count) = match &dataset.targets {
        Targets::Classes { labels, class_count } => (labels.as_slice(), *class_count),
        Targets::Reals(_) => {
            return Err(Error::InvalidDataset(
                "subspace search needs class labels".into(),
            ))
        }
    };
    if class_count < 2 {
        return Err(Error::InvalidDataset("need at least two classes".into()));
    }
    let feat_dim = dataset.feature_count();
    let d = config.dim.unwrap_or_else(|| (class_count - 1).min(feat_dim));
    if d == 0 || d > feat_dim {
        return Err(Error::InvalidDimension(format!(
            "target dimension {d} for {feat_dim} features"
        )));
    }
    let search_dim = class_count * (class_count - 1);

    let objective = |v: &[f64]| -> f64 {
        let costs = match decode_class_costs(v, class_count) {
            Ok(m) => m,
            Err(_) => return f64::INFINITY,
        };
        let pair = match cs_scatter(&dataset.x, labels, &costs, config.normalize_within) {
            Ok(p) => p,
            Err(_) => return f64::INFINITY,
        };
        let proj = match solve_projection(&pair, d) {
            Ok(p) => p,
            Err(_) => return f64::INFINITY,
        };
        match proj.apply(&dataset.x) {
            Ok(projected) => loo_nn_errors(&projected, labels) as f64,
            Err(_) => f64::INFINITY,
        }
    };

    // seed the uniform-cost candidate so the search never loses to plain LDA
    let uniform_seed: Vec<f64> = vec![1.0_f64.clamp(config.bound_low, config.bound_high); search_dim];
    let bsa_config = BsaConfig {
        population_size: config.population,
        dim: search_dim,
        low: vec![config.bound_low; search_dim],
        high: vec![config.bound_high; search_dim],
        epochs: config.epochs,
        mixrate: config.mixrate,
    };
    let result = bsa::optimize_seeded(objective, &bsa_config, &[uniform_seed], rng)?;

    if result.best_fitness.is_infinite() {
        // every candidate degenerate: fall back to uniform-cost LDA
        let costs = decode_class_costs(&vec![1.0; search_dim], class_count)?;
        let pair = cs_scatter(&dataset.x, labels, &costs, config.normalize_within)?;
        let projection = solve_projection(&pair, d)?;
        return Ok(EcsldaFit {
            projection,
            class_costs: costs,
            best_objective: f64::INFINITY,
            history: result.history,
            fallback: true,
        });
    }

    let costs = decode_class_costs(&result.best_solution, class_count)?;
    let pair = cs_scatter(&dataset.x, labels, &costs, config.normalize_within)?;
    let projection = solve_projection(&pair, d)?;
    Ok(EcsldaFit {
        projection,
        class_costs: costs,
        best_objective: result.best_fitness,
        history: result.history,
        fallback: false,
    })
}

/// Mean-centered principal directions by descending variance. Returns the
/// projection and the mean row that must be subtracted before applying it.
pub fn pca(x: &Matrix, d: usize) -> Result<(Projection, Vec<f64>)> {
    let (n, cols) = (x.nrows(), x.ncols());
    if n < 2 {
        return Err(Error::InvalidDataset("PCA needs at least two samples".into()));
    }
    if d == 0 || d > cols.min(n - 1) {
        return Err(Error::InvalidDimension(format!(
            "PCA dimension {d} for {n} samples with {cols} features"
        )));
    }
    let mean: Vec<f64> = (0..cols).map(|j| x.column(j).sum() / n as f64).collect();
    let centered = Matrix::from_fn(n, cols, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let eig = nalgebra::SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut w = Matrix::zeros(cols, d);
    let mut eigenvalues = Vec::with_capacity(d);
    for (col, &idx) in order.iter().take(d).enumerate() {
        eigenvalues.push(eig.eigenvalues[idx]);
        w.set_column(col, &eig.eigenvectors.column(idx).into_owned());
    }
    Ok((Projection { w, eigenvalues }, mean))
}

/// Center query rows by the PCA mean and project.
pub fn pca_apply(projection: &Projection, mean: &[f64], x: &Matrix) -> Result<Matrix> {
    if x.ncols() != mean.len() {
        return Err(Error::Shape(format!(
            "expected {} features, got {}",
            mean.len(),
            x.ncols()
        )));
    }
    let centered = Matrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] - mean[j]);
    projection.apply(&centered)
}
