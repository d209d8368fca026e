//! Single-hidden-layer network machinery: random feature map, ELM,
//! kernel ELM and the weighted variants.

use crate::error::{Error, Result};
use crate::numerics::{solve_linear, Matrix, Rng, Vector};

/// Hidden-node activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    /// `exp(-t^2)` of the node response, the default feature map.
    Radbas,
    Sigmoid,
}

impl Activation {
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Activation::Radbas => (-(t * t)).exp(),
            Activation::Sigmoid => 1.0 / (1.0 + (-t).exp()),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "radbas" => Ok(Activation::Radbas),
            "sigmoid" => Ok(Activation::Sigmoid),
            other => Err(Error::Config(format!("unknown activation '{other}'"))),
        }
    }
}

/// Kernel used by the kernel-form models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: f64 },
}

impl KernelSpec {
    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            KernelSpec::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            KernelSpec::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

/// Randomly drawn input weights and biases of the hidden layer.
#[derive(Debug, Clone)]
pub struct HiddenLayer {
    pub weights: Matrix, // L x n
    pub biases: Vector,  // L
    pub activation: Activation,
}

impl HiddenLayer {
    pub fn node_count(&self) -> usize {
        self.weights.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }
}

/// A trained model: explicit random-feature form or kernel form.
#[derive(Debug, Clone)]
pub enum ElmModel {
    Explicit {
        hidden: HiddenLayer,
        beta: Matrix, // L x m
    },
    Kernel {
        spec: KernelSpec,
        train_x: Matrix,
        coeff: Matrix, // N x m
    },
}

impl ElmModel {
    pub fn output_dim(&self) -> usize {
        match self {
            ElmModel::Explicit { beta, .. } => beta.ncols(),
            ElmModel::Kernel { coeff, .. } => coeff.ncols(),
        }
    }
}

/// Signed one-hot target rows: `+1` at the label column, `-1` elsewhere.
pub fn encode_targets(labels: &[usize], class_count: usize) -> Result<Matrix> {
    for &l in labels {
        if l < 1 || l > class_count {
            return Err(Error::InvalidLabel { label: l, class_count });
        }
    }
    Ok(Matrix::from_fn(labels.len(), class_count, |i, j| {
        if labels[i] == j + 1 {
            1.0
        } else {
            -1.0
        }
    }))
}

/// Draw hidden weights and biases i.i.d. `U(-1, 1)`.
///
/// Draw order is fixed: all weights row by row, then all biases.
pub fn init_hidden_layer(
    input_dim: usize,
    node_count: usize,
    activation: Activation,
    rng: &mut Rng,
) -> Result<HiddenLayer> {
    if input_dim == 0 || node_count == 0 {
        return Err(Error::InvalidDimension(
            "hidden layer needs input_dim >= 1 and node_count >= 1".into(),
        ));
    }
    let mut weights = Matrix::zeros(node_count, input_dim);
    for i in 0..node_count {
        for j in 0..input_dim {
            weights[(i, j)] = rng.uniform(-1.0, 1.0)?;
        }
    }
    let mut biases = Vector::zeros(node_count);
    for i in 0..node_count {
        biases[i] = rng.uniform(-1.0, 1.0)?;
    }
    Ok(HiddenLayer {
        weights,
        biases,
        activation,
    })
}

/// Hidden layer output matrix: entry `(i, j)` is the activated response of
/// node `j` to sample `i`.
pub fn hidden_output_matrix(x: &Matrix, params: &HiddenLayer) -> Result<Matrix> {
    if x.ncols() != params.input_dim() {
        return Err(Error::Shape(format!(
            "features have {} columns, hidden layer expects {}",
            x.ncols(),
            params.input_dim()
        )));
    }
    let raw = x * params.weights.transpose(); // N x L
    Ok(Matrix::from_fn(raw.nrows(), raw.ncols(), |i, j| {
        params.activation.apply(raw[(i, j)] + params.biases[j])
    }))
}

/// Ridge-regularized least-squares output weights. Uses the small-sample
/// form `H^T (I/C + H H^T)^-1 T` when `N < L`, otherwise
/// `(I/C + H^T H)^-1 H^T T`.
pub fn train_elm(h: &Matrix, t: &Matrix, c_reg: f64) -> Result<Matrix> {
    if h.nrows() != t.nrows() {
        return Err(Error::Shape(format!(
            "H has {} rows, T has {}",
            h.nrows(),
            t.nrows()
        )));
    }
    if c_reg <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "regularization C must be positive, got {c_reg}"
        )));
    }
    let (n, l) = (h.nrows(), h.ncols());
    if n < l {
        let gram = h * h.transpose() + Matrix::identity(n, n) / c_reg;
        let inner = solve_linear(&gram, t)?;
        Ok(h.transpose() * inner)
    } else {
        let gram = h.transpose() * h + Matrix::identity(l, l) / c_reg;
        solve_linear(&gram, &(h.transpose() * t))
    }
}

/// Pairwise kernel matrix between the rows of `xa` and `xb`.
pub fn kernel_matrix(xa: &Matrix, xb: &Matrix, spec: KernelSpec) -> Result<Matrix> {
    if xa.ncols() != xb.ncols() {
        return Err(Error::Shape(format!(
            "kernel operands have {} and {} feature columns",
            xa.ncols(),
            xb.ncols()
        )));
    }
    if let KernelSpec::Rbf { gamma } = spec {
        if gamma <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "rbf gamma must be positive, got {gamma}"
            )));
        }
    }
    let ra: Vec<Vec<f64>> = (0..xa.nrows())
        .map(|i| xa.row(i).iter().copied().collect())
        .collect();
    let rb: Vec<Vec<f64>> = (0..xb.nrows())
        .map(|i| xb.row(i).iter().copied().collect())
        .collect();
    Ok(Matrix::from_fn(xa.nrows(), xb.nrows(), |i, j| {
        spec.eval(&ra[i], &rb[j])
    }))
}

/// Train the kernel-form model: coefficients `A = (I/C + Omega)^-1 T`.
pub fn train_kernel_elm(x: &Matrix, t: &Matrix, c_reg: f64, spec: KernelSpec) -> Result<ElmModel> {
    if x.nrows() != t.nrows() {
        return Err(Error::Shape(format!(
            "X has {} rows, T has {}",
            x.nrows(),
            t.nrows()
        )));
    }
    if c_reg <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "regularization C must be positive, got {c_reg}"
        )));
    }
    let n = x.nrows();
    let omega = kernel_matrix(x, x, spec)?;
    let sys = omega + Matrix::identity(n, n) / c_reg;
    let coeff = solve_linear(&sys, t)?;
    Ok(ElmModel::Kernel {
        spec,
        train_x: x.clone(),
        coeff,
    })
}

/// Per-sample weighting scheme for imbalanced classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightScheme {
    /// `1 / #Class`
    W1,
    /// `0.618 / #Class` for over-average classes, `1 / #Class` otherwise.
    W2,
}

/// Diagonal sample weights from the class sizes.
pub fn class_weights(labels: &[usize], class_count: usize, scheme: WeightScheme) -> Result<Vec<f64>> {
    let mut counts = vec![0usize; class_count];
    for &l in labels {
        if l < 1 || l > class_count {
            return Err(Error::InvalidLabel { label: l, class_count });
        }
        counts[l - 1] += 1;
    }
    if counts.contains(&0) {
        return Err(Error::InvalidDataset("a class has no samples".into()));
    }
    let avg = labels.len() as f64 / class_count as f64;
    Ok(labels
        .iter()
        .map(|&l| {
            let count = counts[l - 1] as f64;
            match scheme {
                WeightScheme::W1 => 1.0 / count,
                WeightScheme::W2 => {
                    if count > avg {
                        0.618 / count
                    } else {
                        1.0 / count
                    }
                }
            }
        })
        .collect())
}

/// Raw output scores for the query rows.
pub fn predict_scores(model: &ElmModel, y: &Matrix) -> Result<Matrix> {
    match model {
        ElmModel::Explicit { hidden, beta } => {
            let h = hidden_output_matrix(y, hidden)?;
            Ok(h * beta)
        }
        ElmModel::Kernel {
            spec,
            train_x,
            coeff,
        } => {
            let k = kernel_matrix(y, train_x, *spec)?;
            Ok(k * coeff)
        }
    }
}

/// Argmax decision per row; ties go to the lowest class index.
pub fn decide(scores: &Matrix) -> Vec<usize> {
    (0..scores.nrows())
        .map(|i| {
            let mut best = 0;
            for j in 1..scores.ncols() {
                if scores[(i, j)] > scores[(i, best)] {
                    best = j;
                }
            }
            best + 1
        })
        .collect()
}
