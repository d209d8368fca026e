//! Backtracking search optimization: a population metaheuristic with a
//! historical population, permutation-based recombination and greedy
//! per-row selection. Used as the black-box minimizer for the cost
//! vector and cost matrix searches.

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

#[derive(Debug, Clone)]
pub struct BsaConfig {
    pub population_size: usize,
    pub dim: usize,
    pub low: Vec<f64>,
    pub high: Vec<f64>,
    pub epochs: usize,
    pub mixrate: f64,
}

impl BsaConfig {
    /// Uniform bounds in every coordinate.
    pub fn uniform_bounds(
        population_size: usize,
        dim: usize,
        low: f64,
        high: f64,
        epochs: usize,
    ) -> Self {
        Self {
            population_size,
            dim,
            low: vec![low; dim],
            high: vec![high; dim],
            epochs,
            mixrate: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidInput("population size must be >= 2".into()));
        }
        if self.dim == 0 {
            return Err(Error::InvalidInput("dimension must be >= 1".into()));
        }
        if self.low.len() != self.dim || self.high.len() != self.dim {
            return Err(Error::InvalidInput("bound vectors must match dim".into()));
        }
        for (l, h) in self.low.iter().zip(&self.high) {
            if l > h {
                return Err(Error::InvalidBounds { low: *l, high: *h });
            }
        }
        if !(self.mixrate > 0.0 && self.mixrate <= 1.0) {
            return Err(Error::InvalidInput("mixrate must be in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BsaState {
    pub population: Matrix,
    pub historical: Matrix,
    pub fitness: Vec<f64>,
    pub best_fitness: f64,
    pub best_solution: Vec<f64>,
    pub epoch: usize,
}

#[derive(Debug, Clone)]
pub struct BsaResult {
    pub best_solution: Vec<f64>,
    pub best_fitness: f64,
    /// Best fitness after initialization and after each epoch (epochs + 1 entries).
    pub history: Vec<f64>,
}

fn random_population(config: &BsaConfig, rng: &mut Rng) -> Result<Matrix> {
    let mut p = Matrix::zeros(config.population_size, config.dim);
    for i in 0..config.population_size {
        for j in 0..config.dim {
            p[(i, j)] = rng.uniform(config.low[j], config.high[j])?;
        }
    }
    Ok(p)
}

fn row_vec(m: &Matrix, i: usize) -> Vec<f64> {
    m.row(i).iter().copied().collect()
}

/// Generate and evaluate the solution and historical populations.
pub fn initialize<F>(config: &BsaConfig, objective: F, rng: &mut Rng) -> Result<BsaState>
where
    F: Fn(&[f64]) -> f64,
{
    config.validate()?;
    let population = random_population(config, rng)?;
    let historical = random_population(config, rng)?;
    let fitness: Vec<f64> = (0..config.population_size)
        .map(|i| objective(&row_vec(&population, i)))
        .collect();
    let mut best = 0;
    for i in 1..fitness.len() {
        if fitness[i] < fitness[best] {
            best = i;
        }
    }
    Ok(BsaState {
        best_fitness: fitness[best],
        best_solution: row_vec(&population, best),
        population,
        historical,
        fitness,
        epoch: 0,
    })
}

/// Memory update for the historical population, split out so tests can
/// force either branch of the `a < b` rule.
pub fn selection_one_forced(state: &mut BsaState, take_current: bool, rng: &mut Rng) {
    if take_current {
        state.historical = state.population.clone();
    }
    let perm = rng.permutation(state.historical.nrows());
    let permuted = Matrix::from_fn(state.historical.nrows(), state.historical.ncols(), |i, j| {
        state.historical[(perm[i], j)]
    });
    state.historical = permuted;
}

/// Draw `a, b ~ U(0,1)`; if `a < b` the historical population is replaced by
/// the current one, then it is row-permuted in place.
pub fn selection_one(state: &mut BsaState, rng: &mut Rng) -> Result<()> {
    let a = rng.uniform(0.0, 1.0)?;
    let b = rng.uniform(0.0, 1.0)?;
    selection_one_forced(state, a < b, rng);
    Ok(())
}

/// Binary crossover map: per individual, with probability 1/2 a random
/// `ceil(mixrate * rand * dim)`-subset of positions is switched on,
/// otherwise exactly one random position.
fn mapping_matrix(config: &BsaConfig, rng: &mut Rng) -> Result<Matrix> {
    let (n, d) = (config.population_size, config.dim);
    let mut map = Matrix::zeros(n, d);
    for i in 0..n {
        if rng.uniform(0.0, 1.0)? < 0.5 {
            let count = (config.mixrate * rng.uniform(0.0, 1.0)? * d as f64).ceil() as usize;
            let perm = rng.permutation(d);
            for &j in perm.iter().take(count.max(1).min(d)) {
                map[(i, j)] = 1.0;
            }
        } else {
            let j = (rng.uniform(0.0, 1.0)? * d as f64) as usize;
            map[(i, j.min(d - 1))] = 1.0;
        }
    }
    Ok(map)
}

/// Trial population `P + 3r * C .* (Q' - P)` with one `r ~ N(0,1)` per
/// generation, followed by boundary control.
pub fn recombine(state: &BsaState, config: &BsaConfig, rng: &mut Rng) -> Result<Matrix> {
    let r = rng.normal();
    let map = mapping_matrix(config, rng)?;
    let mut trial = state.population.clone();
    for i in 0..config.population_size {
        for j in 0..config.dim {
            trial[(i, j)] += 3.0 * r * map[(i, j)] * (state.historical[(i, j)] - state.population[(i, j)]);
        }
    }
    boundary_control(&mut trial, config, rng)?;
    Ok(trial)
}

/// Resample every out-of-bounds element uniformly inside its box.
pub fn boundary_control(p: &mut Matrix, config: &BsaConfig, rng: &mut Rng) -> Result<()> {
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let v = p[(i, j)];
            if v < config.low[j] || v > config.high[j] || !v.is_finite() {
                p[(i, j)] = rng.uniform(config.low[j], config.high[j])?;
            }
        }
    }
    Ok(())
}

/// Greedy per-row replacement and incumbent-best update.
pub fn selection_two(state: &mut BsaState, trial: &Matrix, trial_fitness: &[f64]) {
    for i in 0..state.population.nrows() {
        if trial_fitness[i] < state.fitness[i] {
            for j in 0..state.population.ncols() {
                state.population[(i, j)] = trial[(i, j)];
            }
            state.fitness[i] = trial_fitness[i];
        }
        if state.fitness[i] < state.best_fitness {
            state.best_fitness = state.fitness[i];
            state.best_solution = row_vec(&state.population, i);
        }
    }
    state.epoch += 1;
}

/// Full optimization loop. The objective must be total: failed evaluations
/// are expected to return `f64::INFINITY` rather than error out.
pub fn optimize<F>(objective: F, config: &BsaConfig, rng: &mut Rng) -> Result<BsaResult>
where
    F: Fn(&[f64]) -> f64,
{
    optimize_seeded(objective, config, &[], rng)
}

/// Like [`optimize`], but the given candidates replace the first rows of
/// the initial population. Elitism then guarantees the final best is at
/// least as good as every seed.
pub fn optimize_seeded<F>(
    objective: F,
    config: &BsaConfig,
    seeds: &[Vec<f64>],
    rng: &mut Rng,
) -> Result<BsaResult>
where
    F: Fn(&[f64]) -> f64,
{
    let mut state = initialize(config, &objective, rng)?;
    for (i, seed) in seeds.iter().take(config.population_size).enumerate() {
        if seed.len() != config.dim {
            return Err(Error::InvalidInput(format!(
                "seed {i} has dimension {}, expected {}",
                seed.len(),
                config.dim
            )));
        }
        for (j, &value) in seed.iter().enumerate() {
            state.population[(i, j)] = value.clamp(config.low[j], config.high[j]);
        }
        state.fitness[i] = objective(&row_vec(&state.population, i));
        if state.fitness[i] < state.best_fitness {
            state.best_fitness = state.fitness[i];
            state.best_solution = row_vec(&state.population, i);
        }
    }
    let mut history = Vec::with_capacity(config.epochs + 1);
    history.push(state.best_fitness);
    for _ in 0..config.epochs {
        selection_one(&mut state, rng)?;
        let trial = recombine(&state, config, rng)?;
        let trial_fitness: Vec<f64> = (0..config.population_size)
            .map(|i| objective(&row_vec(&trial, i)))
            .collect();
        selection_two(&mut state, &trial, &trial_fitness);
        history.push(state.best_fitness);
    }
    Ok(BsaResult {
        best_solution: state.best_solution,
        best_fitness: state.best_fitness,
        history,
    })
}

/// Standard box-constrained test functions for benchmarking the optimizer.
pub mod benchmarks {
    pub fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    pub fn rosenbrock(x: &[f64]) -> f64 {
        x.windows(2)
            .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
            .sum()
    }

    pub fn rastrigin(x: &[f64]) -> f64 {
        10.0 * x.len() as f64
            + x.iter()
                .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos())
                .sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_config(dim: usize, epochs: usize) -> BsaConfig {
        BsaConfig::uniform_bounds(20, dim, -5.12, 5.12, epochs)
    }

    #[test]
    fn initialize_is_deterministic_and_in_bounds() {
        let cfg = sphere_config(4, 0);
        let a = initialize(&cfg, benchmarks::sphere, &mut Rng::from_seed(1)).unwrap();
        let b = initialize(&cfg, benchmarks::sphere, &mut Rng::from_seed(1)).unwrap();
        assert_eq!(a.population, b.population);
        for v in a.population.iter() {
            assert!((-5.12..5.12).contains(v));
        }
        let min = a.fitness.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(a.best_fitness, min);
    }

    #[test]
    fn degenerate_bounds_give_identical_individuals() {
        let mut cfg = sphere_config(3, 0);
        cfg.low = vec![0.5; 3];
        cfg.high = vec![0.5; 3];
        let s = initialize(&cfg, benchmarks::sphere, &mut Rng::from_seed(2)).unwrap();
        for v in s.population.iter() {
            assert_eq!(*v, 0.5);
        }
    }

    fn sorted_rows(m: &Matrix) -> Vec<Vec<u64>> {
        let mut rows: Vec<Vec<u64>> = (0..m.nrows())
            .map(|i| m.row(i).iter().map(|v| v.to_bits()).collect())
            .collect();
        rows.sort();
        rows
    }

    #[test]
    fn selection_one_branches() {
        let cfg = sphere_config(5, 0);
        let mut rng = Rng::from_seed(3);
        let mut state = initialize(&cfg, benchmarks::sphere, &mut rng).unwrap();
        let p_rows = sorted_rows(&state.population);
        let q_rows = sorted_rows(&state.historical);
        selection_one_forced(&mut state, true, &mut rng);
        assert_eq!(sorted_rows(&state.historical), p_rows);
        let mut state2 = initialize(&cfg, benchmarks::sphere, &mut rng).unwrap();
        state2.historical = Matrix::from_fn(5, 4, |i, j| state.historical[(i, j)]);
        let before = sorted_rows(&state2.historical);
        selection_one_forced(&mut state2, false, &mut rng);
        assert_eq!(sorted_rows(&state2.historical), before);
        let _ = q_rows;
    }

    #[test]
    fn recombine_identity_when_histories_equal() {
        let cfg = sphere_config(4, 0);
        let mut rng = Rng::from_seed(4);
        let mut state = initialize(&cfg, benchmarks::sphere, &mut rng).unwrap();
        state.historical = state.population.clone();
        let trial = recombine(&state, &cfg, &mut rng).unwrap();
        assert_eq!(trial, state.population);
    }

    #[test]
    fn boundary_control_resamples_violations() {
        let cfg = BsaConfig::uniform_bounds(2, 3, -1.0, 1.0, 0);
        let mut rng = Rng::from_seed(5);
        let mut p = Matrix::from_row_slice(2, 3, &[1.5, 0.0, -3.0, 0.2, f64::NAN, 0.9]);
        boundary_control(&mut p, &cfg, &mut rng).unwrap();
        for v in p.iter() {
            assert!((-1.0..1.0).contains(v) || *v == 0.9 || *v == 0.2 || *v == 0.0);
            assert!(*v >= -1.0 && *v <= 1.0);
        }
        assert_eq!(p[(0, 1)], 0.0);
        assert_eq!(p[(1, 0)], 0.2);
    }

    #[test]
    fn boundary_control_scan() {
        let cfg = BsaConfig::uniform_bounds(100, 100, -1.0, 1.0, 0);
        let mut rng = Rng::from_seed(6);
        let mut p = Matrix::from_fn(100, 100, |_, _| rng.uniform(-10.0, 10.0).unwrap());
        boundary_control(&mut p, &cfg, &mut rng).unwrap();
        assert!(p.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn selection_two_cases() {
        let cfg = sphere_config(3, 0);
        let mut rng = Rng::from_seed(7);
        let mut state = initialize(&cfg, benchmarks::sphere, &mut rng).unwrap();
        let orig = state.clone();
        // all worse: nothing changes
        let worse: Vec<f64> = state.fitness.iter().map(|f| f + 1.0).collect();
        let trial = state.population.clone();
        selection_two(&mut state, &trial, &worse);
        assert_eq!(state.population, orig.population);
        assert_eq!(state.best_fitness, orig.best_fitness);
        // all better: full acceptance
        let better: Vec<f64> = state.fitness.iter().map(|f| f - 1.0).collect();
        let trial2 = Matrix::zeros(20, 3);
        selection_two(&mut state, &trial2, &better);
        assert_eq!(state.population, trial2);
        // mixed: per-row min oracle
        let mut mixed = state.fitness.clone();
        mixed[0] += 5.0;
        mixed[1] -= 5.0;
        let expected: Vec<f64> = state
            .fitness
            .iter()
            .zip(&mixed)
            .map(|(a, b)| a.min(*b))
            .collect();
        let trial3 = state.population.clone();
        selection_two(&mut state, &trial3, &mixed);
        assert_eq!(state.fitness, expected);
    }

    #[test]
    fn zero_epochs_returns_initial_best() {
        let cfg = sphere_config(4, 0);
        let res = optimize(benchmarks::sphere, &cfg, &mut Rng::from_seed(8)).unwrap();
        assert_eq!(res.history.len(), 1);
        assert_eq!(res.history[0], res.best_fitness);
    }

    #[test]
    fn history_non_increasing_and_deterministic() {
        let cfg = sphere_config(6, 50);
        let a = optimize(benchmarks::sphere, &cfg, &mut Rng::from_seed(9)).unwrap();
        let b = optimize(benchmarks::sphere, &cfg, &mut Rng::from_seed(9)).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.best_solution, b.best_solution);
        for w in a.history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn seeded_candidate_bounds_best() {
        let cfg = BsaConfig::uniform_bounds(10, 3, -5.0, 5.0, 5);
        let seed = vec![0.01, 0.01, 0.01];
        let seed_fit = benchmarks::sphere(&seed);
        let res =
            optimize_seeded(benchmarks::sphere, &cfg, &[seed], &mut Rng::from_seed(10)).unwrap();
        assert!(res.best_fitness <= seed_fit);
    }

    #[test]
    fn sentinel_objective_never_wins() {
        let cfg = BsaConfig::uniform_bounds(10, 2, -1.0, 1.0, 20);
        // infinite on the right half-plane
        let obj = |x: &[f64]| {
            if x[0] > 0.0 {
                f64::INFINITY
            } else {
                benchmarks::sphere(x)
            }
        };
        let res = optimize(obj, &cfg, &mut Rng::from_seed(11)).unwrap();
        assert!(res.best_fitness.is_finite());
        assert!(res.best_solution[0] <= 0.0);
    }

    #[test]
    fn sphere_converges() {
        let cfg = BsaConfig::uniform_bounds(30, 10, -5.12, 5.12, 500);
        let res = optimize(benchmarks::sphere, &cfg, &mut Rng::from_seed(12)).unwrap();
        assert!(res.best_fitness <= 1e-5, "best {}", res.best_fitness);
    }
}
