//! End-to-end acceptance checks. Each test prints a single
//! `criterion <n> (<name>): PASS|FAIL` line and then asserts.

use std::process::Command;

use costelm::bsa::{self, benchmarks, BsaConfig};
use costelm::config::RunConfig;
use costelm::cost::{self, cselm_objective, train_cselm, EcselmConfig, ObjectiveMode};
use costelm::dataset::{Dataset, Targets};
use costelm::elm::{self, encode_targets, train_elm, Activation, KernelSpec};
use costelm::eval;
use costelm::subspace;
use costelm::{Matrix, Rng};

fn verdict(criterion: usize, name: &str, pass: bool) {
    println!(
        "criterion {criterion} ({name}): {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} ({name}) failed");
}

fn random_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.uniform(-1.0, 1.0).unwrap())
}

fn random_targets(n: usize, classes: usize, rng: &mut Rng) -> Matrix {
    let labels: Vec<usize> = (0..n)
        .map(|i| {
            if i < classes {
                i + 1 // every class present
            } else {
                (rng.uniform(0.0, classes as f64).unwrap() as usize).min(classes - 1) + 1
            }
        })
        .collect();
    encode_targets(&labels, classes).unwrap()
}

fn rel_frobenius(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}

#[test]
fn criterion_1_reduction_equivalence() {
    let mut rng = Rng::from_seed(101);
    let mut pass = true;
    for case in 0..50 {
        // alternate between the n < l and n >= l solve branches
        let (n, l) = if case % 2 == 0 { (12, 30) } else { (30, 12) };
        let m = 2 + case % 3;
        let c_reg = 2f64.powi((case % 12) as i32 - 2);
        let h = random_matrix(n, l, &mut rng);
        let t = random_targets(n, m, &mut rng);
        let plain = train_elm(&h, &t, c_reg).unwrap();
        let unit = train_cselm(&h, &t, c_reg, &vec![1.0; n]).unwrap();
        if rel_frobenius(&unit, &plain) > 1e-8 {
            pass = false;
        }
    }
    verdict(1, "reduction equivalence", pass);
}

#[test]
fn criterion_2_kkt_residual() {
    let mut rng = Rng::from_seed(202);
    let mut pass = true;
    for case in 0..50 {
        let (n, l) = if case % 2 == 0 { (10, 25) } else { (25, 10) };
        let m = 2 + case % 3;
        let c_reg = 2f64.powi((case % 8) as i32 - 1);
        let h = random_matrix(n, l, &mut rng);
        let t = random_targets(n, m, &mut rng);
        let b: Vec<f64> = (0..n).map(|_| rng.uniform(0.1, 2.0).unwrap()).collect();
        let beta = train_cselm(&h, &t, c_reg, &b).unwrap();
        // stationarity: beta = H' alpha with alpha_i = C * B_i * xi_i
        let xi = &t - &h * &beta;
        let mut alpha = xi.clone();
        for i in 0..n {
            alpha.row_mut(i).scale_mut(c_reg * b[i]);
        }
        let residual = (&beta - h.transpose() * alpha).norm();
        if residual > 1e-6 * (1.0 + t.norm()) {
            pass = false;
        }
    }
    verdict(2, "stationarity residual", pass);
}

#[test]
fn criterion_3_kernel_explicit_equivalence() {
    let mut rng = Rng::from_seed(303);
    let mut pass = true;
    for case in 0..20 {
        // fewer samples than features: the dual form matches a linear kernel
        let n = 6 + case % 5;
        let d = n + 3 + case % 4;
        let m = 2 + case % 2;
        let c_reg = 2f64.powi((case % 6) as i32);
        let x = random_matrix(n, d, &mut rng);
        let t = random_targets(n, m, &mut rng);
        let x_test = random_matrix(8, d, &mut rng);

        let beta = train_elm(&x, &t, c_reg).unwrap(); // features used directly
        let explicit = &x_test * beta;

        let model = elm::train_kernel_elm(&x, &t, c_reg, KernelSpec::Linear).unwrap();
        let kernel = elm::predict_scores(&model, &x_test).unwrap();
        if rel_frobenius(&kernel, &explicit) > 1e-8 {
            pass = false;
        }
    }
    verdict(3, "kernel/explicit equivalence", pass);
}

#[test]
fn criterion_4_optimizer_benchmarks() {
    let run = |objective: fn(&[f64]) -> f64,
               dim: usize,
               pop: usize,
               epochs: usize,
               bound: f64,
               seed: u64|
     -> (f64, bool, bool) {
        let config = BsaConfig::uniform_bounds(pop, dim, -bound, bound, epochs);
        let feasible = std::cell::Cell::new(true);
        let wrapped = |x: &[f64]| {
            if x.iter().any(|&v| !(-bound..=bound).contains(&v)) {
                feasible.set(false);
            }
            objective(x)
        };
        let mut rng = Rng::from_seed(seed);
        let result = bsa::optimize(wrapped, &config, &mut rng).unwrap();
        let monotone = result.history.windows(2).all(|w| w[1] <= w[0]);
        (result.best_fitness, monotone, feasible.get())
    };

    let mut sphere_hits = 0;
    let mut rosen_hits = 0;
    let mut pass = true;
    for seed in 0..10u64 {
        let (best, monotone, feasible) = run(benchmarks::sphere, 10, 30, 500, 5.12, seed);
        if best <= 1e-5 {
            sphere_hits += 1;
        }
        pass &= monotone && feasible;
        let (best, monotone, feasible) = run(benchmarks::rosenbrock, 5, 50, 2000, 2.048, seed);
        if best <= 1e-1 {
            rosen_hits += 1;
        }
        pass &= monotone && feasible;
    }
    pass &= sphere_hits >= 9 && rosen_hits >= 9;
    println!("sphere hits: {sphere_hits}/10, rosenbrock hits: {rosen_hits}/10");
    verdict(4, "optimizer benchmarks", pass);
}

/// 90/10 two-class Gaussian mixture; class 1 (majority) at the origin,
/// class 2 (minority) offset but overlapping.
fn imbalanced_task(n: usize, rng: &mut Rng) -> Dataset {
    let mut x = Matrix::zeros(n, 2);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let minority = i % 10 == 0;
        let center = if minority { 2.0 } else { 0.0 };
        x[(i, 0)] = center + rng.normal();
        x[(i, 1)] = center + rng.normal();
        labels.push(if minority { 2 } else { 1 });
    }
    Dataset::new(
        x,
        Targets::Classes {
            labels,
            class_count: 2,
        },
    )
    .unwrap()
}

#[test]
fn criterion_5_evolutionary_cost_training_beats_baseline() {
    // misclassifying the minority class costs 10x the reverse error
    let class_costs = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 10.0, 0.0]);
    let config = EcselmConfig {
        c_reg: 10.0,
        hidden_nodes: 10,
        activation: Activation::Radbas,
        kernel: None,
        population: 30,
        epochs: 60,
        bound_low: 0.0,
        bound_high: 1.0,
        mixrate: 1.0,
        objective_mode: ObjectiveMode::Classification01,
        holdout_fraction: 0.0,
    };
    let mut cost_wins = 0;
    let mut objective_wins = 0;
    for seed in 0..10u64 {
        let mut data_rng = Rng::from_seed(9000 + seed);
        let train = imbalanced_task(200, &mut data_rng);
        let test = imbalanced_task(200, &mut data_rng);
        let (test_labels, _) = match &test.targets {
            Targets::Classes { labels, class_count } => (labels.clone(), *class_count),
            _ => unreachable!(),
        };

        // the evolutionary fit draws its hidden layer first from the same
        // stream, so the baseline below sees an identical hidden layer
        let mut fit_rng = Rng::from_seed(seed);
        let fit = cost::ecselm_fit(&train, &config, &mut fit_rng).unwrap();
        let evolved = cost::predict_ecselm_labels(&fit.model, &test.x).unwrap();
        let evolved_cost = eval::total_cost(&evolved, &test_labels, &class_costs).unwrap();

        let mut base_rng = Rng::from_seed(seed);
        let hidden =
            elm::init_hidden_layer(2, config.hidden_nodes, config.activation, &mut base_rng)
                .unwrap();
        let h = elm::hidden_output_matrix(&train.x, &hidden).unwrap();
        let (train_labels, _) = match &train.targets {
            Targets::Classes { labels, class_count } => (labels.clone(), *class_count),
            _ => unreachable!(),
        };
        let t = encode_targets(&train_labels, 2).unwrap();
        let beta = train_elm(&h, &t, config.c_reg).unwrap();
        let model = costelm::elm::ElmModel::Explicit { hidden, beta };
        let baseline = cost::predict_ecselm_labels(&model, &test.x).unwrap();
        let baseline_cost = eval::total_cost(&baseline, &test_labels, &class_costs).unwrap();

        if evolved_cost <= baseline_cost {
            cost_wins += 1;
        }

        let all: Vec<usize> = (0..train.sample_count()).collect();
        let unit_objective = cselm_objective(
            &vec![1.0; train.sample_count()],
            &h,
            &t,
            config.c_reg,
            &all,
            ObjectiveMode::Classification01,
        );
        if fit.best_objective <= unit_objective {
            objective_wins += 1;
        }
    }
    println!("total-cost wins: {cost_wins}/10, objective wins: {objective_wins}/10");
    verdict(
        5,
        "evolutionary cost training beats baseline",
        cost_wins >= 8 && objective_wins == 10,
    );
}

/// Cosine of the largest principal angle between the column spaces of a and b.
fn min_principal_cosine(a: &Matrix, b: &Matrix) -> f64 {
    let qa = a.clone().qr().q();
    let qb = b.clone().qr().q();
    let svd = (qa.transpose() * qb).svd(false, false);
    svd.singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn criterion_6_uniform_cost_subspace_reduction() {
    let mut rng = Rng::from_seed(606);
    let classes = 3;
    let dim = 10;
    let per_class = 40;
    let n = classes * per_class;
    let mut x = Matrix::zeros(n, dim);
    let mut labels = Vec::with_capacity(n);
    for k in 0..classes {
        for i in 0..per_class {
            let row = k * per_class + i;
            for j in 0..dim {
                let center = if j == k { 4.0 * (k + 1) as f64 } else { 0.0 };
                x[(row, j)] = center + rng.normal();
            }
            labels.push(k + 1);
        }
    }

    let plain = subspace::lda_scatter(&x, &labels, classes).unwrap();
    let plain_proj = subspace::solve_projection(&plain, 2).unwrap();
    let uniform = {
        let mut costs = Matrix::from_element(classes, classes, 1.0);
        costs.fill_diagonal(0.0);
        subspace::cs_scatter(&x, &labels, &costs, false).unwrap()
    };
    let cs_proj = subspace::solve_projection(&uniform, 2).unwrap();

    // only meaningful when the retained spectrum is separated from the rest
    let full = subspace::solve_projection(&plain, 3).unwrap();
    let eigengap = full.eigenvalues[1] - full.eigenvalues[2];
    let gap_ok = eigengap > 1e-8;
    let cosine = min_principal_cosine(&plain_proj.w, &cs_proj.w);
    let angle = cosine.clamp(-1.0, 1.0).acos();
    println!("eigengap: {eigengap:.3e}, largest principal angle: {angle:.3e}");
    verdict(
        6,
        "uniform-cost subspace reduction",
        gap_ok && angle < 1e-6,
    );
}

#[test]
fn criterion_7_metric_identities() {
    let mut pass = true;

    let predicted = [1usize, 2, 3];
    let truth = [1usize, 3, 5];
    let rank1 = eval::rank1_accuracy(&predicted, &truth).unwrap();
    pass &= (rank1 - 1.0 / 3.0).abs() < 1e-12;
    let curve = eval::cum_score(&predicted, &truth, 4).unwrap();
    pass &= (curve[0] - 100.0 * rank1).abs() < 1e-9;
    pass &= curve.windows(2).all(|w| w[1] >= w[0]);
    pass &= (curve[0] - 100.0 / 3.0).abs() < 1e-9
        && (curve[1] - 200.0 / 3.0).abs() < 1e-9
        && (curve[2] - 100.0).abs() < 1e-12;

    pass &= (eval::mae(&[2.0, 4.0], &[1.0, 6.0]).unwrap() - 1.5).abs() < 1e-12;

    // class 1: 2/2 correct, class 2: 0/4 correct
    let predicted = [1usize, 1, 1, 1, 1, 1];
    let truth = [1usize, 1, 2, 2, 2, 2];
    let (arr, trr) = eval::arr_trr(&predicted, &truth, 2).unwrap();
    pass &= (arr - 0.5).abs() < 1e-12 && (trr - 2.0 / 6.0).abs() < 1e-12;

    let mut costs = Matrix::zeros(2, 2);
    costs[(0, 1)] = 5.0;
    pass &= (eval::total_cost(&[2], &[1], &costs).unwrap() - 5.0).abs() < 1e-12;

    let mut unit = Matrix::from_element(2, 2, 1.0);
    unit.fill_diagonal(0.0);
    let predicted = [1usize, 2, 1, 2];
    let truth = [1usize, 1, 2, 2];
    let errors = eval::total_cost(&predicted, &truth, &unit).unwrap();
    pass &= (errors - 2.0).abs() < 1e-12;

    verdict(7, "metric identities", pass);
}

#[test]
fn criterion_8_deterministic_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let mut rows = String::new();
    let mut rng = Rng::from_seed(8);
    for i in 0..60 {
        let label = i % 3 + 1;
        rows.push_str(&format!(
            "{},{},{}\n",
            label as f64 + rng.normal() * 0.3,
            -(label as f64) + rng.normal() * 0.3,
            label
        ));
    }
    std::fs::write(&data, rows).unwrap();

    let run = |out: &std::path::Path| {
        let status = Command::new(env!("CARGO_BIN_EXE_costelm"))
            .args([
                "train",
                "--data",
                data.to_str().unwrap(),
                "--method",
                "ecselm",
                "--l",
                "15",
                "--c",
                "8",
                "--population",
                "8",
                "--epochs",
                "4",
                "--repetitions",
                "2",
                "--seed",
                "42",
                "--metrics",
                "rank1,arr,trr,total_cost,cumscore",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        let text = std::fs::read_to_string(out).unwrap();
        text.lines()
            .filter(|l| !l.starts_with("wall_clock_ms"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let first = run(&dir.path().join("a.txt"));
    let second = run(&dir.path().join("b.txt"));
    verdict(8, "deterministic reports", first == second && !first.is_empty());
}

#[test]
fn criterion_9_default_config_loads() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/default.conf");
    let config = RunConfig::load(Some(&path), &Default::default()).unwrap();
    let pass = config.population == 100
        && config.epochs == 100
        && config.bound_low == -1.0
        && config.bound_high == 1.0
        && config.c_grid == vec![1.0, 32.0, 1024.0, 1048576.0, 1073741824.0]
        && config.l_grid == vec![100, 200, 300, 400, 500]
        && config.repetitions == 10;
    verdict(9, "default configuration loads", pass);
}
