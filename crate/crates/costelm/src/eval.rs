//! Metrics and experiment-protocol utilities: rank-1 accuracy, cumulative
//! score, MAE, per-class recognition rates, total misclassification cost,
//! and dataset splitting.

use crate::dataset::{Dataset, Targets};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

/// Fraction of exactly correct predictions.
pub fn rank1_accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.is_empty() || predicted.len() != truth.len() {
        return Err(Error::EmptyInput);
    }
    let correct = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(correct as f64 / predicted.len() as f64)
}

/// Cumulative score per tolerated error level: percentage of predictions
/// within `level` of the truth, for `level = 0..=max_level`.
pub fn cum_score(predicted: &[usize], truth: &[usize], max_level: usize) -> Result<Vec<f64>> {
    if predicted.is_empty() || predicted.len() != truth.len() {
        return Err(Error::EmptyInput);
    }
    let n = predicted.len() as f64;
    Ok((0..=max_level)
        .map(|level| {
            let within = predicted
                .iter()
                .zip(truth)
                .filter(|(&p, &t)| p.abs_diff(t) <= level)
                .count();
            within as f64 / n * 100.0
        })
        .collect())
}

/// Mean absolute error over real-valued predictions.
pub fn mae(predicted: &[f64], truth: &[f64]) -> Result<f64> {
    if predicted.is_empty() || predicted.len() != truth.len() {
        return Err(Error::EmptyInput);
    }
    let total: f64 = predicted.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum();
    Ok(total / predicted.len() as f64)
}

/// Average recognition rate (mean of per-class recall) and total
/// recognition rate (overall accuracy). Every class in `1..=class_count`
/// must appear among the truths.
pub fn arr_trr(predicted: &[usize], truth: &[usize], class_count: usize) -> Result<(f64, f64)> {
    if predicted.is_empty() || predicted.len() != truth.len() {
        return Err(Error::EmptyInput);
    }
    let mut per_class_total = vec![0usize; class_count];
    let mut per_class_correct = vec![0usize; class_count];
    for (&p, &t) in predicted.iter().zip(truth) {
        if t < 1 || t > class_count {
            return Err(Error::InvalidLabel { label: t, class_count });
        }
        per_class_total[t - 1] += 1;
        if p == t {
            per_class_correct[t - 1] += 1;
        }
    }
    if per_class_total.contains(&0) {
        return Err(Error::InvalidInput(
            "every class must appear among the truths".into(),
        ));
    }
    let arr = per_class_total
        .iter()
        .zip(&per_class_correct)
        .map(|(&total, &correct)| correct as f64 / total as f64)
        .sum::<f64>()
        / class_count as f64;
    let trr = rank1_accuracy(predicted, truth)?;
    Ok((arr, trr))
}

/// Total misclassification cost under a zero-diagonal class cost matrix:
/// each record contributes the cost of classifying its true class as the
/// predicted one.
pub fn total_cost(predicted: &[usize], truth: &[usize], class_costs: &Matrix) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::EmptyInput);
    }
    let c = class_costs.nrows();
    let mut total = 0.0;
    for (&p, &t) in predicted.iter().zip(truth) {
        if t < 1 || t > c {
            return Err(Error::InvalidLabel { label: t, class_count: c });
        }
        if p < 1 || p > c {
            return Err(Error::InvalidLabel { label: p, class_count: c });
        }
        total += class_costs[(t - 1, p - 1)];
    }
    Ok(total)
}

/// Split protocol for train/test index generation.
#[derive(Debug, Clone)]
pub enum SplitSpec {
    RandomHoldout { train_fraction: f64, stratified: bool },
    KFold { k: usize, stratified: bool },
    FixedCount { train_size: usize, stratified: bool },
}

/// One train/test split of the dataset indices.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn group_indices(dataset: &Dataset, stratified: bool) -> Vec<Vec<usize>> {
    match (&dataset.targets, stratified) {
        (Targets::Classes { labels, class_count }, true) => {
            let mut groups = vec![Vec::new(); *class_count];
            for (i, &l) in labels.iter().enumerate() {
                groups[l - 1].push(i);
            }
            groups.retain(|g| !g.is_empty());
            groups
        }
        _ => vec![(0..dataset.sample_count()).collect()],
    }
}

/// Generate train/test splits; one split for holdout protocols, `k` splits
/// for k-fold. Train and test sets are disjoint and cover all indices.
pub fn make_splits(dataset: &Dataset, spec: &SplitSpec, rng: &mut Rng) -> Result<Vec<Split>> {
    let n = dataset.sample_count();
    if n < 2 {
        return Err(Error::InvalidSplit("need at least two samples".into()));
    }
    match spec {
        SplitSpec::RandomHoldout {
            train_fraction,
            stratified,
        } => {
            if !(*train_fraction > 0.0 && *train_fraction < 1.0) {
                return Err(Error::InvalidSplit(format!(
                    "train fraction must be in (0,1), got {train_fraction}"
                )));
            }
            let mut train = Vec::new();
            let mut test = Vec::new();
            for group in group_indices(dataset, *stratified) {
                let perm = rng.permutation(group.len());
                let mut take = (group.len() as f64 * train_fraction).round() as usize;
                take = take.clamp(1, group.len().max(2) - 1).min(group.len());
                for (pos, &p) in perm.iter().enumerate() {
                    if pos < take {
                        train.push(group[p]);
                    } else {
                        test.push(group[p]);
                    }
                }
            }
            if test.is_empty() {
                // rounding pushed everything into train; move one sample back
                test.push(train.pop().unwrap());
            }
            train.sort_unstable();
            test.sort_unstable();
            Ok(vec![Split { train, test }])
        }
        SplitSpec::FixedCount {
            train_size,
            stratified,
        } => {
            if *train_size == 0 || *train_size >= n {
                return Err(Error::InvalidSplit(format!(
                    "train size {train_size} out of range for {n} samples"
                )));
            }
            let fraction = *train_size as f64 / n as f64;
            let mut splits = make_splits(
                dataset,
                &SplitSpec::RandomHoldout {
                    train_fraction: fraction,
                    stratified: *stratified,
                },
                rng,
            )?;
            // rebalance to the exact requested count
            let split = &mut splits[0];
            while split.train.len() > *train_size {
                split.test.push(split.train.pop().unwrap());
            }
            while split.train.len() < *train_size {
                split.train.push(split.test.pop().unwrap());
            }
            split.train.sort_unstable();
            split.test.sort_unstable();
            Ok(splits)
        }
        SplitSpec::KFold { k, stratified } => {
            if *k < 2 || *k > n {
                return Err(Error::InvalidSplit(format!(
                    "k must be in 2..={n}, got {k}"
                )));
            }
            let groups = group_indices(dataset, *stratified);
            if *stratified {
                for g in &groups {
                    if g.len() < *k {
                        return Err(Error::InvalidSplit(format!(
                            "a class has only {} samples for {k}-fold stratified splitting",
                            g.len()
                        )));
                    }
                }
            }
            let mut folds: Vec<Vec<usize>> = vec![Vec::new(); *k];
            for group in groups {
                let perm = rng.permutation(group.len());
                for (pos, &p) in perm.iter().enumerate() {
                    folds[pos % k].push(group[p]);
                }
            }
            Ok((0..*k)
                .map(|fold| {
                    let mut test = folds[fold].clone();
                    let mut train: Vec<usize> = folds
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != fold)
                        .flat_map(|(_, f)| f.iter().copied())
                        .collect();
                    train.sort_unstable();
                    test.sort_unstable();
                    Split { train, test }
                })
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rank1_cases() {
        assert_relative_eq!(rank1_accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_relative_eq!(rank1_accuracy(&[1, 2, 3], &[1, 3, 5]).unwrap(), 1.0 / 3.0);
        assert_relative_eq!(rank1_accuracy(&[2, 3], &[1, 2]).unwrap(), 0.0);
        assert!(rank1_accuracy(&[], &[]).is_err());
    }

    #[test]
    fn cum_score_cases() {
        let cs = cum_score(&[1, 2, 3], &[1, 3, 5], 2).unwrap();
        assert_relative_eq!(cs[0], 100.0 / 3.0, epsilon = 1e-10);
        assert_relative_eq!(cs[1], 200.0 / 3.0, epsilon = 1e-10);
        assert_relative_eq!(cs[2], 100.0, epsilon = 1e-10);
        // level 0 equals rank-1 x 100
        let r1 = rank1_accuracy(&[1, 2, 3], &[1, 3, 5]).unwrap();
        assert_relative_eq!(cs[0], r1 * 100.0, epsilon = 1e-12);
        // non-decreasing
        for w in cs.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn mae_cases() {
        assert_relative_eq!(mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_relative_eq!(mae(&[2.0, 4.0], &[1.0, 6.0]).unwrap(), 1.5);
        assert_relative_eq!(mae(&[1.5, 2.5], &[1.0, 2.0]).unwrap(), 0.5);
    }

    #[test]
    fn arr_trr_cases() {
        // class 1: 2/2, class 2: 0/4
        let predicted = [1, 1, 1, 1, 1, 1];
        let truth = [1, 1, 2, 2, 2, 2];
        let (arr, trr) = arr_trr(&predicted, &truth, 2).unwrap();
        assert_relative_eq!(arr, 0.5);
        assert_relative_eq!(trr, 2.0 / 6.0);
        // balanced and perfect
        let (arr, trr) = arr_trr(&[1, 2], &[1, 2], 2).unwrap();
        assert_relative_eq!(arr, 1.0);
        assert_relative_eq!(trr, 1.0);
        // missing class
        assert!(arr_trr(&[1, 1], &[1, 1], 2).is_err());
    }

    #[test]
    fn arr_equals_trr_when_balanced() {
        let predicted = [1, 2, 2, 1];
        let truth = [1, 2, 1, 2];
        let (arr, trr) = arr_trr(&predicted, &truth, 2).unwrap();
        assert_relative_eq!(arr, trr);
    }

    #[test]
    fn total_cost_cases() {
        let mut costs = Matrix::from_element(2, 2, 1.0);
        costs.fill_diagonal(0.0);
        assert_relative_eq!(total_cost(&[1, 2], &[1, 2], &costs).unwrap(), 0.0);
        let asym = Matrix::from_row_slice(2, 2, &[0.0, 5.0, 1.0, 0.0]);
        assert_relative_eq!(total_cost(&[2], &[1], &asym).unwrap(), 5.0);
        // unit off-diagonal: cost equals error count
        let predicted = [1, 2, 2, 1];
        let truth = [1, 1, 2, 2];
        let errors = predicted.iter().zip(&truth).filter(|(p, t)| p != t).count();
        assert_relative_eq!(
            total_cost(&predicted, &truth, &costs).unwrap(),
            errors as f64
        );
    }

    fn toy_dataset(n: usize) -> Dataset {
        let x = Matrix::from_fn(n, 2, |i, j| (i * 2 + j) as f64);
        let labels: Vec<usize> = (0..n).map(|i| i % 2 + 1).collect();
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
    fn holdout_properties() {
        let ds = toy_dataset(20);
        let spec = SplitSpec::RandomHoldout {
            train_fraction: 0.5,
            stratified: true,
        };
        let splits = make_splits(&ds, &spec, &mut Rng::from_seed(1)).unwrap();
        let s = &splits[0];
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
        // stratified 0.5 on counts (10, 10): 5 of each class in train
        let labels = match &ds.targets {
            Targets::Classes { labels, .. } => labels,
            _ => unreachable!(),
        };
        let class1 = s.train.iter().filter(|&&i| labels[i] == 1).count();
        assert_eq!(class1, 5);
        assert_eq!(s.train.len(), 10);
    }

    #[test]
    fn near_full_fraction_leaves_a_test_sample() {
        let ds = toy_dataset(10);
        let spec = SplitSpec::RandomHoldout {
            train_fraction: 0.9999,
            stratified: false,
        };
        let splits = make_splits(&ds, &spec, &mut Rng::from_seed(2)).unwrap();
        assert!(!splits[0].test.is_empty());
    }

    #[test]
    fn kfold_partitions() {
        let ds = toy_dataset(12);
        let spec = SplitSpec::KFold {
            k: 4,
            stratified: true,
        };
        let splits = make_splits(&ds, &spec, &mut Rng::from_seed(3)).unwrap();
        assert_eq!(splits.len(), 4);
        let mut all_test: Vec<usize> = splits.iter().flat_map(|s| s.test.iter().copied()).collect();
        all_test.sort_unstable();
        assert_eq!(all_test, (0..12).collect::<Vec<_>>());
        for s in &splits {
            let overlap = s.train.iter().any(|i| s.test.contains(i));
            assert!(!overlap);
        }
    }

    #[test]
    fn leave_one_out() {
        let ds = toy_dataset(6);
        let spec = SplitSpec::KFold {
            k: 6,
            stratified: false,
        };
        let splits = make_splits(&ds, &spec, &mut Rng::from_seed(4)).unwrap();
        assert_eq!(splits.len(), 6);
        for s in &splits {
            assert_eq!(s.test.len(), 1);
            assert_eq!(s.train.len(), 5);
        }
    }

    #[test]
    fn stratified_kfold_rejects_small_class() {
        let ds = toy_dataset(6); // 3 per class
        let spec = SplitSpec::KFold {
            k: 4,
            stratified: true,
        };
        assert!(make_splits(&ds, &spec, &mut Rng::from_seed(5)).is_err());
    }

    #[test]
    fn fixed_count_exact() {
        let ds = toy_dataset(10);
        let spec = SplitSpec::FixedCount {
            train_size: 7,
            stratified: false,
        };
        let splits = make_splits(&ds, &spec, &mut Rng::from_seed(6)).unwrap();
        assert_eq!(splits[0].train.len(), 7);
        assert_eq!(splits[0].test.len(), 3);
    }
}
