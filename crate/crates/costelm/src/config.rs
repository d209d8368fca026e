//! Run configuration: plain-text `key = value` files with `#` comments,
//! every key overridable by a command-line flag of the same name.

use std::collections::BTreeMap;
use std::path::Path;

use crate::cost::ObjectiveMode;
use crate::elm::{Activation, KernelSpec};
use crate::error::{Error, Result};
use crate::eval::SplitSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Elm,
    Kelm,
    Welm1,
    Welm2,
    Cselm,
    Ecselm,
    Lda,
    Ecslda,
    PcaNn,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "elm" => Method::Elm,
            "kelm" => Method::Kelm,
            "welm1" => Method::Welm1,
            "welm2" => Method::Welm2,
            "cselm" => Method::Cselm,
            "ecselm" => Method::Ecselm,
            "lda" => Method::Lda,
            "ecslda" => Method::Ecslda,
            "pca-nn" => Method::PcaNn,
            other => return Err(Error::Config(format!("unknown method '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Elm => "elm",
            Method::Kelm => "kelm",
            Method::Welm1 => "welm1",
            Method::Welm2 => "welm2",
            Method::Cselm => "cselm",
            Method::Ecselm => "ecselm",
            Method::Lda => "lda",
            Method::Ecslda => "ecslda",
            Method::PcaNn => "pca-nn",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Rank1,
    CumScore,
    Mae,
    Arr,
    Trr,
    TotalCost,
}

impl Metric {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "rank1" => Metric::Rank1,
            "cumscore" => Metric::CumScore,
            "mae" => Metric::Mae,
            "arr" => Metric::Arr,
            "trr" => Metric::Trr,
            "total_cost" => Metric::TotalCost,
            other => return Err(Error::Config(format!("unknown metric '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Rank1 => "rank1",
            Metric::CumScore => "cumscore",
            Metric::Mae => "mae",
            Metric::Arr => "arr",
            Metric::Trr => "trr",
            Metric::TotalCost => "total_cost",
        }
    }
}

/// Initialization of the cost vector for the plain `cselm` method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostVectorInit {
    /// `B_i = W_ii * sum_j M_ij` with W1 weights and uniform costs.
    Default,
    /// All-ones, which reduces the solve to a plain ELM.
    Ones,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub method: Method,
    pub c_grid: Vec<f64>,
    pub l_grid: Vec<usize>,
    pub activation: Activation,
    pub kernel: Option<KernelSpec>,
    pub population: usize,
    pub epochs: usize,
    pub bound_low: f64,
    pub bound_high: f64,
    pub mixrate: f64,
    pub split: SplitSpec,
    pub seed: u64,
    pub repetitions: usize,
    pub metrics: Vec<Metric>,
    pub within_class_normalize: bool,
    pub objective_holdout_fraction: f64,
    pub objective_mode: ObjectiveMode,
    pub subspace_dim: Option<usize>,
    pub cost_b: CostVectorInit,
}

/// Parse a `key = value` file. Everything after `#` on a line is a comment.
pub fn parse_kv_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    parse_kv(&text)
}

pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: lineno + 1,
            msg: "expected 'key = value'".into(),
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn get_f64(map: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Config(format!("{key}: '{v}' is not a number"))),
    }
}

fn get_usize(map: &BTreeMap<String, String>, key: &str, default: usize) -> Result<usize> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Config(format!("{key}: '{v}' is not a count"))),
    }
}

fn get_bool(map: &BTreeMap<String, String>, key: &str, default: bool) -> Result<bool> {
    match map.get(key).map(String::as_str) {
        None => Ok(default),
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        Some(v) => Err(Error::Config(format!("{key}: '{v}' is not true/false"))),
    }
}

impl RunConfig {
    /// Build and validate a configuration from merged key/value pairs.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        for key in map.keys() {
            const KNOWN: &[&str] = &[
                "method",
                "c",
                "c_grid",
                "l",
                "l_grid",
                "activation",
                "kernel",
                "gamma",
                "population",
                "epochs",
                "bound_low",
                "bound_high",
                "mixrate",
                "split",
                "train_fraction",
                "train_size",
                "folds",
                "stratified",
                "seed",
                "repetitions",
                "metrics",
                "within_class_normalize",
                "objective_holdout_fraction",
                "objective",
                "subspace_dim",
                "cost_b",
            ];
            if !KNOWN.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown key '{key}'")));
            }
        }

        let method = Method::parse(
            map.get("method")
                .ok_or_else(|| Error::Config("missing 'method'".into()))?,
        )?;

        let c_grid: Vec<f64> = match (map.get("c_grid"), map.get("c")) {
            (Some(list), _) => list
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("c_grid entry '{v}' is not a number")))
                })
                .collect::<Result<_>>()?,
            (None, Some(_)) => vec![get_f64(map, "c", 1.0)?],
            (None, None) => vec![1.0],
        };
        if c_grid.is_empty() || c_grid.iter().any(|&c| c <= 0.0) {
            return Err(Error::Config("c_grid values must be positive".into()));
        }

        let l_grid: Vec<usize> = match (map.get("l_grid"), map.get("l")) {
            (Some(list), _) => list
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("l_grid entry '{v}' is not a count")))
                })
                .collect::<Result<_>>()?,
            (None, Some(_)) => vec![get_usize(map, "l", 100)?],
            (None, None) => vec![100],
        };
        if l_grid.is_empty() || l_grid.contains(&0) {
            return Err(Error::Config("l_grid values must be >= 1".into()));
        }

        let activation = Activation::parse(map.get("activation").map(String::as_str).unwrap_or("radbas"))?;

        let kernel = match map.get("kernel").map(String::as_str) {
            None => None,
            Some("linear") => Some(KernelSpec::Linear),
            Some("rbf") => {
                let gamma = get_f64(map, "gamma", 1.0)?;
                if gamma <= 0.0 {
                    return Err(Error::Config("gamma must be positive".into()));
                }
                Some(KernelSpec::Rbf { gamma })
            }
            Some(other) => return Err(Error::Config(format!("unknown kernel '{other}'"))),
        };
        if method == Method::Kelm && kernel.is_none() {
            return Err(Error::Config("method 'kelm' requires a 'kernel' key".into()));
        }

        let population = get_usize(map, "population", 100)?;
        let epochs = get_usize(map, "epochs", 100)?;
        if population < 2 {
            return Err(Error::Config("population must be >= 2".into()));
        }
        let bound_low = get_f64(map, "bound_low", -1.0)?;
        let bound_high = get_f64(map, "bound_high", 1.0)?;
        if bound_low > bound_high {
            return Err(Error::Config(format!(
                "bound_low {bound_low} > bound_high {bound_high}"
            )));
        }
        let mixrate = get_f64(map, "mixrate", 1.0)?;
        if !(mixrate > 0.0 && mixrate <= 1.0) {
            return Err(Error::Config("mixrate must be in (0, 1]".into()));
        }

        let stratified = get_bool(map, "stratified", true)?;
        let split = match map.get("split").map(String::as_str).unwrap_or("holdout") {
            "holdout" => {
                if let Some(size) = map.get("train_size") {
                    let train_size = size
                        .parse()
                        .map_err(|_| Error::Config(format!("train_size '{size}' is not a count")))?;
                    SplitSpec::FixedCount {
                        train_size,
                        stratified,
                    }
                } else {
                    let train_fraction = get_f64(map, "train_fraction", 0.5)?;
                    if !(train_fraction > 0.0 && train_fraction < 1.0) {
                        return Err(Error::Config(format!(
                            "train_fraction must be in (0,1), got {train_fraction}"
                        )));
                    }
                    SplitSpec::RandomHoldout {
                        train_fraction,
                        stratified,
                    }
                }
            }
            "kfold" => {
                let k = get_usize(map, "folds", 10)?;
                if k < 2 {
                    return Err(Error::Config("folds must be >= 2".into()));
                }
                SplitSpec::KFold { k, stratified }
            }
            other => return Err(Error::Config(format!("unknown split '{other}'"))),
        };

        let seed = match map.get("seed") {
            None => 0,
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("seed '{v}' is not a u64")))?,
        };
        let repetitions = get_usize(map, "repetitions", 1)?;
        if repetitions == 0 {
            return Err(Error::Config("repetitions must be >= 1".into()));
        }

        let objective_mode = match map.get("objective").map(String::as_str).unwrap_or("classification") {
            "classification" => ObjectiveMode::Classification01,
            "regression" => ObjectiveMode::RegressionSse,
            other => return Err(Error::Config(format!("unknown objective '{other}'"))),
        };

        let default_metrics = match objective_mode {
            ObjectiveMode::Classification01 => "rank1",
            ObjectiveMode::RegressionSse => "mae",
        };
        let metrics: Vec<Metric> = map
            .get("metrics")
            .map(String::as_str)
            .unwrap_or(default_metrics)
            .split(',')
            .map(|m| Metric::parse(m.trim()))
            .collect::<Result<_>>()?;
        if metrics.is_empty() {
            return Err(Error::Config("metrics must not be empty".into()));
        }

        let objective_holdout_fraction = get_f64(map, "objective_holdout_fraction", 0.0)?;
        if !(0.0..1.0).contains(&objective_holdout_fraction) {
            return Err(Error::Config(
                "objective_holdout_fraction must be in [0, 1)".into(),
            ));
        }

        let subspace_dim = match map.get("subspace_dim") {
            None => None,
            Some(v) => Some(v.parse().map_err(|_| {
                Error::Config(format!("subspace_dim '{v}' is not a count"))
            })?),
        };

        let cost_b = match map.get("cost_b").map(String::as_str).unwrap_or("default") {
            "default" => CostVectorInit::Default,
            "ones" => CostVectorInit::Ones,
            other => return Err(Error::Config(format!("unknown cost_b '{other}'"))),
        };

        Ok(RunConfig {
            method,
            c_grid,
            l_grid,
            activation,
            kernel,
            population,
            epochs,
            bound_low,
            bound_high,
            mixrate,
            split,
            seed,
            repetitions,
            metrics,
            within_class_normalize: get_bool(map, "within_class_normalize", false)?,
            objective_holdout_fraction,
            objective_mode,
            subspace_dim,
            cost_b,
        })
    }

    /// Load a config file and apply command-line overrides on top.
    pub fn load(path: Option<&Path>, overrides: &BTreeMap<String, String>) -> Result<Self> {
        let mut map = match path {
            Some(p) => parse_kv_file(p)?,
            None => BTreeMap::new(),
        };
        for (k, v) in overrides {
            map.insert(k.clone(), v.clone());
        }
        Self::from_map(&map)
    }
}
