//! C ABI over the costelm library: opaque handles, integer status codes,
//! and a thread-local last-error message.
//!
//! Ownership: every `*_new`/`*_load`/`*_train` output must be released with
//! the matching `*_free`. Handles are not thread-safe; use one per thread.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;

use costelm::config::{Method, RunConfig};
use costelm::cost::{self, EcselmConfig, SampleCostMatrix};
use costelm::dataset::{load_dataset, Dataset, LoadMode, Targets};
use costelm::elm::{self, encode_targets, ElmModel, WeightScheme};
use costelm::{Error, Matrix, Rng};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostelmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    NumericError = 4,
    IoError = 5,
}

/// An in-memory classification dataset.
pub struct CostelmDataset {
    inner: Dataset,
}

/// A trained classifier.
pub struct CostelmModel {
    inner: ElmModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(err: &Error) -> CostelmStatus {
    let msg = CString::new(err.to_string()).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
    match err {
        Error::Parse { .. } | Error::Config(_) => CostelmStatus::ParseError,
        Error::Io(_) => CostelmStatus::IoError,
        Error::SingularMatrix | Error::NotPositiveDefinite => CostelmStatus::NumericError,
        _ => CostelmStatus::InvalidArgument,
    }
}

fn set_message(msg: &str) -> CostelmStatus {
    let msg = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
    CostelmStatus::InvalidArgument
}

/// Message for the most recent error on this thread. Valid until the next
/// failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn costelm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn costelm_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Build a dataset from a row-major `samples x features` array and 1-based
/// class labels. Copies the data.
///
/// # Safety
/// `features` must point to `samples * features_per_sample` doubles and
/// `labels` to `samples` entries; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn costelm_dataset_from_arrays(
    features: *const f64,
    samples: usize,
    features_per_sample: usize,
    labels: *const u32,
    out: *mut *mut CostelmDataset,
) -> CostelmStatus {
    if features.is_null() || labels.is_null() || out.is_null() {
        return CostelmStatus::NullPointer;
    }
    if samples == 0 || features_per_sample == 0 {
        return set_message("samples and features_per_sample must be >= 1");
    }
    let feature_slice = std::slice::from_raw_parts(features, samples * features_per_sample);
    let label_slice = std::slice::from_raw_parts(labels, samples);
    if label_slice.contains(&0) {
        return set_message("labels are 1-based; found 0");
    }
    let x = Matrix::from_fn(samples, features_per_sample, |i, j| {
        feature_slice[i * features_per_sample + j]
    });
    let labels: Vec<usize> = label_slice.iter().map(|&l| l as usize).collect();
    let class_count = labels.iter().copied().max().unwrap_or(1);
    match Dataset::new(x, Targets::Classes { labels, class_count }) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(CostelmDataset { inner }));
            CostelmStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Load a classification dataset from a CSV file (feature columns followed
/// by a 1-based integer label column).
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn costelm_dataset_load_csv(
    path: *const c_char,
    out: *mut *mut CostelmDataset,
) -> CostelmStatus {
    if path.is_null() || out.is_null() {
        return CostelmStatus::NullPointer;
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return set_message("path is not valid UTF-8");
    };
    match load_dataset(Path::new(path), LoadMode::Classification) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(CostelmDataset { inner }));
            CostelmStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Number of samples in the dataset.
///
/// # Safety
/// `dataset` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn costelm_dataset_samples(dataset: *const CostelmDataset) -> usize {
    if dataset.is_null() {
        return 0;
    }
    (*dataset).inner.sample_count()
}

/// Number of feature columns in the dataset.
///
/// # Safety
/// `dataset` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn costelm_dataset_features(dataset: *const CostelmDataset) -> usize {
    if dataset.is_null() {
        return 0;
    }
    (*dataset).inner.feature_count()
}

/// Release a dataset handle. Passing null is a no-op.
///
/// # Safety
/// `dataset` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn costelm_dataset_free(dataset: *mut CostelmDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

fn train_from_config(dataset: &Dataset, config: &RunConfig) -> costelm::Result<ElmModel> {
    let mut rng = Rng::from_seed(config.seed);
    let c_reg = config.c_grid[0];
    let hidden_nodes = config.l_grid[0];
    let (labels, class_count) = match &dataset.targets {
        Targets::Classes { labels, class_count } => (labels.as_slice(), *class_count),
        Targets::Reals(_) => {
            return Err(Error::InvalidDataset("labels required".into()));
        }
    };
    let t = encode_targets(labels, class_count)?;
    match config.method {
        Method::Elm | Method::Welm1 | Method::Welm2 | Method::Cselm => {
            let hidden = elm::init_hidden_layer(
                dataset.feature_count(),
                hidden_nodes,
                config.activation,
                &mut rng,
            )?;
            let h = elm::hidden_output_matrix(&dataset.x, &hidden)?;
            let beta = match config.method {
                Method::Elm => elm::train_elm(&h, &t, c_reg)?,
                Method::Welm1 => cost::train_weighted_elm(
                    &h,
                    &t,
                    c_reg,
                    labels,
                    class_count,
                    WeightScheme::W1,
                )?,
                Method::Welm2 => cost::train_weighted_elm(
                    &h,
                    &t,
                    c_reg,
                    labels,
                    class_count,
                    WeightScheme::W2,
                )?,
                _ => {
                    let w = elm::class_weights(labels, class_count, WeightScheme::W1)?;
                    let m = SampleCostMatrix::uniform(dataset.sample_count());
                    let b = cost::cost_info_vector(&w, &m)?;
                    cost::train_cselm(&h, &t, c_reg, &b)?
                }
            };
            Ok(ElmModel::Explicit { hidden, beta })
        }
        Method::Kelm => {
            let spec = config
                .kernel
                .ok_or_else(|| Error::Config("kelm requires a kernel".into()))?;
            elm::train_kernel_elm(&dataset.x, &t, c_reg, spec)
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
            Ok(cost::ecselm_fit(dataset, &ecfg, &mut rng)?.model)
        }
        Method::Lda | Method::Ecslda | Method::PcaNn => Err(Error::Config(
            "subspace methods are not exposed through the C API".into(),
        )),
    }
}

/// Train a classifier. `options` is a newline-separated `key = value` string
/// using the same keys as the configuration file (it must include `method`);
/// pass null for the default evolutionary cost-sensitive training.
///
/// # Safety
/// `dataset` must be a live handle, `options` null or NUL-terminated, and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn costelm_train(
    dataset: *const CostelmDataset,
    options: *const c_char,
    out: *mut *mut CostelmModel,
) -> CostelmStatus {
    if dataset.is_null() || out.is_null() {
        return CostelmStatus::NullPointer;
    }
    let mut map: BTreeMap<String, String> = if options.is_null() {
        BTreeMap::new()
    } else {
        let Ok(text) = CStr::from_ptr(options).to_str() else {
            return set_message("options are not valid UTF-8");
        };
        match costelm::config::parse_kv(text) {
            Ok(map) => map,
            Err(e) => return set_error(&e),
        }
    };
    map.entry("method".to_string())
        .or_insert_with(|| "ecselm".to_string());
    let config = match RunConfig::from_map(&map) {
        Ok(config) => config,
        Err(e) => return set_error(&e),
    };
    match train_from_config(&(*dataset).inner, &config) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(CostelmModel { inner }));
            CostelmStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Predict 1-based class labels for a row-major `samples x features` array.
/// `out_labels` must have room for `samples` entries.
///
/// # Safety
/// `model` must be a live handle; `features` must point to
/// `samples * features_per_sample` doubles; `out_labels` to `samples` slots.
#[no_mangle]
pub unsafe extern "C" fn costelm_predict(
    model: *const CostelmModel,
    features: *const f64,
    samples: usize,
    features_per_sample: usize,
    out_labels: *mut u32,
) -> CostelmStatus {
    if model.is_null() || features.is_null() || out_labels.is_null() {
        return CostelmStatus::NullPointer;
    }
    if samples == 0 || features_per_sample == 0 {
        return set_message("samples and features_per_sample must be >= 1");
    }
    let feature_slice = std::slice::from_raw_parts(features, samples * features_per_sample);
    let x = Matrix::from_fn(samples, features_per_sample, |i, j| {
        feature_slice[i * features_per_sample + j]
    });
    let scores = match elm::predict_scores(&(*model).inner, &x) {
        Ok(scores) => scores,
        Err(e) => return set_error(&e),
    };
    let labels = elm::decide(&scores);
    let out = std::slice::from_raw_parts_mut(out_labels, samples);
    for (slot, label) in out.iter_mut().zip(labels) {
        *slot = label as u32;
    }
    CostelmStatus::Ok
}

/// Release a model handle. Passing null is a no-op.
///
/// # Safety
/// `model` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn costelm_model_free(model: *mut CostelmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
