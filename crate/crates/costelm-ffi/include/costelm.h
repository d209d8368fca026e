#ifndef COSTELM_H
#define COSTELM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum CostelmStatus {
  COSTELM_STATUS_OK = 0,
  COSTELM_STATUS_NULL_POINTER = 1,
  COSTELM_STATUS_INVALID_ARGUMENT = 2,
  COSTELM_STATUS_PARSE_ERROR = 3,
  COSTELM_STATUS_NUMERIC_ERROR = 4,
  COSTELM_STATUS_IO_ERROR = 5,
} CostelmStatus;

/**
 * An in-memory classification dataset.
 */
typedef struct CostelmDataset CostelmDataset;

/**
 * A trained classifier.
 */
typedef struct CostelmModel CostelmModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread. Valid until the next
 * failing call on the same thread; never null.
 */
const char *costelm_last_error(void);

/**
 * Library version as a static string.
 */
const char *costelm_version(void);

/**
 * Build a dataset from a row-major `samples x features` array and 1-based
 * class labels. Copies the data.
 *
 * # Safety
 * `features` must point to `samples * features_per_sample` doubles and
 * `labels` to `samples` entries; `out` must be a valid pointer.
 */
enum CostelmStatus costelm_dataset_from_arrays(const double *features,
                                               size_t samples,
                                               size_t features_per_sample,
                                               const uint32_t *labels,
                                               struct CostelmDataset **out);

/**
 * Load a classification dataset from a CSV file (feature columns followed
 * by a 1-based integer label column).
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum CostelmStatus costelm_dataset_load_csv(const char *path, struct CostelmDataset **out);

/**
 * Number of samples in the dataset.
 *
 * # Safety
 * `dataset` must be a live handle from this library.
 */
size_t costelm_dataset_samples(const struct CostelmDataset *dataset);

/**
 * Number of feature columns in the dataset.
 *
 * # Safety
 * `dataset` must be a live handle from this library.
 */
size_t costelm_dataset_features(const struct CostelmDataset *dataset);

/**
 * Release a dataset handle. Passing null is a no-op.
 *
 * # Safety
 * `dataset` must be null or a handle not freed before.
 */
void costelm_dataset_free(struct CostelmDataset *dataset);

/**
 * Train a classifier. `options` is a newline-separated `key = value` string
 * using the same keys as the configuration file (it must include `method`);
 * pass null for the default evolutionary cost-sensitive training.
 *
 * # Safety
 * `dataset` must be a live handle, `options` null or NUL-terminated, and
 * `out` a valid pointer.
 */
enum CostelmStatus costelm_train(const struct CostelmDataset *dataset,
                                 const char *options,
                                 struct CostelmModel **out);

/**
 * Predict 1-based class labels for a row-major `samples x features` array.
 * `out_labels` must have room for `samples` entries.
 *
 * # Safety
 * `model` must be a live handle; `features` must point to
 * `samples * features_per_sample` doubles; `out_labels` to `samples` slots.
 */
enum CostelmStatus costelm_predict(const struct CostelmModel *model,
                                   const double *features,
                                   size_t samples,
                                   size_t features_per_sample,
                                   uint32_t *out_labels);

/**
 * Release a model handle. Passing null is a no-op.
 *
 * # Safety
 * `model` must be null or a handle not freed before.
 */
void costelm_model_free(struct CostelmModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COSTELM_H */
