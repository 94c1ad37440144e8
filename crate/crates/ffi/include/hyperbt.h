#ifndef HYPERBT_H
#define HYPERBT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HbtStatus {
  HBT_STATUS_OK = 0,
  HBT_STATUS_NULL_POINTER = 1,
  HBT_STATUS_INVALID_ARGUMENT = 2,
  // A player has no wins or no losses, or the data cannot be fitted.
  HBT_STATUS_DEGENERATE = 3,
  HBT_STATUS_PARSE = 4,
  HBT_STATUS_IO = 5,
  HBT_STATUS_PANIC = 6,
} HbtStatus;

typedef enum HbtModel {
  HBT_MODEL_BT = 0,
  HBT_MODEL_HBT = 1,
  HBT_MODEL_GBT = 2,
} HbtModel;

typedef enum HbtRule {
  // The model's default rule.
  HBT_RULE_DEFAULT = 0,
  HBT_RULE_ZERMELO = 1,
  HBT_RULE_NEWMAN = 2,
  HBT_RULE_HBT_MM = 3,
  HBT_RULE_GBT_HUANG = 4,
  HBT_RULE_GBT_NEWMAN = 5,
} HbtRule;

typedef enum HbtNormalization {
  HBT_NORMALIZATION_NONE = 0,
  HBT_NORMALIZATION_SUM_ONE = 1,
  HBT_NORMALIZATION_GEOMETRIC_MEAN_ONE = 2,
} HbtNormalization;

typedef struct HbtDataset HbtDataset;

typedef struct HbtFitResult HbtFitResult;

typedef struct HbtFitConfig {
  double tolerance;
  size_t max_sweeps;
  // An `HbtNormalization` value; ignored for the HBT model.
  int32_t normalization;
} HbtFitConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *hbt_last_error_message(void);

struct HbtFitConfig hbt_fit_config_default(void);

// Creates an empty dataset over `n_players` players.
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
enum HbtStatus hbt_dataset_new(size_t n_players, bool allow_overlap, struct HbtDataset **out);

// Reads a games file. Player labels are kept and exposed through
// `hbt_dataset_player_label`.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum HbtStatus hbt_dataset_from_games_file(const char *path,
                                           bool allow_overlap,
                                           struct HbtDataset **out);

// Appends a game in which `winners` beat `losers` with weight `weight`.
//
// # Safety
// `ds` must be a live dataset handle; `winners` and `losers` must point to
// `n_winners` and `n_losers` indices respectively.
enum HbtStatus hbt_dataset_add_game(struct HbtDataset *ds,
                                    const size_t *winners,
                                    size_t n_winners,
                                    const size_t *losers,
                                    size_t n_losers,
                                    double weight);

// # Safety
// `ds` must be NULL or a live dataset handle.
size_t hbt_dataset_num_players(const struct HbtDataset *ds);

// # Safety
// `ds` must be NULL or a live dataset handle.
size_t hbt_dataset_num_games(const struct HbtDataset *ds);

// Label of player `index` for datasets read from a file, otherwise NULL.
// The string is owned by the dataset.
//
// # Safety
// `ds` must be NULL or a live dataset handle.
const char *hbt_dataset_player_label(const struct HbtDataset *ds, size_t index);

// # Safety
// `ds` must be NULL or a handle not yet freed.
void hbt_dataset_free(struct HbtDataset *ds);

// Synthetic dataset of `n_games` games among `n_players` players. If
// `true_log_strengths` is not NULL it receives the `n_players` generating
// log-strengths.
//
// # Safety
// `out` must be writable; `true_log_strengths` must be NULL or point to
// `n_players` writable doubles.
enum HbtStatus hbt_synthetic_generate(size_t n_players,
                                      size_t n_games,
                                      uint64_t seed,
                                      struct HbtDataset **out,
                                      double *true_log_strengths);

// Fits `model` with `rule` (`HBT_RULE_DEFAULT` picks the model's default).
// `cfg` may be NULL for defaults. Running out of sweeps is not an error;
// check `hbt_fit_result_converged`.
//
// # Safety
// `ds` must be a live dataset handle, `cfg` NULL or valid, `out` writable.
enum HbtStatus hbt_fit(const struct HbtDataset *ds,
                       int32_t model,
                       int32_t rule,
                       const struct HbtFitConfig *cfg,
                       struct HbtFitResult **out);

// # Safety
// `res` must be NULL or a live result handle.
size_t hbt_fit_result_num_players(const struct HbtFitResult *res);

// # Safety
// `res` must be NULL or a live result handle.
bool hbt_fit_result_converged(const struct HbtFitResult *res);

// # Safety
// `res` must be NULL or a live result handle.
size_t hbt_fit_result_sweeps(const struct HbtFitResult *res);

// # Safety
// `res` must be NULL or a live result handle.
double hbt_fit_result_final_delta(const struct HbtFitResult *res);

// Copies the fitted `pi` into `out`, which must hold exactly
// `hbt_fit_result_num_players` values.
//
// # Safety
// `res` must be a live result handle and `out` point to `len` doubles.
enum HbtStatus hbt_fit_result_strengths(const struct HbtFitResult *res, double *out, size_t len);

// As `hbt_fit_result_strengths`, for `s = log pi`.
//
// # Safety
// `res` must be a live result handle and `out` point to `len` doubles.
enum HbtStatus hbt_fit_result_log_strengths(const struct HbtFitResult *res,
                                            double *out,
                                            size_t len);

// # Safety
// `res` must be NULL or a handle not yet freed.
void hbt_fit_result_free(struct HbtFitResult *res);

// Log-likelihood of the dataset under `model` at strengths `pi`.
//
// # Safety
// `ds` must be a live dataset handle, `pi` point to `len` doubles and `out`
// be writable.
enum HbtStatus hbt_log_likelihood(const struct HbtDataset *ds,
                                  int32_t model,
                                  const double *pi,
                                  size_t len,
                                  double *out);

// Probability that `winners` beat `losers` under `model` at strengths `pi`.
//
// # Safety
// `winners`, `losers` and `pi` must point to the stated number of elements
// and `out` be writable.
enum HbtStatus hbt_win_prob(int32_t model,
                            const size_t *winners,
                            size_t n_winners,
                            const size_t *losers,
                            size_t n_losers,
                            const double *pi,
                            size_t len,
                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERBT_H */
