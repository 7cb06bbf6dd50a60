#ifndef CRITVAL_H
#define CRITVAL_H

/* Generated by cbindgen from critval-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Records file formats accepted by [`critval_dataset_load`].
typedef enum CritvalFormat {
  CRITVAL_FORMAT_CSV = 0,
  CRITVAL_FORMAT_JSONL = 1,
} CritvalFormat;

// Missing-data policies for composite computation.
typedef enum CritvalPolicy {
  CRITVAL_POLICY_PROPORTIONAL_REWEIGHT = 0,
  CRITVAL_POLICY_COMPLETE_CASE = 1,
  CRITVAL_POLICY_IMPUTE = 2,
} CritvalPolicy;

// Status codes for fallible calls. Zero is success; query
// [`critval_last_error_message`] for details on anything else.
typedef enum CritvalStatus {
  CRITVAL_STATUS_OK = 0,
  CRITVAL_STATUS_NULL_POINTER = 1,
  CRITVAL_STATUS_INVALID_UTF8 = 2,
  CRITVAL_STATUS_IO_ERROR = 3,
  CRITVAL_STATUS_PARSE_ERROR = 4,
  CRITVAL_STATUS_INVALID_ARGUMENT = 5,
  CRITVAL_STATUS_DEGENERATE_INPUT = 6,
  CRITVAL_STATUS_PANIC = 7,
} CritvalStatus;

// Opaque dataset handle; create via the loaders, release with
// [`critval_dataset_free`].
typedef struct CritvalDataset CritvalDataset;

// Rank-correlation output. `p_bonferroni` is NaN when no correction factor
// was requested.
typedef struct CritvalCorrelation {
  double rho;
  double p;
  double p_bonferroni;
  uintptr_t n;
} CritvalCorrelation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message (NUL-terminated) for the calling thread into
// `buf`; returns the full length including the terminator, so callers can
// retry with a larger buffer. A null/zero buffer just queries the length.
//
// # Safety
// `buf` must be null or point to at least `len` writable bytes.
uintptr_t critval_last_error_message(char *buf, uintptr_t len);

// Toolkit version as a static NUL-terminated string; never freed.
const char *critval_version(void);

// The built-in scored fixture (15 conversations, trust-proxy outcomes).
struct CritvalDataset *critval_dataset_builtin_phase1(void);

// Loads a records file. Returns null on failure; see
// [`critval_last_error_message`].
//
// # Safety
// `path` must be a valid NUL-terminated string.
struct CritvalDataset *critval_dataset_load(const char *path, enum CritvalFormat format);

// Record count, or -1 for a null handle.
//
// # Safety
// `ds` must be null or a live handle returned by this library.
intptr_t critval_dataset_record_count(const struct CritvalDataset *ds);

// Filtered copy excluding trust-collapse (T6) records; the caller owns the
// returned handle.
//
// # Safety
// `ds` must be null or a live handle returned by this library.
struct CritvalDataset *critval_dataset_analysis_view(const struct CritvalDataset *ds);

// Releases a dataset handle; null is a no-op.
//
// # Safety
// `ds` must be a handle returned by this library and not yet freed.
void critval_dataset_free(struct CritvalDataset *ds);

// Tie-aware Spearman correlation with a two-sided t-approximate p-value.
// Pass `bonferroni_m = 0` for no correction (`p_bonferroni` is then NaN).
//
// # Safety
// `x` and `y` must point to `len` doubles; `out` must be writable.
enum CritvalStatus critval_spearman(const double *x,
                                    const double *y,
                                    uintptr_t len,
                                    uintptr_t bonferroni_m,
                                    struct CritvalCorrelation *out);

// Cohen's d with pooled standard deviation.
//
// # Safety
// `g1`/`g2` must point to `n1`/`n2` doubles; `out` must be writable.
enum CritvalStatus critval_cohens_d(const double *g1,
                                    uintptr_t n1,
                                    const double *g2,
                                    uintptr_t n2,
                                    double *out);

// Bonferroni correction: `min(1, m * p)`.
double critval_bonferroni(double p, uintptr_t m);

// Weighted composite of seven dimension scores (`NaN` marks N/A) under a
// built-in scheme. `impute_value` is read only for the impute policy.
// A complete-case exclusion reports `DegenerateInput` with the out value NaN.
//
// # Safety
// `scores7` must point to 7 doubles; `scheme_name` must be NUL-terminated;
// `out` must be writable.
enum CritvalStatus critval_composite(const double *scores7,
                                     const char *scheme_name,
                                     enum CritvalPolicy policy,
                                     double impute_value,
                                     double *out);

// Evaluates a built-in scheme's criterion validity against the dataset's
// outcome encoding (datasets with T6 records must pass through
// [`critval_dataset_analysis_view`] first).
//
// # Safety
// `ds` must be a live handle; `scheme_name` NUL-terminated; `out` writable.
enum CritvalStatus critval_evaluate_scheme(const struct CritvalDataset *ds,
                                           const char *scheme_name,
                                           enum CritvalPolicy policy,
                                           double impute_value,
                                           struct CritvalCorrelation *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CRITVAL_H */
