#ifndef WRTLAB_H
#define WRTLAB_H

/* Generated by cbindgen from wrtlab-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible entry point.
typedef enum WrtStatus {
  WRT_STATUS_OK = 0,
  WRT_STATUS_NULL_ARGUMENT = 1,
  WRT_STATUS_INVALID_ARGUMENT = 2,
  WRT_STATUS_OUT_OF_RANGE = 3,
  WRT_STATUS_DOMAIN = 4,
  WRT_STATUS_NON_CONVERGENT = 5,
  WRT_STATUS_REFUSED = 6,
  WRT_STATUS_INSUFFICIENT_DATA = 7,
  WRT_STATUS_BUFFER_TOO_SMALL = 8,
  WRT_STATUS_INTERNAL = 9,
  WRT_STATUS_PANIC = 10,
} WrtStatus;

// Opaque fitness-sequence handle.
typedef struct WrtFitness WrtFitness;

// Opaque tree handle.
typedef struct WrtTree WrtTree;

// Opaque weight-sequence handle.
typedef struct WrtWeights WrtWeights;

// Result of the exact representation certificate.
typedef struct WrtTheorem1Report {
  size_t trace_count;
  double max_abs_diff;
  double pat_total;
  double mixture_total;
  // 1 when the certificate passes, 0 otherwise.
  int32_t pass;
} WrtTheorem1Report;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message of the current thread, as a fresh C string; the caller
// frees it with wrt_string_free. Null when no error was recorded.
char *wrt_last_error_message(void);

// Free a string returned by this library.
//
// # Safety
// `s` must be a pointer previously returned by wrt_last_error_message (or
// null).
void wrt_string_free(char *s);

// Static library version string (not to be freed).
const char *wrt_version(void);

// Weights with W_n = c * n^gamma exactly.
enum WrtStatus wrt_weights_power(double gamma, double c, size_t n_max, struct WrtWeights **out);

// Random weights of the Beta-product representation for the given fitness,
// sampled from the seed.
enum WrtStatus wrt_weights_beta_sampled(const struct WrtFitness *fitness,
                                        size_t n_max,
                                        uint64_t seed,
                                        struct WrtWeights **out);

// # Safety
// `w` must be a pointer returned by a wrt_weights_* constructor (or null).
void wrt_weights_free(struct WrtWeights *w);

size_t wrt_weights_len(const struct WrtWeights *w);

// w_n for 1-based n.
enum WrtStatus wrt_weights_value(const struct WrtWeights *w, size_t n, double *out);

// W_n for 1-based n.
enum WrtStatus wrt_weights_cumulative(const struct WrtWeights *w, size_t n, double *out);

// Fitness a_1 = a, a_n = b for n >= 2.
enum WrtStatus wrt_fitness_constant(double a, double b, size_t n_max, struct WrtFitness **out);

// Fitness (a, pattern, pattern, ...) repeating after the first term.
enum WrtStatus wrt_fitness_periodic(double a,
                                    const double *pattern,
                                    size_t pattern_len,
                                    size_t n_max,
                                    struct WrtFitness **out);

// # Safety
// `f` must be a pointer returned by a wrt_fitness_* constructor (or null).
void wrt_fitness_free(struct WrtFitness *f);

// Grow a weighted recursive tree with n vertices from the seed.
enum WrtStatus wrt_grow_wrt(const struct WrtWeights *weights,
                            size_t n,
                            uint64_t seed,
                            struct WrtTree **out);

// Grow a preferential-attachment tree with n vertices from the seed.
enum WrtStatus wrt_grow_pat(const struct WrtFitness *fitness,
                            size_t n,
                            uint64_t seed,
                            struct WrtTree **out);

// # Safety
// `t` must be a pointer returned by a wrt_grow_* function (or null).
void wrt_tree_free(struct WrtTree *t);

size_t wrt_tree_len(const struct WrtTree *t);

// Parent of the 1-based vertex i; the root reports 0.
enum WrtStatus wrt_tree_parent(const struct WrtTree *t, size_t i, size_t *out);

// Height of the tree (maximal vertex height).
enum WrtStatus wrt_tree_height(const struct WrtTree *t, size_t *out);

// Copy all out-degrees (arrival order) into a caller buffer of length at
// least wrt_tree_len.
enum WrtStatus wrt_tree_degrees(const struct WrtTree *t, uint32_t *buf, size_t buf_len);

// Copy all vertex heights (arrival order) into a caller buffer of length at
// least wrt_tree_len.
enum WrtStatus wrt_tree_heights(const struct WrtTree *t, uint32_t *buf, size_t buf_len);

// Most recent common ancestor of 1-based vertices i and j.
enum WrtStatus wrt_tree_mrca(const struct WrtTree *t, size_t i, size_t j, size_t *out);

// Ultrametric distance exp(-height(mrca)); zero on the diagonal.
enum WrtStatus wrt_tree_d_exp(const struct WrtTree *t, size_t i, size_t j, double *out);

// Profile counts per height level. Writes up to buf_len entries when buf is
// non-null and always reports the required length through out_len (two-call
// pattern).
enum WrtStatus wrt_tree_profile(const struct WrtTree *t,
                                uint64_t *buf,
                                size_t buf_len,
                                size_t *out_len);

// Rate function 1 + gamma (e^z - 1 - z e^z).
double wrt_f_gamma(double gamma, double z);

// Positive root of the rate function; gamma e^{z_+} is the height constant.
enum WrtStatus wrt_solve_z_plus(double gamma, double *out);

// Leading Gaussian profile term at level k.
double wrt_gaussian_profile_prediction(size_t n, double gamma, size_t k);

// q-th moment of Beta(a, b), with Beta(a, 0) the point mass at 1.
enum WrtStatus wrt_beta_moment(double a, double b, uint32_t q, double *out);

// p-th moment of the generalized Mittag-Leffler law ML(alpha, theta).
enum WrtStatus wrt_ml_moment(double alpha, double theta, uint32_t p, double *out);

// p-th moment of the k-th value of the limiting degree chain for constant
// fitness (a, b, b, ...).
enum WrtStatus wrt_limit_chain_moment_constant(double a,
                                               double b,
                                               size_t k,
                                               uint32_t p,
                                               double *out);

// Sweep all traces of n-vertex trees (n <= 6) and certify that the
// attachment law coincides with the Beta-product mixture.
enum WrtStatus wrt_certify_theorem1(const struct WrtFitness *fitness,
                                    size_t n,
                                    struct WrtTheorem1Report *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WRTLAB_H */
