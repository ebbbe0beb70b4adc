#ifndef NILSOL_H
#define NILSOL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NilsolStatus {
  NILSOL_STATUS_OK = 0,
  NILSOL_STATUS_NULL_POINTER = 1,
  NILSOL_STATUS_INVALID_ARGUMENT = 2,
  NILSOL_STATUS_PARSE = 3,
  NILSOL_STATUS_PRECONDITION = 4,
  NILSOL_STATUS_BUDGET_EXCEEDED = 5,
  NILSOL_STATUS_TIMEOUT = 6,
  NILSOL_STATUS_INTERNAL = 7,
  NILSOL_STATUS_PANIC = 8,
} NilsolStatus;

/*
 A filtered nilmanifold model.
 */
typedef struct NilsolModel NilsolModel;

/*
 A subset of Z/N.
 */
typedef struct NilsolSet NilsolSet;

/*
 A system of linear forms.
 */
typedef struct NilsolSystem NilsolSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty after success.
 The pointer stays valid until the next nilsol call on the same thread.
 */
const char *nilsol_last_error(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void nilsol_string_free(char *s);

/*
 Parses a system from JSON: `{"forms": [[...], ...], "name": ...}`.

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NilsolStatus nilsol_system_from_json(const char *json, struct NilsolSystem **out);

/*
 Builds a system from a row-major `t x d` coefficient matrix.

 # Safety
 `coefficients` must point to `t * d` values and `out` be valid.
 */
enum NilsolStatus nilsol_system_new(const int64_t *coefficients,
                                    uintptr_t t,
                                    uintptr_t d,
                                    struct NilsolSystem **out);

/*
 The k-term arithmetic progression `(n1 + j n2)_{j < k}`.

 # Safety
 `out` must be valid.
 */
enum NilsolStatus nilsol_system_arithmetic_progression(uintptr_t k, struct NilsolSystem **out);

/*
 # Safety
 `system` must come from this library and not have been freed. Null is ignored.
 */
void nilsol_system_free(struct NilsolSystem *system);

/*
 Kernel presentation of the system's image, as JSON.

 # Safety
 Pointers must be valid.
 */
enum NilsolStatus nilsol_kernelize(const struct NilsolSystem *system, char **json_out);

/*
 A subset of Z/modulus from its members (duplicates rejected).

 # Safety
 `members` must point to `len` values and `out` be valid.
 */
enum NilsolStatus nilsol_set_new(uint64_t modulus,
                                 const uint64_t *members,
                                 uintptr_t len,
                                 struct NilsolSet **out);

/*
 # Safety
 `set` must be valid; `len` receives the number of members.
 */
enum NilsolStatus nilsol_set_len(const struct NilsolSet *set, uintptr_t *len);

/*
 # Safety
 `set` must come from this library and not have been freed. Null is ignored.
 */
void nilsol_set_free(struct NilsolSet *set);

/*
 Exact normalized solution count of `set` for `system`, as `num / den`.

 # Safety
 Pointers must be valid.
 */
enum NilsolStatus nilsol_sol_set(const struct NilsolSystem *system,
                                 const struct NilsolSet *set,
                                 int64_t *num,
                                 int64_t *den);

/*
 `||f||_{U^d}` for `f = re + i im` on Z/n; `im` may be null for real input.

 # Safety
 `re` (and `im` when non-null) must point to `n` values; `out` must be valid.
 */
enum NilsolStatus nilsol_gowers_norm(const double *re,
                                     const double *im,
                                     uintptr_t n,
                                     uint32_t d,
                                     double *out);

/*
 Exact `m(alpha, n)` for `alpha = alpha_num / alpha_den`; `budget_ms = 0`
 means no time limit. Writes the result JSON.

 # Safety
 Pointers must be valid.
 */
enum NilsolStatus nilsol_min_sol_exact(const struct NilsolSystem *system,
                                       int64_t alpha_num,
                                       int64_t alpha_den,
                                       uint64_t n,
                                       uint64_t budget_ms,
                                       char **json_out);

/*
 Exact `M(alpha, n)`; see [`nilsol_min_sol_exact`].

 # Safety
 Pointers must be valid.
 */
enum NilsolStatus nilsol_max_sol_exact(const struct NilsolSystem *system,
                                       int64_t alpha_num,
                                       int64_t alpha_den,
                                       uint64_t n,
                                       uint64_t budget_ms,
                                       char **json_out);

/*
 Exact largest density of a subset of Z/n free of every configuration of
 `system`; `weak != 0` ignores constant configurations.

 # Safety
 Pointers must be valid.
 */
enum NilsolStatus nilsol_max_free_exact(const struct NilsolSystem *system,
                                        uint64_t n,
                                        int32_t weak,
                                        uint64_t budget_ms,
                                        char **json_out);

/*
 A built-in model (`heisenberg-lcs`, `heisenberg-deg3`, `torus:m=M,s=S`)
 or a path to a model JSON file.

 # Safety
 `name` must be NUL-terminated and `out` valid.
 */
enum NilsolStatus nilsol_model_load(const char *name, struct NilsolModel **out);

/*
 # Safety
 `model` must come from this library and not have been freed. Null is ignored.
 */
void nilsol_model_free(struct NilsolModel *model);

/*
 A q-periodic, A-irrational polynomial sequence; writes its Taylor
 coefficients (exact rationals) and verification flags as JSON.

 # Safety
 Pointers must be valid.
 */
enum NilsolStatus nilsol_build_periodic(const struct NilsolModel *model,
                                        uint64_t q,
                                        uint64_t a,
                                        uint64_t seed,
                                        char **json_out);

/*
 Runs an acceptance experiment by id or number and writes its report.
 A failing experiment still returns OK; inspect `"passed"`.

 # Safety
 Pointers must be valid.
 */
enum NilsolStatus nilsol_reproduce(const char *id, char **json_out);

/*
 Library version as a static NUL-terminated string.
 */
const char *nilsol_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NILSOL_H */
