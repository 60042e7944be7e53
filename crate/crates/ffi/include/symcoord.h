#ifndef SYMCOORD_H
#define SYMCOORD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Exact Gaussian-rational arithmetic.
 */
#define SYMCOORD_MODE_EXACT 0

/**
 * Complex double arithmetic.
 */
#define SYMCOORD_MODE_FLOAT 1

typedef enum SymcoordStatus {
  SYMCOORD_STATUS_OK = 0,
  SYMCOORD_STATUS_NULL_ARGUMENT = 1,
  /**
   * Malformed JSON, wrong shapes, or an unknown mode.
   */
  SYMCOORD_STATUS_PARSE = 2,
  /**
   * An orbit spec or spec combination that admits no tuple.
   */
  SYMCOORD_STATUS_REJECTED = 3,
  /**
   * The point violates a domain condition of the coordinates.
   */
  SYMCOORD_STATUS_OUTSIDE_DOMAIN = 4,
  /**
   * A membership, momentum or identity check failed.
   */
  SYMCOORD_STATUS_VERIFICATION = 5,
  SYMCOORD_STATUS_PANIC = 6,
} SymcoordStatus;

/**
 * A validated point of the reduced space.
 */
typedef struct SymcoordReduced SymcoordReduced;

/**
 * A validated tuple on the zero-momentum level.
 */
typedef struct SymcoordTuple SymcoordTuple;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call into this library on the same thread.
 */
const char *symcoord_last_error(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` is null or a string returned by this library and not yet freed.
 */
void symcoord_string_free(char *s);

/**
 * `N·m(m−1) − 2(m²−1)`, the dimension of the reduced space.
 */
int64_t symcoord_reduced_dimension(size_t m, size_t n);

/**
 * Parses a tuple document and checks orbit membership and zero momentum.
 * `tol` applies in float mode; a non-positive value selects the default.
 *
 * # Safety
 * `json` is a NUL-terminated string; `out` is valid for writes.
 */
enum SymcoordStatus symcoord_tuple_from_json(const char *json,
                                             double tol,
                                             struct SymcoordTuple **out);

/**
 * Draws a random tuple with `m×m` matrices and `n` orbits; deterministic in
 * `seed`.
 *
 * # Safety
 * `out` is valid for writes.
 */
enum SymcoordStatus symcoord_tuple_sample(uint32_t mode,
                                          size_t m,
                                          size_t n,
                                          uint64_t seed,
                                          struct SymcoordTuple **out);

/**
 * Serializes a tuple; free the result with [`symcoord_string_free`].
 *
 * # Safety
 * `tuple` is a live handle; `out` is valid for writes.
 */
enum SymcoordStatus symcoord_tuple_to_json(const struct SymcoordTuple *tuple, char **out);

/**
 * # Safety
 * `tuple` is null or a handle from this library not yet freed.
 */
void symcoord_tuple_free(struct SymcoordTuple *tuple);

/**
 * Reduced coordinates of a tuple. `discrete_json` may be null for the
 * default anchors, eigenvalue and orderings; missing fields take defaults.
 *
 * # Safety
 * `tuple` is a live handle; `discrete_json` is null or NUL-terminated; `out`
 * is valid for writes.
 */
enum SymcoordStatus symcoord_reduce(const struct SymcoordTuple *tuple,
                                    const char *discrete_json,
                                    struct SymcoordReduced **out);

/**
 * The tuple in section form over a reduced point.
 *
 * # Safety
 * `point` is a live handle; `out` is valid for writes.
 */
enum SymcoordStatus symcoord_lift(const struct SymcoordReduced *point, struct SymcoordTuple **out);

/**
 * Parses and validates a reduced point document.
 *
 * # Safety
 * `json` is a NUL-terminated string; `out` is valid for writes.
 */
enum SymcoordStatus symcoord_reduced_from_json(const char *json,
                                               double tol,
                                               struct SymcoordReduced **out);

/**
 * Serializes a reduced point; free the result with [`symcoord_string_free`].
 *
 * # Safety
 * `point` is a live handle; `out` is valid for writes.
 */
enum SymcoordStatus symcoord_reduced_to_json(const struct SymcoordReduced *point, char **out);

/**
 * # Safety
 * `point` is null or a handle from this library not yet freed.
 */
void symcoord_reduced_free(struct SymcoordReduced *point);

/**
 * Runs the pullback identity checks on `trials` random tangent pairs and
 * writes the JSON report to `report`, also when the identities fail (status
 * `Verification`).
 *
 * # Safety
 * `tuple` is a live handle; `discrete_json` is null or NUL-terminated;
 * `report` is valid for writes.
 */
enum SymcoordStatus symcoord_verify_pullback(const struct SymcoordTuple *tuple,
                                             const char *discrete_json,
                                             size_t trials,
                                             uint64_t seed,
                                             char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMCOORD_H */
