#ifndef REYNOLDS_H
#define REYNOLDS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ReynoldsStatus {
  REYNOLDS_STATUS_OK = 0,
  REYNOLDS_STATUS_NULL_POINTER = 1,
  REYNOLDS_STATUS_INVALID_UTF8 = 2,
  REYNOLDS_STATUS_INVALID = 3,
  REYNOLDS_STATUS_SYNTAX = 4,
  REYNOLDS_STATUS_NO_TRUSTED_DERIVATIVE = 5,
  REYNOLDS_STATUS_NON_INVERTIBLE = 6,
  REYNOLDS_STATUS_ORDER_EXCEEDED = 7,
  REYNOLDS_STATUS_PRECONDITION_VIOLATED = 8,
  REYNOLDS_STATUS_INDEX_OVERFLOW = 9,
  REYNOLDS_STATUS_ALGEBRA_MISMATCH = 10,
  REYNOLDS_STATUS_UNSUPPORTED = 11,
  REYNOLDS_STATUS_PANIC = 12,
} ReynoldsStatus;

/**
 * A base algebra.
 */
typedef struct ReynoldsAlgebra ReynoldsAlgebra;

/**
 * A separable Volterra kernel.
 */
typedef struct ReynoldsKernel ReynoldsKernel;

/**
 * A truncated power series.
 */
typedef struct ReynoldsSeries ReynoldsSeries;

/**
 * An element of the free operated algebra over a base algebra.
 */
typedef struct ReynoldsTensor ReynoldsTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on this thread.
 */
const char *reynolds_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void reynolds_string_free(char *s);

/**
 * Parses a coefficient array such as `["0", "1", "-1/2"]`; the order is its length minus one.
 *
 * # Safety
 * `json` must be a valid C string and `out` a writable pointer.
 */
enum ReynoldsStatus reynolds_series_from_json(const char *json, struct ReynoldsSeries **out);

/**
 * # Safety
 * `s` must be a live series handle and `out` a writable pointer.
 */
enum ReynoldsStatus reynolds_series_to_json(const struct ReynoldsSeries *s, char **out);

/**
 * # Safety
 * `s` must be a live series handle.
 */
size_t reynolds_series_ord(const struct ReynoldsSeries *s);

/**
 * # Safety
 * `a`, `b` must be live series handles and `out` a writable pointer.
 */
enum ReynoldsStatus reynolds_series_mul(const struct ReynoldsSeries *a,
                                        const struct ReynoldsSeries *b,
                                        struct ReynoldsSeries **out);

/**
 * # Safety
 * `s` must be null or a handle from this library, not used afterwards.
 */
void reynolds_series_free(struct ReynoldsSeries *s);

/**
 * Builds a kernel from a spec such as `exp`, `cauchy` or `k=inv(1+x),h=1`,
 * trusted to order `ord`.
 *
 * # Safety
 * `spec` must be a valid C string and `out` a writable pointer.
 */
enum ReynoldsStatus reynolds_kernel_parse(const char *spec,
                                          size_t ord,
                                          struct ReynoldsKernel **out);

/**
 * # Safety
 * `k` and `f` must be live handles and `out` a writable pointer.
 */
enum ReynoldsStatus reynolds_kernel_apply_p(const struct ReynoldsKernel *k,
                                            const struct ReynoldsSeries *f,
                                            struct ReynoldsSeries **out);

/**
 * # Safety
 * `k` and `f` must be live handles and `out` a writable pointer.
 */
enum ReynoldsStatus reynolds_kernel_apply_d(const struct ReynoldsKernel *k,
                                            const struct ReynoldsSeries *f,
                                            struct ReynoldsSeries **out);

/**
 * Evaluates an expression in `x`, `lambda`, `P` and `D` under the kernel,
 * with no free symbols, and returns the series as JSON.
 *
 * # Safety
 * `k` must be a live handle, `expression` a valid C string and `out` a
 * writable pointer.
 */
enum ReynoldsStatus reynolds_kernel_eval(const struct ReynoldsKernel *k,
                                         const char *expression,
                                         char **out);

/**
 * # Safety
 * `k` must be null or a handle from this library, not used afterwards.
 */
void reynolds_kernel_free(struct ReynoldsKernel *k);

/**
 * Builds a base algebra from a descriptor such as `poly` or `scalar:mu=2/3`.
 *
 * # Safety
 * `descriptor` must be a valid C string and `out` a writable pointer.
 */
enum ReynoldsStatus reynolds_algebra_parse(const char *descriptor, struct ReynoldsAlgebra **out);

/**
 * # Safety
 * `a` must be null or a handle from this library, not used afterwards.
 */
void reynolds_algebra_free(struct ReynoldsAlgebra *a);

/**
 * Parses a tensor from its JSON form. The header's algebra must match `alg`.
 *
 * # Safety
 * `json` must be a valid C string, `alg` a live handle and `out` a writable
 * pointer.
 */
enum ReynoldsStatus reynolds_tensor_from_json(const char *json,
                                              const struct ReynoldsAlgebra *alg,
                                              struct ReynoldsTensor **out);

/**
 * # Safety
 * `t` must be a live handle and `out` a writable pointer.
 */
enum ReynoldsStatus reynolds_tensor_to_json(const struct ReynoldsTensor *t, char **out);

/**
 * # Safety
 * `a`, `b` must be live handles and `out` a writable pointer.
 */
enum ReynoldsStatus reynolds_tensor_diamond(const struct ReynoldsTensor *a,
                                            const struct ReynoldsTensor *b,
                                            struct ReynoldsTensor **out);

/**
 * # Safety
 * `t` must be a live handle and `out` a writable pointer.
 */
enum ReynoldsStatus reynolds_tensor_p(const struct ReynoldsTensor *t, struct ReynoldsTensor **out);

/**
 * # Safety
 * `t` must be a live handle and `out` a writable pointer.
 */
enum ReynoldsStatus reynolds_tensor_d(const struct ReynoldsTensor *t, struct ReynoldsTensor **out);

/**
 * # Safety
 * `t` must be null or a handle from this library, not used afterwards.
 */
void reynolds_tensor_free(struct ReynoldsTensor *t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REYNOLDS_H */
