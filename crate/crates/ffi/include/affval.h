#ifndef AFFVAL_H
#define AFFVAL_H

#include <stdbool.h>
#include <stddef.h>

// Status codes.
typedef enum AffvalStatus {
  AFFVAL_STATUS_OK = 0,
  AFFVAL_STATUS_NULL_POINTER = 1,
  AFFVAL_STATUS_INVALID_INPUT = 2,
  AFFVAL_STATUS_DIMENSION_MISMATCH = 3,
  AFFVAL_STATUS_ORIGIN_NOT_INTERIOR = 4,
  AFFVAL_STATUS_DEGENERATE = 5,
  AFFVAL_STATUS_UNSUPPORTED = 6,
  AFFVAL_STATUS_NUMERICAL = 7,
  AFFVAL_STATUS_IO = 8,
  AFFVAL_STATUS_PARSE = 9,
  AFFVAL_STATUS_PANIC = 10,
} AffvalStatus;

// Opaque convex body.
typedef struct AffvalBody AffvalBody;

// Opaque tensor in `Sym^p ⊗ Sym^q`.
typedef struct AffvalTensor AffvalTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or null. Valid until
// the next call into the library from the same thread.
const char *affval_last_error(void);

// Library version as a static string.
const char *affval_version(void);

// Convex hull of `count` points of dimension `n`, stored row by row.
//
// # Safety
// `vertices` must point to `count * n` doubles and `out` must be writable.
enum AffvalStatus affval_body_polytope(const double *vertices,
                                       size_t count,
                                       size_t n,
                                       struct AffvalBody **out);

// The ellipsoid `{x : xᵀQx ≤ 1}` for a row-major symmetric positive
// definite `n × n` matrix `Q`.
//
// # Safety
// `q` must point to `n * n` doubles and `out` must be writable.
enum AffvalStatus affval_body_ellipsoid(const double *q, size_t n, struct AffvalBody **out);

// Reads a JSON body specification.
//
// # Safety
// `path` must be a nul-terminated string and `out` must be writable.
enum AffvalStatus affval_body_from_file(const char *path, struct AffvalBody **out);

// Releases a body. Null is ignored.
//
// # Safety
// `b` must come from this library and not be used afterwards.
void affval_body_free(struct AffvalBody *b);

// # Safety
// `b` must be a valid body and `out` writable.
enum AffvalStatus affval_body_dim(const struct AffvalBody *b, size_t *out);

// # Safety
// `b` must be a valid body and `out` writable.
enum AffvalStatus affval_body_volume(const struct AffvalBody *b, double *out);

// `h_K(ξ)`.
//
// # Safety
// `xi` must point to `n` doubles and `out` must be writable.
enum AffvalStatus affval_body_support(const struct AffvalBody *b,
                                      const double *xi,
                                      size_t n,
                                      double *out);

// Support function of the projection body of a polytope.
//
// # Safety
// `x` must point to `n` doubles and `out` must be writable.
enum AffvalStatus affval_projection_body_support(const struct AffvalBody *b,
                                                 const double *x,
                                                 size_t n,
                                                 double *out);

// Tensor from row-major coefficients: one row per monomial of degree `p`,
// one column per monomial of degree `q`, both in graded lexicographic
// order. `covector_first` selects `Sym^p V* ⊗ Sym^q V` (for `Φ`) over
// `Sym^p V ⊗ Sym^q V*` (for `Ψ`).
//
// # Safety
// `coeffs` must point to `len` doubles and `out` must be writable.
enum AffvalStatus affval_tensor_new(size_t n,
                                    size_t p,
                                    size_t q,
                                    bool covector_first,
                                    const double *coeffs,
                                    size_t len,
                                    struct AffvalTensor **out);

// The identity of `V* ⊗ V`.
//
// # Safety
// `out` must be writable.
enum AffvalStatus affval_tensor_identity(size_t n, struct AffvalTensor **out);

// Releases a tensor. Null is ignored.
//
// # Safety
// `t` must come from this library and not be used afterwards.
void affval_tensor_free(struct AffvalTensor *t);

// Number of coefficients of a tensor.
//
// # Safety
// `t` must be a valid tensor and `out` writable.
enum AffvalStatus affval_tensor_len(const struct AffvalTensor *t, size_t *out);

// `h_{Φ^{p,q}K}(φ)` with default quadrature settings. `error_estimate`
// may be null.
//
// # Safety
// Handles must be valid and `value` writable.
enum AffvalStatus affval_phi_pq(const struct AffvalBody *b,
                                const struct AffvalTensor *phi,
                                double *value,
                                double *error_estimate);

// `h_{Ψ^{p,q}K}(ψ)`; see [`affval_phi_pq`].
//
// # Safety
// Handles must be valid and `value` writable.
enum AffvalStatus affval_psi_pq(const struct AffvalBody *b,
                                const struct AffvalTensor *psi,
                                double *value,
                                double *error_estimate);

// Schur polynomial `s_λ(x)`.
//
// # Safety
// `lambda` must point to `parts` values, `x` to `n` doubles, `out` writable.
enum AffvalStatus affval_schur_eval(const size_t *lambda,
                                    size_t parts,
                                    const double *x,
                                    size_t n,
                                    double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AFFVAL_H */
