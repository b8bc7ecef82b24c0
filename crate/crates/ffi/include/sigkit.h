#ifndef SIGKIT_H
#define SIGKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SigkitStatus {
  SIGKIT_STATUS_OK = 0,
  SIGKIT_STATUS_NULL_POINTER = 1,
  SIGKIT_STATUS_PARSE = 2,
  SIGKIT_STATUS_INVALID_LETTER = 3,
  SIGKIT_STATUS_CAPACITY = 4,
  SIGKIT_STATUS_SHAPE = 5,
  SIGKIT_STATUS_DOMAIN = 6,
  SIGKIT_STATUS_WINDOW = 7,
  SIGKIT_STATUS_UNSUPPORTED = 8,
  SIGKIT_STATUS_BUFFER_SIZE = 9,
  SIGKIT_STATUS_PANIC = 10,
} SigkitStatus;

/**
 * Opaque word-set handle.
 */
typedef struct SigkitWordSet SigkitWordSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *sigkit_last_error_message(void);

/**
 * Builds a word set from a JSON descriptor. `data_dim` fills in a missing
 * `"d"`; pass 0 when the descriptor names it.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SigkitStatus sigkit_wordset_from_json(const char *json,
                                           uint32_t data_dim,
                                           struct SigkitWordSet **out);

/**
 * Number of output columns, including the ε column when present.
 * Returns 0 for a null handle.
 *
 * # Safety
 * `ws` must be null or a live handle.
 */
size_t sigkit_wordset_len(const struct SigkitWordSet *ws);

/**
 * Alphabet size of the word set, or 0 for a null handle.
 *
 * # Safety
 * `ws` must be null or a live handle.
 */
uint32_t sigkit_wordset_dim(const struct SigkitWordSet *ws);

/**
 * Writes the NUL-terminated label of column `index` (such as `"1.2"`) into
 * `buf`, which must hold `buf_len` bytes.
 *
 * # Safety
 * `ws` must be a live handle and `buf` valid for `buf_len` bytes.
 */
enum SigkitStatus sigkit_wordset_label(const struct SigkitWordSet *ws,
                                       size_t index,
                                       char *buf,
                                       size_t buf_len);

/**
 * Releases a word set. Null is ignored.
 *
 * # Safety
 * `ws` must be null or a handle not yet freed.
 */
void sigkit_wordset_free(struct SigkitWordSet *ws);

/**
 * Signatures of `batch` paths into `out` (`batch x width`).
 *
 * # Safety
 * `paths` must hold `batch*samples*d` values and `out` `out_len` values.
 */
enum SigkitStatus sigkit_signature(const struct SigkitWordSet *ws,
                                   const double *paths,
                                   size_t batch,
                                   size_t samples,
                                   size_t d,
                                   double *out,
                                   size_t out_len);

/**
 * Windowed signatures. `windows` holds `num_windows` pairs `(l, r)` of
 * 0-based sample indices; `out` is `num_windows x batch x width`.
 *
 * # Safety
 * Buffers must hold the stated number of elements.
 */
enum SigkitStatus sigkit_signature_windows(const struct SigkitWordSet *ws,
                                           const double *paths,
                                           size_t batch,
                                           size_t samples,
                                           size_t d,
                                           const size_t *windows,
                                           size_t num_windows,
                                           double *out,
                                           size_t out_len);

/**
 * Gradients of `sum upstream * signature` with respect to the path samples;
 * `upstream` is `batch x width`, `out` is `batch x samples x d`.
 *
 * # Safety
 * Buffers must hold the stated number of elements.
 */
enum SigkitStatus sigkit_signature_backward(const struct SigkitWordSet *ws,
                                            const double *paths,
                                            size_t batch,
                                            size_t samples,
                                            size_t d,
                                            const double *upstream,
                                            size_t upstream_len,
                                            double *out,
                                            size_t out_len);

/**
 * Number of Lyndon words of length `1..=depth` over `d` letters.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SigkitStatus sigkit_logsignature_width(uint32_t d, uint32_t depth, size_t *out);

/**
 * Log-signatures at Lyndon words into `out` (`batch x width`).
 *
 * # Safety
 * Buffers must hold the stated number of elements.
 */
enum SigkitStatus sigkit_logsignature(const double *paths,
                                      size_t batch,
                                      size_t samples,
                                      size_t d,
                                      uint32_t depth,
                                      double *out,
                                      size_t out_len);

/**
 * Path gradients of `sum upstream * logsignature`.
 *
 * # Safety
 * Buffers must hold the stated number of elements.
 */
enum SigkitStatus sigkit_logsignature_backward(const double *paths,
                                               size_t batch,
                                               size_t samples,
                                               size_t d,
                                               uint32_t depth,
                                               const double *upstream,
                                               size_t upstream_len,
                                               double *out,
                                               size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIGKIT_H */
