/* C interface of the testrec embedding and recommendation engine.
 * Generated by cbindgen from the Rust declarations; do not edit. */

#ifndef TESTREC_H
#define TESTREC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum TrStatus {
  TrOk = 0,
  TrErrNullPointer = 1,
  TrErrInvalidUtf8 = 2,
  TrErrIo = 3,
  TrErrFormat = 4,
  TrErrParseReject = 5,
  TrErrBadArgument = 6,
  TrErrInternal = 7,
} TrStatus;

// An opened engine: model, vocabulary, store, and extraction settings.
typedef struct TrEngine TrEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent error on this thread. The pointer
// stays valid until the next failing call on the same thread. Never null.
const char *tr_last_error(void);

// Open an engine from trained artifacts. On success writes the engine
// handle to `out_engine`; free it with `tr_engine_close`.
//
// # Safety
// Path arguments must be valid NUL-terminated strings; `out_engine` must
// point to writable memory.
enum TrStatus tr_engine_open(const char *model_path,
                             const char *vocab_path,
                             const char *store_path,
                             struct TrEngine **out_engine);

// Close an engine opened by `tr_engine_open`. Null is a no-op.
//
// # Safety
// `engine` must be null or a pointer returned by `tr_engine_open` that
// has not been closed yet.
void tr_engine_close(struct TrEngine *engine);

// Dimension of the shared embedding space, or 0 for a null engine.
//
// # Safety
// `engine` must be null or a live engine handle.
size_t tr_engine_dimension(const struct TrEngine *engine);

// Number of stored units (methods plus tests), or 0 for a null engine.
//
// # Safety
// `engine` must be null or a live engine handle.
size_t tr_engine_entry_count(const struct TrEngine *engine);

// Embed method source into `out` (length `out_len`, which must equal the
// engine dimension).
//
// # Safety
// `engine` must be a live engine handle; `source` a valid NUL-terminated
// string; `out` writable for `out_len` doubles.
enum TrStatus tr_embed_method(const struct TrEngine *engine,
                              const char *source,
                              double *out,
                              size_t out_len);

// Cosine similarity of two vectors of length `len` into `out_similarity`.
//
// # Safety
// `u` and `v` must be readable for `len` doubles; `out_similarity` must
// be writable.
enum TrStatus tr_cosine(const double *u, const double *v, size_t len, double *out_similarity);

// Recommend tests for method source. `approach` is 1 (match methods,
// recommend their tests) or 2 (match tests directly); `tau` is the
// similarity floor, `k` the maximum number of candidates. On success
// writes a JSON document to `*out_json`; free it with `tr_string_free`.
//
// # Safety
// `engine` must be a live engine handle; `source` a valid NUL-terminated
// string; `out_json` writable.
enum TrStatus tr_recommend_json(const struct TrEngine *engine,
                                const char *source,
                                int approach,
                                double tau,
                                size_t k,
                                char **out_json);

// Free a string returned by this library. Null is a no-op.
//
// # Safety
// `s` must be null or a pointer returned by `tr_recommend_json` that has
// not been freed yet.
void tr_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TESTREC_H */
