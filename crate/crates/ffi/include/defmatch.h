#ifndef DEFMATCH_H
#define DEFMATCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DmStatus {
  DM_STATUS_OK = 0,
  // A required pointer argument was null.
  DM_STATUS_NULL = 1,
  // A string argument was not valid UTF-8.
  DM_STATUS_UTF8 = 2,
  // Malformed input text (JSON, scalar, unknown name).
  DM_STATUS_PARSE = 3,
  // The computation failed on valid input.
  DM_STATUS_DOMAIN = 4,
  // An iteration bound was exceeded.
  DM_STATUS_BOUND = 5,
  // Internal panic, caught at the boundary.
  DM_STATUS_PANIC = 6,
} DmStatus;

// Opaque graph handle.
typedef struct DmGraph DmGraph;

// Opaque matching handle; only meaningful together with the graph it was built for.
typedef struct DmMatching DmMatching;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a graph file's JSON text into a new handle.
//
// # Safety
// `json` must be a valid NUL-terminated string and `out` a valid pointer.
enum DmStatus dm_graph_parse_json(const char *json, struct DmGraph **out);

// Builds a gallery graph: `"rot"` or `"laczkovich"`. `param` may be null for
// the default `rt2 - 1`.
//
// # Safety
// `name` must be a valid string, `param` null or a valid string, `out` a valid pointer.
enum DmStatus dm_graph_gallery(const char *name, const char *param, struct DmGraph **out);

// Releases a graph handle. Null is ignored.
//
// # Safety
// `g` must be null or a handle from this library that has not been freed.
void dm_graph_free(struct DmGraph *g);

// Writes the number of structural violations of `g` to `count`.
// The status is `DM_STATUS_OK` even when violations exist; the first one is
// then described by [`dm_last_error`].
//
// # Safety
// `g` must be a live handle and `count` a valid pointer.
enum DmStatus dm_graph_validate(const struct DmGraph *g, uintptr_t *count);

// Serializes a graph to JSON.
//
// # Safety
// `g` must be a live handle and `out` a valid pointer.
enum DmStatus dm_graph_to_json(const struct DmGraph *g, char **out);

// Computes a matching leaving less than `eps` (scalar text) uncovered.
//
// # Safety
// `g` must be a live handle, `eps` a valid string, `out` a valid pointer.
enum DmStatus dm_epsilon_matching(const struct DmGraph *g,
                                  const char *eps,
                                  struct DmMatching **out);

// Parses matching JSON against `g`.
//
// # Safety
// `g` must be a live handle, `json` a valid string, `out` a valid pointer.
enum DmStatus dm_matching_parse_json(const struct DmGraph *g,
                                     const char *json,
                                     struct DmMatching **out);

// Exact measure of the vertices of `g` left uncovered by `m`, as scalar text.
//
// # Safety
// `g`, `m` must be live handles and `out` a valid pointer.
enum DmStatus dm_matching_uncovered_measure(const struct DmGraph *g,
                                            const struct DmMatching *m,
                                            char **out);

// Serializes a matching to JSON, naming edges by their ids in `g`.
//
// # Safety
// `g`, `m` must be live handles and `out` a valid pointer.
enum DmStatus dm_matching_to_json(const struct DmGraph *g, const struct DmMatching *m, char **out);

// Releases a matching handle. Null is ignored.
//
// # Safety
// `m` must be null or a handle from this library that has not been freed.
void dm_matching_free(struct DmMatching *m);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from this library that has not been freed.
void dm_string_free(char *s);

// Message for the last failing call on this thread; empty after a success
// (except for the diagnostic left by [`dm_graph_validate`]).
// The pointer stays valid until the next call into the library on this thread.
const char *dm_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEFMATCH_H */
