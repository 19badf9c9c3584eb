#ifndef SUBDYN_H
#define SUBDYN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SubdynStatus {
  SUBDYN_STATUS_OK = 0,
  SUBDYN_STATUS_NULL_POINTER = 1,
  SUBDYN_STATUS_INVALID_UTF8 = 2,
  SUBDYN_STATUS_INVALID_INPUT = 3,
  SUBDYN_STATUS_OVERFLOW = 4,
  SUBDYN_STATUS_PANIC = 5,
} SubdynStatus;

// Opaque handle to a parsed substitution.
typedef struct SubdynSubstitution SubdynSubstitution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a substitution in the `letter -> word` text format.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum SubdynStatus subdyn_substitution_parse(const char *text, struct SubdynSubstitution **out);

// Releases a handle; null is ignored.
//
// # Safety
// `sub` must come from [`subdyn_substitution_parse`] and not be used afterwards.
void subdyn_substitution_free(struct SubdynSubstitution *sub);

// Alphabet size, or 0 for a null handle.
//
// # Safety
// `sub` must be null or a live handle.
size_t subdyn_substitution_size(const struct SubdynSubstitution *sub);

// Spectral classification as a JSON document.
//
// # Safety
// `sub` must be a live handle and `out_json` a valid pointer.
enum SubdynStatus subdyn_classify_json(const struct SubdynSubstitution *sub,
                                       double tolerance,
                                       char **out_json);

// Length-`length` prefix of the fixed point (of least period) at `seed`.
//
// # Safety
// `sub` must be a live handle and `out` a valid pointer.
enum SubdynStatus subdyn_expand(const struct SubdynSubstitution *sub,
                                uint32_t seed,
                                size_t length,
                                char **out);

// Path representing `value` from vertex `start`, in the text form `a: a.e.a`.
//
// # Safety
// `sub` must be a live handle and `out_path` a valid pointer.
enum SubdynStatus subdyn_encode(const struct SubdynSubstitution *sub,
                                uint32_t start,
                                uint64_t value,
                                char **out_path);

// Value of a path given in text form. Writes the value to `out_value`
// when it fits in 64 bits, and its decimal form to `out_decimal` if that
// pointer is not null.
//
// # Safety
// `sub` must be a live handle, `path` a NUL-terminated string, `out_value`
// valid, and `out_decimal` null or valid.
enum SubdynStatus subdyn_decode(const struct SubdynSubstitution *sub,
                                const char *path,
                                uint64_t *out_value,
                                char **out_decimal);

// Strong coincidence search between the period-1 fixed points at `a` and
// `b`, as a JSON document.
//
// # Safety
// `sub` must be a live handle and `out_json` a valid pointer.
enum SubdynStatus subdyn_coincide_json(const struct SubdynSubstitution *sub,
                                       uint32_t a,
                                       uint32_t b,
                                       size_t horizon,
                                       char **out_json);

// Releases a string returned by this library; null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void subdyn_string_free(char *s);

// Message for the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *subdyn_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUBDYN_H */
