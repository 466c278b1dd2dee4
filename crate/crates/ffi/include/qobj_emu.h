#ifndef QOBJ_EMU_H
#define QOBJ_EMU_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum QeStatus {
  QE_STATUS_OK = 0,
  /**
   * A required pointer was NULL.
   */
  QE_STATUS_NULL_ARGUMENT = 1,
  QE_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON, or a document that does not fit the wire format.
   */
  QE_STATUS_PARSE_ERROR = 3,
  /**
   * The document parsed but broke validation rules.
   */
  QE_STATUS_INVALID = 4,
  /**
   * No such backend or file.
   */
  QE_STATUS_NOT_FOUND = 5,
  /**
   * The engine failed while executing or lowering.
   */
  QE_STATUS_ENGINE_ERROR = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  QE_STATUS_INTERNAL = 7,
} QeStatus;

/**
 * Opaque backend handle.
 */
typedef struct QeBackend QeBackend;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Opens a builtin backend by name, or a fixture file by path.
 *
 * # Safety
 * `name_or_path` must be a NUL-terminated string; `out` must be writable.
 */
enum QeStatus qe_backend_open(const char *name_or_path, struct QeBackend **out);

/**
 * Builds a backend from a fixture document
 * (`{"configuration": ..., "defaults": ..., ...}`).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum QeStatus qe_backend_from_json(const char *json, struct QeBackend **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `b` must come from `qe_backend_open` or `qe_backend_from_json` and not be
 * used afterwards.
 */
void qe_backend_free(struct QeBackend *b);

/**
 * The backend configuration as JSON.
 *
 * # Safety
 * `b` must be a live handle; `out` must be writable.
 */
enum QeStatus qe_backend_configuration(const struct QeBackend *b, char **out);

/**
 * A description of the backend: plain text, or JSON when `as_json` is
 * nonzero.
 *
 * # Safety
 * `b` must be a live handle; `out` must be writable.
 */
enum QeStatus qe_backend_describe(const struct QeBackend *b, int32_t as_json, char **out);

/**
 * Checks a document. `kind` may be NULL to detect it; `b` may be NULL for
 * structure-only checks. The JSON report
 * `{"kind", "valid", "violations"}` is written to `out` whenever the
 * document parses, and the status is `QE_STATUS_INVALID` if it has errors.
 *
 * # Safety
 * Pointers must be NULL where allowed or valid; `out` must be writable.
 */
enum QeStatus qe_validate(const struct QeBackend *b,
                          const char *json,
                          const char *kind,
                          int32_t strict,
                          char **out);

/**
 * Validates and runs a Qobj. `seed` and `job_id` may be NULL. The result
 * document is written as compact JSON.
 *
 * # Safety
 * `b` must be a live handle; strings NUL-terminated; `out` writable.
 */
enum QeStatus qe_run(const struct QeBackend *b,
                     const char *qobj_json,
                     const uint64_t *seed,
                     const char *job_id,
                     char **out);

/**
 * Lowers a QASM Qobj to a PULSE Qobj through the backend's cmd_def.
 *
 * # Safety
 * `b` must be a live handle; strings NUL-terminated; `out` writable.
 */
enum QeStatus qe_lower(const struct QeBackend *b, const char *qobj_json, char **out);

/**
 * Frees a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void qe_string_free(char *s);

/**
 * Message for the last failure on this thread, or NULL. Valid until the
 * next call into the library from the same thread.
 */
const char *qe_last_error(void);

/**
 * Library version, statically allocated.
 */
const char *qe_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QOBJ_EMU_H */
