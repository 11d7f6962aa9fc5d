#ifndef NOCUP_H
#define NOCUP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NocupSchedule {
  NOCUP_SCHEDULE_TOWER = 0,
  NOCUP_SCHEDULE_SCALED = 1,
} NocupSchedule;

typedef enum NocupStatus {
  NOCUP_STATUS_OK = 0,
  NOCUP_STATUS_NULL_POINTER = 1,
  NOCUP_STATUS_INVALID_UTF8 = 2,
  NOCUP_STATUS_PARSE = 3,
  NOCUP_STATUS_CAP_EXCEEDED = 4,
  NOCUP_STATUS_GAMMA_DIVERGED = 5,
  NOCUP_STATUS_NOT_SLIM = 6,
  NOCUP_STATUS_OUT_OF_RANGE = 7,
  NOCUP_STATUS_FAILED = 8,
} NocupStatus;

typedef struct NocupHyperInt NocupHyperInt;

typedef struct NocupOrdinal NocupOrdinal;

typedef struct NocupPsiRun NocupPsiRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread; empty if none. Valid until
// the next failing call on the same thread.
const char *nocup_last_error(void);

// # Safety
// `s` must come from this library or be null.
void nocup_string_free(char *s);

// Parses `E:<digits>` or `T:<height>:<digits>`.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum NocupStatus nocup_hyperint_parse(const char *text, struct NocupHyperInt **out);

struct NocupHyperInt *nocup_hyperint_from_u64(uint64_t v);

// `2_k^m`.
//
// # Safety
// `m` must be a live handle or null.
struct NocupHyperInt *nocup_hyperint_tower(uint64_t k, const struct NocupHyperInt *m);

// Writes -1, 0 or 1 to `out`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum NocupStatus nocup_hyperint_compare(const struct NocupHyperInt *a,
                                        const struct NocupHyperInt *b,
                                        int32_t *out);

// Text form; free with `nocup_string_free`. Null on a null handle.
//
// # Safety
// `h` must be a live handle or null.
char *nocup_hyperint_to_string(const struct NocupHyperInt *h);

// # Safety
// `h` must come from this library or be null; it is invalid afterwards.
void nocup_hyperint_free(struct NocupHyperInt *h);

// Parses an ordinal such as `w^(w + 1) + 3`.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum NocupStatus nocup_ordinal_parse(const char *text, struct NocupOrdinal **out);

// # Safety
// `o` must be a live handle; `out` must be writable.
enum NocupStatus nocup_ordinal_norm(const struct NocupOrdinal *o, uint64_t *out);

// Writes -1, 0 or 1 to `out`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum NocupStatus nocup_ordinal_compare(const struct NocupOrdinal *a,
                                       const struct NocupOrdinal *b,
                                       int32_t *out);

// The `k`-th member of the fundamental sequence of `source`, which is an
// ordinal of the form `w^b` or the text `e0`.
//
// # Safety
// `source` must be a NUL-terminated string; `out` must be writable.
enum NocupStatus nocup_ordinal_fundseq(const char *source, uint64_t k, struct NocupOrdinal **out);

// # Safety
// `o` must be a live handle or null.
char *nocup_ordinal_to_string(const struct NocupOrdinal *o);

// # Safety
// `o` must come from this library or be null; it is invalid afterwards.
void nocup_ordinal_free(struct NocupOrdinal *o);

// Runs Ψ for iterations `0..=n` over the default catalog with initial
// `C = {subject}`. `gamma` is a builtin name or a decimal index; `cap` of 0
// selects the default cap.
//
// # Safety
// `gamma` must be a NUL-terminated string; `out` must be writable.
enum NocupStatus nocup_psi_run(const char *gamma,
                               uint64_t subject,
                               enum NocupSchedule schedule,
                               uint64_t n,
                               uint64_t cap,
                               struct NocupPsiRun **out);

// Number of completed iterations.
//
// # Safety
// `run` must be a live handle or null.
uint64_t nocup_psi_run_len(const struct NocupPsiRun *run);

// `Ψ(l)` as a new handle.
//
// # Safety
// `run` must be a live handle; `out` must be writable.
enum NocupStatus nocup_psi_run_value(const struct NocupPsiRun *run,
                                     uint64_t l,
                                     struct NocupHyperInt **out);

// The trace as JSON lines; free with `nocup_string_free`.
//
// # Safety
// `run` must be a live handle or null.
char *nocup_psi_run_trace(const struct NocupPsiRun *run);

// # Safety
// `run` must come from this library or be null; it is invalid afterwards.
void nocup_psi_run_free(struct NocupPsiRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NOCUP_H */
