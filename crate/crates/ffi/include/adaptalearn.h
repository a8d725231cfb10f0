#ifndef ADAPTALEARN_H
#define ADAPTALEARN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum AlStatus {
  AL_STATUS_OK = 0,
  AL_STATUS_NULL_POINTER = 1,
  AL_STATUS_INVALID_UTF8 = 2,
  AL_STATUS_INVALID_ARGUMENT = 3,
  AL_STATUS_PARSE_ERROR = 4,
  AL_STATUS_QUERY_ERROR = 5,
  // A replay ran but at least one expectation failed.
  AL_STATUS_EXPECTATION_FAILED = 6,
  AL_STATUS_INTERNAL = 7,
} AlStatus;

// Which consistency rules [`al_graph_validate`] applies.
typedef enum AlSchema {
  AL_SCHEMA_USER = 0,
  AL_SCHEMA_COURSE = 1,
  AL_SCHEMA_COMBINED = 2,
} AlSchema;

// An ontology graph.
typedef struct AlGraph AlGraph;

// A learner's scores and change accumulators.
typedef struct AlProfile AlProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *al_last_error_message(void);

// Frees a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void al_string_free(char *s);

// Scores a 44-letter `A`/`B` answer string into `out_scores[4]`
// (AR, SI, VV, SG).
//
// # Safety
// `answers` is a NUL-terminated string; `out_scores` points to 4 writable ints.
enum AlStatus al_score_ils(const char *answers, int32_t *out_scores);

// Creates a profile from 4 scores (odd, in [-11, 11]) and 4 accumulators.
//
// # Safety
// `learner_id` is a NUL-terminated string; `scores` and `accumulators`
// point to 4 ints each; `out` is writable.
enum AlStatus al_profile_new(const char *learner_id,
                             const int32_t *scores,
                             const int32_t *accumulators,
                             struct AlProfile **out);

// # Safety
// `p` is NULL or a live handle from [`al_profile_new`].
void al_profile_free(struct AlProfile *p);

// Copies scores and accumulators into `out_scores[4]` and `out_accumulators[4]`.
// Either output may be NULL.
//
// # Safety
// `p` is a live handle; non-NULL outputs point to 4 writable ints.
enum AlStatus al_profile_get(const struct AlProfile *p,
                             int32_t *out_scores,
                             int32_t *out_accumulators);

// Applies one behavior event (e.g. `"GalleryView"`) in place.
//
// # Safety
// `p` is a live handle; `kind` is a NUL-terminated string.
enum AlStatus al_profile_apply_event(struct AlProfile *p, const char *kind);

// Applies the default settle rule in place and stores the number of
// dimensions that triggered in `out_changed` (may be NULL).
//
// # Safety
// `p` is a live handle; `out_changed` is NULL or writable.
enum AlStatus al_profile_settle(struct AlProfile *p, uint32_t *out_changed);

// Writes the presentation plan for the profile as JSON.
//
// # Safety
// `p` is a live handle; `out` is writable.
enum AlStatus al_profile_compose(const struct AlProfile *p, char **out);

// Parses ontology text.
//
// # Safety
// `ttl` is a NUL-terminated string; `out` is writable.
enum AlStatus al_graph_parse(const char *ttl, struct AlGraph **out);

// # Safety
// `g` is NULL or a live handle from [`al_graph_parse`].
void al_graph_free(struct AlGraph *g);

// Number of triples, or 0 for NULL.
//
// # Safety
// `g` is NULL or a live handle.
size_t al_graph_len(const struct AlGraph *g);

// Canonical text of the graph.
//
// # Safety
// `g` is a live handle; `out` is writable.
enum AlStatus al_graph_serialize(const struct AlGraph *g, char **out);

// Evaluates a class expression; matching individuals are written one
// `prefix:local` per line, sorted.
//
// # Safety
// `g` is a live handle; `expr` is a NUL-terminated string; `out` is writable.
enum AlStatus al_graph_query(const struct AlGraph *g, const char *expr, char **out);

// Runs the consistency rules. Findings are written one per line as
// `<rule> <subject> <message>`; `out_count` receives their number.
//
// # Safety
// `g` is a live handle; `out_count` and `out` are writable.
enum AlStatus al_graph_validate(const struct AlGraph *g,
                                enum AlSchema schema,
                                size_t *out_count,
                                char **out);

// Replays a trace script on a simulated clock and writes the report text.
// Returns [`AlStatus::ExpectationFailed`] when any expectation failed; the
// report is written in that case too.
//
// # Safety
// `script` is a NUL-terminated string; `out_report` is writable.
enum AlStatus al_replay(const char *script, char **out_report);

// Runs the embedded golden rows; same report and status convention as [`al_replay`].
//
// # Safety
// `out_report` is writable.
enum AlStatus al_verify_table1(char **out_report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADAPTALEARN_H */
