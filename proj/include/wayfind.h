#ifndef WAYFIND_H
#define WAYFIND_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(WAYFIND_BUILDING)
#define WF_API __declspec(dllexport)
#else
#define WF_API __declspec(dllimport)
#endif
#else
#define WF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wf_status {
  WF_OK = 0,
  WF_ERR_INVALID_ARGUMENT = 1,
  WF_ERR_PARSE = 2,
  WF_ERR_VALIDATION = 3,
  WF_ERR_UNREACHABLE = 4,
  WF_ERR_INFEASIBLE = 5,
  WF_ERR_NOT_FOUND = 6,
  WF_ERR_IO = 7,
  WF_ERR_STATE = 8, /* a prerequisite stage has not run */
  WF_ERR_INTERNAL = 9
} wf_status;

/* A layout with its scenarios, configuration and the artifacts derived from
 * them. Handles are not thread-safe; use one per thread or serialize calls. */
typedef struct wf_project wf_project;

/* Called every few iterations of an optimization stage. */
typedef void (*wf_progress_fn)(void* user, uint64_t iteration, double best_cost);

WF_API const char* wf_version(void);
WF_API const char* wf_status_name(wf_status status);

/* Message for the most recent failure on the calling thread. Never NULL. */
WF_API const char* wf_last_error(void);

/* Frees strings returned through char** out-parameters. */
WF_API void wf_string_free(char* s);

/* Validates configuration JSON and writes it back with every default filled
 * in. */
WF_API wf_status wf_config_normalize(const char* config_json, char** out_json);

/* Parses layout JSON. Configuration starts at the defaults. */
WF_API wf_status wf_project_create(const char* layout_json, wf_project** out);
WF_API void wf_project_destroy(wf_project* project);

WF_API wf_status wf_project_set_config(wf_project* project, const char* config_json);
/* Replaces the configured seed; every stage derives its randomness from it. */
WF_API wf_status wf_project_set_seed(wf_project* project, uint64_t seed);
WF_API wf_status wf_project_set_progress(wf_project* project, wf_progress_fn fn, void* user);

/* {"nodes", "edges", "default_scenarios", "scenarios": [{source, destination,
 * importance, shortest}]} for the parsed layout. */
WF_API wf_status wf_project_summary(const wf_project* project, char** out_json);
WF_API wf_status wf_project_layout(const wf_project* project, char** out_json);
WF_API wf_status wf_project_config(const wf_project* project, char** out_json);

/* Scheme: scenario -> chosen path. Setting one discards the placement. */
WF_API wf_status wf_project_set_scheme(wf_project* project, const char* scheme_json);
WF_API wf_status wf_project_scheme(const wf_project* project, char** out_json);

/* Placement: sign entries on the subdivided layout. */
WF_API wf_status wf_project_set_placement(wf_project* project, const char* placement_json);
WF_API wf_status wf_project_placement(const wf_project* project, char** out_json);

/* Anneals the wayfinding scheme. Writes the cost breakdown as JSON. */
WF_API wf_status wf_optimize_scheme(wf_project* project, char** out_report_json);

/* Anneals the sign placement starting from one sign per path node.
 * Requires a scheme. */
WF_API wf_status wf_refine_signs(wf_project* project, char** out_report_json);

/* "scheme" or "signs"; CSV with iteration,temperature,current_cost,best_cost. */
WF_API wf_status wf_project_trace(const wf_project* project, const char* stage, char** out_csv);

/* Runs agents against the current scheme and placement. `out_trajectories_csv`
 * may be NULL. */
WF_API wf_status wf_simulate(const wf_project* project, char** out_report_json,
                             char** out_trajectories_csv);

/* Accessibility field for `destination` (node id). */
WF_API wf_status wf_heatmap(const wf_project* project, const char* destination, char** out_field_json);

/* Last field computed for `destination` in this session, including blind-zone
 * updates. WF_ERR_STATE if none. */
WF_API wf_status wf_project_field(const wf_project* project, const char* destination, char** out_field_json);

/* Adds signs leading from the road nearest (x, y) back to a scheme path toward
 * `destination`. Writes {"added": [...], "snapped": id}; the project placement
 * is updated in place. */
WF_API wf_status wf_fix_blind_zone(wf_project* project, const char* destination, double x, double y,
                                   char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* WAYFIND_H */
