/* C interface to the consistnav library. */
#ifndef CONSISTNAV_CONSISTNAV_H
#define CONSISTNAV_CONSISTNAV_H

#include <stdint.h>

#if defined(CONSISTNAV_BUILDING_LIBRARY)
#define CN_API __attribute__((visibility("default")))
#else
#define CN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as the command-line exit codes. */
typedef enum cn_status {
  CN_OK = 0,
  CN_ERR_USAGE = 1,
  CN_ERR_IO = 2,
  CN_ERR_SCHEMA = 3,
  CN_ERR_INTERNAL = 4
} cn_status;

typedef struct cn_config cn_config;
typedef struct cn_scenario cn_scenario;

/* Message for the last failed call on this thread; never NULL. */
CN_API const char* cn_last_error(void);
CN_API const char* cn_version(void);

/* Strings returned through out-parameters are owned by the caller. */
CN_API void cn_string_free(char* s);

CN_API cn_status cn_config_default(cn_config** out);
CN_API cn_status cn_config_load(const char* path, cn_config** out);
CN_API cn_status cn_config_parse(const char* json_text, cn_config** out);
CN_API cn_status cn_config_to_json(const cn_config* config, char** out_json);
CN_API void cn_config_free(cn_config* config);

CN_API cn_status cn_scenario_load(const char* path, cn_scenario** out);
CN_API cn_status cn_scenario_parse(const char* json_text, cn_scenario** out);
/* *out_feasible is 1 when a target is reachable; *out_shortest is l* in
   meters (0 when infeasible). Either pointer may be NULL. */
CN_API cn_status cn_scenario_feasibility(const cn_scenario* scenario, const cn_config* config, int* out_feasible,
                                         double* out_shortest);
CN_API void cn_scenario_free(cn_scenario* scenario);

/* preset: "office", "maze" or "apartment". Writes scenario files and
   index.json into out_dir. */
CN_API cn_status cn_generate(const char* preset, int count, uint64_t seed, const char* out_dir);

/* variant: "Baseline", "PCM", "PCM_FSEC" or "Full". config may be NULL for
   defaults. out_trajectory may be NULL. */
CN_API cn_status cn_run_episode(const cn_scenario* scenario, const cn_config* config, const char* variant,
                                uint64_t seed, char** out_record_json, char** out_trajectory_jsonl);

/* Returning nonzero from the callback stops the run; the results are then
   written with "incomplete": true. */
typedef int (*cn_progress_fn)(int done, int total, void* user_data);

typedef struct cn_run_options {
  const char* config_path;  /* NULL or "" for defaults */
  const char* scenario_dir;
  const char* variants;     /* comma separated; NULL or "" for all four */
  int episodes;
  uint64_t seed;
  const char* out_dir;
  int write_trajectories;
  int threads;              /* 0: automatic */
  cn_progress_fn progress;
  void* user_data;
} cn_run_options;

CN_API void cn_run_options_init(cn_run_options* options);
CN_API cn_status cn_run(const cn_run_options* options, int* out_incomplete);

/* format: "md", "csv" or "json". */
CN_API cn_status cn_report(const char* results_path, const char* format, char** out_text);

#ifdef __cplusplus
}
#endif

#endif
