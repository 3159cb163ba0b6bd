/* C interface to the stochmatch library.
 *
 * Every function that can fail returns an sm_status; on failure a message is
 * available from sm_last_error() on the calling thread. Strings returned via
 * char** out-parameters are owned by the caller and released with
 * sm_string_free(). Handles are opaque and released with their _destroy
 * function. Rational numbers cross the boundary as "num/den" strings.
 */
#ifndef STOCHMATCH_STOCHMATCH_H
#define STOCHMATCH_STOCHMATCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SM_API __declspec(dllexport)
#else
#define SM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sm_status {
  SM_OK = 0,
  SM_ERR_VERIFY = 1,   /* a verification check failed */
  SM_ERR_USAGE = 2,    /* bad argument to the API */
  SM_ERR_CAP = 3,      /* an enumeration cap was exceeded */
  SM_ERR_PARSE = 4,    /* malformed instance text */
  SM_ERR_INVALID = 5,  /* well-formed but invalid input */
  SM_ERR_INTERNAL = 6
} sm_status;

typedef struct sm_instance sm_instance;
typedef struct sm_prepared sm_prepared;

typedef struct sm_options {
  const char* gamma;         /* NULL: 1/1000000, applied only when some probability is 1; "0" disables */
  size_t cap_degree;         /* max LP coordinates per vertex for all-subsets enumeration */
  uint64_t cap_lattice;      /* max lattice family size per left vertex */
  size_t cap_oracle_edges;   /* query-commit brute force */
  size_t cap_poi_support;    /* price-of-information brute force, total support */
  uint64_t cap_offline;      /* joint outcomes enumerated by the offline oracle */
  size_t threads;            /* 0: hardware concurrency */
  const char* name;          /* instance label in reports; NULL: "instance" */
} sm_options;

typedef struct sm_gen_params {
  size_t left;
  size_t right;
  size_t edges;
  long denominator;
  long max_weight;
  size_t certain;
  size_t support;
  long max_value;
  long max_cost_twentieths;
} sm_gen_params;

typedef struct sm_report {
  size_t trials;
  double mean;
  double variance;
  double ci95;
  uint64_t seed;
} sm_report;

typedef struct sm_coupled {
  size_t trials;
  double mean_z;
  double mean_free;
  double mean_difference;
  double variance_difference;
  double half_width_999;
  int contains_zero;
} sm_coupled;

SM_API const char* sm_version(void);
SM_API const char* sm_last_error(void);
/* Flag name of the cap behind the last SM_ERR_CAP, e.g. "cap-degree". */
SM_API const char* sm_last_error_cap(void);
SM_API void sm_string_free(char* s);

SM_API void sm_options_init(sm_options* options);
SM_API void sm_gen_params_init(sm_gen_params* params);

SM_API sm_status sm_instance_parse(const char* text, size_t length, sm_instance** out);
SM_API sm_status sm_instance_read_file(const char* path, sm_instance** out);
SM_API sm_status sm_generate(const char* family, const sm_gen_params* params, uint64_t seed, sm_instance** out);
SM_API void sm_instance_destroy(sm_instance* instance);
/* 1 for price-of-information instances, 0 for query-commit. */
SM_API int sm_instance_is_poi(const sm_instance* instance);
SM_API size_t sm_instance_edge_count(const sm_instance* instance);
SM_API sm_status sm_instance_to_json(const sm_instance* instance, char** out);

/* Scales, builds the surrogate, solves the LP and decomposes every D_a. */
SM_API sm_status sm_prepare(const sm_instance* instance, const sm_options* options, sm_prepared** out);
SM_API void sm_prepared_destroy(sm_prepared* prepared);
/* JSON array of notices (scaling applied, edges dropped). */
SM_API sm_status sm_prepared_notices(const sm_prepared* prepared, char** out);
SM_API sm_status sm_prepared_lp_objective(const sm_prepared* prepared, char** out);
SM_API sm_status sm_prepared_lp_json(const sm_prepared* prepared, uint64_t seed, char** out);
SM_API sm_status sm_prepared_distributions_json(const sm_prepared* prepared, uint64_t seed, char** out);
SM_API sm_status sm_prepared_surrogate_json(const sm_prepared* prepared, uint64_t seed, char** out);

/* strategy: "approx", "greedy" or "never". trace_path may be NULL; csv may be
 * NULL, otherwise receives a one-report CSV document. */
SM_API sm_status sm_simulate(const sm_prepared* prepared, const char* strategy, size_t trials, uint64_t seed,
                             const char* trace_path, sm_report* report, char** csv);
/* CSV of every applicable strategy on the same seed. */
SM_API sm_status sm_compare(const sm_prepared* prepared, size_t trials, uint64_t seed, char** csv);
SM_API sm_status sm_coupled_free_info(const sm_prepared* prepared, size_t trials, uint64_t seed, sm_coupled* out);
/* Returns SM_ERR_VERIFY when some check fails; the JSON is produced either way. */
SM_API sm_status sm_verify(const sm_prepared* prepared, size_t trials, uint64_t seed, char** json);

/* Full pipeline; writes the artifacts into out_dir when it is not NULL.
 * Returns SM_ERR_VERIFY when some check fails, with the summary still set. */
SM_API sm_status sm_pipeline(const sm_instance* instance, const sm_options* options, size_t trials, uint64_t seed,
                             const char* out_dir, char** summary);

#ifdef __cplusplus
}
#endif

#endif
