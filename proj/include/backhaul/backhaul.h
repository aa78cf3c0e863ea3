/*
 * backhaul.h - C interface to the small-cell backhaul allocation simulator.
 *
 * All objects are opaque handles created by the generate/load/realize/
 * allocate/run functions and released with the matching bh_*_free. Every fallible call
 * returns a bh_status; on failure a message for the calling thread is
 * available from bh_last_error() until the next call on that thread.
 */
#ifndef BACKHAUL_H
#define BACKHAUL_H

#include <stddef.h>
#include <stdint.h>

#if defined(BACKHAUL_BUILDING_LIBRARY)
#define BH_API __attribute__((visibility("default")))
#else
#define BH_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bh_status {
  BH_OK = 0,
  BH_ERR_INVALID_ARGUMENT = 1, /* null pointer, unknown enum value */
  BH_ERR_INVALID_CONFIG = 2,   /* configuration fails validation */
  BH_ERR_PARSE = 3,            /* malformed scenario or config file */
  BH_ERR_IO = 4,
  BH_ERR_DOMAIN = 5,           /* model evaluated outside its domain */
  BH_ERR_SIZE = 6,             /* instance too large for exhaustive search */
  BH_ERR_CONSISTENCY = 7,      /* matching views disagree */
  BH_ERR_INTERNAL = 8
} bh_status;

typedef enum bh_scheme {
  BH_SCHEME_MATCHING = 0,
  BH_SCHEME_BEST_EFFORT = 1,
  BH_SCHEME_RANDOM = 2
} bh_scheme;

typedef struct bh_scenario bh_scenario;
typedef struct bh_channels bh_channels;
typedef struct bh_matching bh_matching;
typedef struct bh_sweep bh_sweep;

BH_API const char* bh_version(void);
BH_API const char* bh_last_error(void);
BH_API const char* bh_status_string(bh_status status);
/* Releases strings returned through char** out-parameters. */
BH_API void bh_string_free(char* s);

/* Independent seed for (master, index, stream). Streams used by the library:
 * 1 placement, 2 channels, 3 random baseline. */
BH_API uint64_t bh_derive_seed(uint64_t master, uint64_t index, uint64_t stream);
/* Writes a run manifest {tool, version, command, seed, config, notes}.
 * `config_json` must be a JSON object. */
BH_API bh_status bh_write_manifest(const char* command, const char* config_json, uint64_t seed,
                                   const char* path);

/* ---- scenarios ---------------------------------------------------------- */

/* `params_json` is a JSON object of generation parameters (absent fields use
 * the reference defaults); NULL means all defaults. `seed` drives placement. */
BH_API bh_status bh_scenario_generate(const char* params_json, uint64_t seed, bh_scenario** out);
BH_API bh_status bh_scenario_load(const char* path, bh_scenario** out);
BH_API bh_status bh_scenario_save(const bh_scenario* s, const char* path);
/* Newline-separated invariant violations; empty string when valid. */
BH_API bh_status bh_scenario_validate(const bh_scenario* s, char** report, size_t* violations);
BH_API bh_status bh_scenario_to_json(const bh_scenario* s, char** json);
BH_API int bh_scenario_num_anchors(const bh_scenario* s);
BH_API int bh_scenario_num_demanding(const bh_scenario* s);
BH_API int bh_scenario_num_brbs(const bh_scenario* s); /* all anchors, both bands */
BH_API uint64_t bh_scenario_seed(const bh_scenario* s);
BH_API bh_status bh_scenario_demanding(const bh_scenario* s, int k2, double* demand_bps, double* budget);
BH_API void bh_scenario_free(bh_scenario* s);

/* ---- channels ----------------------------------------------------------- */

BH_API bh_status bh_channels_realize(const bh_scenario* s, uint64_t seed, bh_channels** out);
/* Linear gain of (anchor k1, carrier-spanning BRB n, demanding k2). */
BH_API bh_status bh_channels_gain(const bh_channels* ch, int k1, int n, int k2, double* gain);
/* CSV `k1,n,k2,gain`. */
BH_API bh_status bh_channels_write_csv(const bh_channels* ch, const char* path);
BH_API void bh_channels_free(bh_channels* ch);

/* ---- allocation --------------------------------------------------------- */

typedef struct bh_matching_summary {
  int num_demanding;
  int num_assigned;
  int demand_met;        /* stations with rate >= demand */
  int rounds;
  int64_t proposals;
  double total_rate_bps;
  double total_cost;
  int budget_violations; /* stations with cost > budget */
} bh_matching_summary;

/* zeta is in bit/s per price unit; `seed` is used only by BH_SCHEME_RANDOM.
 * The matching keeps copies of the scenario and channels it was built on. */
BH_API bh_status bh_allocate(const bh_scenario* s, const bh_channels* ch, bh_scheme scheme,
                             double zeta, uint64_t seed, bh_matching** out);
BH_API bh_status bh_matching_summarize(const bh_matching* m, bh_matching_summary* out);
BH_API bh_status bh_matching_station(const bh_matching* m, int k2, double* rate_bps, double* cost,
                                     int* num_brbs);
BH_API bh_status bh_matching_blocking_pairs(const bh_matching* m, double zeta, size_t* count);
/* CSV `k2,k1,band,n,gamma,rate_bps,price`. */
BH_API bh_status bh_matching_write_csv(const bh_matching* m, const char* path);
BH_API void bh_matching_free(bh_matching* m);

/* ---- experiments -------------------------------------------------------- */

/* `kind` is "n1", "budget-price", "k" or "demand". `config_json` mirrors the
 * sweep configuration; absent fields (or NULL) take the defaults for `kind`.
 * A "variable" field, if present, must agree with `kind`. */
BH_API bh_status bh_sweep_run(const char* kind, const char* config_json, bh_sweep** out);
/* Effective configuration as JSON, suitable for bh_write_manifest. */
BH_API bh_status bh_sweep_config_json(const bh_sweep* sw, char** json);
BH_API uint64_t bh_sweep_seed(const bh_sweep* sw);
BH_API bh_status bh_sweep_write_csv(const bh_sweep* sw, const char* path);
BH_API size_t bh_sweep_num_rows(const bh_sweep* sw);
BH_API void bh_sweep_free(bh_sweep* sw);

typedef struct bh_audit_summary {
  int trials;
  int64_t total_blocking_pairs;
  int trials_with_blocking_pairs;
  int bound_violations;
  int budget_violations;
} bh_audit_summary;

/* Matching stability audit over `trials` generated instances. `params_json`
 * as for bh_scenario_generate. Writes per-trial rows to `csv_path` when it
 * is non-NULL. */
BH_API bh_status bh_stability_audit(const char* params_json, double zeta, int trials, uint64_t seed,
                                    int workers, const char* csv_path, bh_audit_summary* out);

typedef struct bh_oracle_summary {
  int instances;
  int feasible;
  int matching_met_demand;
  int cost_order_violations; /* matching met demand but cost < oracle */
  int constraint_failures;   /* matching broke budget/quota/integrality */
  int dominance_failures;
  double mean_gap;           /* over instances where both met demand */
} bh_oracle_summary;

/* Matching vs exhaustive minimum cost on `instances` micro instances. */
BH_API bh_status bh_oracle_compare(int instances, uint64_t seed, double zeta, int workers,
                                   const char* csv_path, bh_oracle_summary* out);

#ifdef __cplusplus
}
#endif

#endif /* BACKHAUL_H */
