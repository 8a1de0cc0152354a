#ifndef RINGSWARM_RINGSWARM_H
#define RINGSWARM_RINGSWARM_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(RINGSWARM_BUILDING)
#    define RS_API __declspec(dllexport)
#  else
#    define RS_API __declspec(dllimport)
#  endif
#else
#  define RS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/** Status codes returned by every fallible call. */
typedef enum rs_status {
    RS_OK = 0,
    RS_INVALID_ARGUMENT = 1,
    RS_GRID_MISMATCH = 2,
    RS_DENSITY_FLOOR = 3,
    RS_CFL_VIOLATION = 4,
    RS_NON_FINITE = 5,
    RS_IO = 6,
    RS_INTERNAL = 7
} rs_status;

typedef struct rs_config rs_config;
typedef struct rs_run rs_run;
typedef struct rs_sweep rs_sweep;

RS_API const char* rs_version(void);

/** Message for the last failure on the calling thread ("" if none). */
RS_API const char* rs_last_error(void);

/* Scenario configuration ------------------------------------------------ */

/** scenario: regulate-mono, regulate-bimodal, track, open-loop, continuum. */
RS_API rs_status rs_config_create(const char* scenario, rs_config** out);
RS_API void rs_config_destroy(rs_config* config);
RS_API rs_status rs_config_set(rs_config* config, const char* key, const char* value);
/** Applies the keys of a JSON object file on top of the config. */
RS_API rs_status rs_config_load_json(rs_config* config, const char* path);
/** Copies the config as JSON into buf (NUL-terminated). *needed receives the
 *  required size including the terminator; buf may be NULL to query it. */
RS_API rs_status rs_config_to_json(const rs_config* config, char* buf, size_t capacity, size_t* needed);

/* Single runs ----------------------------------------------------------- */

RS_API rs_status rs_run_scenario(const rs_config* config, rs_run** out);
RS_API void rs_run_destroy(rs_run* run);
RS_API size_t rs_run_sample_count(const rs_run* run);
RS_API rs_status rs_run_sample(const rs_run* run, size_t index, double* t, double* d_kl, double* e_l2,
                               double* u_max);
RS_API rs_status rs_run_final_kl(const rs_run* run, double* out);
/** Writes the CSV files and metadata. Relative directories are placed under
 *  $RINGSWARM_OUT_ROOT when it is set; missing directories are created. */
RS_API rs_status rs_run_write(const rs_run* run, const char* dir);

/* Sweeps ---------------------------------------------------------------- */

/** n_list like "1,5,50,inf"; inf runs the continuum model. */
RS_API rs_status rs_sweep_agents(const rs_config* base, const char* n_list, rs_sweep** out);
RS_API rs_status rs_sweep_noise(const rs_config* base, const double* powers_dbw, size_t count, size_t seeds,
                                rs_sweep** out);
RS_API void rs_sweep_destroy(rs_sweep* sweep);
RS_API size_t rs_sweep_size(const rs_sweep* sweep);
/** param and status stay valid until the sweep is destroyed. */
RS_API rs_status rs_sweep_row(const rs_sweep* sweep, size_t index, const char** param, double* d_kl_final,
                              const char** status);
RS_API rs_status rs_sweep_write(const rs_sweep* sweep, const char* dir);

/* Primitives ------------------------------------------------------------ */

RS_API double rs_wrap_distance(double a, double b);
/** Morse kernel f(z) with attraction strength g and length l. */
RS_API rs_status rs_kernel_eval(double g, double l, double z, double* out);
/** D_KL between two fields sampled on the same m-node grid. */
RS_API rs_status rs_kl_divergence(const double* rho, const double* rho_desired, size_t m, double* out);

#ifdef __cplusplus
}
#endif

#endif
