/* C interface to the Miura-surface solver. All handles are opaque; every
 * call that can fail returns a miura_status and records a message that
 * miura_last_error() returns on the calling thread. */
#ifndef MIURA_MIURA_H
#define MIURA_MIURA_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(MIURA_BUILDING_LIBRARY)
#    define MIURA_API __declspec(dllexport)
#  else
#    define MIURA_API __declspec(dllimport)
#  endif
#else
#  define MIURA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum miura_status {
    MIURA_OK = 0,
    MIURA_ERR_INVALID_ARGUMENT = 1,
    MIURA_ERR_CONFIG = 2,
    MIURA_ERR_NUMERIC = 3,
    MIURA_ERR_IO = 4,
    MIURA_ERR_VALIDATION = 5,
    MIURA_ERR_BUFFER_TOO_SMALL = 6,
    MIURA_ERR_INTERNAL = 7
} miura_status;

typedef struct miura_config miura_config;
typedef struct miura_run miura_run;
typedef struct miura_table miura_table;
typedef struct miura_report miura_report;

MIURA_API const char* miura_version(void);
MIURA_API const char* miura_status_string(miura_status status);
/* Message of the last failing call on this thread ("" if none). */
MIURA_API const char* miura_last_error(void);

/* ---- configuration ---------------------------------------------------- */

MIURA_API miura_status miura_config_create(miura_config** out);
MIURA_API miura_status miura_config_parse(const char* text, miura_config** out);
MIURA_API miura_status miura_config_load(const char* path, miura_config** out);
MIURA_API miura_status miura_config_clone(const miura_config* cfg, miura_config** out);
MIURA_API void miura_config_destroy(miura_config* cfg);

MIURA_API miura_status miura_config_set(miura_config* cfg, const char* section, const char* key, const char* value);
/* String outputs follow one convention: `needed` (optional) receives the
 * length including the terminator; MIURA_ERR_BUFFER_TOO_SMALL if cap < needed. */
MIURA_API miura_status miura_config_get(const miura_config* cfg, const char* section, const char* key, char* buf,
                                        size_t cap, size_t* needed);
MIURA_API miura_status miura_config_serialize(const miura_config* cfg, char* buf, size_t cap, size_t* needed);
MIURA_API miura_status miura_config_validate(const miura_config* cfg);

/* ---- single solve ----------------------------------------------------- */

/* Runs initial guess, Newton, recovery and diagnostics. Non-convergence is
 * not an error: query miura_run_converged. */
MIURA_API miura_status miura_solve(const miura_config* cfg, miura_run** out);
MIURA_API void miura_run_destroy(miura_run* run);

MIURA_API int miura_run_converged(const miura_run* run);
MIURA_API int miura_run_iterations(const miura_run* run);
MIURA_API size_t miura_run_dofs(const miura_run* run);
MIURA_API double miura_run_omega_prime_fraction(const miura_run* run);
MIURA_API miura_status miura_run_summary_json(const miura_run* run, char* buf, size_t cap, size_t* needed);
/* `formats` is a comma-separated subset of "vtk,obj,csv"; NULL uses the config. */
MIURA_API miura_status miura_run_write(const miura_run* run, const char* dir, const char* formats);

/* ---- convergence study ------------------------------------------------ */

typedef struct miura_table_row {
    double h;
    size_t dofs;
    int newton_iters;
    double h1_err;
    double h1_rate; /* NaN on the first row */
    double l2_err;
    double l2_rate; /* NaN on the first row */
} miura_table_row;

MIURA_API miura_status miura_convergence(const miura_config* cfg, miura_table** out);
MIURA_API void miura_table_destroy(miura_table* table);
MIURA_API size_t miura_table_rows(const miura_table* table);
MIURA_API miura_status miura_table_row_get(const miura_table* table, size_t index, miura_table_row* row);
MIURA_API int miura_table_converged(const miura_table* table);
MIURA_API miura_status miura_table_write_csv(const miura_table* table, const char* path);
MIURA_API miura_status miura_table_summary_json(const miura_table* table, char* buf, size_t cap, size_t* needed);

/* ---- validation checks ------------------------------------------------ */

typedef struct miura_check {
    const char* name;   /* valid while the report lives */
    double value;
    double tolerance;
    int passed;
    const char* detail; /* valid while the report lives */
} miura_check;

MIURA_API miura_status miura_validate(const miura_config* cfg, miura_report** out);
MIURA_API void miura_report_destroy(miura_report* report);
MIURA_API int miura_report_passed(const miura_report* report);
MIURA_API size_t miura_report_count(const miura_report* report);
MIURA_API miura_status miura_report_check(const miura_report* report, size_t index, miura_check* check);
MIURA_API miura_status miura_report_json(const miura_report* report, char* buf, size_t cap, size_t* needed);

/* ---- export ----------------------------------------------------------- */

/* Parameter-domain mesh of the configured case as legacy VTK. */
MIURA_API miura_status miura_export_mesh(const miura_config* cfg, const char* path);

#ifdef __cplusplus
}
#endif

#endif
