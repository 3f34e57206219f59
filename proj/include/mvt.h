/* mvt: mean-value counting laboratory, C API.
 *
 * A thin extern-C surface over the C++ core: opaque handles, integer status
 * codes, and a JSON entry point that runs any command the CLI exposes.
 * Strings returned through char** are heap-allocated and must be released
 * with mvt_string_free; handles must be released with their _free function.
 * Error messages for the most recent failing call on the current thread are
 * available via mvt_last_error.
 */
#ifndef MVT_H
#define MVT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mvt_status {
    MVT_OK = 0,
    MVT_ERROR_INVALID_ARGUMENT = 1,
    MVT_ERROR_PRECONDITION = 2,
    MVT_ERROR_CAPACITY = 3,
    MVT_ERROR_PRECISION = 4,
    MVT_ERROR_IO = 5,
    MVT_ERROR_INTERNAL = 6
} mvt_status;

typedef struct mvt_spec mvt_spec;     /* an exponential-sum moment */
typedef struct mvt_system mvt_system; /* the equivalent counting problem */
typedef struct mvt_result mvt_result; /* an exact count with statistics */

const char* mvt_version(void);
const char* mvt_status_name(mvt_status status);

/* Message of the last failing call on this thread; empty string if none. */
const char* mvt_last_error(void);

void mvt_string_free(char* s);

/* --- moment specs --------------------------------------------------------- */

/* Parse the declarative key = value spec format (see README). */
mvt_status mvt_spec_from_text(const char* text, mvt_spec** out);

/* Build a preset moment ("n8", "n10", "n12", "i6", "i8", "i10") at N.
 * overrides_json may be NULL or a JSON object with delta_exp / Delta /
 * lambda_exp / window_constant entries (exponents as strings). */
mvt_status mvt_spec_from_preset(const char* preset, long long N,
                                const char* overrides_json, mvt_spec** out);

void mvt_spec_free(mvt_spec* spec);
int mvt_spec_moment_order(const mvt_spec* spec);
long long mvt_spec_range_size(const mvt_spec* spec);

/* --- counting systems ------------------------------------------------------ */

mvt_status mvt_spec_to_system(const mvt_spec* spec, double window_constant,
                              mvt_system** out);

/* Counting system for any preset, including "bilinear-n3". */
mvt_status mvt_system_from_preset(const char* preset, long long N,
                                  const char* overrides_json, mvt_system** out);

void mvt_system_free(mvt_system* system);
int mvt_system_slots_per_side(const mvt_system* system);
int mvt_system_exact_form_count(const mvt_system* system);
int mvt_system_window_form_count(const mvt_system* system);

/* JSON description of the resolved system (forms, tolerances, groups). */
mvt_status mvt_system_describe(const mvt_system* system, char** json_out);

/* --- counting -------------------------------------------------------------- */

/* options_json may be NULL or a JSON object: {"threads": 4,
 * "budget_bytes": ..., "cache_dir": "...", "brute_ceiling": ...}. */
mvt_status mvt_count(const mvt_system* system, const char* options_json,
                     mvt_result** out);

/* Independent brute-force oracle over ordered tuples. */
mvt_status mvt_count_brute(const mvt_system* system, const char* options_json,
                           mvt_result** out);

void mvt_result_free(mvt_result* result);

/* Exact count as a decimal string (counts are 128-bit). Needs buflen >= 40. */
mvt_status mvt_result_count_decimal(const mvt_result* result, char* buf, size_t buflen);

const char* mvt_result_engine(const mvt_result* result);
unsigned long long mvt_result_enumerated(const mvt_result* result);
double mvt_result_wall_seconds(const mvt_result* result);
int mvt_result_cache_hit(const mvt_result* result);

/* --- full command interface ------------------------------------------------ */

/* Execute one run request (the CLI's JSON form) and return the report JSON.
 * The report's "exit_code" field carries the CLI exit code (0 ok, 4 bound
 * verdict violated); request errors map to the returned status. */
mvt_status mvt_run_json(const char* request_json, char** report_json_out);

#ifdef __cplusplus
}
#endif

#endif /* MVT_H */
