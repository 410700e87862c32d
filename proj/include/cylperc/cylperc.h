/* Poisson cylinder percolation toolkit: C interface. */
#ifndef CYLPERC_H
#define CYLPERC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CP_API __declspec(dllexport)
#else
#define CP_API __attribute__((visibility("default")))
#endif

typedef enum {
    CP_OK = 0,
    CP_INVALID_ARGUMENT = 1,
    CP_INVALID_WINDOW,
    CP_WINDOW_UNDERCOVERAGE,
    CP_DEGENERATE_DIRECTION,
    CP_INVALID_SEGMENT,
    CP_LADDER_OVERFLOW,
    CP_NO_PATH,
    CP_NO_CONNECTION,
    CP_FLOW_NOT_FEASIBLE,
    CP_START_COVERED,
    CP_IO,
    CP_INTERNAL
} cp_status;

typedef struct cp_sample cp_sample;

CP_API const char* cp_version(void);
CP_API const char* cp_status_name(cp_status s);
/* message of the last failing call on this thread, "" when none */
CP_API const char* cp_last_error(void);

/* lines of level <= u_max hitting the ball B(center, R); center has d entries */
CP_API cp_status cp_sample_ball(int d, double u_max, const double* center, double R, uint64_t seed,
                                cp_sample** out);
CP_API cp_status cp_sample_from_csv(const char* text, cp_sample** out);
CP_API cp_status cp_sample_to_csv(const cp_sample* s, char** out);
CP_API size_t cp_sample_size(const cp_sample* s);
CP_API cp_status cp_sample_count_hitting_box(const cp_sample* s, double u, double rho, const double* center,
                                             double radius, int* out);
CP_API cp_status cp_sample_is_covered(const cp_sample* s, double u, double rho, const double* x, int* out);
CP_API void cp_sample_free(cp_sample* s);

/* every config key with its default, as JSON */
CP_API cp_status cp_default_config(char** out);
/* run a subcommand with a JSON config; *report receives the JSON report */
CP_API cp_status cp_run(const char* command, const char* config_json, char** report);
CP_API void cp_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
