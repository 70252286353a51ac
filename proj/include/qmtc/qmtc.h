#ifndef QMTC_QMTC_H
#define QMTC_QMTC_H
/* qmtc.h - C interface: configs, command runs and result tables behind opaque handles */

#include <stddef.h>

#if defined(QMTC_BUILDING_LIBRARY)
#define QMTC_API __attribute__((visibility("default")))
#else
#define QMTC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qmtc_status {
    QMTC_OK = 0,
    QMTC_ERR_NUMERIC = 1,    /* numerical failure: non-finite values, step limits */
    QMTC_ERR_VALIDATION = 2, /* schema or domain violation */
    QMTC_ERR_IO = 3,
    QMTC_ERR_ARGUMENT = 4, /* null handle, index out of range */
    QMTC_ERR_INTERNAL = 5
} qmtc_status;

typedef struct qmtc_config qmtc_config;
typedef struct qmtc_table qmtc_table;

QMTC_API const char* qmtc_version(void);
/* message of the last failing call on this thread, "" if none */
QMTC_API const char* qmtc_last_error(void);

QMTC_API qmtc_status qmtc_config_new(qmtc_config** out);
QMTC_API qmtc_status qmtc_config_load(const char* path, qmtc_config** out);
QMTC_API qmtc_status qmtc_config_from_string(const char* ini_text, qmtc_config** out);
/* dotted-path override, e.g. ("model.tau", "2") */
QMTC_API qmtc_status qmtc_config_set(qmtc_config* cfg, const char* key, const char* value);
/* value of a key after defaults and overrides; valid until the next call on cfg */
QMTC_API const char* qmtc_config_get(const qmtc_config* cfg, const char* key);
/* 16 hex digits plus terminator; buf must hold at least 17 bytes */
QMTC_API qmtc_status qmtc_config_hash(const qmtc_config* cfg, char* buf, size_t len);
QMTC_API void qmtc_config_free(qmtc_config* cfg);

/* command: demo-thermalization, mtc, biprob, scaling, fdt-check, susceptibility */
QMTC_API qmtc_status qmtc_run(const qmtc_config* cfg, const char* command, qmtc_table** out);

QMTC_API size_t qmtc_table_rows(const qmtc_table* t);
QMTC_API size_t qmtc_table_cols(const qmtc_table* t);
QMTC_API const char* qmtc_table_column(const qmtc_table* t, size_t col);
/* numeric cell; QMTC_ERR_ARGUMENT for text cells and bad indices */
QMTC_API qmtc_status qmtc_table_value(const qmtc_table* t, size_t row, size_t col, double* out);
/* cell as it appears in the CSV */
QMTC_API const char* qmtc_table_text(const qmtc_table* t, size_t row, size_t col);
QMTC_API size_t qmtc_table_note_count(const qmtc_table* t);
QMTC_API const char* qmtc_table_note(const qmtc_table* t, size_t i);
/* path NULL or "-" writes to stdout */
QMTC_API qmtc_status qmtc_table_write_csv(const qmtc_table* t, const char* path);
QMTC_API void qmtc_table_free(qmtc_table* t);

/* direct numeric helpers */
QMTC_API qmtc_status qmtc_susceptibility_residue(double t, double beta, double tau, double* out);
/* C and K of the exponential model over infinite windows, as {re, im} pairs */
QMTC_API qmtc_status qmtc_exponential_cross_coefficients(double tau, double beta, double lambda, double omega,
                                                         double omega_prime, double C[2], double K[2]);

#ifdef __cplusplus
}
#endif

#endif
