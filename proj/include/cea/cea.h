/*
 * C API for the trial cost-effectiveness analysis engine.
 *
 * The engine is driven by a JSON configuration (see README for the schema)
 * and exposes the same commands as the CLI: ingest, missing, impute,
 * analyze, ceac, mnar, simulate, report. All analysis outputs are written
 * under the configured output directory; the last command's machine-readable
 * summary and human-readable rendering are also retrievable through the
 * handle.
 *
 * Thread safety: a cea_engine must not be used from two threads at once;
 * distinct engines are independent.
 */
#ifndef CEA_H
#define CEA_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct cea_engine cea_engine;

/* Status codes; nonzero values double as CLI exit codes. */
typedef enum cea_status {
  CEA_OK = 0,
  CEA_ERROR_VALIDATION = 2,
  CEA_ERROR_CONVERGENCE = 3,
  CEA_ERROR_IO = 4,
  CEA_ERROR_INTERNAL = 5
} cea_status;

/* Engine version string, e.g. "0.1.0". */
const char* cea_version(void);

/*
 * Create an engine from a JSON config file or from config text. On failure
 * returns the error status and, when errbuf is non-NULL, a NUL-terminated
 * message truncated to errbuf_size.
 */
cea_status cea_engine_create(const char* config_path, cea_engine** out_engine, char* errbuf, size_t errbuf_size);
cea_status cea_engine_create_from_text(const char* config_json, cea_engine** out_engine, char* errbuf,
                                       size_t errbuf_size);

void cea_engine_destroy(cea_engine* engine);

/*
 * Override a configuration scalar before running commands. Keys: "seed",
 * "out", "workers", "serial", "strict", "imputations",
 * "bootstrap_replicates". Values are strings ("true"/"false" for flags).
 */
cea_status cea_engine_set_override(cea_engine* engine, const char* key, const char* value);

/* Run one command: ingest | missing | impute | analyze | ceac | mnar |
 * simulate | report. */
cea_status cea_engine_run(cea_engine* engine, const char* command);

/*
 * Message for the most recent failure; empty string when the last call
 * succeeded. The pointer stays valid until the next call on the engine.
 */
const char* cea_engine_last_error(const cea_engine* engine);

/* JSON summary and human-readable text of the last successful command. */
const char* cea_engine_result_json(const cea_engine* engine);
const char* cea_engine_result_text(const cea_engine* engine);

#ifdef __cplusplus
}
#endif

#endif /* CEA_H */
