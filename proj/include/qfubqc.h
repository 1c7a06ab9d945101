/* C interface to the delegated-computation simulator. All entry points are
 * synchronous and thread-compatible: distinct contexts may be used from
 * distinct threads concurrently; a single context must not be shared without
 * external locking (it stores the last error). */
#ifndef QFUBQC_H
#define QFUBQC_H

#ifdef __cplusplus
extern "C" {
#endif

/* Opaque session context. */
typedef struct qfu_ctx qfu_ctx;

/* Error codes reported by qfu_last_error_code. */
enum qfu_status {
  QFU_OK = 0,
  QFU_ERR_USAGE = 1,   /* malformed request (bad JSON, unknown cmd, bad flag) */
  QFU_ERR_RUNTIME = 2, /* the run itself failed */
  QFU_ERR_ARGUMENT = 3 /* null pointer passed to the API */
};

qfu_ctx* qfu_ctx_new(void);
void qfu_ctx_free(qfu_ctx* ctx);

/* Executes one JSON job request, e.g.
 *   {"cmd": "hybrids", "game": 7, "trials": 100000, "seed": 3}
 * and returns a newly allocated JSON report string (release it with
 * qfu_string_free). Returns NULL on failure; inspect qfu_last_error /
 * qfu_last_error_code. Supported cmd values: qfactory4, qfactory8, ubqc,
 * qf-ubqc, blindness, hybrids, basis-blindness, describe, cloning-bound,
 * signaling, verify-lemmas. */
char* qfu_run(qfu_ctx* ctx, const char* request_json);

/* Message for the most recent failure on this context ("" after success). */
const char* qfu_last_error(const qfu_ctx* ctx);
int qfu_last_error_code(const qfu_ctx* ctx);

void qfu_string_free(char* s);

const char* qfu_version(void);

#ifdef __cplusplus
}
#endif

#endif /* QFUBQC_H */
