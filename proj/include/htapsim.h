#ifndef HTAPSIM_H
#define HTAPSIM_H

/* C interface to the HTAP engine simulator. All state lives behind the
 * opaque engine handle; every call returns a status code and the last
 * error text is retained on the handle. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct htapsim_engine htapsim_engine;

enum {
    HTAPSIM_OK = 0,
    HTAPSIM_ERR_INVALID_ARG = 1, /* null handle / bad key / bad value */
    HTAPSIM_ERR_DOMAIN = 2,      /* engine rejected the request; see last_error */
    HTAPSIM_ERR_IO = 3,          /* file could not be read or written */
    HTAPSIM_ERR_NO_RESULT = 4    /* metrics requested before a run */
};

htapsim_engine* htapsim_create(void);
void htapsim_destroy(htapsim_engine* e);

/* Configuration keys:
 *   system        polynesia | si-ss | si-mvcc | mi-sw
 *   placement     local | distributed | hybrid
 *   scheduler     basic | optimized
 *   txn-threads, txn-queries, anl-threads, anl-queries, ops-per-query,
 *   tables, rows, cols, max-distinct, seed   (unsigned integers)
 *   update-ratio  (float in [0,1])
 * plus every hardware key accepted by the config file format
 * (vaults, group_size, per_vault_bw, ...). */
int htapsim_set_option(htapsim_engine* e, const char* key, const char* value);

/* key=value lines; '#' starts a comment. Hardware keys only. */
int htapsim_load_config(htapsim_engine* e, const char* path);

/* Generates the seeded workload and runs it under the configured system. */
int htapsim_run(htapsim_engine* e);

/* String getters share one contract: *needed receives strlen+1; if cap > 0
 * the buffer gets the (possibly truncated) NUL-terminated text. Call with
 * cap == 0 to size the buffer. */
int htapsim_metrics_csv(htapsim_engine* e, char* buf, size_t cap, size_t* needed);
int htapsim_dump_config(htapsim_engine* e, char* buf, size_t cap, size_t* needed);

/* figure: placement | snapshot-cost | mvcc | propagation */
int htapsim_plot_data(htapsim_engine* e, const char* figure, char* buf,
                      size_t cap, size_t* needed);

/* Appends (or truncates) a metrics CSV file; writes the header when the
 * file is new or being truncated. */
int htapsim_write_metrics_csv(htapsim_engine* e, const char* path, int append);

/* Message for the most recent failing call; empty string if none. */
const char* htapsim_last_error(const htapsim_engine* e);

#ifdef __cplusplus
}
#endif

#endif /* HTAPSIM_H */
