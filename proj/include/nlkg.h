#ifndef NLKG_H
#define NLKG_H

/* C interface to the Klein-Gordon laboratory.  All heavy types stay behind
 * the opaque session handle; inputs and outputs are JSON strings.  Every
 * function is safe to call from C; returned buffers must be released with
 * nlkg_free_string(). */

#ifdef __cplusplus
extern "C" {
#endif

#define NLKG_OK 0
#define NLKG_ERR_CONFIG 2      /* bad config / domain error        */
#define NLKG_ERR_INSTABILITY 3 /* numerical instability / blow-out */
#define NLKG_ERR_INVARIANT 4   /* invariant hard-failure           */

typedef struct nlkg_session nlkg_session;

nlkg_session* nlkg_session_new(void);
void nlkg_session_free(nlkg_session* s);

/* Runs one subcommand ("groundstate", "classify", "evolve", "sweep",
 * "audit") with a JSON config.  On success returns NLKG_OK and stores a
 * malloc'd JSON summary in *result_json (caller frees).  On failure returns
 * one of the NLKG_ERR_* codes; the message is available from
 * nlkg_last_error() until the next call on the same session. */
int nlkg_run(nlkg_session* s, const char* command, const char* config_json,
             char** result_json);

/* Last error message for this session ("" when the last call succeeded). */
const char* nlkg_last_error(const nlkg_session* s);

void nlkg_free_string(char* buf);

#ifdef __cplusplus
}
#endif

#endif /* NLKG_H */
