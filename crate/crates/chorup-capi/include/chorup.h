/* C interface for the chorup choreography workbench.
 *
 * Handles returned by chorup_program_parse are opaque and must be released
 * with chorup_program_free. Strings returned by the library are owned by the
 * caller and released with chorup_string_free, except chorup_last_error and
 * chorup_version, which stay owned by the library. Error messages are
 * per-thread and remain valid until the next failing call on that thread.
 */

#ifndef CHORUP_H
#define CHORUP_H

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. */
#define CHORUP_OK 0        /* success */
#define CHORUP_ERR_UTF8 1  /* argument was not valid UTF-8 */
#define CHORUP_ERR_PARSE 2 /* source failed to parse */
#define CHORUP_ERR_CHECK 3 /* annotation or connectedness check failed */
#define CHORUP_ERR_ARG 4   /* null handle or pointer argument */

typedef struct ChorupProgram ChorupProgram;

/* Parse a choreography from NUL-terminated UTF-8 source. On success writes a
 * new handle to *out and returns CHORUP_OK. */
int chorup_program_parse(const char *src, ChorupProgram **out);

/* Release a program handle. Null is a no-op. */
void chorup_program_free(ChorupProgram *program);

/* Check well-annotation and connectedness. Returns CHORUP_OK when both hold,
 * CHORUP_ERR_CHECK otherwise (see chorup_last_error). */
int chorup_check(const ChorupProgram *program);

/* The program's roles, sorted, one per line. Free with chorup_string_free.
 * Returns null on error. */
char *chorup_roles(const ChorupProgram *program);

/* Project the program onto one role and render the resulting process. Free
 * with chorup_string_free. Returns null on error. */
char *chorup_project_role(const ChorupProgram *program, const char *role);

/* Message of the most recent failure on this thread, or null. Owned by the
 * library; do not free. */
const char *chorup_last_error(void);

/* Free a string returned by this library. Null is a no-op. */
void chorup_string_free(char *s);

/* Library version as a static string. Do not free. */
const char *chorup_version(void);

#ifdef __cplusplus
}
#endif

#endif /* CHORUP_H */
