#ifndef COMPARTDB_H
#define COMPARTDB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Values are stable.
typedef enum CdbStatus {
  CDB_STATUS_OK = 0,
  CDB_STATUS_NULL_ARGUMENT = 1,
  CDB_STATUS_INVALID_UTF8 = 2,
  CDB_STATUS_PARSE = 3,
  CDB_STATUS_NOT_FOUND = 4,
  CDB_STATUS_ASSESSMENT = 5,
  CDB_STATUS_IO = 6,
  CDB_STATUS_PANIC = 7,
} CdbStatus;

// Opaque database handle.
typedef struct CdbDatabase CdbDatabase;

// Opaque model handle.
typedef struct CdbModel CdbModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *cdb_last_error(void);

// Library version as a static string.
const char *cdb_version(void);

// Parses a model string such as `graph=[[],[0]];in=[0];out=[0];leak=[0]`.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum CdbStatus cdb_model_parse(const char *text, struct CdbModel **out);

// Releases a model handle. Null is ignored.
//
// # Safety
// `model` must come from `cdb_model_parse` and not be used afterwards.
void cdb_model_free(struct CdbModel *model);

// Number of compartments.
//
// # Safety
// `model` must be a live handle.
uintptr_t cdb_model_nodes(const struct CdbModel *model);

// Canonical model string (the database key).
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum CdbStatus cdb_model_canonical(const struct CdbModel *model, char **out);

// Assesses a model directly. `out` receives a JSON object mapping parameter
// names to `"globally"`, `"locally"` or `"nonidentifiable"`.
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum CdbStatus cdb_assess(const struct CdbModel *model, uint64_t seed, char **out);

// Loads a database directory.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum CdbStatus cdb_db_open(const char *path, struct CdbDatabase **out);

// Releases a database handle. Null is ignored.
//
// # Safety
// `db` must come from `cdb_db_open` and not be used afterwards.
void cdb_db_free(struct CdbDatabase *db);

// Number of records.
//
// # Safety
// `db` must be a live handle.
uintptr_t cdb_db_len(const struct CdbDatabase *db);

// Looks up a model; statuses are reported in the model's own labeling,
// in the same JSON shape as `cdb_assess`.
//
// # Safety
// `db` and `model` must be live handles and `out` a valid pointer.
enum CdbStatus cdb_db_query(const struct CdbDatabase *db, const struct CdbModel *model, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void cdb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COMPARTDB_H */
