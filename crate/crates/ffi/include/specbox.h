#ifndef SPECBOX_H
#define SPECBOX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SPECBOX_OK 0

#define SPECBOX_ERR_NULL 1

#define SPECBOX_ERR_UTF8 2

#define SPECBOX_ERR_PARSE 3

#define SPECBOX_ERR_INVALID 4

#define SPECBOX_ERR_CAP 5

#define SPECBOX_ERR_NUMERIC 6

#define SPECBOX_ERR_BUFFER 7

#define SPECBOX_ERR_VERIFY 8

#define SPECBOX_ERR_PANIC 99

#define SPECBOX_BC_DIRICHLET 0

#define SPECBOX_BC_NEUMANN 1

// Potential on a box.
typedef struct SpecboxPotential SpecboxPotential;

// Eigenvalues of a box problem.
typedef struct SpecboxSpectrum SpecboxSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *specbox_last_error(void);

// Library version as a static NUL-terminated string.
const char *specbox_version(void);

// Build a potential from a cosine-series JSON document
// `{"sides": [...], "terms": [{"m": [...], "c": ...}]}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out_potential` a valid pointer.
int specbox_potential_from_json(const char *json, SpecboxPotential **out_potential);

// # Safety
// `p` must come from `specbox_potential_from_json` or be null.
void specbox_potential_free(SpecboxPotential *p);

// Evaluate the potential at a point of dimension `n`.
//
// # Safety
// `x` must hold `n` doubles and `value` must be valid.
int specbox_potential_eval(const SpecboxPotential *p, const double *x, size_t n, double *value);

// Solve the box problem on the potential's box. `bcs` holds `2 n` face
// codes (lower, upper per axis) and `sizes` the `n` basis sizes.
//
// # Safety
// Array arguments must hold the stated number of elements.
int specbox_spectrum_solve(const SpecboxPotential *p,
                           const int *bcs,
                           const size_t *sizes,
                           size_t n,
                           SpecboxSpectrum **out_spectrum);

// # Safety
// `s` must come from `specbox_spectrum_solve` or be null.
void specbox_spectrum_free(SpecboxSpectrum *s);

// Number of trusted eigenvalues, or 0 for a null handle.
//
// # Safety
// `s` must be a live handle or null.
size_t specbox_spectrum_trusted(const SpecboxSpectrum *s);

// Copy the trusted eigenvalues into `buf`. `written` receives the trusted
// count; `SPECBOX_ERR_BUFFER` is returned if `cap` is smaller.
//
// # Safety
// `buf` must hold `cap` doubles and `written` must be valid.
int specbox_spectrum_eigenvalues(const SpecboxSpectrum *s,
                                 double *buf,
                                 size_t cap,
                                 size_t *written);

// Partial heat trace over the trusted eigenvalues and a bound on the rest.
//
// # Safety
// `value` and `tail_bound` must be valid pointers.
int specbox_spectrum_heat_trace(const SpecboxSpectrum *s,
                                double t,
                                double *value,
                                double *tail_bound);

// Run a task (`"spectrum"`, `"heat-trace"`, `"fit"`, `"decompose"`,
// `"invariants"`, `"compare"`, `"verify"`) on a JSON run configuration.
// The JSON report is returned in `out_json`, to be released with
// `specbox_string_free`. A failed verification still produces the report
// and returns `SPECBOX_ERR_VERIFY`.
//
// # Safety
// `config_json` and `task` must be NUL-terminated strings and `out_json`
// a valid pointer.
int specbox_run(const char *config_json, const char *task, uint64_t seed, char **out_json);

// # Safety
// `s` must come from `specbox_run` or be null.
void specbox_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECBOX_H */
