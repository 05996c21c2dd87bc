#ifndef SPIN7_H
#define SPIN7_H

#pragma once

#include <stddef.h>
#include <stdint.h>

/*
 Result codes.
 */
typedef enum Spin7Status {
  SPIN7_STATUS_OK = 0,
  SPIN7_STATUS_NULL_POINTER = 1,
  SPIN7_STATUS_INVALID_ARGUMENT = 2,
  SPIN7_STATUS_INVALID_UTF8 = 3,
  SPIN7_STATUS_COMPUTATION_FAILED = 4,
  SPIN7_STATUS_PANIC = 5,
} Spin7Status;

/*
 Solver selector for [`spin7_field_solve`].
 */
typedef enum Spin7Method {
  SPIN7_METHOD_GRADIENT_DESCENT = 0,
  SPIN7_METHOD_PICARD = 1,
} Spin7Method;

/*
 Opaque lattice gauge field.
 */
typedef struct Spin7Field Spin7Field;

/*
 Opaque differential form.
 */
typedef struct Spin7Form Spin7Form;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static string; do not free.
 */
const char *spin7_version(void);

/*
 Message of the last failed call on this thread, or null. Valid until the
 next library call on this thread; do not free.
 */
const char *spin7_last_error_message(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void spin7_string_free(char *s);

/*
 The Cayley 4-form.

 # Safety
 `out` must be valid for writes.
 */
enum Spin7Status spin7_form_cayley(struct Spin7Form **out);

/*
 Parses a form from its JSON description `{"grade": k, "terms": [...]}`.

 # Safety
 `json` must be a nul-terminated string; `out` must be valid for writes.
 */
enum Spin7Status spin7_form_from_json(const char *json, struct Spin7Form **out);

/*
 JSON description of a form; free with [`spin7_string_free`].

 # Safety
 `form` must be a live handle; `out` must be valid for writes.
 */
enum Spin7Status spin7_form_to_json(const struct Spin7Form *form, char **out);

/*
 # Safety
 `form` must be a live handle; `out` must be valid for writes.
 */
enum Spin7Status spin7_form_grade(const struct Spin7Form *form, size_t *out);

/*
 `√⟨a, a⟩` in the flat metric.

 # Safety
 `form` must be a live handle; `out` must be valid for writes.
 */
enum Spin7Status spin7_form_norm(const struct Spin7Form *form, double *out);

/*
 # Safety
 `a`, `b` must be live handles; `out` must be valid for writes.
 */
enum Spin7Status spin7_form_wedge(const struct Spin7Form *a,
                                  const struct Spin7Form *b,
                                  struct Spin7Form **out);

/*
 # Safety
 `a` must be a live handle; `out` must be valid for writes.
 */
enum Spin7Status spin7_form_hodge_star(const struct Spin7Form *a, struct Spin7Form **out);

/*
 Norms of the Λ²₇ and Λ²₂₁ components of a 2-form.

 # Safety
 `a` must be a live handle; `p7_norm` and `p21_norm` must be valid for writes.
 */
enum Spin7Status spin7_form_split_norms(const struct Spin7Form *a,
                                        double *p7_norm,
                                        double *p21_norm);

/*
 Releases a form handle. Null is ignored.

 # Safety
 `form` must come from this library and not have been freed.
 */
void spin7_form_free(struct Spin7Form *form);

/*
 SU(2) index from `⟨p₁c₂, [M]⟩` and `⟨c₂², [M]⟩`.

 # Safety
 `out` must be valid for writes.
 */
enum Spin7Status spin7_index_su2(int64_t p1_c2, int64_t c2_sq, int64_t *out);

/*
 Virtual dimension of the glued example with twists `k`, `l`.

 # Safety
 `out` must be valid for writes.
 */
enum Spin7Status spin7_example_vdim(int64_t k, int64_t l, int64_t *out);

/*
 Seeded random field on `(ℤ/n)⁸` with unit spacing; `group` is 0 for U(1), 1 for SU(2).

 # Safety
 `out` must be valid for writes.
 */
enum Spin7Status spin7_field_random(size_t n,
                                    uint8_t group,
                                    uint64_t seed,
                                    double amp,
                                    struct Spin7Field **out);

/*
 Number of `f64` entries in a field.

 # Safety
 `field` must be a live handle; `out` must be valid for writes.
 */
enum Spin7Status spin7_field_len(const struct Spin7Field *field, size_t *out);

/*
 Copies the field entries into `buf`, which holds `len` values.

 # Safety
 `field` must be a live handle; `buf` must be valid for `len` writes.
 */
enum Spin7Status spin7_field_copy_data(const struct Spin7Field *field, double *buf, size_t len);

/*
 `Σ ‖π₇F‖²` of a field.

 # Safety
 `field` must be a live handle; `out` must be valid for writes.
 */
enum Spin7Status spin7_field_energy(const struct Spin7Field *field, double *out);

/*
 Runs a solver from `start`. Writes the final field and the JSON report;
 free the report with [`spin7_string_free`].

 # Safety
 `start` must be a live handle; `out_field` and `out_report` must be valid for writes.
 */
enum Spin7Status spin7_field_solve(const struct Spin7Field *start,
                                   enum Spin7Method method,
                                   size_t max_steps,
                                   double tol,
                                   struct Spin7Field **out_field,
                                   char **out_report);

/*
 Releases a field handle. Null is ignored.

 # Safety
 `field` must come from this library and not have been freed.
 */
void spin7_field_free(struct Spin7Field *field);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPIN7_H */
