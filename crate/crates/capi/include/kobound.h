#ifndef KOBOUND_H
#define KOBOUND_H

/* This file is generated by cbindgen from kobound-capi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by fallible calls.
 */
typedef enum {
  KOBOUND_STATUS_OK = 0,
  KOBOUND_STATUS_INVALID_ARGUMENT = 1,
  KOBOUND_STATUS_OUTSIDE_DOMAIN = 2,
  KOBOUND_STATUS_POINT_IS_PUNCTURE = 3,
  KOBOUND_STATUS_BUDGET_EXCEEDED = 4,
  KOBOUND_STATUS_NUMERICAL_FAILURE = 5,
  KOBOUND_STATUS_NULL_POINTER = 6,
  KOBOUND_STATUS_PANIC = 7,
} KoboundStatus;

/**
 * A planar circle domain (opaque).
 */
typedef struct KoboundDomain KoboundDomain;

/**
 * A fibre lattice with Gram form and monodromy (opaque).
 */
typedef struct KoboundLattice KoboundLattice;

/**
 * A smooth closed curve (opaque).
 */
typedef struct KoboundLoop KoboundLoop;

/**
 * A validated puncture set (opaque).
 */
typedef struct KoboundPunctures KoboundPunctures;

/**
 * A Fermi strip around a loop (opaque).
 */
typedef struct KoboundStrip KoboundStrip;

/**
 * Flattened selection outcome.
 */
typedef struct {
  double u0;
  double g_at_u0;
  double m_threshold;
  double holder_bound;
  double measured_upper_length;
  double clearance;
} KoboundSelection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent error on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *kobound_last_error_message(void);

/**
 * Creates a circle domain. `inner_xyr` holds `n_inner` triples
 * `(cx, cy, r)`. Returns null on invalid input (see
 * `kobound_last_error_message`).
 *
 * # Safety
 * `inner_xyr` must point to `3 * n_inner` doubles (or be null when
 * `n_inner` is 0).
 */
KoboundDomain *kobound_domain_new(double outer_cx,
                                  double outer_cy,
                                  double outer_radius,
                                  const double *inner_xyr,
                                  uintptr_t n_inner);

/**
 * # Safety
 * `domain` must come from `kobound_domain_new` and not be freed twice.
 */
void kobound_domain_free(KoboundDomain *domain);

/**
 * Distance to the domain boundary, clamped to 0 outside.
 *
 * # Safety
 * `domain` must be a live handle.
 */
double kobound_domain_dist_to_boundary(const KoboundDomain *domain, double x, double y);

/**
 * Circle loop handle; never fails for positive radius.
 */
KoboundLoop *kobound_loop_circle(double cx, double cy, double radius);

/**
 * Ellipse loop handle. Returns null when the curve is rejected.
 */
KoboundLoop *kobound_loop_ellipse(double cx, double cy, double a, double b);

/**
 * # Safety
 * `lp` must come from a loop constructor and not be freed twice.
 */
void kobound_loop_free(KoboundLoop *lp);

/**
 * Euclidean length of the loop.
 *
 * # Safety
 * `lp` must be a live handle.
 */
double kobound_loop_length(const KoboundLoop *lp);

/**
 * Builds a puncture set from `n` pairs `(x, y)`.
 *
 * # Safety
 * `domain` must be live; `xy` must point to `2 * n` doubles (or be null
 * when `n` is 0).
 */
KoboundPunctures *kobound_punctures_new(const KoboundDomain *domain, const double *xy, uintptr_t n);

/**
 * # Safety
 * `s` must come from `kobound_punctures_new` and not be freed twice.
 */
void kobound_punctures_free(KoboundPunctures *s);

/**
 * Certified upper bound on the Kobayashi-Royden density at `(x, y)`.
 *
 * # Safety
 * `domain` and `punctures` must be live handles; `out` must be writable.
 */
KoboundStatus kobound_upper_density(const KoboundDomain *domain,
                                    const KoboundPunctures *punctures,
                                    double x,
                                    double y,
                                    double *out);

/**
 * Certified lower bound on the Kobayashi-Royden density at `(x, y)`.
 *
 * # Safety
 * As `kobound_upper_density`.
 */
KoboundStatus kobound_lower_density(const KoboundDomain *domain,
                                    const KoboundPunctures *punctures,
                                    double x,
                                    double y,
                                    double *out);

/**
 * Builds the strip lattice; null on failure (inadmissible width, zero
 * clearance).
 *
 * # Safety
 * `domain` and `lp` must be live handles.
 */
KoboundStrip *kobound_strip_build(const KoboundDomain *domain,
                                  const KoboundLoop *lp,
                                  double delta,
                                  uintptr_t n_tau,
                                  uintptr_t n_u);

/**
 * # Safety
 * `strip` must come from `kobound_strip_build` and not be freed twice.
 */
void kobound_strip_free(KoboundStrip *strip);

/**
 * Certified distance from the strip to the domain boundary.
 *
 * # Safety
 * `strip` must be a live handle.
 */
double kobound_strip_clearance(const KoboundStrip *strip);

/**
 * Comparability constant of the strip (exactly 1 in the flat metric).
 *
 * # Safety
 * `strip` must be a live handle.
 */
double kobound_strip_kappa0(const KoboundStrip *strip);

/**
 * Adaptive quadrature of `upper_density^p` over the strip.
 *
 * # Safety
 * All handles must be live; `out` must be writable.
 */
KoboundStatus kobound_lp_strip_integral(const KoboundDomain *domain,
                                        const KoboundStrip *strip,
                                        const KoboundPunctures *punctures,
                                        double p,
                                        double *out);

/**
 * The explicit lemma constant `A` of the strip.
 *
 * # Safety
 * `domain` and `strip` must be live handles; `out` must be writable.
 */
KoboundStatus kobound_lemma_constant_a(const KoboundDomain *domain,
                                       const KoboundStrip *strip,
                                       double *out);

/**
 * The exponent schedule `p(s)`.
 */
double kobound_p_schedule(uintptr_t s);

/**
 * Offset selection over a grid of `n_grid` offsets (pass 0 for the
 * default).
 *
 * # Safety
 * All handles must be live; `out` must be writable.
 */
KoboundStatus kobound_select_u0(const KoboundDomain *domain,
                                const KoboundStrip *strip,
                                const KoboundPunctures *punctures,
                                double p,
                                uintptr_t n_grid,
                                KoboundSelection *out);

/**
 * Builds a rank-`rank` lattice from row-major `gram` (doubles) and
 * `monodromy` (64-bit integers).
 *
 * # Safety
 * `gram` and `monodromy` must each point to `rank * rank` entries.
 */
KoboundLattice *kobound_lattice_new(uintptr_t rank, const double *gram, const int64_t *monodromy);

/**
 * # Safety
 * `lat` must come from `kobound_lattice_new` and not be freed twice.
 */
void kobound_lattice_free(KoboundLattice *lat);

/**
 * Exact displacement-bounded count with an explicit budget on `h`.
 *
 * # Safety
 * `lat` must be a live handle; `out` must be writable.
 */
KoboundStatus kobound_count_displacement(const KoboundLattice *lat,
                                         double h,
                                         double h_budget,
                                         uint64_t *out);

/**
 * Displacement schedule: `kind` 0 is linear, 1 is sublinear.
 */
double kobound_h_schedule(uintptr_t s, int32_t kind, double c, double c0);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KOBOUND_H */
