/* lclab - transport and functional-inequality laboratory for log-concave
 * measures on grids.
 *
 * C interface over the C++ core: opaque handles, integer status codes, and a
 * thread-local message for the last failing call. All handles must be
 * released with their matching *_free function.
 */
#ifndef LCLAB_H
#define LCLAB_H

#include <stdint.h>

#if defined(_WIN32)
#define LCLAB_API __declspec(dllexport)
#else
#define LCLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lclab_status {
  LCLAB_OK = 0,
  LCLAB_ERR_INVALID_ARGUMENT = 1,
  LCLAB_ERR_CONVEXITY_AUDIT = 2,
  LCLAB_ERR_MASS_UNDERFLOW = 3,
  LCLAB_ERR_ZERO_MASS_SLICE = 4,
  LCLAB_ERR_DIM_MISMATCH = 5,
  LCLAB_ERR_DEGENERATE_JACOBIAN = 6,
  LCLAB_ERR_ABSOLUTE_CONTINUITY = 7,
  LCLAB_ERR_UNDEFINED_PREFIX = 8,
  LCLAB_ERR_NOT_POSITIVE_DEFINITE = 9,
  LCLAB_ERR_DEGENERATE_HULL = 10,
  LCLAB_ERR_NOT_BARYCENTERED = 11,
  LCLAB_ERR_COMPONENT_NOT_MARTINGALE = 12,
  LCLAB_ERR_NOT_MARTINGALE = 13,
  LCLAB_ERR_NOT_ISOTROPIC = 14,
  LCLAB_ERR_INTEGRABILITY = 15,
  LCLAB_ERR_NON_CONVERGENCE = 16,
  LCLAB_ERR_NON_LIPSCHITZ = 17,
  LCLAB_ERR_CONFIG = 18,
  LCLAB_ERR_IO = 19,
  LCLAB_ERR_INTERNAL = 20
} lclab_status;

typedef struct lclab_density lclab_density;
typedef struct lclab_moments lclab_moments;
typedef struct lclab_map lclab_map;
typedef struct lclab_samples lclab_samples;

/* Message describing the last error raised on this thread. */
LCLAB_API const char* lclab_last_error(void);
LCLAB_API const char* lclab_status_name(lclab_status status);

/* --- densities ------------------------------------------------------- */

/* covariance is dim*dim row major; mean may be NULL for centered. */
LCLAB_API lclab_status lclab_density_gaussian(int dim, const double* covariance,
                                              const double* mean, double box_radius,
                                              const int* shape, lclab_density** out);
LCLAB_API lclab_status lclab_density_laplace(int dim, const double* scales,
                                             double box_radius, const int* shape,
                                             lclab_density** out);
LCLAB_API lclab_status lclab_density_uniform_cube(int dim, double radius,
                                                  const int* shape, lclab_density** out);
/* xy is vertex_count pairs; recenter != 0 translates the barycenter to 0. */
LCLAB_API lclab_status lclab_density_polygon(const double* xy, int vertex_count,
                                             int recenter, const int* shape,
                                             lclab_density** out);
LCLAB_API lclab_status lclab_density_tilt(const lclab_density* base, const double* theta,
                                          lclab_density** out);
LCLAB_API lclab_status lclab_density_load_text(const char* path, lclab_density** out);
LCLAB_API lclab_status lclab_density_save_text(const lclab_density* density,
                                               const char* path);
LCLAB_API void lclab_density_free(lclab_density* density);

LCLAB_API int lclab_density_dim(const lclab_density* density);
LCLAB_API lclab_status lclab_density_mass(const lclab_density* density, double* out);
/* powers has length dim; computes E[prod x_i^powers_i]. */
LCLAB_API lclab_status lclab_density_moment(const lclab_density* density,
                                            const int* powers, double* out);
LCLAB_API lclab_status lclab_density_sample(const lclab_density* density, int64_t count,
                                            uint64_t seed, lclab_samples** out);

/* --- samples ---------------------------------------------------------- */

LCLAB_API void lclab_samples_free(lclab_samples* samples);
LCLAB_API int64_t lclab_samples_count(const lclab_samples* samples);
LCLAB_API int lclab_samples_dim(const lclab_samples* samples);
/* row-major count x dim, owned by the handle */
LCLAB_API const double* lclab_samples_points(const lclab_samples* samples);

/* --- conditional moments and recentering ------------------------------ */

LCLAB_API lclab_status lclab_moments_build(const lclab_density* density,
                                           lclab_moments** out);
LCLAB_API void lclab_moments_free(lclab_moments* moments);
LCLAB_API lclab_status lclab_moments_save_csv(const lclab_moments* moments,
                                              const char* path);
/* prefix has length axis (0-based axis index). */
LCLAB_API lclab_status lclab_moments_conditional_mean(const lclab_moments* moments,
                                                      int axis, const double* prefix,
                                                      double* out);
LCLAB_API lclab_status lclab_moments_conditional_var(const lclab_moments* moments,
                                                     int axis, const double* prefix,
                                                     double* out);

/* --- triangular maps --------------------------------------------------- */

LCLAB_API lclab_status lclab_map_knothe(const lclab_density* mu, const lclab_density* nu,
                                        lclab_map** out);
LCLAB_API lclab_status lclab_map_recentering(const lclab_moments* moments,
                                             lclab_map** out);
LCLAB_API lclab_status lclab_map_inverse_recentering(const lclab_moments* moments,
                                                     lclab_map** out);
LCLAB_API void lclab_map_free(lclab_map* map);
LCLAB_API lclab_status lclab_map_apply(const lclab_map* map, const double* x, double* y);
/* One-dimensional Knothe maps dump as two decimal columns (node, value);
 * everything else as axis-prefixed node tables. */
LCLAB_API lclab_status lclab_map_save_text(const lclab_map* map, const char* path);

/* --- transport costs and entropy -------------------------------------- */

/* N(t) = |t| - log(1 + |t|) */
LCLAB_API double lclab_n_cost(double t);
LCLAB_API lclab_status lclab_relative_entropy(const lclab_density* nu,
                                              const lclab_density* mu, double* out);
/* Knothe change-of-variables bound and the entropy it bounds. */
LCLAB_API lclab_status lclab_entropy_lower_bound(const lclab_density* mu,
                                                 const lclab_density* nu, double* bound,
                                                 double* entropy);
/* Coupling cost E[c_mu(Xbar, Ybar)] along the Knothe coupling. */
LCLAB_API lclab_status lclab_coupling_cost(const lclab_density* mu,
                                           const lclab_density* nu, double* out);
/* W2 between the measures: exact in 1D (*exact = 1), coupling bound else. */
LCLAB_API lclab_status lclab_w2_upper_bound(const lclab_density* mu,
                                            const lclab_density* nu, double* value,
                                            int* exact);

/* --- suite ------------------------------------------------------------- */

LCLAB_API const char* lclab_default_suite_config(void);
/* config_json NULL runs the bundled suite. exit_code: 0 all gating checks
 * pass, 1 otherwise. Config problems return LCLAB_ERR_CONFIG. */
LCLAB_API lclab_status lclab_suite_run(const char* config_json, const char* out_dir,
                                       double grid_scale, int jobs,
                                       int has_seed_override, uint64_t seed_override,
                                       int* exit_code);
/* Builds one measure declared in a config (NULL = bundled config). */
LCLAB_API lclab_status lclab_suite_build_measure(const char* config_json,
                                                 const char* name, double grid_scale,
                                                 lclab_density** out);

#ifdef __cplusplus
}
#endif

#endif /* LCLAB_H */
