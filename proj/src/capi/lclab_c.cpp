#include "lclab/lclab.h"

#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "core/costs.hpp"
#include "core/generators.hpp"
#include "core/grid_density.hpp"
#include "core/knothe.hpp"
#include "core/recentering.hpp"
#include "core/suite.hpp"

namespace {

thread_local std::string g_last_error;

lclab_status to_status(lclab::ErrorCode code) {
  using EC = lclab::ErrorCode;
  switch (code) {
    case EC::InvalidArgument: return LCLAB_ERR_INVALID_ARGUMENT;
    case EC::ConvexityAuditFailed: return LCLAB_ERR_CONVEXITY_AUDIT;
    case EC::MassUnderflow: return LCLAB_ERR_MASS_UNDERFLOW;
    case EC::ZeroMassSlice: return LCLAB_ERR_ZERO_MASS_SLICE;
    case EC::DimMismatch: return LCLAB_ERR_DIM_MISMATCH;
    case EC::DegenerateJacobian: return LCLAB_ERR_DEGENERATE_JACOBIAN;
    case EC::AbsoluteContinuityViolated: return LCLAB_ERR_ABSOLUTE_CONTINUITY;
    case EC::UndefinedPrefix: return LCLAB_ERR_UNDEFINED_PREFIX;
    case EC::NotPositiveDefinite: return LCLAB_ERR_NOT_POSITIVE_DEFINITE;
    case EC::DegenerateHull: return LCLAB_ERR_DEGENERATE_HULL;
    case EC::NotBarycentered: return LCLAB_ERR_NOT_BARYCENTERED;
    case EC::ComponentNotMartingale: return LCLAB_ERR_COMPONENT_NOT_MARTINGALE;
    case EC::NotMartingaleIncrements: return LCLAB_ERR_NOT_MARTINGALE;
    case EC::NotIsotropic: return LCLAB_ERR_NOT_ISOTROPIC;
    case EC::IntegrabilityFailed: return LCLAB_ERR_INTEGRABILITY;
    case EC::NonConvergence: return LCLAB_ERR_NON_CONVERGENCE;
    case EC::NonLipschitzOnGrid: return LCLAB_ERR_NON_LIPSCHITZ;
    case EC::ConfigInvalid: return LCLAB_ERR_CONFIG;
    case EC::IoError: return LCLAB_ERR_IO;
  }
  return LCLAB_ERR_INTERNAL;
}

template <class F>
lclab_status guarded(F&& fn) {
  try {
    fn();
    return LCLAB_OK;
  } catch (const lclab::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LCLAB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return LCLAB_ERR_INTERNAL;
  }
}

lclab_status invalid(const char* what) {
  g_last_error = what;
  return LCLAB_ERR_INVALID_ARGUMENT;
}

}  // namespace

struct lclab_density {
  std::shared_ptr<const lclab::GridDensity> density;
};

struct lclab_moments {
  std::shared_ptr<const lclab::ConditionalMoments> moments;
};

struct lclab_map {
  std::shared_ptr<const lclab::TriangularMap> map;
  std::shared_ptr<const lclab::KnotheMap> knothe;  // set for Knothe maps
  std::shared_ptr<const lclab::ConditionalMoments> moments;  // recentering maps
  bool inverse = false;
};

struct lclab_samples {
  lclab::SampleSet samples;
};

extern "C" {

const char* lclab_last_error(void) { return g_last_error.c_str(); }

const char* lclab_status_name(lclab_status status) {
  switch (status) {
    case LCLAB_OK: return "LCLAB_OK";
    case LCLAB_ERR_INVALID_ARGUMENT: return "LCLAB_ERR_INVALID_ARGUMENT";
    case LCLAB_ERR_CONVEXITY_AUDIT: return "LCLAB_ERR_CONVEXITY_AUDIT";
    case LCLAB_ERR_MASS_UNDERFLOW: return "LCLAB_ERR_MASS_UNDERFLOW";
    case LCLAB_ERR_ZERO_MASS_SLICE: return "LCLAB_ERR_ZERO_MASS_SLICE";
    case LCLAB_ERR_DIM_MISMATCH: return "LCLAB_ERR_DIM_MISMATCH";
    case LCLAB_ERR_DEGENERATE_JACOBIAN: return "LCLAB_ERR_DEGENERATE_JACOBIAN";
    case LCLAB_ERR_ABSOLUTE_CONTINUITY: return "LCLAB_ERR_ABSOLUTE_CONTINUITY";
    case LCLAB_ERR_UNDEFINED_PREFIX: return "LCLAB_ERR_UNDEFINED_PREFIX";
    case LCLAB_ERR_NOT_POSITIVE_DEFINITE: return "LCLAB_ERR_NOT_POSITIVE_DEFINITE";
    case LCLAB_ERR_DEGENERATE_HULL: return "LCLAB_ERR_DEGENERATE_HULL";
    case LCLAB_ERR_NOT_BARYCENTERED: return "LCLAB_ERR_NOT_BARYCENTERED";
    case LCLAB_ERR_COMPONENT_NOT_MARTINGALE: return "LCLAB_ERR_COMPONENT_NOT_MARTINGALE";
    case LCLAB_ERR_NOT_MARTINGALE: return "LCLAB_ERR_NOT_MARTINGALE";
    case LCLAB_ERR_NOT_ISOTROPIC: return "LCLAB_ERR_NOT_ISOTROPIC";
    case LCLAB_ERR_INTEGRABILITY: return "LCLAB_ERR_INTEGRABILITY";
    case LCLAB_ERR_NON_CONVERGENCE: return "LCLAB_ERR_NON_CONVERGENCE";
    case LCLAB_ERR_NON_LIPSCHITZ: return "LCLAB_ERR_NON_LIPSCHITZ";
    case LCLAB_ERR_CONFIG: return "LCLAB_ERR_CONFIG";
    case LCLAB_ERR_IO: return "LCLAB_ERR_IO";
    case LCLAB_ERR_INTERNAL: return "LCLAB_ERR_INTERNAL";
  }
  return "LCLAB_ERR_UNKNOWN";
}

lclab_status lclab_density_gaussian(int dim, const double* covariance,
                                    const double* mean, double box_radius,
                                    const int* shape, lclab_density** out) {
  if (!covariance || !shape || !out) return invalid("null argument");
  return guarded([&] {
    std::vector<std::vector<double>> cov(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i)
      cov[static_cast<std::size_t>(i)].assign(covariance + i * dim,
                                              covariance + (i + 1) * dim);
    lclab::Potential pot = lclab::make_gaussian(dim, cov, box_radius);
    if (mean) {
      pot = lclab::translate_potential(pot, std::span<const double>(mean, static_cast<std::size_t>(dim)));
      pot.domain = lclab::Box::cube(dim, box_radius);
    }
    *out = new lclab_density{std::make_shared<lclab::GridDensity>(
        lclab::build_grid_density(pot, std::vector<int>(shape, shape + dim)))};
  });
}

lclab_status lclab_density_laplace(int dim, const double* scales, double box_radius,
                                   const int* shape, lclab_density** out) {
  if (!scales || !shape || !out) return invalid("null argument");
  return guarded([&] {
    const lclab::Potential pot = lclab::make_laplace(
        dim, std::vector<double>(scales, scales + dim), box_radius);
    *out = new lclab_density{std::make_shared<lclab::GridDensity>(
        lclab::build_grid_density(pot, std::vector<int>(shape, shape + dim)))};
  });
}

lclab_status lclab_density_uniform_cube(int dim, double radius, const int* shape,
                                        lclab_density** out) {
  if (!shape || !out) return invalid("null argument");
  return guarded([&] {
    const lclab::Potential pot = lclab::make_uniform_cube(dim, radius);
    *out = new lclab_density{std::make_shared<lclab::GridDensity>(
        lclab::build_grid_density(pot, std::vector<int>(shape, shape + dim)))};
  });
}

lclab_status lclab_density_polygon(const double* xy, int vertex_count, int recenter,
                                   const int* shape, lclab_density** out) {
  if (!xy || !shape || !out) return invalid("null argument");
  return guarded([&] {
    std::vector<std::array<double, 2>> vertices(static_cast<std::size_t>(vertex_count));
    for (int i = 0; i < vertex_count; ++i)
      vertices[static_cast<std::size_t>(i)] = {xy[2 * i], xy[2 * i + 1]};
    lclab::ConvexBody2D body = lclab::make_convex_body_2d(vertices);
    if (recenter)
      body = lclab::translate_body(body, {-body.barycenter[0], -body.barycenter[1]});
    *out = new lclab_density{std::make_shared<lclab::GridDensity>(
        lclab::build_grid_density(body.potential, std::vector<int>(shape, shape + 2)))};
  });
}

lclab_status lclab_density_tilt(const lclab_density* base, const double* theta,
                                lclab_density** out) {
  if (!base || !theta || !out) return invalid("null argument");
  return guarded([&] {
    const lclab::GridDensity& bd = *base->density;
    const int n = bd.dim();
    std::vector<double> raw(static_cast<std::size_t>(bd.values().size()));
    std::vector<double> logv(static_cast<std::size_t>(bd.values().size()));
    std::vector<double> pt(static_cast<std::size_t>(n));
    lclab::for_each_index(bd.shape(), [&](std::int64_t flat, std::span<const int> idx) {
      bd.node_point(idx, pt);
      double dot = 0.0;
      for (int a = 0; a < n; ++a) dot += theta[a] * pt[static_cast<std::size_t>(a)];
      raw[static_cast<std::size_t>(flat)] = bd.values()[flat] * std::exp(dot);
      logv[static_cast<std::size_t>(flat)] = bd.log_values()[flat] + dot;
    });
    *out = new lclab_density{std::make_shared<lclab::GridDensity>(
        bd.box(), bd.shape(), std::move(raw), std::move(logv))};
  });
}

lclab_status lclab_density_load_text(const char* path, lclab_density** out) {
  if (!path || !out) return invalid("null argument");
  return guarded([&] {
    *out = new lclab_density{std::make_shared<lclab::GridDensity>(
        lclab::GridDensity::load_text_file(path))};
  });
}

lclab_status lclab_density_save_text(const lclab_density* density, const char* path) {
  if (!density || !path) return invalid("null argument");
  return guarded([&] { density->density->save_text_file(path); });
}

void lclab_density_free(lclab_density* density) { delete density; }

int lclab_density_dim(const lclab_density* density) {
  return density ? density->density->dim() : 0;
}

lclab_status lclab_density_mass(const lclab_density* density, double* out) {
  if (!density || !out) return invalid("null argument");
  return guarded([&] { *out = density->density->mass(); });
}

lclab_status lclab_density_moment(const lclab_density* density, const int* powers,
                                  double* out) {
  if (!density || !powers || !out) return invalid("null argument");
  return guarded([&] {
    *out = density->density->mixed_moment(
        std::span<const int>(powers, static_cast<std::size_t>(density->density->dim())));
  });
}

lclab_status lclab_density_sample(const lclab_density* density, int64_t count,
                                  uint64_t seed, lclab_samples** out) {
  if (!density || !out) return invalid("null argument");
  return guarded([&] {
    *out = new lclab_samples{density->density->sample(count, seed)};
  });
}

void lclab_samples_free(lclab_samples* samples) { delete samples; }

int64_t lclab_samples_count(const lclab_samples* samples) {
  return samples ? samples->samples.count() : 0;
}

int lclab_samples_dim(const lclab_samples* samples) {
  return samples ? samples->samples.dim : 0;
}

const double* lclab_samples_points(const lclab_samples* samples) {
  return samples ? samples->samples.points.data() : nullptr;
}

lclab_status lclab_moments_build(const lclab_density* density, lclab_moments** out) {
  if (!density || !out) return invalid("null argument");
  return guarded([&] {
    *out = new lclab_moments{lclab::ConditionalMoments::build(*density->density)};
  });
}

void lclab_moments_free(lclab_moments* moments) { delete moments; }

lclab_status lclab_moments_save_csv(const lclab_moments* moments, const char* path) {
  if (!moments || !path) return invalid("null argument");
  return guarded([&] { moments->moments->save_csv_file(path); });
}

lclab_status lclab_moments_conditional_mean(const lclab_moments* moments, int axis,
                                            const double* prefix, double* out) {
  if (!moments || !out || (axis > 0 && !prefix)) return invalid("null argument");
  return guarded([&] {
    *out = moments->moments->mean_at(
        axis, std::span<const double>(prefix, static_cast<std::size_t>(axis)));
  });
}

lclab_status lclab_moments_conditional_var(const lclab_moments* moments, int axis,
                                           const double* prefix, double* out) {
  if (!moments || !out || (axis > 0 && !prefix)) return invalid("null argument");
  return guarded([&] {
    *out = moments->moments->var_at(
        axis, std::span<const double>(prefix, static_cast<std::size_t>(axis)));
  });
}

lclab_status lclab_map_knothe(const lclab_density* mu, const lclab_density* nu,
                              lclab_map** out) {
  if (!mu || !nu || !out) return invalid("null argument");
  return guarded([&] {
    auto map = lclab::build_knothe(mu->density, nu->density);
    auto handle = new lclab_map{};
    handle->map = map;
    handle->knothe = map;
    *out = handle;
  });
}

lclab_status lclab_map_recentering(const lclab_moments* moments, lclab_map** out) {
  if (!moments || !out) return invalid("null argument");
  return guarded([&] {
    auto handle = new lclab_map{};
    handle->map = std::make_shared<lclab::RecenterMap>(moments->moments);
    handle->moments = moments->moments;
    *out = handle;
  });
}

lclab_status lclab_map_inverse_recentering(const lclab_moments* moments,
                                           lclab_map** out) {
  if (!moments || !out) return invalid("null argument");
  return guarded([&] {
    auto handle = new lclab_map{};
    handle->map = std::make_shared<lclab::InverseRecenterMap>(moments->moments);
    handle->moments = moments->moments;
    handle->inverse = true;
    *out = handle;
  });
}

void lclab_map_free(lclab_map* map) { delete map; }

lclab_status lclab_map_apply(const lclab_map* map, const double* x, double* y) {
  if (!map || !x || !y) return invalid("null argument");
  return guarded([&] {
    const int n = map->map->dim();
    map->map->apply_into(std::span<const double>(x, static_cast<std::size_t>(n)),
                         std::span<double>(y, static_cast<std::size_t>(n)));
  });
}

lclab_status lclab_map_save_text(const lclab_map* map, const char* path) {
  if (!map || !path) return invalid("null argument");
  return guarded([&] {
    if (map->knothe) {
      if (map->knothe->dim() == 1) {
        map->knothe->node_slice(0, {})->save_text_file(path);
      } else {
        map->knothe->save_text_file(path);
      }
      return;
    }
    if (map->moments) {
      lclab::save_recentering_map_text(*map->moments, map->inverse, path);
      return;
    }
    lclab::fail(lclab::ErrorCode::InvalidArgument, "map kind cannot be serialized");
  });
}

double lclab_n_cost(double t) { return lclab::n_cost(t); }

lclab_status lclab_relative_entropy(const lclab_density* nu, const lclab_density* mu,
                                    double* out) {
  if (!nu || !mu || !out) return invalid("null argument");
  return guarded([&] { *out = lclab::relative_entropy(*nu->density, *mu->density); });
}

lclab_status lclab_entropy_lower_bound(const lclab_density* mu, const lclab_density* nu,
                                       double* bound, double* entropy) {
  if (!mu || !nu || !bound || !entropy) return invalid("null argument");
  return guarded([&] {
    const auto eb = lclab::entropy_lower_bound(mu->density, nu->density);
    *bound = eb.bound;
    *entropy = eb.entropy;
  });
}

lclab_status lclab_coupling_cost(const lclab_density* mu, const lclab_density* nu,
                                 double* out) {
  if (!mu || !nu || !out) return invalid("null argument");
  return guarded([&] {
    const auto rec = lclab::build_recentering(*mu->density);
    const auto spec = lclab::CostSpec::from(rec, lclab::CostVariant::SumForm);
    *out = lclab::knothe_coupling_cost(mu->density, nu->density, spec);
  });
}

lclab_status lclab_w2_upper_bound(const lclab_density* mu, const lclab_density* nu,
                                  double* value, int* exact) {
  if (!mu || !nu || !value || !exact) return invalid("null argument");
  return guarded([&] {
    const auto w2 = lclab::w2_upper_bound(mu->density, nu->density);
    *value = w2.value;
    *exact = w2.exact ? 1 : 0;
  });
}

const char* lclab_default_suite_config(void) {
  return lclab::default_suite_config().c_str();
}

lclab_status lclab_suite_run(const char* config_json, const char* out_dir,
                             double grid_scale, int jobs, int has_seed_override,
                             uint64_t seed_override, int* exit_code) {
  if (!out_dir || !exit_code) return invalid("null argument");
  return guarded([&] {
    lclab::RunOptions options;
    options.grid_scale = grid_scale > 0.0 ? grid_scale : 1.0;
    options.jobs = jobs > 0 ? jobs : 1;
    if (has_seed_override) options.seed_override = seed_override;
    const std::string config =
        config_json ? std::string(config_json) : lclab::default_suite_config();
    *exit_code = lclab::run_suite_files(config, out_dir, options);
  });
}

lclab_status lclab_suite_build_measure(const char* config_json, const char* name,
                                       double grid_scale, lclab_density** out) {
  if (!name || !out) return invalid("null argument");
  return guarded([&] {
    const std::string config =
        config_json ? std::string(config_json) : lclab::default_suite_config();
    const lclab::SuiteConfig parsed = lclab::parse_suite_config(config);
    const lclab::MeasureContext ctx = lclab::build_single_measure(
        parsed, name, grid_scale > 0.0 ? grid_scale : 1.0);
    *out = new lclab_density{ctx.density};
  });
}

}  // extern "C"
