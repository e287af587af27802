#ifndef LCLAB_SUITE_HPP
#define LCLAB_SUITE_HPP

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/generators.hpp"
#include "core/grid_density.hpp"
#include "core/recentering.hpp"
#include "core/reports.hpp"

namespace lclab {

struct MeasureSpec {
  std::string name;
  std::string kind;  // gaussian | laplace | uniform_cube | polygon | tilt
  int dim = 0;
  std::vector<std::vector<double>> covariance;
  std::vector<double> mean;
  std::vector<double> scales;
  std::vector<double> theta;
  std::string base;
  double box_radius = 0.0;
  double radius = 0.0;
  double pad = 0.05;
  bool recenter = false;
  std::vector<std::array<double, 2>> vertices;
  std::vector<int> shape;
};

struct PairSpec {
  std::string name;
  std::string mu;
  std::string nu;
};

struct CheckSpec {
  std::string id;
  std::string type;
  std::vector<std::string> measures;
  std::vector<std::string> pairs;
  std::string measure;
  std::string functions;  // family alias, defaults per check type
  std::vector<double> t_sequence;
  double tolerance = 0.0;  // 0 = per-type default
  double cube_radius = 0.0;
  std::int64_t count = 0;
};

struct OutputSpec {
  bool csv = true;
  bool json = true;
};

struct SuiteConfig {
  std::optional<std::uint64_t> seed;
  OutputSpec output;
  std::vector<MeasureSpec> measures;
  std::vector<PairSpec> pairs;
  std::map<std::string, std::string> function_aliases;
  std::vector<CheckSpec> checks;
};

// Strict parse: unknown keys, unresolved references and missing seeds for
// sampled checks are hard ConfigInvalid errors with the offending path.
SuiteConfig parse_suite_config(const std::string& json_text);

// The bundled verification suite: Gaussian families, Laplace products,
// barycentered bodies and their Steiner symmetrizations, tilted measures.
const std::string& default_suite_config();

struct MeasureContext {
  MeasureSpec spec;
  std::shared_ptr<const GridDensity> density;
  std::shared_ptr<const ConditionalMoments> moments;
  RecenteringPair rec;
  std::optional<ConvexBody2D> body;  // polygon kinds only
};

// All measures of a config, built once (respecting grid_scale) and immutable
// afterwards; checks and CLI dumps read from here.
class SuiteWorkspace {
 public:
  SuiteWorkspace(const SuiteConfig& config, double grid_scale);

  const MeasureContext& measure(const std::string& name) const;
  const PairSpec& pair(const std::string& name) const;
  const SuiteConfig& config() const { return config_; }

 private:
  void build_measure(const MeasureSpec& spec);

  SuiteConfig config_;
  double grid_scale_ = 1.0;
  std::map<std::string, MeasureContext> measures_;
  std::map<std::string, PairSpec> pairs_;
};

struct RunOptions {
  double grid_scale = 1.0;
  int jobs = 1;
  std::optional<std::uint64_t> seed_override;
};

struct SuiteResult {
  std::vector<VerificationReport> reports;
  int exit_code = 0;  // 0 pass, 1 gating check failed
};

SuiteResult run_suite(const SuiteConfig& config, const RunOptions& options);

// Parses, runs and writes reports.csv / reports.json under out_dir.
// Returns the suite exit code; ConfigInvalid and IoError propagate.
int run_suite_files(const std::string& config_json, const std::string& out_dir,
                    const RunOptions& options);

// Builds one named measure (plus its tilt bases) without touching the rest
// of the config; for CLI dumps.
MeasureContext build_single_measure(const SuiteConfig& config, const std::string& name,
                                    double grid_scale);

std::vector<int> scaled_shape(const std::vector<int>& shape, double grid_scale);

}  // namespace lclab

#endif
