// lclab command-line driver. Talks to the library exclusively through the
// public C interface.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lclab/lclab.h"

namespace {

int fail_with(lclab_status status) {
  std::fprintf(stderr, "error: %s: %s\n", lclab_status_name(status), lclab_last_error());
  return status == LCLAB_ERR_CONFIG ? 2 : 1;
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream is(path);
  if (!is.good()) return false;
  std::ostringstream ss;
  ss << is.rdbuf();
  out = ss.str();
  return true;
}

struct CommonArgs {
  std::string config_path;
  double grid_scale = 1.0;

  // nullptr = bundled suite
  const char* config_text(std::string& storage) const {
    if (config_path.empty()) return nullptr;
    if (!read_file(config_path, storage)) {
      std::fprintf(stderr, "error: cannot read config file %s\n", config_path.c_str());
      std::exit(2);
    }
    return storage.c_str();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transport and functional-inequality laboratory for log-concave measures"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string out_path = "lclab-out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
  std::string mu_name, nu_name, measure_name;

  auto* verify = app.add_subcommand("verify", "run the verification suite");
  verify->add_option("--config", common.config_path, "suite config JSON (default: bundled suite)");
  verify->add_option("--out", out_path, "report output directory");
  verify->add_option("--seed", seed, "override the suite seed")->each([&](const std::string&) {
    seed_set = true;
  });
  verify->add_option("--grid-scale", common.grid_scale, "multiplier on grid shapes");
  verify->add_option("--jobs", jobs, "worker threads for checks");

  auto* map = app.add_subcommand("map", "dump a Knothe or recentering map to text");
  map->add_option("--config", common.config_path, "suite config JSON (default: bundled suite)");
  map->add_option("--mu", mu_name, "source measure name")->required();
  map->add_option("--nu", nu_name, "target measure name (omit for the recentering map)");
  map->add_option("--out", out_path, "output file")->required();
  map->add_option("--grid-scale", common.grid_scale, "multiplier on grid shapes");

  auto* example = app.add_subcommand("example", "emit a generated density to text");
  example->add_option("--config", common.config_path, "suite config JSON (default: bundled suite)");
  example->add_option("--measure", measure_name, "measure name")->required();
  example->add_option("--out", out_path, "output file")->required();
  example->add_option("--grid-scale", common.grid_scale, "multiplier on grid shapes");

  auto* moments = app.add_subcommand("moments", "dump conditional-moment tables as CSV");
  moments->add_option("--config", common.config_path, "suite config JSON (default: bundled suite)");
  moments->add_option("--measure", measure_name, "measure name")->required();
  moments->add_option("--out", out_path, "output file")->required();
  moments->add_option("--grid-scale", common.grid_scale, "multiplier on grid shapes");

  CLI11_PARSE(app, argc, argv);

  std::string config_storage;

  if (verify->parsed()) {
    int exit_code = 0;
    const lclab_status st =
        lclab_suite_run(common.config_text(config_storage), out_path.c_str(),
                        common.grid_scale, jobs, seed_set ? 1 : 0, seed, &exit_code);
    if (st != LCLAB_OK) return fail_with(st);
    std::printf("reports written to %s (exit %d)\n", out_path.c_str(), exit_code);
    return exit_code;
  }

  if (map->parsed()) {
    lclab_density* mu = nullptr;
    lclab_status st = lclab_suite_build_measure(common.config_text(config_storage),
                                                mu_name.c_str(), common.grid_scale, &mu);
    if (st != LCLAB_OK) return fail_with(st);
    lclab_map* handle = nullptr;
    if (!nu_name.empty()) {
      lclab_density* nu = nullptr;
      st = lclab_suite_build_measure(common.config_text(config_storage), nu_name.c_str(),
                                     common.grid_scale, &nu);
      if (st == LCLAB_OK) st = lclab_map_knothe(mu, nu, &handle);
      lclab_density_free(nu);
    } else {
      lclab_moments* m = nullptr;
      st = lclab_moments_build(mu, &m);
      if (st == LCLAB_OK) st = lclab_map_recentering(m, &handle);
      lclab_moments_free(m);
    }
    if (st == LCLAB_OK) st = lclab_map_save_text(handle, out_path.c_str());
    lclab_map_free(handle);
    lclab_density_free(mu);
    if (st != LCLAB_OK) return fail_with(st);
    std::printf("map written to %s\n", out_path.c_str());
    return 0;
  }

  if (example->parsed()) {
    lclab_density* d = nullptr;
    lclab_status st = lclab_suite_build_measure(common.config_text(config_storage),
                                                measure_name.c_str(), common.grid_scale, &d);
    if (st == LCLAB_OK) st = lclab_density_save_text(d, out_path.c_str());
    lclab_density_free(d);
    if (st != LCLAB_OK) return fail_with(st);
    std::printf("density written to %s\n", out_path.c_str());
    return 0;
  }

  if (moments->parsed()) {
    lclab_density* d = nullptr;
    lclab_status st = lclab_suite_build_measure(common.config_text(config_storage),
                                                measure_name.c_str(), common.grid_scale, &d);
    lclab_moments* m = nullptr;
    if (st == LCLAB_OK) st = lclab_moments_build(d, &m);
    if (st == LCLAB_OK) st = lclab_moments_save_csv(m, out_path.c_str());
    lclab_moments_free(m);
    lclab_density_free(d);
    if (st != LCLAB_OK) return fail_with(st);
    std::printf("moment tables written to %s\n", out_path.c_str());
    return 0;
  }

  return 0;
}
