#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "gbpn/gbp.hpp"
#include "gbpn/grid_graph.hpp"
#include "gbpn/potentials.hpp"

namespace gbpn::cli {

// Every knob of a reproducible run. Keys in config files are the field names
// below; command-line flags use the same names in --kebab-case.
struct RunConfig {
  // solver
  int iterations = 5;
  int nonlocal_steps = 1;
  double epsilon_cavity = kDefaultCavityEpsilon;
  std::optional<double> early_stop_tol;
  bool record_trace = false;
  // potentials
  double w_meas = 1.0;
  double lambda_smooth = 1.0;
  double sigma_color = 0.1;
  double w_min = kDefaultWeightFloor;
  double beta_const = 0.3;
  // graph
  Connectivity connectivity = Connectivity::Eight;
  int k_nonlocal = 4;
  int search_radius = 7;
  int patch_radius = 1;
  int min_distance = 2;
  // misc
  std::uint64_t seed = 0;
  double depth_scale = 1.0 / 256.0;  // meters per PGM unit

  SolverConfig solver(int threads) const;
  PotentialOptions potentials() const;
  NonlocalOptions nonlocal() const;

  // Throws ParameterError on any out-of-range field.
  void validate() const;

  // Applies one key=value pair; keys accept snake_case or kebab-case.
  // Unknown keys and unparsable values throw ParameterError.
  void set(const std::string& key, const std::string& value);

  // Ordered key=value lines; parse_config_text(to_text()) reproduces *this.
  std::string to_text() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Flat key=value text: '#' comments and blank lines ignored.
RunConfig parse_config_text(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

// Internal parallelism: GBPN_THREADS if set to a positive integer, otherwise
// every hardware thread.
int threads_from_env();

}  // namespace gbpn::cli
