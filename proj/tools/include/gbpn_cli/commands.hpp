#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "gbpn/depth_grid.hpp"
#include "gbpn/metrics.hpp"
#include "gbpn/potentials.hpp"
#include "gbpn/synth.hpp"
#include "gbpn_cli/run_config.hpp"

namespace gbpn::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitIo = 2, kExitNumerical = 3 };

using Path = std::filesystem::path;

// Graph (local + proposed non-local edges) and hand-crafted potentials for
// one guide / sparse-depth pair.
MrfModel build_scene_mrf(const DepthGrid& guide, const DepthGrid& sparse, const RunConfig& config);
// Same, reusing a graph built once for the guide.
GridGraph build_scene_graph(const DepthGrid& guide, const RunConfig& config);

// Sparse input by extension; CSV points are placed on the guide's grid.
DepthGrid read_sparse_input(const Path& path, const DepthGrid& guide, double depth_scale);

// Posterior mean (invalid where the belief is vacuous) and precision grids.
DepthGrid mean_grid(const BeliefMap& beliefs);
DepthGrid precision_grid(const BeliefMap& beliefs);

struct CompleteArgs {
  Path guide, sparse, out_mu, out_lambda;
  std::optional<Path> trace_out;    // trace to a file instead of stdout
  std::optional<Path> echo_config;  // effective config written here
  RunConfig config;
  int threads = 1;
};
int cmd_complete(const CompleteArgs& args, std::ostream& out, std::ostream& err);

struct OracleArgs {
  Path guide, sparse, out_mu;
  RunConfig config;
};
int cmd_oracle(const OracleArgs& args, std::ostream& out, std::ostream& err);

struct SampleArgs {
  Path gt, out;
  std::size_t n_points = 500;
  std::uint64_t seed = 0;
  double depth_scale = 1.0 / 256.0;
};
int cmd_sample(const SampleArgs& args, std::ostream& out, std::ostream& err);

struct EvalArgs {
  Path pred_mu, gt;
  std::optional<Path> pred_lambda;
  EvalOptions options;
  bool json = false;
  double depth_scale = 1.0 / 256.0;
};
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);

struct DensityRow {
  std::size_t points = 0;
  EvalReport gbp;
  EvalReport baseline;  // nearest-valid-pixel fill
};

// Seed-averaged completion quality per point count. Seeds are
// config.seed, config.seed + 1, ...
std::vector<DensityRow> sweep_density(const DepthGrid& gt, const DepthGrid& guide,
                                      const std::vector<std::size_t>& point_counts, int seeds,
                                      const RunConfig& config, int threads,
                                      const EvalOptions& eval = {});
void write_density_table(std::ostream& out, const std::vector<DensityRow>& rows);

struct SweepArgs {
  Path gt, guide;
  std::vector<std::size_t> point_counts;
  int seeds = 10;
  RunConfig config;
  int threads = 1;
  std::optional<Path> out_table;
};
int cmd_sweep_density(const SweepArgs& args, std::ostream& out, std::ostream& err);

struct SynthArgs {
  SynthOptions options;
  Path out_guide, out_gt;
  std::optional<Path> out_labels;
  double depth_scale = 1.0 / 256.0;
};
int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err);

// Runs `body`, mapping library exceptions onto exit codes and printing the
// message to `err`.
template <typename Body>
int guarded(std::ostream& err, Body&& body);

}  // namespace gbpn::cli

#include "gbpn_cli/commands_inl.hpp"
