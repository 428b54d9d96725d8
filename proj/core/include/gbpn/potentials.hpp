#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gbpn/depth_grid.hpp"
#include "gbpn/grid_graph.hpp"

namespace gbpn {

inline constexpr double kDefaultWeightFloor = 1e-6;

struct PotentialOptions {
  double w_meas = 1.0;         // measurement precision, 1/m^2
  double lambda_smooth = 1.0;  // pairwise weight scale, 1/m^2
  double sigma_color = 0.1;    // guide channels live in [0,1]
  double w_min = kDefaultWeightFloor;
  double beta_const = 0.3;
};

// All potential parameters of the depth MRF.
//
// Unary terms are per pixel: w_unary * (x - s)^2 / 2 on measured pixels.
// Pairwise terms are per directed edge of the owning GridGraph, indexed by
// EdgeId. For edge j -> i the potential is w_pair * (x_i - x_j - r_pair)^2 / 2,
// so r_pair is the expected depth of the target minus that of the source and
// the reverse edge always carries the negated residual.
struct MrfParams {
  int height = 0;
  int width = 0;
  std::vector<double> s;                       // 0 where the mask is false
  std::vector<std::uint8_t> measurement_mask;  // 0 / 1
  std::vector<double> w_unary;
  std::vector<double> beta;
  std::vector<double> w_pair;
  std::vector<double> r_pair;

  std::size_t pixel_count() const { return s.size(); }
  friend bool operator==(const MrfParams&, const MrfParams&) = default;
};

// Zero-initialised parameters shaped for `graph` (no measurements, beta = 0,
// every pairwise weight set to `w_pair`).
MrfParams blank_params(const GridGraph& graph, double w_pair = 1.0);

// Sets the undirected potential w * (x_i - x_j - r)^2 / 2 on the edge pair
// joining i and j. Throws DimensionError when i and j are not adjacent.
void set_pair_potential(MrfParams& params, const GridGraph& graph, PixelIndex i, PixelIndex j,
                        double w, double r);

// Hand-crafted construction from a guide image: colour-similarity weights,
// zero residuals, constant damping.
MrfParams params_from_guide(const DepthGrid& guide, const DepthGrid& sparse,
                            const GridGraph& graph, const PotentialOptions& options);

struct ValidationIssue {
  enum class Severity { Warning, Error };
  Severity severity;
  std::string message;
};

// Checks every MrfParams invariant against `graph`. A parameter set without
// any measurement is reported as a warning: it is storable, but its
// information matrix is singular.
std::vector<ValidationIssue> validate_params(const MrfParams& params, const GridGraph& graph,
                                             double w_min = kDefaultWeightFloor);

// Throws ValidationError naming the first error-level issue.
void require_valid(const MrfParams& params, const GridGraph& graph,
                   double w_min = kDefaultWeightFloor);

// A parameter file holds both the MRF structure and its potentials.
struct MrfModel {
  GridGraph graph;
  MrfParams params;
};

// Little-endian "GBPNPRM1" container:
//   magic[8] | H u32 | W u32 | connectivity u8 (4 or 8)
//   | non-local count u32 | count x (a u32, b u32), a < b
//   | s f64[N] | mask u8[N] | w_unary f64[N] | beta f64[N]
//   | record count u32 | records (src u32, dst u32, w f64, r f64)
// Each record is one undirected potential w * (x_src - x_dst - r)^2 / 2.
void save_params(const MrfModel& model, const std::filesystem::path& path);
MrfModel load_params(const std::filesystem::path& path, double w_min = kDefaultWeightFloor);

}  // namespace gbpn
