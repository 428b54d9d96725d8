#pragma once

#include <cstdint>

#include "gbpn/depth_grid.hpp"

namespace gbpn {

struct SynthOptions {
  int height = 128;
  int width = 160;
  int regions = 6;
  double min_depth = 1.5;  // m
  double max_depth = 8.0;  // m
  double texture = 0.02;   // amplitude of per-pixel guide noise
  std::uint64_t seed = 0;
};

// Piecewise-planar scene: Voronoi regions, each carrying its own plane and a
// distinct flat colour (plus small texture) in the guide image.
struct SynthScene {
  DepthGrid guide;   // 3 channels in [0,1], all valid
  DepthGrid depth;   // analytic ground truth, all valid
  DepthGrid labels;  // region id per pixel
};

SynthScene make_piecewise_planar_scene(const SynthOptions& options);

// Fills every pixel with the value of the nearest valid pixel of `sparse`
// (Euclidean distance, ties to the lower row-major index).
DepthGrid nearest_valid_fill(const DepthGrid& sparse);

}  // namespace gbpn
