#include "gbpn/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "gbpn/error.hpp"

namespace gbpn {

SynthScene make_piecewise_planar_scene(const SynthOptions& options) {
  if (options.regions < 1) throw ParameterError("scene needs at least one region");
  if (!(options.min_depth > 0) || !(options.max_depth > options.min_depth)) {
    throw ParameterError("depth range must satisfy 0 < min_depth < max_depth");
  }
  const int h = options.height;
  const int w = options.width;
  SynthScene scene{DepthGrid(h, w, 3), DepthGrid(h, w, 1), DepthGrid(h, w, 1)};

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  struct Region {
    double row, col;
    double base, slope_r, slope_c;
    std::array<double, 3> color;
  };
  std::vector<Region> regions;
  const double mid = 0.5 * (options.min_depth + options.max_depth);
  const double half = 0.5 * (options.max_depth - options.min_depth);
  for (int k = 0; k < options.regions; ++k) {
    Region reg{};
    reg.row = unit(rng) * (h - 1);
    reg.col = unit(rng) * (w - 1);
    reg.base = mid + (unit(rng) - 0.5) * half;
    // Slopes bounded so the plane stays inside the depth range.
    const double span = 0.5 * half / std::max(h, w);
    reg.slope_r = (unit(rng) * 2.0 - 1.0) * span;
    reg.slope_c = (unit(rng) * 2.0 - 1.0) * span;
    // Rejection-sample a colour far from the others.
    for (int attempt = 0; attempt < 1000; ++attempt) {
      for (auto& ch : reg.color) ch = 0.1 + 0.8 * unit(rng);
      double closest = std::numeric_limits<double>::infinity();
      for (const auto& other : regions) {
        double d = 0.0;
        for (int ch = 0; ch < 3; ++ch) d += std::pow(reg.color[ch] - other.color[ch], 2);
        closest = std::min(closest, std::sqrt(d));
      }
      if (closest > 0.25) break;
    }
    regions.push_back(reg);
  }

  std::normal_distribution<double> noise(0.0, options.texture);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int k = 0; k < options.regions; ++k) {
        const double d = std::pow(r - regions[k].row, 2) + std::pow(c - regions[k].col, 2);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      const Region& reg = regions[best];
      const double depth =
          reg.base + reg.slope_r * (r - reg.row) + reg.slope_c * (c - reg.col);
      scene.depth.at(r, c) = std::clamp(depth, options.min_depth, options.max_depth);
      scene.labels.at(r, c) = best;
      for (int ch = 0; ch < 3; ++ch) {
        scene.guide.at(r, c, ch) = std::clamp(reg.color[ch] + noise(rng), 0.0, 1.0);
      }
    }
  }
  scene.guide.set_all_valid(true);
  scene.depth.set_all_valid(true);
  scene.labels.set_all_valid(true);
  return scene;
}

DepthGrid nearest_valid_fill(const DepthGrid& sparse) {
  std::vector<PixelIndex> points;
  for (PixelIndex i = 0; i < sparse.pixel_count(); ++i) {
    if (sparse.valid(i)) points.push_back(i);
  }
  if (points.empty()) throw ParameterError("nearest-valid fill needs at least one valid pixel");
  DepthGrid out(sparse.height(), sparse.width(), 1);
  for (PixelIndex i = 0; i < out.pixel_count(); ++i) {
    const Pixel p = out.pixel(i);
    long best_d = std::numeric_limits<long>::max();
    PixelIndex best = points.front();
    for (PixelIndex q : points) {
      const Pixel pq = out.pixel(q);
      const long dr = p.row - pq.row;
      const long dc = p.col - pq.col;
      const long d = dr * dr + dc * dc;
      if (d < best_d) {
        best_d = d;
        best = q;
      }
    }
    out.at(i) = sparse.at(best);
    out.set_valid(i, true);
  }
  return out;
}

}  // namespace gbpn
