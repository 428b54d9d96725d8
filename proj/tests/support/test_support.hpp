#pragma once

// Test-only helpers: random instance generators and reference computations
// that do not go through the library's solver or oracle code paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <unistd.h>
#include <string>
#include <vector>

#include "gbpn/depth_grid.hpp"
#include "gbpn/grid_graph.hpp"
#include "gbpn/potentials.hpp"
#include "gbpn/synth.hpp"

namespace gbpn::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Dense Gaussian elimination with partial pivoting on a copy of A.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

// Information matrix and vector written out term by term from the energy
// sum_i w_i (x_i - s_i)^2 / 2 + sum_edges w (x_tgt - x_src - r)^2 / 2, where
// every directed edge contributes half of its undirected term.
struct DenseSystem {
  std::vector<std::vector<double>> J;
  std::vector<double> h;
};

inline DenseSystem dense_system(const MrfParams& p, const GridGraph& g) {
  const std::size_t n = g.node_count();
  DenseSystem d{std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)),
                std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    if (!p.measurement_mask[i]) continue;
    d.J[i][i] += p.w_unary[i];
    d.h[i] += p.w_unary[i] * p.s[i];
  }
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    // Gradient of 0.5 * w/2 * (x_t - x_s - r)^2.
    const auto [s, t] = g.edge(e);
    const double w = 0.5 * p.w_pair[e];
    const double r = p.r_pair[e];
    d.J[t][t] += w;
    d.J[s][s] += w;
    d.J[t][s] -= w;
    d.J[s][t] -= w;
    d.h[t] += w * r;
    d.h[s] -= w * r;
  }
  return d;
}

inline std::vector<double> dense_mean(const MrfParams& p, const GridGraph& g) {
  auto d = dense_system(p, g);
  return dense_solve(d.J, d.h);
}

// 1 / (J^-1)_ii by solving J x = e_i for every i.
inline std::vector<double> dense_marginal_precisions(const MrfParams& p, const GridGraph& g) {
  const auto d = dense_system(p, g);
  const std::size_t n = d.h.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    out[i] = 1.0 / dense_solve(d.J, e)[i];
  }
  return out;
}

inline int count_components(const GridGraph& g, std::vector<int>& label) {
  label.assign(g.node_count(), -1);
  int next = 0;
  for (PixelIndex start = 0; start < g.node_count(); ++start) {
    if (label[start] >= 0) continue;
    std::vector<PixelIndex> stack{start};
    label[start] = next;
    while (!stack.empty()) {
      const PixelIndex v = stack.back();
      stack.pop_back();
      for (EdgeId e : g.incoming(v)) {
        const PixelIndex u = g.edge(e).source;
        if (label[u] < 0) {
          label[u] = next;
          stack.push_back(u);
        }
      }
    }
    ++next;
  }
  return next;
}

// Random weights on every edge pair and measurements on a random subset
// that touches every connected component at least once.
inline MrfParams random_params(Rng& rng, const GridGraph& g, double beta = 0.0,
                               double measured_fraction = 0.3) {
  MrfParams p = blank_params(g, 1.0);
  for (std::size_t k = 0; k < g.edge_count() / 2; ++k) {
    const auto [a, b] = g.pair(k);
    set_pair_potential(p, g, a, b, uniform(rng, 0.1, 10.0), uniform(rng, -1.0, 1.0));
  }
  std::vector<int> label;
  const int comps = count_components(g, label);
  std::vector<std::vector<PixelIndex>> members(comps);
  for (PixelIndex i = 0; i < g.node_count(); ++i) members[label[i]].push_back(i);
  auto measure = [&](PixelIndex i) {
    p.measurement_mask[i] = 1;
    p.w_unary[i] = uniform(rng, 0.1, 10.0);
    p.s[i] = uniform(rng, 1.0, 10.0);
  };
  for (const auto& m : members) {
    measure(m[std::uniform_int_distribution<std::size_t>(0, m.size() - 1)(rng)]);
  }
  for (PixelIndex i = 0; i < g.node_count(); ++i) {
    if (uniform(rng, 0.0, 1.0) < measured_fraction) measure(i);
  }
  std::fill(p.beta.begin(), p.beta.end(), beta);
  return p;
}

// A tree (or forest) inside the 8-connected lattice in which every pixel
// links to exactly one pixel of the next column. Such trees are solved
// exactly by one left-to-right plus one right-to-left sweep.
inline GridGraph random_merge_tree(Rng& rng, int height, int width) {
  const GridGraph full = GridGraph::build_local(height, width, Connectivity::Eight);
  std::vector<PixelPair> keep;
  for (int c = 0; c + 1 < width; ++c) {
    for (int r = 0; r < height; ++r) {
      const int lo = std::max(0, r - 1);
      const int hi = std::min(height - 1, r + 1);
      const int nr = std::uniform_int_distribution<int>(lo, hi)(rng);
      keep.emplace_back(full.index(r, c), full.index(nr, c + 1));
    }
  }
  for (auto& p : keep) {
    if (p.first > p.second) std::swap(p.first, p.second);
  }
  std::sort(keep.begin(), keep.end());
  return full.restrict_local([&](PixelIndex a, PixelIndex b) {
    return std::binary_search(keep.begin(), keep.end(), PixelPair{a, b});
  });
}

// Guide for loopy instances: a small piecewise-constant scene with texture.
inline DepthGrid random_guide(std::uint64_t seed, int height, int width, int regions = 3) {
  SynthOptions o;
  o.height = height;
  o.width = width;
  o.regions = regions;
  o.texture = 0.05;
  o.seed = seed;
  return make_piecewise_planar_scene(o).guide;
}

inline DepthGrid random_sparse(Rng& rng, int height, int width, double fraction) {
  DepthGrid sparse(height, width, 1);
  const std::size_t n = sparse.pixel_count();
  const auto want = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * n)));
  std::vector<PixelIndex> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 0; k < want; ++k) {
    sparse.at(order[k]) = uniform(rng, 1.0, 10.0);
    sparse.set_valid(order[k], true);
  }
  return sparse;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), 1e-300));
  }
  return m;
}

// Fresh scratch directory per test binary.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("gbpn_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace gbpn::testing
