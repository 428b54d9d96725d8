#include "gbpn/grid_graph.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <string>
#include <tuple>

#include "gbpn/error.hpp"

namespace gbpn {

namespace {

int chebyshev(Pixel a, Pixel b) {
  return std::max(std::abs(a.row - b.row), std::abs(a.col - b.col));
}

void check_dimensions(int height, int width) {
  if (height < 1 || width < 1) {
    throw DimensionError("graph dimensions must be >= 1, got " + std::to_string(height) + "x" +
                         std::to_string(width));
  }
}

std::string describe(PixelPair p) {
  return "(" + std::to_string(p.first) + ", " + std::to_string(p.second) + ")";
}

void canonicalize(std::vector<PixelPair>& pairs) {
  for (auto& p : pairs) {
    if (p.first > p.second) std::swap(p.first, p.second);
  }
  std::sort(pairs.begin(), pairs.end());
}

}  // namespace

std::string_view to_string(Sweep s) {
  switch (s) {
    case Sweep::LeftToRight: return "LR";
    case Sweep::TopToBottom: return "TB";
    case Sweep::RightToLeft: return "RL";
    case Sweep::BottomToTop: return "BT";
  }
  return "?";
}

std::string_view to_string(Connectivity c) {
  return c == Connectivity::Four ? "4" : "8";
}

Sweep classify_local_edge(Pixel source, Pixel target) {
  const int dcol = target.col - source.col;
  const int drow = target.row - source.row;
  if (dcol > 0) return Sweep::LeftToRight;
  if (dcol < 0) return Sweep::RightToLeft;
  return drow > 0 ? Sweep::TopToBottom : Sweep::BottomToTop;
}

GridGraph GridGraph::build_local(int height, int width, Connectivity connectivity) {
  check_dimensions(height, width);
  GridGraph g;
  g.height_ = height;
  g.width_ = width;
  g.connectivity_ = connectivity;

  // Forward neighbours in ascending index order so pairs come out sorted.
  static constexpr std::array<std::array<int, 2>, 4> kEight{{{0, 1}, {1, -1}, {1, 0}, {1, 1}}};
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      for (const auto& [dr, dc] : kEight) {
        if (connectivity == Connectivity::Four && dr != 0 && dc != 0) continue;
        const int nr = r + dr;
        const int nc = c + dc;
        if (nr < 0 || nr >= height || nc < 0 || nc >= width) continue;
        g.local_pairs_.emplace_back(g.index(r, c), g.index(nr, nc));
      }
    }
  }
  g.finalize();
  return g;
}

GridGraph GridGraph::from_pairs(int height, int width, Connectivity connectivity,
                                std::vector<PixelPair> local_pairs,
                                std::vector<PixelPair> nonlocal_pairs) {
  check_dimensions(height, width);
  GridGraph g;
  g.height_ = height;
  g.width_ = width;
  g.connectivity_ = connectivity;
  const auto n = static_cast<PixelIndex>(g.node_count());

  canonicalize(local_pairs);
  canonicalize(nonlocal_pairs);
  auto check_common = [&](const std::vector<PixelPair>& pairs, const char* kind) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& p = pairs[i];
      if (p.second >= n) {
        throw DimensionError(std::string(kind) + " edge " + describe(p) + " is out of bounds");
      }
      if (p.first == p.second) {
        throw DimensionError(std::string(kind) + " self-edge at pixel " + std::to_string(p.first));
      }
      if (i > 0 && pairs[i - 1] == p) {
        throw DimensionError(std::string(kind) + " edge " + describe(p) + " is duplicated");
      }
    }
  };
  check_common(local_pairs, "local");
  check_common(nonlocal_pairs, "non-local");

  for (const auto& p : local_pairs) {
    const Pixel a = g.pixel(p.first);
    const Pixel b = g.pixel(p.second);
    if (chebyshev(a, b) != 1) {
      throw DimensionError("local edge " + describe(p) + " does not join neighbouring pixels");
    }
    if (connectivity == Connectivity::Four && a.row != b.row && a.col != b.col) {
      throw DimensionError("diagonal edge " + describe(p) + " in a 4-connected graph");
    }
  }
  for (const auto& p : nonlocal_pairs) {
    if (chebyshev(g.pixel(p.first), g.pixel(p.second)) <= 1) {
      throw DimensionError("non-local edge " + describe(p) + " joins neighbouring pixels");
    }
  }

  g.local_pairs_ = std::move(local_pairs);
  g.nonlocal_pairs_ = std::move(nonlocal_pairs);
  g.finalize();
  return g;
}

GridGraph GridGraph::with_nonlocal(const PartnerLists& selections) const {
  if (selections.size() != node_count()) {
    throw DimensionError("partner lists cover " + std::to_string(selections.size()) +
                         " pixels, graph has " + std::to_string(node_count()));
  }
  std::vector<PixelPair> pairs;
  for (PixelIndex i = 0; i < selections.size(); ++i) {
    for (PixelIndex j : selections[i]) {
      pairs.emplace_back(std::min(i, j), std::max(i, j));
    }
  }
  canonicalize(pairs);
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return from_pairs(height_, width_, connectivity_, local_pairs_, std::move(pairs));
}

GridGraph GridGraph::restrict_local(
    const std::function<bool(PixelIndex, PixelIndex)>& keep) const {
  GridGraph g;
  g.height_ = height_;
  g.width_ = width_;
  g.connectivity_ = connectivity_;
  for (const auto& p : local_pairs_) {
    if (keep(p.first, p.second)) g.local_pairs_.push_back(p);
  }
  g.nonlocal_pairs_ = nonlocal_pairs_;
  g.finalize();
  return g;
}

std::optional<EdgeId> GridGraph::find_edge(PixelIndex source, PixelIndex target) const {
  if (target >= node_count()) return std::nullopt;
  for (EdgeId e : incoming(target)) {
    if (edges_[e].source == source) return e;
  }
  return std::nullopt;
}

void GridGraph::finalize() {
  const std::size_t n = node_count();
  const std::size_t pair_count = local_pairs_.size() + nonlocal_pairs_.size();

  edges_.clear();
  edges_.reserve(2 * pair_count);
  for (std::size_t p = 0; p < pair_count; ++p) {
    const auto [a, b] = pair(p);
    edges_.push_back({a, b});
    edges_.push_back({b, a});
  }

  // Incoming CSR, ascending edge id per target.
  incoming_offsets_.assign(n + 1, 0);
  for (const auto& e : edges_) ++incoming_offsets_[e.target + 1];
  std::partial_sum(incoming_offsets_.begin(), incoming_offsets_.end(), incoming_offsets_.begin());
  incoming_.assign(edges_.size(), 0);
  {
    std::vector<std::size_t> cursor(incoming_offsets_.begin(), incoming_offsets_.end() - 1);
    for (EdgeId e = 0; e < edges_.size(); ++e) incoming_[cursor[edges_[e].target]++] = e;
  }

  // Sweep schedules.
  for (int s = 0; s < 4; ++s) {
    const auto sweep = static_cast<Sweep>(s);
    const bool horizontal = sweep == Sweep::LeftToRight || sweep == Sweep::RightToLeft;
    const bool reversed = sweep == Sweep::RightToLeft || sweep == Sweep::BottomToTop;
    auto line_of = [&](PixelIndex target) {
      const Pixel p = pixel(target);
      const int line = horizontal ? p.col : p.row;
      return reversed ? -line : line;
    };

    std::vector<EdgeId> set;
    for (EdgeId e = 0; e < local_edge_count(); ++e) {
      if (classify_local_edge(pixel(edges_[e].source), pixel(edges_[e].target)) == sweep) {
        set.push_back(e);
      }
    }
    std::sort(set.begin(), set.end(), [&](EdgeId x, EdgeId y) {
      return std::make_tuple(line_of(edges_[x].target), edges_[x].target, x) <
             std::make_tuple(line_of(edges_[y].target), edges_[y].target, y);
    });

    SweepSchedule sched;
    sched.edges = std::move(set);
    for (std::size_t k = 0; k < sched.edges.size(); ++k) {
      const PixelIndex t = edges_[sched.edges[k]].target;
      const bool new_group = k == 0 || edges_[sched.edges[k - 1]].target != t;
      if (!new_group) continue;
      const bool new_line = k == 0 || line_of(edges_[sched.edges[k - 1]].target) != line_of(t);
      if (new_line) sched.line_offsets.push_back(sched.group_targets.size());
      sched.group_offsets.push_back(k);
      sched.group_targets.push_back(t);
    }
    sched.group_offsets.push_back(sched.edges.size());
    sched.line_offsets.push_back(sched.group_targets.size());
    schedules_[s] = std::move(sched);
  }

  nonlocal_edges_.resize(nonlocal_edge_count());
  std::iota(nonlocal_edges_.begin(), nonlocal_edges_.end(),
            static_cast<EdgeId>(local_edge_count()));

  partner_offsets_.assign(n + 1, 0);
  for (const auto& [a, b] : nonlocal_pairs_) {
    ++partner_offsets_[a + 1];
    ++partner_offsets_[b + 1];
  }
  std::partial_sum(partner_offsets_.begin(), partner_offsets_.end(), partner_offsets_.begin());
  partners_.assign(2 * nonlocal_pairs_.size(), 0);
  {
    std::vector<std::size_t> cursor(partner_offsets_.begin(), partner_offsets_.end() - 1);
    for (const auto& [a, b] : nonlocal_pairs_) {
      partners_[cursor[a]++] = b;
      partners_[cursor[b]++] = a;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(partners_.begin() + static_cast<std::ptrdiff_t>(partner_offsets_[i]),
              partners_.begin() + static_cast<std::ptrdiff_t>(partner_offsets_[i + 1]));
  }
}

double patch_distance(const DepthGrid& guide, Pixel a, Pixel b, int patch_radius) {
  const int h = guide.height();
  const int w = guide.width();
  const int channels = guide.channels();
  double sum = 0.0;
  for (int dr = -patch_radius; dr <= patch_radius; ++dr) {
    const int ra = std::clamp(a.row + dr, 0, h - 1);
    const int rb = std::clamp(b.row + dr, 0, h - 1);
    for (int dc = -patch_radius; dc <= patch_radius; ++dc) {
      const int ca = std::clamp(a.col + dc, 0, w - 1);
      const int cb = std::clamp(b.col + dc, 0, w - 1);
      for (int ch = 0; ch < channels; ++ch) {
        const double d = guide.at(ra, ca, ch) - guide.at(rb, cb, ch);
        sum += d * d;
      }
    }
  }
  const int side = 2 * patch_radius + 1;
  return sum / static_cast<double>(side * side * channels);
}

PartnerLists propose_nonlocal_edges(const DepthGrid& guide, const NonlocalOptions& options) {
  if (options.k < 0) throw ParameterError("k must be >= 0");
  if (options.min_distance < 2) throw ParameterError("min_distance must be >= 2");
  if (options.search_radius < options.min_distance) {
    throw ParameterError("search_radius must be >= min_distance");
  }
  if (options.patch_radius < 0) throw ParameterError("patch_radius must be >= 0");

  const int h = guide.height();
  const int w = guide.width();
  PartnerLists result(guide.pixel_count());
  if (options.k == 0) return result;

  struct Candidate {
    double distance;
    PixelIndex index;  // row-major index doubles as scan order
  };
  std::vector<Candidate> candidates;
  const int rad = options.search_radius;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      candidates.clear();
      for (int qr = std::max(0, r - rad); qr <= std::min(h - 1, r + rad); ++qr) {
        for (int qc = std::max(0, c - rad); qc <= std::min(w - 1, c + rad); ++qc) {
          if (std::max(std::abs(qr - r), std::abs(qc - c)) < options.min_distance) continue;
          candidates.push_back(
              {patch_distance(guide, {r, c}, {qr, qc}, options.patch_radius), guide.index(qr, qc)});
        }
      }
      const auto take = std::min<std::size_t>(static_cast<std::size_t>(options.k), candidates.size());
      std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                        candidates.end(), [](const Candidate& x, const Candidate& y) {
                          return std::tie(x.distance, x.index) < std::tie(y.distance, y.index);
                        });
      auto& out = result[guide.index(r, c)];
      for (std::size_t i = 0; i < take; ++i) out.push_back(candidates[i].index);
    }
  }
  return result;
}

}  // namespace gbpn
