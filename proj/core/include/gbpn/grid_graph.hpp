#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "gbpn/depth_grid.hpp"

namespace gbpn {

enum class Connectivity : std::uint8_t { Four = 4, Eight = 8 };

// The four directional sweep sets of the serial propagation pass.
enum class Sweep : std::uint8_t { LeftToRight, TopToBottom, RightToLeft, BottomToTop };

inline constexpr std::array<Sweep, 4> kSerialSweepOrder{
    Sweep::LeftToRight, Sweep::TopToBottom, Sweep::RightToLeft, Sweep::BottomToTop};

std::string_view to_string(Sweep s);
std::string_view to_string(Connectivity c);

using EdgeId = std::uint32_t;

// A directed edge carries the message source -> target.
struct DirectedEdge {
  PixelIndex source = 0;
  PixelIndex target = 0;
  friend bool operator==(const DirectedEdge&, const DirectedEdge&) = default;
};

// Undirected pair, always stored with first < second.
using PixelPair = std::pair<PixelIndex, PixelIndex>;

// Partition rule for a directed local edge: a column change decides the
// horizontal sets (so diagonals ride the horizontal sweeps), otherwise the
// row change decides the vertical ones.
Sweep classify_local_edge(Pixel source, Pixel target);

// Processing order of one directional sweep. Lines are visited in order;
// every line is a run of target groups, and every group is the run of edges
// that share one target. Sources of a line's edges all lie on the previous
// line, so groups of one line are independent of each other.
struct SweepSchedule {
  std::vector<EdgeId> edges;
  std::vector<PixelIndex> group_targets;
  std::vector<std::size_t> group_offsets;  // size group_targets.size() + 1
  std::vector<std::size_t> line_offsets;   // into group_targets, size lines + 1

  std::size_t line_count() const { return line_offsets.empty() ? 0 : line_offsets.size() - 1; }
};

// Per-pixel partner lists for non-local edges.
using PartnerLists = std::vector<std::vector<PixelIndex>>;

struct NonlocalOptions {
  int k = 4;
  int search_radius = 7;
  int patch_radius = 1;
  int min_distance = 2;
};

// The pixel lattice MRF structure: directed local edges split into the four
// sweep sets plus symmetric non-local edges. Immutable once built.
//
// Edge ids come in reverse pairs: for the undirected pair p = (a, b) with
// a < b, edge 2p is a -> b and edge 2p + 1 is b -> a. Local pairs precede
// non-local ones and both are ordered by (a, b).
class GridGraph {
 public:
  GridGraph() = default;

  static GridGraph build_local(int height, int width, Connectivity connectivity);

  // Builds a graph from explicit undirected pairs. Every local pair must be
  // an 8-neighbourhood pair admissible under `connectivity`; every non-local
  // pair must be at Chebyshev distance > 1.
  static GridGraph from_pairs(int height, int width, Connectivity connectivity,
                              std::vector<PixelPair> local_pairs,
                              std::vector<PixelPair> nonlocal_pairs);

  // Adds the symmetric closure of `selections` as non-local edges, replacing
  // any non-local edges already present.
  GridGraph with_nonlocal(const PartnerLists& selections) const;

  // Keeps only the local pairs accepted by `keep(a, b)` (a < b).
  GridGraph restrict_local(const std::function<bool(PixelIndex, PixelIndex)>& keep) const;

  int height() const { return height_; }
  int width() const { return width_; }
  Connectivity connectivity() const { return connectivity_; }
  std::size_t node_count() const { return static_cast<std::size_t>(height_) * width_; }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t local_edge_count() const { return 2 * local_pairs_.size(); }
  std::size_t nonlocal_edge_count() const { return 2 * nonlocal_pairs_.size(); }

  const DirectedEdge& edge(EdgeId e) const { return edges_[e]; }
  std::span<const DirectedEdge> edges() const { return edges_; }
  static EdgeId reverse(EdgeId e) { return e ^ 1U; }
  bool is_local(EdgeId e) const { return e < local_edge_count(); }
  std::optional<EdgeId> find_edge(PixelIndex source, PixelIndex target) const;

  const SweepSchedule& schedule(Sweep s) const { return schedules_[static_cast<int>(s)]; }
  std::span<const EdgeId> sweep_edges(Sweep s) const { return schedule(s).edges; }
  std::span<const EdgeId> nonlocal_edges() const { return nonlocal_edges_; }

  // Incoming edges of a pixel, ascending edge id.
  std::span<const EdgeId> incoming(PixelIndex i) const {
    return {incoming_.data() + incoming_offsets_[i], incoming_offsets_[i + 1] - incoming_offsets_[i]};
  }
  std::span<const PixelIndex> nonlocal_partners(PixelIndex i) const {
    return {partners_.data() + partner_offsets_[i], partner_offsets_[i + 1] - partner_offsets_[i]};
  }

  std::span<const PixelPair> local_pairs() const { return local_pairs_; }
  std::span<const PixelPair> nonlocal_pairs() const { return nonlocal_pairs_; }
  // All undirected pairs in edge-id order (pair p owns edges 2p and 2p+1).
  PixelPair pair(std::size_t p) const {
    return p < local_pairs_.size() ? local_pairs_[p] : nonlocal_pairs_[p - local_pairs_.size()];
  }

  Pixel pixel(PixelIndex i) const {
    return {static_cast<int>(i) / width_, static_cast<int>(i) % width_};
  }
  PixelIndex index(int row, int col) const { return static_cast<PixelIndex>(row * width_ + col); }

 private:
  void finalize();

  int height_ = 0;
  int width_ = 0;
  Connectivity connectivity_ = Connectivity::Eight;
  std::vector<PixelPair> local_pairs_;
  std::vector<PixelPair> nonlocal_pairs_;
  std::vector<DirectedEdge> edges_;
  std::array<SweepSchedule, 4> schedules_;
  std::vector<EdgeId> nonlocal_edges_;
  std::vector<std::size_t> incoming_offsets_;
  std::vector<EdgeId> incoming_;
  std::vector<std::size_t> partner_offsets_;
  std::vector<PixelIndex> partners_;
};

// Hand-crafted non-local edge proposer: for every pixel, the k candidates in
// a square search window (Chebyshev distance >= min_distance) with the
// smallest mean squared patch difference over all guide channels. Patches
// are clamped at the borders; ties go to the earlier candidate in row-major
// scan order. Returned lists are per pixel, best match first; feed them to
// GridGraph::with_nonlocal to get the symmetric edge set.
PartnerLists propose_nonlocal_edges(const DepthGrid& guide, const NonlocalOptions& options);

// Mean squared difference of the clamped patches around a and b.
double patch_distance(const DepthGrid& guide, Pixel a, Pixel b, int patch_radius);

}  // namespace gbpn
