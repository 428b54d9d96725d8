#include "gbpn/potentials.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "gbpn/error.hpp"

namespace gbpn {

namespace {

constexpr std::array<char, 8> kMagic{'G', 'B', 'P', 'N', 'P', 'R', 'M', '1'};

class ByteWriter {
 public:
  void put_u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void put_u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) put_u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void put_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) put_u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }
  void put_raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  std::uint8_t u8(const char* what) {
    need(1, what);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_++])) << (8 * i);
    return v;
  }
  double f64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes_[pos_++])) << (8 * i);
    return std::bit_cast<double>(v);
  }
  void raw(char* out, std::size_t n, const char* what) {
    need(n, what);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw ParseError(std::string("parameter file truncated while reading ") + what);
    }
  }
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

void check_shape(const MrfParams& p, const GridGraph& g) {
  const std::size_t n = g.node_count();
  if (p.height != g.height() || p.width != g.width() || p.s.size() != n ||
      p.measurement_mask.size() != n || p.w_unary.size() != n || p.beta.size() != n ||
      p.w_pair.size() != g.edge_count() || p.r_pair.size() != g.edge_count()) {
    throw DimensionError("parameter arrays do not match a " + std::to_string(g.height()) + "x" +
                         std::to_string(g.width()) + " graph with " +
                         std::to_string(g.edge_count()) + " directed edges");
  }
}

}  // namespace

MrfParams blank_params(const GridGraph& graph, double w_pair) {
  MrfParams p;
  p.height = graph.height();
  p.width = graph.width();
  const std::size_t n = graph.node_count();
  p.s.assign(n, 0.0);
  p.measurement_mask.assign(n, 0);
  p.w_unary.assign(n, 0.0);
  p.beta.assign(n, 0.0);
  p.w_pair.assign(graph.edge_count(), w_pair);
  p.r_pair.assign(graph.edge_count(), 0.0);
  return p;
}

void set_pair_potential(MrfParams& params, const GridGraph& graph, PixelIndex i, PixelIndex j,
                        double w, double r) {
  const auto into_i = graph.find_edge(j, i);
  if (!into_i) {
    throw DimensionError("pixels " + std::to_string(i) + " and " + std::to_string(j) +
                         " are not joined by an edge");
  }
  const EdgeId e = *into_i;
  params.w_pair[e] = w;
  params.r_pair[e] = r;
  params.w_pair[GridGraph::reverse(e)] = w;
  params.r_pair[GridGraph::reverse(e)] = -r;
}

MrfParams params_from_guide(const DepthGrid& guide, const DepthGrid& sparse,
                            const GridGraph& graph, const PotentialOptions& options) {
  if (guide.height() != graph.height() || guide.width() != graph.width() ||
      !guide.same_shape(sparse)) {
    throw DimensionError("guide, sparse depth and graph must share dimensions");
  }
  if (!(options.w_meas > 0) || !(options.lambda_smooth > 0) || !(options.sigma_color > 0) ||
      !(options.w_min > 0)) {
    throw ParameterError("w_meas, lambda_smooth, sigma_color and w_min must be positive");
  }
  if (!(options.beta_const >= 0.0 && options.beta_const < 1.0)) {
    throw ParameterError("beta_const must lie in [0, 1)");
  }

  MrfParams p = blank_params(graph, 0.0);
  for (PixelIndex i = 0; i < p.pixel_count(); ++i) {
    p.beta[i] = options.beta_const;
    if (sparse.valid(i)) {
      p.measurement_mask[i] = 1;
      p.s[i] = sparse.at(i);
      p.w_unary[i] = options.w_meas;
    }
  }

  const double inv_two_sigma_sq = 1.0 / (2.0 * options.sigma_color * options.sigma_color);
  const int channels = guide.channels();
  for (EdgeId e = 0; e < graph.edge_count(); e += 2) {
    const auto [a, b] = graph.edge(e);
    double dist_sq = 0.0;
    for (int ch = 0; ch < channels; ++ch) {
      const double d = guide.at(a, ch) - guide.at(b, ch);
      dist_sq += d * d;
    }
    const double w = std::max(options.w_min, options.lambda_smooth * std::exp(-dist_sq * inv_two_sigma_sq));
    p.w_pair[e] = w;
    p.w_pair[e + 1] = w;
  }
  return p;
}

std::vector<ValidationIssue> validate_params(const MrfParams& params, const GridGraph& graph,
                                             double w_min) {
  check_shape(params, graph);
  std::vector<ValidationIssue> issues;
  auto error = [&](std::string msg) {
    issues.push_back({ValidationIssue::Severity::Error, std::move(msg)});
  };

  bool any_measurement = false;
  for (std::size_t i = 0; i < params.pixel_count(); ++i) {
    const std::string where = "pixel " + std::to_string(i);
    const auto m = params.measurement_mask[i];
    if (m > 1) error(where + ": mask value " + std::to_string(m) + " is not 0/1");
    if (!std::isfinite(params.w_unary[i]) || params.w_unary[i] < 0) {
      error(where + ": measurement weight " + std::to_string(params.w_unary[i]) + " is negative or non-finite");
    }
    if (params.w_unary[i] > 0 && m == 0) error(where + ": positive weight without a measurement");
    if (m == 1 && !std::isfinite(params.s[i])) error(where + ": measurement is not finite");
    if (!(params.beta[i] >= 0.0 && params.beta[i] < 1.0)) {
      error(where + ": damping " + std::to_string(params.beta[i]) + " outside [0, 1)");
    }
    any_measurement = any_measurement || (m == 1 && params.w_unary[i] > 0);
  }
  for (EdgeId e = 0; e < graph.edge_count(); ++e) {
    const auto& edge = graph.edge(e);
    const std::string where =
        "edge " + std::to_string(edge.source) + "->" + std::to_string(edge.target);
    if (!std::isfinite(params.w_pair[e]) || params.w_pair[e] < w_min) {
      error(where + ": weight " + std::to_string(params.w_pair[e]) + " below floor " + std::to_string(w_min));
    }
    if (!std::isfinite(params.r_pair[e])) error(where + ": residual is not finite");
    if ((e & 1U) == 0) {
      const EdgeId rev = GridGraph::reverse(e);
      if (params.w_pair[e] != params.w_pair[rev]) error(where + ": weight is not symmetric");
      if (params.r_pair[e] != -params.r_pair[rev]) error(where + ": residual is not antisymmetric");
    }
  }
  if (!any_measurement) {
    issues.push_back({ValidationIssue::Severity::Warning,
                      "no pixel carries a measurement; the information matrix is singular"});
  }
  return issues;
}

void require_valid(const MrfParams& params, const GridGraph& graph, double w_min) {
  for (const auto& issue : validate_params(params, graph, w_min)) {
    if (issue.severity == ValidationIssue::Severity::Error) throw ValidationError(issue.message);
  }
}

void save_params(const MrfModel& model, const std::filesystem::path& path) {
  const auto& g = model.graph;
  const auto& p = model.params;
  check_shape(p, g);

  ByteWriter out;
  out.put_raw(kMagic.data(), kMagic.size());
  out.put_u32(static_cast<std::uint32_t>(g.height()));
  out.put_u32(static_cast<std::uint32_t>(g.width()));
  out.put_u8(static_cast<std::uint8_t>(g.connectivity()));
  out.put_u32(static_cast<std::uint32_t>(g.nonlocal_pairs().size()));
  for (const auto& [a, b] : g.nonlocal_pairs()) {
    out.put_u32(a);
    out.put_u32(b);
  }
  for (double v : p.s) out.put_f64(v);
  for (auto m : p.measurement_mask) out.put_u8(m);
  for (double v : p.w_unary) out.put_f64(v);
  for (double v : p.beta) out.put_f64(v);

  // Edge 2k + 1 is b -> a with potential (x_a - x_b - r), which is exactly
  // the record orientation.
  const std::size_t pairs = g.edge_count() / 2;
  out.put_u32(static_cast<std::uint32_t>(pairs));
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto [a, b] = g.pair(k);
    out.put_u32(a);
    out.put_u32(b);
    out.put_f64(p.w_pair[2 * k + 1]);
    out.put_f64(p.r_pair[2 * k + 1]);
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file.write(out.bytes().data(), static_cast<std::streamsize>(out.bytes().size()));
  if (!file) throw IoError("failed writing " + path.string());
}

MrfModel load_params(const std::filesystem::path& path, double w_min) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  ByteReader in(std::move(bytes));

  std::array<char, 8> magic{};
  in.raw(magic.data(), magic.size(), "magic");
  if (magic != kMagic) throw ParseError(path.string() + ": not a GBPNPRM1 parameter file");

  const std::uint32_t h = in.u32("height");
  const std::uint32_t w = in.u32("width");
  if (h == 0 || w == 0 || h > (1U << 15) || w > (1U << 15)) {
    throw ParseError(path.string() + ": implausible dimensions " + std::to_string(h) + "x" + std::to_string(w));
  }
  const std::uint8_t conn = in.u8("connectivity");
  if (conn != 4 && conn != 8) throw ParseError("connectivity flag must be 4 or 8, got " + std::to_string(conn));
  const std::size_t n = static_cast<std::size_t>(h) * w;

  const std::uint32_t nl_count = in.u32("non-local count");
  if (static_cast<std::uint64_t>(nl_count) * 8 > in.remaining()) {
    throw ParseError("non-local edge table longer than the file");
  }
  std::vector<PixelPair> nonlocal(nl_count);
  for (auto& [a, b] : nonlocal) {
    a = in.u32("non-local edge");
    b = in.u32("non-local edge");
  }

  if (n * 25 > in.remaining()) throw ParseError("pixel arrays shorter than H*W");
  std::vector<double> s(n), w_unary(n), beta(n);
  std::vector<std::uint8_t> mask(n);
  for (auto& v : s) v = in.f64("s");
  for (auto& v : mask) v = in.u8("mask");
  for (auto& v : w_unary) v = in.f64("w_unary");
  for (auto& v : beta) v = in.f64("beta");

  struct Record {
    PixelIndex src, dst;
    double w, r;
  };
  const std::uint32_t rec_count = in.u32("record count");
  if (static_cast<std::uint64_t>(rec_count) * 24 != in.remaining()) {
    throw ParseError("declared " + std::to_string(rec_count) + " edge records but payload holds " +
                     std::to_string(in.remaining()) + " bytes");
  }
  std::vector<Record> records(rec_count);
  std::vector<PixelPair> local;
  for (auto& rec : records) {
    rec.src = in.u32("record");
    rec.dst = in.u32("record");
    rec.w = in.f64("record");
    rec.r = in.f64("record");
    if (rec.src >= n || rec.dst >= n || rec.src == rec.dst) {
      throw ValidationError("edge record " + std::to_string(rec.src) + "->" + std::to_string(rec.dst) +
                            " has invalid endpoints");
    }
    if (rec.src > rec.dst) {
      std::swap(rec.src, rec.dst);
      rec.r = -rec.r;
    }
    const int dr = std::abs(static_cast<int>(rec.src / w) - static_cast<int>(rec.dst / w));
    const int dc = std::abs(static_cast<int>(rec.src % w) - static_cast<int>(rec.dst % w));
    if (std::max(dr, dc) == 1) local.emplace_back(rec.src, rec.dst);
  }

  MrfModel model;
  try {
    model.graph = GridGraph::from_pairs(static_cast<int>(h), static_cast<int>(w),
                                        static_cast<Connectivity>(conn), std::move(local), nonlocal);
  } catch (const DimensionError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (model.graph.edge_count() != 2 * records.size()) {
    throw ValidationError(path.string() + ": edge records do not cover the non-local edge table");
  }

  auto& p = model.params;
  p = blank_params(model.graph, 0.0);
  p.s = std::move(s);
  p.measurement_mask = std::move(mask);
  p.w_unary = std::move(w_unary);
  p.beta = std::move(beta);
  for (const auto& rec : records) {
    const auto e = model.graph.find_edge(rec.dst, rec.src);
    if (!e) {
      throw ValidationError("edge record " + std::to_string(rec.src) + "->" + std::to_string(rec.dst) +
                            " is not in the graph");
    }
    if (p.w_pair[*e] != 0.0) {
      throw ValidationError("edge record " + std::to_string(rec.src) + "->" + std::to_string(rec.dst) +
                            " appears twice");
    }
    if (!(rec.w >= w_min) || !std::isfinite(rec.w)) {
      throw ValidationError("edge record " + std::to_string(rec.src) + "->" + std::to_string(rec.dst) +
                            ": weight " + std::to_string(rec.w) + " below floor " + std::to_string(w_min));
    }
    set_pair_potential(p, model.graph, rec.src, rec.dst, rec.w, rec.r);
  }

  for (const auto& issue : validate_params(p, model.graph, w_min)) {
    if (issue.severity == ValidationIssue::Severity::Error) {
      throw ValidationError(path.string() + ": " + issue.message);
    }
    std::cerr << "warning: " << path.string() << ": " << issue.message << '\n';
  }
  return model;
}

}  // namespace gbpn
