#include "gbpn/gbp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <string>

#include "gbpn/error.hpp"

#if defined(GBPN_HAVE_OPENMP)
#include <omp.h>
#endif

namespace gbpn {

namespace {

// Below this many independent work items a line is processed inline.
constexpr std::size_t kParallelGrain = 256;

int resolve_threads(int requested) {
#if defined(GBPN_HAVE_OPENMP)
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

// Runs body(k) for k in [begin, end). Iterations must be independent; the
// result is identical for every thread count.
template <typename Body>
void for_range(std::size_t begin, std::size_t end, int threads, Body&& body) {
#if defined(GBPN_HAVE_OPENMP)
  const auto count = static_cast<std::ptrdiff_t>(end - begin);
  if (threads > 1 && end - begin >= kParallelGrain) {
#pragma omp parallel for num_threads(threads) schedule(static)
    for (std::ptrdiff_t k = 0; k < count; ++k) body(begin + static_cast<std::size_t>(k));
    return;
  }
#else
  (void)threads;
#endif
  for (std::size_t k = begin; k < end; ++k) body(k);
}

}  // namespace

void SolverConfig::validate() const {
  if (iterations < 1) throw ParameterError("iterations (T) must be >= 1");
  if (nonlocal_steps < 0) throw ParameterError("nonlocal_steps (T_n) must be >= 0");
  if (!(epsilon_cavity > 0)) throw ParameterError("epsilon_cavity must be positive");
  if (early_stop_tol && !(*early_stop_tol >= 0)) {
    throw ParameterError("early_stop_tol must be >= 0");
  }
}

Canonical message_update(double cavity_eta, double cavity_lambda, double w, double r,
                         double epsilon_cavity) {
  if (!(w > 0)) throw ParameterError("pairwise weight must be positive, got " + std::to_string(w));
  if (cavity_lambda <= epsilon_cavity) return {};
  const double mean = cavity_eta / cavity_lambda + r;
  // (1/a + 1/b)^-1 written to stay finite for very large w.
  const double lambda = cavity_lambda * w / (cavity_lambda + w);
  return {lambda * mean, lambda};
}

Canonical damp(Canonical prev, Canonical fresh, double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw ParameterError("damping rate must lie in [0, 1), got " + std::to_string(beta));
  }
  if (beta == 0.0) return fresh;
  return {beta * prev.eta + (1.0 - beta) * fresh.eta,
          beta * prev.lambda + (1.0 - beta) * fresh.lambda};
}

void MessageStore::clear() {
  std::fill(eta_.begin(), eta_.end(), 0.0);
  std::fill(lambda_.begin(), lambda_.end(), 0.0);
}

double MessageStore::max_abs_difference(const MessageStore& other) const {
  if (other.size() != size()) throw DimensionError("message stores differ in size");
  double m = 0.0;
  for (std::size_t e = 0; e < size(); ++e) {
    m = std::max({m, std::abs(eta_[e] - other.eta_[e]), std::abs(lambda_[e] - other.lambda_[e])});
  }
  return m;
}

double BeliefMap::mean(PixelIndex i) const {
  return lambda_[i] > 0.0 ? eta_[i] / lambda_[i] : std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> BeliefMap::means() const {
  std::vector<double> out(size());
  for (PixelIndex i = 0; i < size(); ++i) out[i] = mean(i);
  return out;
}

Canonical belief_update(PixelIndex pixel, const MrfParams& params, const MessageStore& store,
                        const GridGraph& graph) {
  Canonical b;
  if (params.measurement_mask[pixel]) {
    b.eta = params.w_unary[pixel] * params.s[pixel];
    b.lambda = params.w_unary[pixel];
  }
  for (EdgeId e : graph.incoming(pixel)) {
    const Canonical m = store.get(e);
    b.eta += m.eta;
    b.lambda += m.lambda;
  }
  return b;
}

void write_trace(std::ostream& out, const std::vector<TraceRow>& trace) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(10);
  for (const auto& row : trace) {
    out << row.iteration << '\t' << row.max_delta_mu << '\t' << row.mean_lambda << '\t'
        << row.wall_ms << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

GbpSolver::GbpSolver(const GridGraph& graph, const MrfParams& params, SolverConfig config)
    : graph_(&graph), params_(&params), config_(std::move(config)) {
  config_.validate();
  config_.threads = resolve_threads(config_.threads);
  if (params.height != graph.height() || params.width != graph.width() ||
      params.pixel_count() != graph.node_count() || params.w_pair.size() != graph.edge_count() ||
      params.r_pair.size() != graph.edge_count() || params.beta.size() != graph.node_count()) {
    throw DimensionError("parameters do not match the graph shape");
  }
  messages_ = MessageStore(graph.edge_count());
  beliefs_ = BeliefMap(graph.height(), graph.width());
  refresh_all_beliefs();
}

void GbpSolver::reset() {
  messages_.clear();
  refresh_all_beliefs();
}

void GbpSolver::set_messages(MessageStore messages) {
  if (messages.size() != graph_->edge_count()) {
    throw DimensionError("message store does not match the graph");
  }
  messages_ = std::move(messages);
  refresh_all_beliefs();
}

void GbpSolver::set_params(const MrfParams& params) {
  if (params.pixel_count() != graph_->node_count() || params.w_pair.size() != graph_->edge_count()) {
    throw DimensionError("parameters do not match the graph shape");
  }
  params_ = &params;
  refresh_all_beliefs();
}

Canonical GbpSolver::fresh_message(EdgeId e, const BeliefMap& snapshot) const {
  const DirectedEdge& edge = graph_->edge(e);
  const Canonical belief = snapshot.get(edge.source);
  const Canonical back = messages_.get(GridGraph::reverse(e));
  return message_update(belief.eta - back.eta, belief.lambda - back.lambda, params_->w_pair[e],
                        params_->r_pair[e], config_.epsilon_cavity);
}

void GbpSolver::refresh_belief(PixelIndex i) {
  beliefs_.set(i, belief_update(i, *params_, messages_, *graph_));
}

void GbpSolver::refresh_all_beliefs() {
  for_range(0, graph_->node_count(), config_.threads,
            [&](std::size_t i) { refresh_belief(static_cast<PixelIndex>(i)); });
}

void GbpSolver::serial_sweep(Sweep direction) {
  const SweepSchedule& sched = graph_->schedule(direction);
  for (std::size_t line = 0; line < sched.line_count(); ++line) {
    for_range(sched.line_offsets[line], sched.line_offsets[line + 1], config_.threads,
              [&](std::size_t g) {
                const PixelIndex target = sched.group_targets[g];
                const double beta = params_->beta[target];
                for (std::size_t k = sched.group_offsets[g]; k < sched.group_offsets[g + 1]; ++k) {
                  const EdgeId e = sched.edges[k];
                  messages_.set(e, damp(messages_.get(e), fresh_message(e, beliefs_), beta));
                }
                refresh_belief(target);
              });
  }
}

void GbpSolver::parallel_nonlocal_step() {
  const auto edges = graph_->nonlocal_edges();
  if (edges.empty()) return;
  scratch_.resize(edges.size());
  for_range(0, edges.size(), config_.threads,
            [&](std::size_t k) { scratch_[k] = fresh_message(edges[k], beliefs_); });
  for_range(0, edges.size(), config_.threads, [&](std::size_t k) {
    const EdgeId e = edges[k];
    messages_.set(e, damp(messages_.get(e), scratch_[k], params_->beta[graph_->edge(e).target]));
  });
  refresh_all_beliefs();
}

void GbpSolver::iterate() {
  for (Sweep s : kSerialSweepOrder) serial_sweep(s);
  for (int step = 0; step < config_.nonlocal_steps; ++step) parallel_nonlocal_step();
}

namespace {

double max_mean_change(const BeliefMap& before, const BeliefMap& after) {
  double m = 0.0;
  for (PixelIndex i = 0; i < after.size(); ++i) {
    if (!after.informative(i)) continue;
    if (!before.informative(i)) return std::numeric_limits<double>::infinity();
    m = std::max(m, std::abs(after.mean(i) - before.mean(i)));
  }
  return m;
}

double mean_precision(const BeliefMap& b) {
  double sum = 0.0;
  for (double l : b.precisions()) sum += l;
  return b.size() == 0 ? 0.0 : sum / static_cast<double>(b.size());
}

SolveResult run_loop(GbpSolver& solver, const ParamsProvider* provider) {
  const SolverConfig& cfg = solver.config();
  SolveResult result;
  const bool need_delta = cfg.record_trace || cfg.early_stop_tol.has_value();
  for (int t = 1; t <= cfg.iterations; ++t) {
    if (provider) solver.set_params((*provider)(t));
    const auto start = std::chrono::steady_clock::now();
    BeliefMap before;
    if (need_delta) before = solver.beliefs();
    solver.iterate();
    result.iterations_run = t;
    if (!need_delta) continue;

    const double delta = max_mean_change(before, solver.beliefs());
    if (cfg.record_trace) {
      const auto elapsed = std::chrono::duration<double, std::milli>(
          std::chrono::steady_clock::now() - start);
      result.trace.push_back({t, delta, mean_precision(solver.beliefs()), elapsed.count()});
    }
    if (cfg.early_stop_tol && delta < *cfg.early_stop_tol) break;
  }
  result.beliefs = solver.beliefs();
  result.messages = solver.messages();
  return result;
}

}  // namespace

SolveResult GbpSolver::run() { return run_loop(*this, nullptr); }

SolveResult run_gbp(const MrfParams& params, const GridGraph& graph, const SolverConfig& config) {
  GbpSolver solver(graph, params, config);
  return solver.run();
}

SolveResult run_gbp(const ParamsProvider& provider, const GridGraph& graph,
                    const SolverConfig& config) {
  GbpSolver solver(graph, provider(1), config);
  return run_loop(solver, &provider);
}

}  // namespace gbpn
