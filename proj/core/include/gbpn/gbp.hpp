#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "gbpn/grid_graph.hpp"
#include "gbpn/potentials.hpp"

namespace gbpn {

// Scalar Gaussian in canonical (information) form: density proportional to
// exp(-lambda * x^2 / 2 + eta * x). lambda == 0 is the vacuous Gaussian.
struct Canonical {
  double eta = 0.0;
  double lambda = 0.0;
  friend bool operator==(const Canonical&, const Canonical&) = default;
};

inline constexpr double kDefaultCavityEpsilon = 1e-12;

struct SolverConfig {
  int iterations = 5;         // outer iterations
  int nonlocal_steps = 1;     // parallel non-local steps per outer iteration
  double epsilon_cavity = kDefaultCavityEpsilon;
  std::optional<double> early_stop_tol;
  bool record_trace = false;
  int threads = 1;            // <= 0 means every hardware thread

  void validate() const;
};

// Message from a cavity belief across a pairwise potential with weight w and
// residual r (target minus source): mean mu_cav + r, variance 1/lambda_cav + 1/w.
// Cavities with precision <= epsilon send the vacuous message.
Canonical message_update(double cavity_eta, double cavity_lambda, double w, double r,
                         double epsilon_cavity = kDefaultCavityEpsilon);

// Convex blend beta * prev + (1 - beta) * fresh of both canonical parameters.
Canonical damp(Canonical prev, Canonical fresh, double beta);

// Canonical messages, one per directed edge of a GridGraph.
class MessageStore {
 public:
  MessageStore() = default;
  explicit MessageStore(std::size_t edge_count) : eta_(edge_count, 0.0), lambda_(edge_count, 0.0) {}

  std::size_t size() const { return eta_.size(); }
  Canonical get(EdgeId e) const { return {eta_[e], lambda_[e]}; }
  void set(EdgeId e, Canonical m) {
    eta_[e] = m.eta;
    lambda_[e] = m.lambda;
  }
  void clear();

  const std::vector<double>& eta() const { return eta_; }
  const std::vector<double>& lambda() const { return lambda_; }

  // Largest absolute change of either parameter over all edges.
  double max_abs_difference(const MessageStore& other) const;

  friend bool operator==(const MessageStore&, const MessageStore&) = default;

 private:
  std::vector<double> eta_;
  std::vector<double> lambda_;
};

// Per-pixel belief in canonical form; mean = eta / lambda where lambda > 0.
class BeliefMap {
 public:
  BeliefMap() = default;
  BeliefMap(int height, int width)
      : height_(height), width_(width),
        eta_(static_cast<std::size_t>(height) * width, 0.0),
        lambda_(static_cast<std::size_t>(height) * width, 0.0) {}

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return eta_.size(); }

  Canonical get(PixelIndex i) const { return {eta_[i], lambda_[i]}; }
  void set(PixelIndex i, Canonical b) {
    eta_[i] = b.eta;
    lambda_[i] = b.lambda;
  }
  bool informative(PixelIndex i) const { return lambda_[i] > 0.0; }
  // NaN where the belief carries no information.
  double mean(PixelIndex i) const;
  double precision(PixelIndex i) const { return lambda_[i]; }

  std::vector<double> means() const;
  const std::vector<double>& precisions() const { return lambda_; }
  const std::vector<double>& etas() const { return eta_; }

  friend bool operator==(const BeliefMap&, const BeliefMap&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> eta_;
  std::vector<double> lambda_;
};

// Belief of one pixel: unary evidence plus every stored incoming message,
// summed in ascending edge-id order.
Canonical belief_update(PixelIndex pixel, const MrfParams& params, const MessageStore& store,
                        const GridGraph& graph);

struct TraceRow {
  int iteration = 0;
  double max_delta_mu = 0.0;
  double mean_lambda = 0.0;
  double wall_ms = 0.0;
};

// Tab-separated: iteration, max|dmu|, mean lambda, wall-clock ms.
void write_trace(std::ostream& out, const std::vector<TraceRow>& trace);

struct SolveResult {
  BeliefMap beliefs;
  MessageStore messages;
  std::vector<TraceRow> trace;
  int iterations_run = 0;
};

// Supplies the parameters used by each outer iteration (1-based). A static
// MRF returns the same object every time.
using ParamsProvider = std::function<const MrfParams&(int iteration)>;

// Owns the mutable state of one inference run: every stored message and the
// beliefs derived from them. Beliefs are kept consistent with the messages:
// whenever messages into a pixel change, its belief is recomputed.
class GbpSolver {
 public:
  GbpSolver(const GridGraph& graph, const MrfParams& params, SolverConfig config = {});

  // Zeroes every message and recomputes beliefs from the unary terms.
  void reset();
  // Replaces the message state (e.g. a converged state) and refreshes beliefs.
  void set_messages(MessageStore messages);
  // Swaps in new parameters for subsequent updates and refreshes beliefs.
  void set_params(const MrfParams& params);

  // One directional pass. Lines are processed in order; each target's
  // incoming messages of this direction are recomputed from the source
  // cavities, damped against the stored message, and the target belief is
  // refreshed before the next line starts.
  void serial_sweep(Sweep direction);

  // Jacobi update of every non-local edge from one belief snapshot, followed
  // by a single refresh of all beliefs.
  void parallel_nonlocal_step();

  // The four serial sweeps (LR, TB, RL, BT) then nonlocal_steps parallel steps.
  void iterate();

  // Runs config.iterations outer iterations from the current state.
  SolveResult run();

  const BeliefMap& beliefs() const { return beliefs_; }
  const MessageStore& messages() const { return messages_; }
  const GridGraph& graph() const { return *graph_; }
  const MrfParams& params() const { return *params_; }
  const SolverConfig& config() const { return config_; }

 private:
  Canonical fresh_message(EdgeId e, const BeliefMap& snapshot) const;
  void refresh_belief(PixelIndex i);
  void refresh_all_beliefs();

  const GridGraph* graph_;
  const MrfParams* params_;
  SolverConfig config_;
  MessageStore messages_;
  BeliefMap beliefs_;
  std::vector<Canonical> scratch_;
};

// Algorithm entry point: zero messages, then the outer iteration loop.
SolveResult run_gbp(const MrfParams& params, const GridGraph& graph, const SolverConfig& config);

// Same schedule with parameters re-read from `provider` before every outer
// iteration. The provider must return parameters shaped for `graph`.
SolveResult run_gbp(const ParamsProvider& provider, const GridGraph& graph,
                    const SolverConfig& config);

}  // namespace gbpn
