#include "gbpn/oracle.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <numeric>
#include <string>

#include "gbpn/error.hpp"

namespace gbpn {

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

double residual_inf(const InformationSystem& sys, const Eigen::VectorXd& mu) {
  return (sys.J * mu - sys.eta).lpNorm<Eigen::Infinity>();
}

[[noreturn]] void throw_unanchored(const InformationSystem& sys, PixelIndex pixel) {
  const int comp = sys.component[pixel];
  const auto members = std::count(sys.component.begin(), sys.component.end(), comp);
  throw SingularSystemError("information matrix is singular: component of " +
                            std::to_string(members) + " pixel(s) containing pixel " +
                            std::to_string(pixel) + " has no measurement");
}

}  // namespace

InformationSystem assemble_system(const MrfParams& params, const GridGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  if (params.pixel_count() != graph.node_count() || params.w_pair.size() != graph.edge_count()) {
    throw DimensionError("parameters do not match the graph shape");
  }

  InformationSystem sys;
  sys.eta = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.edge_count() + static_cast<std::size_t>(n));

  for (Eigen::Index i = 0; i < n; ++i) {
    if (params.measurement_mask[i]) {
      diag[i] = params.w_unary[i];
      sys.eta[i] = params.w_unary[i] * params.s[i];
    }
  }

  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);

  // Edge 2k + 1 runs b -> a with a < b; its potential is w (x_a - x_b - r)^2 / 2.
  for (EdgeId e = 1; e < graph.edge_count(); e += 2) {
    const PixelIndex a = graph.edge(e).target;
    const PixelIndex b = graph.edge(e).source;
    const double w = params.w_pair[e];
    const double r = params.r_pair[e];
    diag[a] += w;
    diag[b] += w;
    triplets.emplace_back(a, b, -w);
    triplets.emplace_back(b, a, -w);
    sys.eta[a] += w * r;
    sys.eta[b] -= w * r;
    if (w != 0.0) parent[find_root(parent, a)] = find_root(parent, b);
  }
  for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(i, i, diag[i]);

  sys.J.resize(n, n);
  sys.J.setFromTriplets(triplets.begin(), triplets.end());
  sys.J.makeCompressed();

  // Label components in order of their first pixel.
  sys.component.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int root = find_root(parent, static_cast<int>(i));
    if (label[root] < 0) label[root] = next++;
    sys.component[i] = label[root];
  }
  sys.component_anchored.assign(static_cast<std::size_t>(next), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (params.measurement_mask[i] && params.w_unary[i] > 0) {
      sys.component_anchored[sys.component[i]] = true;
    }
  }
  return sys;
}

std::optional<PixelIndex> find_unanchored_pixel(const InformationSystem& sys) {
  for (std::size_t i = 0; i < sys.component.size(); ++i) {
    if (!sys.component_anchored[sys.component[i]]) return static_cast<PixelIndex>(i);
  }
  return std::nullopt;
}

Eigen::VectorXd solve_exact(const InformationSystem& sys, double tol) {
  if (auto p = find_unanchored_pixel(sys)) throw_unanchored(sys, *p);
  const double bound = tol * (1.0 + sys.eta.lpNorm<Eigen::Infinity>());

  Eigen::VectorXd mu;
  if (sys.size() <= kDirectSolveLimit) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(sys.J);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
      throw SingularSystemError("information matrix is not positive definite");
    }
    mu = ldlt.solve(sys.eta);
    // A couple of refinement steps absorb badly scaled weights.
    for (int step = 0; step < 3 && residual_inf(sys, mu) > bound; ++step) {
      mu += ldlt.solve(sys.eta - sys.J * mu);
    }
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double>>
        cg;
    cg.setTolerance(tol * 1e-3);
    cg.setMaxIterations(20 * static_cast<int>(sys.size()));
    cg.compute(sys.J);
    if (cg.info() != Eigen::Success) {
      throw SingularSystemError("preconditioner construction failed");
    }
    mu = cg.solve(sys.eta);
    for (int restart = 0; restart < 5 && residual_inf(sys, mu) > bound; ++restart) {
      mu = cg.solveWithGuess(sys.eta, mu);
    }
  }
  if (!mu.allFinite() || residual_inf(sys, mu) > bound) {
    throw SingularSystemError("exact solve did not reach residual " + std::to_string(bound));
  }
  return mu;
}

Eigen::VectorXd exact_marginal_precisions(const InformationSystem& sys) {
  if (sys.size() > kDenseInverseLimit) {
    throw DimensionError("exact marginals need N <= " + std::to_string(kDenseInverseLimit) +
                         ", got " + std::to_string(sys.size()));
  }
  if (auto p = find_unanchored_pixel(sys)) throw_unanchored(sys, *p);
  const Eigen::MatrixXd dense(sys.J);
  Eigen::LLT<Eigen::MatrixXd> llt(dense);
  if (llt.info() != Eigen::Success) {
    throw SingularSystemError("information matrix is not positive definite");
  }
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(sys.size(), sys.size()));
  return cov.diagonal().cwiseInverse();
}

double quadratic_energy(const InformationSystem& sys, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(sys.J * x) - sys.eta.dot(x);
}

}  // namespace gbpn
