#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <optional>
#include <vector>

#include "gbpn/grid_graph.hpp"
#include "gbpn/potentials.hpp"

namespace gbpn {

// Information form of the MRF energy E(x) = x'Jx/2 - eta'x (+ const).
struct InformationSystem {
  Eigen::SparseMatrix<double> J;
  Eigen::VectorXd eta;
  // Per-pixel id of the connected component (through nonzero couplings)
  // and whether each component has at least one positive diagonal excess.
  std::vector<int> component;
  std::vector<bool> component_anchored;

  Eigen::Index size() const { return eta.size(); }
};

// Pixels above which solve_exact switches from sparse Cholesky to PCG.
inline constexpr Eigen::Index kDirectSolveLimit = 16384;
// Pixels above which exact_marginal_precisions refuses to run.
inline constexpr Eigen::Index kDenseInverseLimit = 4096;

// Each undirected edge contributes one quadratic term; the orientation with
// the lower row-major pixel first is the one that is read.
InformationSystem assemble_system(const MrfParams& params, const GridGraph& graph);

// First pixel of a component with no measurement, if any.
std::optional<PixelIndex> find_unanchored_pixel(const InformationSystem& sys);

// Returns mu with ||J mu - eta||_inf <= tol * (1 + ||eta||_inf). Throws
// SingularSystemError for unanchored or indefinite systems.
Eigen::VectorXd solve_exact(const InformationSystem& sys, double tol = 1e-10);

// 1 / (J^-1)_ii via a dense inverse (N <= kDenseInverseLimit).
Eigen::VectorXd exact_marginal_precisions(const InformationSystem& sys);

// E(x) = x'Jx/2 - eta'x.
double quadratic_energy(const InformationSystem& sys, const Eigen::VectorXd& x);

}  // namespace gbpn
