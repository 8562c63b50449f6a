#ifndef FCPDE_ADJOINT_HPP
#define FCPDE_ADJOINT_HPP

#include "fcpde/loss.hpp"
#include "fcpde/picard.hpp"

#include <vector>

namespace fcpde {

/// Gradient of a scalar loss of x_N with respect to the network parameters,
/// accumulated reverse-chronologically with one transpose solve per layer.
Eigen::VectorXd backward(const StencilModel& model, const BoundaryConditions& bc,
                         const Trajectory& trajectory, const Eigen::VectorXd& dL_dxN);

/// Same gradient, split into the contribution of each Picard layer
/// (index i is the layer that produced x_{i+1}).
std::vector<Eigen::VectorXd> backward_by_layer(const StencilModel& model,
                                               const BoundaryConditions& bc,
                                               const Trajectory& trajectory,
                                               const Eigen::VectorXd& dL_dxN);

/// One observed solution together with everything needed to reproduce the
/// forward pass that predicts it.
struct Problem {
  Field b;
  BoundaryConditions bc;
  Eigen::VectorXd x0;
  Eigen::VectorXd target;
  /// Empty means every cell is observed.
  Eigen::VectorXd mask;
};

struct ObjectiveValue {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

/// MSE of the depth-N Picard predictions over all problems, with its adjoint
/// gradient when `with_gradient` is set.
ObjectiveValue evaluate_objective(const StencilModel& model, const std::vector<Problem>& problems,
                                  const PicardOptions& options, bool with_gradient = true);

struct GradCheckReport {
  double max_relative_error = 0.0;
  Eigen::VectorXd adjoint;
  Eigen::VectorXd finite_difference;
};

/// Compares the adjoint gradient against central differences over every
/// parameter: max_k |g_adj - g_fd| / max(1, |g_fd|).
GradCheckReport grad_check(const StencilModel& model, const std::vector<Problem>& problems,
                           const PicardOptions& options, double h);

}  // namespace fcpde

#endif  // FCPDE_ADJOINT_HPP
