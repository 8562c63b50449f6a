#include "fcpde/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fcpde {

std::vector<Eigen::VectorXd> backward_by_layer(const StencilModel& model,
                                               const BoundaryConditions& bc,
                                               const Trajectory& trajectory,
                                               const Eigen::VectorXd& dL_dxN) {
  const Index depth = trajectory.depth();
  if (static_cast<Index>(trajectory.steps.size()) != depth) {
    throw std::invalid_argument("trajectory was computed without retained steps");
  }
  const Grid& grid = trajectory.steps.front().matrix.grid();
  if (dL_dxN.size() != grid.cell_count()) throw std::invalid_argument("dL/dx_N length does not match grid");

  std::vector<Eigen::VectorXd> layers(static_cast<std::size_t>(depth),
                                      Eigen::VectorXd::Zero(model.net.parameter_count()));
  Eigen::VectorXd w = dL_dxN;
  for (Index i = depth - 1; i >= 0; --i) {
    const auto& step = trajectory.steps[static_cast<std::size_t>(i)];
    Eigen::VectorXd lambda;
    try {
      lambda = step.solver->solve_transpose(w);
    } catch (const SolverError& e) {
      throw PicardError("adjoint solve failed at layer " + std::to_string(i) + ": " + e.what(),
                        static_cast<int>(i));
    }
    // d x_{i+1} = -A_i^{-1} (dA_i) x_{i+1}
    const Eigen::VectorXd weight = -lambda;
    Eigen::VectorXd w_prev = Eigen::VectorXd::Zero(grid.cell_count());
    accumulate_layer_adjoint(model, Field(grid, trajectory.states[static_cast<std::size_t>(i)]), bc,
                             trajectory.states[static_cast<std::size_t>(i) + 1], weight,
                             layers[static_cast<std::size_t>(i)], w_prev);
    // x_0 is a constant, so the final w_prev is discarded.
    w = std::move(w_prev);
  }
  return layers;
}

Eigen::VectorXd backward(const StencilModel& model, const BoundaryConditions& bc,
                         const Trajectory& trajectory, const Eigen::VectorXd& dL_dxN) {
  const auto layers = backward_by_layer(model, bc, trajectory, dL_dxN);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(model.net.parameter_count());
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) g += *it;
  return g;
}

ObjectiveValue evaluate_objective(const StencilModel& model, const std::vector<Problem>& problems,
                                  const PicardOptions& options, bool with_gradient) {
  PicardOptions opts = options;
  opts.retain_steps = with_gradient;
  std::vector<Trajectory> trajs;
  std::vector<Eigen::VectorXd> preds;
  std::vector<Eigen::VectorXd> targets;
  std::vector<Eigen::VectorXd> masks;
  trajs.reserve(problems.size());
  for (const auto& p : problems) {
    trajs.push_back(picard_forward(model, p.b, p.bc, p.x0, opts));
    preds.push_back(trajs.back().final_state());
    targets.push_back(p.target);
    masks.push_back(p.mask);
  }
  const MseResult mse = loss_mse(preds, targets, masks);
  ObjectiveValue out;
  out.loss = mse.value;
  if (with_gradient) {
    out.gradient = Eigen::VectorXd::Zero(model.net.parameter_count());
    for (std::size_t k = 0; k < problems.size(); ++k) {
      out.gradient += backward(model, problems[k].bc, trajs[k], mse.gradients[k]);
    }
  }
  return out;
}

GradCheckReport grad_check(const StencilModel& model, const std::vector<Problem>& problems,
                           const PicardOptions& options, double h) {
  GradCheckReport report;
  report.adjoint = evaluate_objective(model, problems, options, true).gradient;
  report.finite_difference.resize(model.net.parameter_count());
  StencilModel probe = model;
  for (Index k = 0; k < model.net.parameter_count(); ++k) {
    const double orig = model.net.params()[k];
    probe.net.params()[k] = orig + h;
    const double up = evaluate_objective(probe, problems, options, false).loss;
    probe.net.params()[k] = orig - h;
    const double down = evaluate_objective(probe, problems, options, false).loss;
    probe.net.params()[k] = orig;
    report.finite_difference[k] = (up - down) / (2.0 * h);
    const double err = std::abs(report.adjoint[k] - report.finite_difference[k]) /
                       std::max(1.0, std::abs(report.finite_difference[k]));
    report.max_relative_error = std::max(report.max_relative_error, err);
  }
  return report;
}

}  // namespace fcpde
