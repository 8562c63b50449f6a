#include "fcpde/picard.hpp"

#include <random>
#include <string>

namespace fcpde {

Trajectory picard_forward(const StencilFunction& stencil, const Footprint& footprint,
                          const Field& b, const BoundaryConditions& bc,
                          const Eigen::VectorXd& x0, const PicardOptions& options) {
  if (options.depth < 1) throw std::invalid_argument("Picard depth must be at least 1");
  if (!(options.epsilon > 0.0)) throw std::invalid_argument("Picard epsilon must be positive");
  const Grid& grid = b.grid;
  if (x0.size() != grid.cell_count()) throw std::invalid_argument("initial guess does not match grid");

  const Eigen::VectorXd rhs = assemble_rhs(b, bc);
  Trajectory traj;
  traj.states.push_back(x0);
  for (int n = 0; n < options.depth; ++n) {
    const Field x(grid, traj.states.back());
    if (!x.all_finite()) throw PicardError("non-finite iterate before step " + std::to_string(n), n);
    RowMatrix a = assemble(stencil, footprint, x, bc);
    std::shared_ptr<const LinearSolver> solver;
    Eigen::VectorXd next;
    try {
      solver = std::make_shared<const LinearSolver>(a, options.backend);
      next = solver->solve(rhs);
    } catch (const SolverError& e) {
      throw PicardError("linear solve failed at Picard step " + std::to_string(n) + ": " + e.what(), n);
    }
    traj.residuals.push_back((next - traj.states.back()).lpNorm<Eigen::Infinity>());
    traj.states.push_back(std::move(next));
    if (options.retain_steps) traj.steps.push_back({std::move(a), std::move(solver)});
    if (options.mode == PicardMode::Converge && traj.residuals.back() <= options.epsilon) {
      traj.converged = true;
      break;
    }
  }
  if (options.mode == PicardMode::Fixed) {
    traj.converged = traj.residuals.back() <= options.epsilon;
  }
  return traj;
}

Trajectory picard_forward(const StencilModel& model, const Field& b,
                          const BoundaryConditions& bc, const Eigen::VectorXd& x0,
                          const PicardOptions& options) {
  if (model.rank != b.grid.rank()) throw std::invalid_argument("model rank does not match grid");
  return picard_forward(stencil_function(model), model.footprint(), b, bc, x0, options);
}

Eigen::VectorXd initial_guess(const Grid& grid, const BoundaryConditions& bc, std::uint64_t seed,
                              double amplitude) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd x(grid.cell_count());
  for (Index c = 0; c < grid.cell_count(); ++c) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    x[c] = amplitude * (2.0 * u - 1.0);
    if (row_kind(grid, bc, c) == RowKind::Fixed) x[c] = bc.values[c];
  }
  return x;
}

}  // namespace fcpde
