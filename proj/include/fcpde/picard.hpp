#ifndef FCPDE_PICARD_HPP
#define FCPDE_PICARD_HPP

#include "fcpde/assembly.hpp"
#include "fcpde/linsolve.hpp"

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

namespace fcpde {

enum class PicardMode {
  /// Exactly `depth` steps (training unroll).
  Fixed,
  /// Stop once ||x_n - x_{n-1}||_inf <= epsilon, or at the depth cap.
  Converge,
};

struct PicardOptions {
  int depth = 2;
  double epsilon = 1e-8;
  PicardMode mode = PicardMode::Fixed;
  SolverBackend backend = SolverBackend::SparseLU;
  /// Keep per-step operators and factorizations for a backward pass.
  bool retain_steps = true;
};

/// Failure inside the forward loop, tagged with the step that failed.
class PicardError : public std::runtime_error {
 public:
  PicardError(const std::string& what, int step) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

struct PicardStep {
  RowMatrix matrix;
  std::shared_ptr<const LinearSolver> solver;
};

/// Iterates x_{n+1} = A(x_n)^{-1} rhs and records every state.
struct Trajectory {
  std::vector<Eigen::VectorXd> states;
  /// residuals[n-1] = ||x_n - x_{n-1}||_inf.
  std::vector<double> residuals;
  std::vector<PicardStep> steps;
  bool converged = false;

  Index depth() const { return static_cast<Index>(states.size()) - 1; }
  const Eigen::VectorXd& final_state() const { return states.back(); }
};

/// Forward pass with an arbitrary stencil provider. `b` carries the interior
/// right-hand side; boundary rows take their values from `bc`.
Trajectory picard_forward(const StencilFunction& stencil, const Footprint& footprint,
                          const Field& b, const BoundaryConditions& bc,
                          const Eigen::VectorXd& x0, const PicardOptions& options);

Trajectory picard_forward(const StencilModel& model, const Field& b,
                          const BoundaryConditions& bc, const Eigen::VectorXd& x0,
                          const PicardOptions& options);

/// Seeded initial guess: uniform in [-amplitude, amplitude] at every cell,
/// overwritten by the prescribed value at Dirichlet and pinned cells.
Eigen::VectorXd initial_guess(const Grid& grid, const BoundaryConditions& bc, std::uint64_t seed,
                              double amplitude = 0.1);

}  // namespace fcpde

#endif  // FCPDE_PICARD_HPP
