#ifndef FCPDE_LINSOLVE_HPP
#define FCPDE_LINSOLVE_HPP

#include "fcpde/assembly.hpp"

#include <memory>
#include <stdexcept>
#include <string>

namespace fcpde {

enum class SolverBackend { SparseLU, DenseLU, BiCGSTAB };

std::string to_string(SolverBackend b);
SolverBackend solver_backend_from_string(const std::string& s);

/// Raised when a system is singular or the computed solution misses the
/// residual bound.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Factorizes a row matrix once and solves with it or its transpose.
///
/// Every solution is checked: ||A x - rhs||_inf <= 1e-10 * max(1, ||rhs||_inf).
class LinearSolver {
 public:
  explicit LinearSolver(const RowMatrix& a, SolverBackend backend = SolverBackend::SparseLU);
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& rhs) const;

  static constexpr double kResidualTolerance = 1e-10;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Eigen::VectorXd solve(const RowMatrix& a, const Eigen::VectorXd& rhs,
                      SolverBackend backend = SolverBackend::SparseLU);
Eigen::VectorXd solve_transpose(const RowMatrix& a, const Eigen::VectorXd& rhs,
                                SolverBackend backend = SolverBackend::SparseLU);

}  // namespace fcpde

#endif  // FCPDE_LINSOLVE_HPP
