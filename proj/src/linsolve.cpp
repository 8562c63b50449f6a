#include "fcpde/linsolve.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fcpde {

std::string to_string(SolverBackend b) {
  switch (b) {
    case SolverBackend::SparseLU: return "sparse-lu";
    case SolverBackend::DenseLU: return "dense-lu";
    case SolverBackend::BiCGSTAB: return "bicgstab";
  }
  return "sparse-lu";
}

SolverBackend solver_backend_from_string(const std::string& s) {
  if (s == "sparse-lu") return SolverBackend::SparseLU;
  if (s == "dense-lu") return SolverBackend::DenseLU;
  if (s == "bicgstab") return SolverBackend::BiCGSTAB;
  throw std::invalid_argument("unknown solver backend '" + s + "'");
}

using ColMajorSparse = Eigen::SparseMatrix<double, Eigen::ColMajor>;

struct LinearSolver::Impl {
  SolverBackend backend;
  ColMajorSparse a;
  ColMajorSparse at;
  Eigen::SparseLU<ColMajorSparse, Eigen::COLAMDOrdering<int>> sparse_lu;
  Eigen::PartialPivLU<Eigen::MatrixXd> dense_lu;

  void check(bool transposed, const Eigen::VectorXd& x, const Eigen::VectorXd& rhs,
             const char* what) const {
    const double bound = kResidualTolerance * std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
    double residual = std::numeric_limits<double>::infinity();
    if (x.allFinite()) {
      const Eigen::VectorXd ax = transposed ? Eigen::VectorXd(a.transpose() * x) : Eigen::VectorXd(a * x);
      residual = (ax - rhs).lpNorm<Eigen::Infinity>();
    }
    if (!(residual <= bound)) {
      std::ostringstream msg;
      msg << what << ": residual " << residual << " exceeds " << bound;
      throw SolverError(msg.str(), residual);
    }
  }

  Eigen::VectorXd bicgstab(const ColMajorSparse& m, const Eigen::VectorXd& rhs) const {
    Eigen::BiCGSTAB<ColMajorSparse, Eigen::IdentityPreconditioner> solver;
    solver.setTolerance(1e-12);
    solver.setMaxIterations(10 * m.rows());
    solver.compute(m);
    return solver.solve(rhs);
  }
};

LinearSolver::LinearSolver(const RowMatrix& a, SolverBackend backend)
    : impl_(std::make_unique<Impl>()) {
  impl_->backend = backend;
  impl_->a = ColMajorSparse(a.sparse());
  switch (backend) {
    case SolverBackend::SparseLU:
      impl_->sparse_lu.compute(impl_->a);
      if (impl_->sparse_lu.info() != Eigen::Success) {
        throw SolverError("sparse LU factorization failed: " + impl_->sparse_lu.lastErrorMessage(),
                          std::numeric_limits<double>::infinity());
      }
      break;
    case SolverBackend::DenseLU: {
      const Eigen::MatrixXd dense(impl_->a);
      impl_->dense_lu.compute(dense);
      break;
    }
    case SolverBackend::BiCGSTAB:
      impl_->at = impl_->a.transpose();
      break;
  }
}

LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != impl_->a.rows()) throw std::invalid_argument("rhs length does not match system");
  Eigen::VectorXd x;
  switch (impl_->backend) {
    case SolverBackend::SparseLU: x = impl_->sparse_lu.solve(rhs); break;
    case SolverBackend::DenseLU: x = impl_->dense_lu.solve(rhs); break;
    case SolverBackend::BiCGSTAB: x = impl_->bicgstab(impl_->a, rhs); break;
  }
  impl_->check(false, x, rhs, "solve");
  return x;
}

Eigen::VectorXd LinearSolver::solve_transpose(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != impl_->a.rows()) throw std::invalid_argument("rhs length does not match system");
  Eigen::VectorXd x;
  switch (impl_->backend) {
    case SolverBackend::SparseLU: x = impl_->sparse_lu.transpose().solve(rhs); break;
    case SolverBackend::DenseLU: x = impl_->dense_lu.transpose().solve(rhs); break;
    case SolverBackend::BiCGSTAB: x = impl_->bicgstab(impl_->at, rhs); break;
  }
  impl_->check(true, x, rhs, "transpose solve");
  return x;
}

Eigen::VectorXd solve(const RowMatrix& a, const Eigen::VectorXd& rhs, SolverBackend backend) {
  return LinearSolver(a, backend).solve(rhs);
}

Eigen::VectorXd solve_transpose(const RowMatrix& a, const Eigen::VectorXd& rhs,
                                SolverBackend backend) {
  return LinearSolver(a, backend).solve_transpose(rhs);
}

}  // namespace fcpde
