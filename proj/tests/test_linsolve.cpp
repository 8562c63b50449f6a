#include "fcpde/linsolve.hpp"

#include <doctest.h>

#include <random>

using namespace fcpde;

namespace {

// Random diagonally dominant nonsymmetric stencil rows around a 2D grid.
RowMatrix random_operator(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Footprint fp(2, FootprintShape::Full);
  const StencilFunction rows = [&](const Field&, Index, Eigen::Ref<Eigen::VectorXd> row) {
    for (Index k = 0; k < row.size(); ++k) row[k] = u(rng);
    row[fp.center()] = 10.0 + u(rng);
  };
  return assemble(rows, fp, Field(g), BoundaryConditions(g));
}

Eigen::VectorXd rhs_for(Index n) {
  Eigen::VectorXd b(n);
  for (Index k = 0; k < n; ++k) b[k] = std::cos(0.37 * static_cast<double>(k));
  return b;
}

}  // namespace

TEST_CASE("every backend matches a dense full-pivot oracle") {
  const Grid g = make_grid(2, {7, 6}, 0.1, BoundaryKind::Dirichlet);
  const RowMatrix a = random_operator(g, 5);
  const Eigen::VectorXd b = rhs_for(a.size());
  const Eigen::MatrixXd dense = a.dense();
  const Eigen::VectorXd x_ref = dense.fullPivLu().solve(b);
  const Eigen::VectorXd xt_ref = dense.transpose().fullPivLu().solve(b);
  for (SolverBackend backend : {SolverBackend::SparseLU, SolverBackend::DenseLU, SolverBackend::BiCGSTAB}) {
    CAPTURE(to_string(backend));
    const LinearSolver s(a, backend);
    CHECK((s.solve(b) - x_ref).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((s.solve_transpose(b) - xt_ref).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("transpose solve satisfies the adjoint identity") {
  const Grid g = make_grid(2, {6, 6}, 0.1, BoundaryKind::Dirichlet);
  const RowMatrix a = random_operator(g, 9);
  const Eigen::VectorXd b = rhs_for(a.size()), c = rhs_for(a.size()).reverse();
  // c . A^{-1} b == (A^{-T} c) . b
  CHECK(c.dot(solve(a, b)) == doctest::Approx(solve_transpose(a, c).dot(b)).epsilon(1e-12));
}

TEST_CASE("singular systems raise SolverError") {
  const Grid g = make_grid(1, {6}, 0.1, BoundaryKind::Dirichlet);
  const Footprint fp(1, FootprintShape::Full);
  const StencilFunction zero = [](const Field&, Index, Eigen::Ref<Eigen::VectorXd> row) { row.setZero(); };
  const RowMatrix a = assemble(zero, fp, Field(g), BoundaryConditions(g));
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(6);
  for (SolverBackend backend : {SolverBackend::SparseLU, SolverBackend::DenseLU, SolverBackend::BiCGSTAB}) {
    CAPTURE(to_string(backend));
    CHECK_THROWS_AS(solve(a, b, backend), SolverError);
  }
}

TEST_CASE("backend names round-trip") {
  for (SolverBackend backend : {SolverBackend::SparseLU, SolverBackend::DenseLU, SolverBackend::BiCGSTAB}) {
    CHECK(solver_backend_from_string(to_string(backend)) == backend);
  }
  CHECK_THROWS(solver_backend_from_string("cholesky"));
}
