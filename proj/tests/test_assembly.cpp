#include "fcpde/assembly.hpp"
#include "fcpde/picard.hpp"

#include <doctest.h>

using namespace fcpde;

namespace {

// Linear net with zero weights: every row equals the output bias.
StencilModel constant_model(int rank, const Eigen::VectorXd& row, FootprintShape shape = FootprintShape::Full) {
  const int n = static_cast<int>(row.size());
  StencilModel m = make_model(rank, {n, n}, Activation::Identity, InputMode::Values, shape, 1);
  m.net.params().setZero();
  m.net.params().tail(n) = row;
  return m;
}

Eigen::VectorXd wavy(const Grid& g, double phase) {
  Eigen::VectorXd x(g.cell_count());
  for (Index c = 0; c < x.size(); ++c) x[c] = std::sin(0.7 * g.iu(c) + 1.3 * g.jv(c) + phase);
  return x;
}

}  // namespace

TEST_CASE("a constant provider assembles the classical tridiagonal operator") {
  const Grid g = make_grid(1, {6}, 0.2, BoundaryKind::Dirichlet);
  const RowMatrix a = assemble(constant_model(1, Eigen::Vector3d(-1, 2, -1)), Field(g), BoundaryConditions(g));
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(6, 6);
  expected(0, 0) = expected(5, 5) = 1.0;
  for (int i = 1; i < 5; ++i) {
    expected(i, i - 1) = expected(i, i + 1) = -1.0;
    expected(i, i) = 2.0;
  }
  CHECK((a.dense() - expected).norm() == 0.0);
}

TEST_CASE("2D five-point operator from the cross footprint") {
  const Grid g = make_grid(2, {5, 5}, 0.25, BoundaryKind::Dirichlet);
  Eigen::VectorXd row(5);
  row << -1, -1, 4, -1, -1;
  const RowMatrix a = assemble(constant_model(2, row, FootprintShape::Cross), Field(g), BoundaryConditions(g));
  const Eigen::VectorXd x = wavy(g, 0.3);
  const Eigen::VectorXd ax = a * x;
  for (Index c = 0; c < g.cell_count(); ++c) {
    const Index i = g.iu(c), j = g.jv(c);
    const double want = g.is_interior(c) ? 4 * x[c] - x[g.index(i - 1, j)] - x[g.index(i + 1, j)] -
                                               x[g.index(i, j - 1)] - x[g.index(i, j + 1)]
                                         : x[c];
    CHECK(ax[c] == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("Neumann rows are one-sided differences and pinned rows are identities") {
  const Grid g(1, {6, 1}, 0.2, {0, 0},
               {BoundaryKind::Dirichlet, BoundaryKind::Neumann, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet});
  Eigen::VectorXd values = Eigen::VectorXd::Zero(6);
  values[0] = 0.5;
  values[5] = 0.1;
  values[3] = 2.0;
  BoundaryConditions bc(g, values);
  bc.pin(3);
  CHECK(row_kind(g, bc, 0) == RowKind::Fixed);
  CHECK(row_kind(g, bc, 3) == RowKind::Fixed);
  CHECK(row_kind(g, bc, 5) == RowKind::Neumann);
  CHECK(row_kind(g, bc, 2) == RowKind::Stencil);
  const Eigen::MatrixXd a = assemble(constant_model(1, Eigen::Vector3d(-1, 2, -1)), Field(g), bc).dense();
  CHECK(a.row(3).sum() == 1.0);
  CHECK(a(3, 3) == 1.0);
  CHECK(a(5, 5) == 1.0);
  CHECK(a(5, 4) == -1.0);
  Field b(g);
  b.values.setConstant(7.0);
  const Eigen::VectorXd rhs = assemble_rhs(b, bc);
  CHECK(rhs[0] == 0.5);
  CHECK(rhs[3] == 2.0);
  CHECK(rhs[5] == 0.1);
  CHECK(rhs[1] == 7.0);
}

TEST_CASE("state-dependent rows: operator derivatives match finite differences") {
  const Grid g = make_grid(2, {6, 5}, 0.2, BoundaryKind::Dirichlet);
  const StencilModel m = make_model(2, {5, 6, 5}, Activation::Tanh, InputMode::Values, FootprintShape::Cross, 4);
  const BoundaryConditions bc(g);
  const Field x(g, wavy(g, 0.1));
  const Eigen::VectorXd y = wavy(g, 1.7), w = wavy(g, 2.9);
  const OperatorDerivatives d = operator_derivatives(m, x, bc);
  const Eigen::VectorXd gx = apply_dAdx_transposed(d, y, w);
  const Eigen::VectorXd gt = apply_dAdtheta_transposed(d, y, w);

  const double h = 1e-6;
  for (Index c = 0; c < g.cell_count(); c += 3) {
    Field xp = x, xm = x;
    xp.values[c] += h;
    xm.values[c] -= h;
    const double fd = w.dot(assemble(m, xp, bc) * y - assemble(m, xm, bc) * y) / (2 * h);
    CHECK(gx[c] == doctest::Approx(fd).epsilon(1e-6));
  }
  for (Index k = 0; k < m.net.parameter_count(); k += 5) {
    StencilModel mp = m, mm = m;
    mp.net.params()[k] += h;
    mm.net.params()[k] -= h;
    const double fd = w.dot(assemble(mp, x, bc) * y - assemble(mm, x, bc) * y) / (2 * h);
    CHECK(gt[k] == doctest::Approx(fd).epsilon(1e-6));
  }

  Eigen::VectorXd ft = Eigen::VectorXd::Zero(m.net.parameter_count());
  Eigen::VectorXd fx = Eigen::VectorXd::Zero(g.cell_count());
  accumulate_layer_adjoint(m, x, bc, y, w, ft, fx);
  CHECK((ft - gt).norm() <= 1e-12 * std::max(1.0, gt.norm()));
  CHECK((fx - gx).norm() <= 1e-12 * std::max(1.0, gx.norm()));
}

TEST_CASE("position-aware input appends footprint coordinates") {
  const Grid g = make_grid(1, {8}, 0.1, BoundaryKind::Dirichlet);
  const int width = expected_input_size(1, FootprintShape::Full, InputMode::ValuesAndPosition);
  const StencilModel m =
      make_model(1, {width, 4, 3}, Activation::Tanh, InputMode::ValuesAndPosition, FootprintShape::Full, 2);
  const Field x(g, wavy(g, 0.0));
  const Eigen::VectorXd in = network_input(m, x, 4);
  CHECK(in.size() == width);
  CHECK(in.head(3) == gather(x, m.footprint(), 4));
}
