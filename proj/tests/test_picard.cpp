#include "fcpde/datagen.hpp"
#include "fcpde/picard.hpp"

#include <doctest.h>

using namespace fcpde;

namespace {

Footprint line() { return Footprint(1, FootprintShape::Full); }

const StencilFunction kLaplacian = [](const Field&, Index, Eigen::Ref<Eigen::VectorXd> row) {
  row << -1.0, 2.0, -1.0;
};

}  // namespace

TEST_CASE("a state-independent operator converges after one step") {
  const Grid g = make_grid(1, {17}, 1.0 / 16, BoundaryKind::Dirichlet);
  Eigen::VectorXd values = Eigen::VectorXd::Zero(17);
  values[0] = 1.0;
  values[16] = 2.0;
  const BoundaryConditions bc(g, values);
  Field b(g);
  b.values.setConstant(0.01);
  PicardOptions opts;
  opts.depth = 10;
  opts.mode = PicardMode::Converge;
  const Trajectory t = picard_forward(kLaplacian, line(), b, bc, initial_guess(g, bc, 3), opts);
  CHECK(t.converged);
  CHECK(t.depth() == 2);
  CHECK(t.residuals.back() == 0.0);
  // Oracle: apply the stencil to the answer.
  const Eigen::VectorXd x = t.final_state();
  for (Index i = 1; i < 16; ++i) CHECK(2 * x[i] - x[i - 1] - x[i + 1] == doctest::Approx(0.01).epsilon(1e-10));
  CHECK(x[0] == 1.0);
  CHECK(x[16] == 2.0);
}

TEST_CASE("fixed mode runs exactly the requested depth") {
  const Grid g = make_grid(1, {9}, 0.125, BoundaryKind::Dirichlet);
  const BoundaryConditions bc(g);
  PicardOptions opts;
  opts.depth = 4;
  const Trajectory t = picard_forward(kLaplacian, line(), Field(g), bc, initial_guess(g, bc, 1), opts);
  CHECK(t.depth() == 4);
  CHECK(t.states.size() == 5);
  CHECK(t.residuals.size() == 4);
  CHECK(t.steps.size() == 4);
  opts.retain_steps = false;
  CHECK(picard_forward(kLaplacian, line(), Field(g), bc, initial_guess(g, bc, 1), opts).steps.empty());
}

TEST_CASE("converge mode on a nonlinear law stops once the step falls below epsilon") {
  const Grid g = make_grid(1, {33}, 1.0 / 32, BoundaryKind::Dirichlet);
  Eigen::VectorXd values = Eigen::VectorXd::Zero(33);
  values[32] = 1.0;
  const BoundaryConditions bc(g, values);
  const Footprint fp = line();
  PicardOptions opts;
  opts.depth = 60;
  opts.epsilon = 1e-9;
  opts.mode = PicardMode::Converge;
  const Trajectory t =
      picard_forward(alpha_stencil(AlphaLaw::OnePlusXSquared, fp), fp, Field(g), bc, initial_guess(g, bc, 2), opts);
  CHECK(t.converged);
  CHECK(t.residuals.back() <= 1e-9);
  for (std::size_t k = 0; k + 1 < t.residuals.size(); ++k) CHECK(t.residuals[k] > 1e-9);
  // Oracle: an independent Newton solve of the same discretization.
  const Field newton = solve_poisson_newton(g, AlphaLaw::OnePlusXSquared, Field(g), bc);
  CHECK((t.final_state() - newton.values).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("initial guesses are seeded, bounded, and honor prescribed cells") {
  const Grid g = make_grid(2, {6, 6}, 0.2, BoundaryKind::Dirichlet);
  Eigen::VectorXd values = Eigen::VectorXd::Constant(36, 3.0);
  BoundaryConditions bc(g, values);
  bc.pin(g.index(2, 2));
  const Eigen::VectorXd a = initial_guess(g, bc, 4), b = initial_guess(g, bc, 4), c = initial_guess(g, bc, 5);
  CHECK(a == b);
  CHECK(a != c);
  for (Index k = 0; k < 36; ++k) {
    if (!g.is_interior(k) || k == g.index(2, 2)) {
      CHECK(a[k] == 3.0);
    } else {
      CHECK(std::abs(a[k]) <= 0.1);
    }
  }
}

TEST_CASE("singular operators surface as PicardError with the failing step") {
  const Grid g = make_grid(1, {6}, 0.2, BoundaryKind::Dirichlet);
  const BoundaryConditions bc(g);
  const StencilFunction zero = [](const Field&, Index, Eigen::Ref<Eigen::VectorXd> row) { row.setZero(); };
  try {
    picard_forward(zero, line(), Field(g), bc, initial_guess(g, bc, 1), PicardOptions{});
    FAIL("expected PicardError");
  } catch (const PicardError& e) {
    CHECK(e.step() == 0);
  }
}
