#include "fcpde/verification.hpp"

#include "fcpde/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace fcpde {

Eigen::VectorXd normalized_laplacian(const Footprint& footprint) {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(footprint.size());
  const auto& offsets = footprint.offsets();
  for (Index k = 0; k < footprint.size(); ++k) {
    const auto& o = offsets[static_cast<std::size_t>(k)];
    if (std::abs(o[0]) + std::abs(o[1]) == 1) row[k] = -1.0 / (2.0 * footprint.rank());
  }
  row[footprint.center()] = 1.0;
  return row;
}

double check_stencil_recovery(const StencilFunction& stencil, const Footprint& footprint,
                              const std::vector<Field>& states) {
  const Eigen::VectorXd canonical = normalized_laplacian(footprint);
  Eigen::VectorXd row(footprint.size());
  double worst = 0.0;
  for (const Field& x : states) {
    for (Index c : x.grid.interior_cells()) {
      stencil(x, c, row);
      const double center = row[footprint.center()];
      if (!(std::abs(center) >= 1e-12)) throw std::domain_error("degenerate stencil center");
      worst = std::max(worst, (row / center - canonical).lpNorm<Eigen::Infinity>());
    }
  }
  return worst;
}

double check_stencil_recovery(const StencilModel& model, const CaseConfig& config) {
  check_compatible(model, config);
  const Dataset ds = make_dataset(config, DatasetRole::Test);
  std::vector<Field> states;
  for (const auto& s : ds.samples) states.push_back(s.clean);
  return check_stencil_recovery(stencil_function(model), model.footprint(), states);
}

double check_picard_equivalence(AlphaLaw law, const Grid& grid, const BoundaryConditions& bc, const Field& b,
                                const Eigen::VectorXd& x0, int steps) {
  const ClassicalPicard classical = classical_picard(grid, law, b, bc, x0, steps, 0.0);
  const double h2 = grid.cell_size() * grid.cell_size();
  const Field b_grid(grid, Eigen::VectorXd(-h2 * b.values));
  const Footprint fp(grid.rank(), FootprintShape::Full);
  PicardOptions opts;
  opts.depth = steps;
  opts.retain_steps = false;
  const Trajectory learned = picard_forward(alpha_stencil(law, fp), fp, b_grid, bc, x0, opts);
  double gap = 0.0;
  const std::size_t n = std::min(classical.iterates.size(), learned.states.size());
  for (std::size_t k = 0; k < n; ++k) {
    gap = std::max(gap, (classical.iterates[k] - learned.states[k]).lpNorm<Eigen::Infinity>());
  }
  return gap;
}

double check_picard_equivalence(AlphaLaw law, const Grid& grid, const BoundaryConditions& bc, int steps) {
  return check_picard_equivalence(law, grid, bc, Field(grid), initial_guess(grid, bc, 7), steps);
}

AblationResult run_optimizer_ablation(const CaseConfig& config, long budget) {
  const Dataset ds = make_dataset(config);
  const auto problems = build_problems(config, ds);
  const StencilModel init = initial_model(config);
  CaseConfig c = config;
  c.max_rounds = 1 << 20;  // the budget is the only stopping rule
  AblationResult r;
  r.budget = budget;
  TrainOptions opts;
  opts.budget = budget;
  opts.schedule = Schedule::Hybrid;
  r.hybrid = train(c, init, problems, opts);
  opts.schedule = Schedule::AdamOnly;
  r.adam = train(c, init, problems, opts);
  opts.schedule = Schedule::MomentumOnly;
  r.momentum = train(c, init, problems, opts);
  return r;
}

CaseConfig reduced_config(const CaseConfig& config) {
  CaseConfig c = config;
  const Index n = std::min<Index>(c.shape.front(), c.equation == Equation::NavierStokes ? 12 : 10);
  for (auto& s : c.shape) s = n;
  if (c.equation == Equation::Wave) c.dt = 0.4 * c.cell_size();
  c.depth = std::min(c.depth, 3);
  c.samples = c.time_dependent() ? 2 : std::min(c.samples, 2);
  c.train_frames = c.time_dependent() ? 2 : c.train_frames;
  c.test_samples = 2;
  while (MicroNetd::parameter_count(c.layers) > 120) {
    for (std::size_t k = 1; k + 1 < c.layers.size(); ++k) c.layers[k] = std::max(1, c.layers[k] - 1);
  }
  validate(c);
  return c;
}

void write_report(const std::vector<CheckRow>& rows, std::ostream& out) {
  out << "name,value,tolerance,passed\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%.6g,%.6g,", r.value, r.tolerance);
    out << r.name << buf << (r.passed ? "true" : "false") << '\n';
  }
}

}  // namespace fcpde
