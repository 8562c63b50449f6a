// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.
#include "fcpde/experiment.hpp"
#include "fcpde/trainer.hpp"
#include "fcpde/verification.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

using namespace fcpde;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Evaluation caps for the expensive 2D cases keep the whole suite inside its
// time budget on one core; 1D cases run the full default schedule.
constexpr long kBudgetCubic = 10000;
constexpr long kBudgetSine2D = 3000;
constexpr long kBudgetHelmholtz = 6000;
constexpr long kBudgetWave = 1500;
constexpr long kBudgetFluid = 3000;
constexpr long kBudgetAblation = 4000;

struct Check {
  std::string name;
  double value;
  double tolerance;
  bool passed() const { return value <= tolerance; }
};

struct Criterion {
  int id;
  std::string title;
  std::vector<Check> checks;
  std::string note;
  double seconds = 0.0;
  bool passed() const {
    for (const auto& c : checks) {
      if (!c.passed()) return false;
    }
    return !checks.empty();
  }
};

struct Trained {
  TrainResult result;
  Evaluation eval;
};

// Diagnostic only: test MSE after exactly the training depth instead of at
// the converged fixed point.
double unrolled_test_mse(const StencilModel& model, const CaseConfig& config) {
  const Dataset ds = make_dataset(config, DatasetRole::Test);
  PicardOptions opts = training_options(config);
  opts.retain_steps = false;
  double sum = 0.0;
  for (std::size_t k = 0; k < ds.samples.size(); ++k) {
    const Sample& s = ds.samples[k];
    try {
      const Eigen::VectorXd x0 = initial_guess(ds.grid, s.bc, substream(config.seed, "test-x0", k));
      const Eigen::VectorXd x = picard_forward(model, s.b, s.bc, x0, opts).final_state();
      sum += (x - s.clean.values).squaredNorm() / static_cast<double>(x.size());
    } catch (const PicardError&) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return sum / static_cast<double>(ds.samples.size());
}

Trained train_and_eval(const CaseConfig& config, long budget = -1) {
  TrainOptions o;
  o.budget = budget;
  TrainResult r = train(config, make_dataset(config), o);
  Evaluation ev = evaluate(r.model, config);
  std::printf("    %-22s train loss %.3e (from %.3e, %ld evals, %d rounds)  test MSE %.3e", config.tag().c_str(),
              r.loss, r.initial_loss, r.evaluations, r.rounds, ev.mean_mse);
  if (!config.time_dependent()) std::printf("  [at training depth %.3e]", unrolled_test_mse(r.model, config));
  std::printf("\n");
  std::fflush(stdout);
  return {std::move(r), std::move(ev)};
}

Criterion adjoint_correctness() {
  Criterion c{1, "adjoint gradients match central differences on every family", {}, ""};
  double worst = 0.0;
  for (int e = 0; e <= static_cast<int>(Equation::NavierStokes); ++e) {
    const CaseConfig cfg = reduced_config(preset(static_cast<Equation>(e)));
    const auto problems = build_problems(cfg, make_dataset(cfg));
    const GradCheckReport r = grad_check(initial_model(cfg), problems, training_options(cfg), 1e-5);
    std::printf("    %-22s max relative error %.3e\n", cfg.tag().c_str(), r.max_relative_error);
    worst = std::max(worst, r.max_relative_error);
  }
  c.checks.push_back({"max relative error", worst, 1e-5});
  return c;
}

Criterion poisson_linear() {
  Criterion c{2, "1D linear Poisson, 128 cells, 31 parameters", {}, ""};
  const Trained t = train_and_eval(preset(Equation::Poisson1DConstant));
  c.checks.push_back({"test MSE", t.eval.mean_mse, 1e-8});
  return c;
}

Criterion poisson_neumann() {
  Criterion c{3, "zero right-hand side with a Neumann side", {}, ""};
  const CaseConfig cfg = preset(Equation::Poisson1DNeumann);
  const Trained t = train_and_eval(cfg);
  c.checks.push_back({"test MSE", t.eval.mean_mse, 1e-10});
  double dev = std::numeric_limits<double>::infinity();
  try {
    dev = check_stencil_recovery(t.result.model, cfg);
  } catch (const std::domain_error&) {
  }
  c.checks.push_back({"stencil deviation", dev, 1e-3});
  return c;
}

Criterion poisson_sine() {
  Criterion c{4, "sine targets, clean and noisy", {}, ""};
  CaseConfig cfg = preset(Equation::Poisson1DSine);
  c.checks.push_back({"clean test MSE", train_and_eval(cfg).eval.mean_mse, 5e-3});
  cfg.noise = 0.15;
  c.checks.push_back({"noise 0.15 test MSE", train_and_eval(cfg).eval.mean_mse, 5e-3});
  cfg.noise = 0.35;
  c.checks.push_back({"noise 0.35 test MSE", train_and_eval(cfg).eval.mean_mse, 1e-1});
  return c;
}

Criterion poisson_varying() {
  Criterion c{5, "spatially varying coefficient 1+|pi p|", {}, ""};
  c.checks.push_back({"test MSE", train_and_eval(preset(Equation::Poisson1DVarying)).eval.mean_mse, 1e-4});
  return c;
}

Criterion poisson_nonlinear() {
  Criterion c{6, "nonlinear coefficient 1+|x|+sin(0.001|x|), depth 5", {}, ""};
  CaseConfig cfg = preset(Equation::Poisson1DNonlinear);
  const Trained t = train_and_eval(cfg);
  c.checks.push_back({"test MSE", t.eval.mean_mse, 1e-3});
  cfg.epsilon = 1e-6;
  cfg.max_steps = 20;
  const Evaluation strict = evaluate(t.result.model, cfg);
  double worst = 0.0;
  for (const auto& test : strict.tests) worst = std::max(worst, test.converged ? test.final_residual : std::numeric_limits<double>::infinity());
  c.checks.push_back({"final step within 20 iterations", worst, 1e-6});
  return c;
}

Criterion poisson_2d() {
  Criterion c{7, "2D Poisson on 32x32, cubic and sine targets", {}, ""};
  c.checks.push_back({"cubic test MSE", train_and_eval(preset(Equation::Poisson2DCubic), kBudgetCubic).eval.mean_mse, 1e-6});
  c.checks.push_back({"sine test MSE", train_and_eval(preset(Equation::Poisson2DSine), kBudgetSine2D).eval.mean_mse, 2e-2});
  c.note = "evaluation budgets " + std::to_string(kBudgetCubic) + " / " + std::to_string(kBudgetSine2D);
  return c;
}

Criterion helmholtz() {
  Criterion c{8, "Helmholtz, both boundary laws", {}, ""};
  c.checks.push_back(
      {"reciprocal test MSE", train_and_eval(preset(Equation::HelmholtzReciprocal), kBudgetHelmholtz).eval.mean_mse, 1e-8});
  c.checks.push_back(
      {"sine test MSE", train_and_eval(preset(Equation::HelmholtzSine), kBudgetHelmholtz).eval.mean_mse, 1e-8});
  c.note = "evaluation budget " + std::to_string(kBudgetHelmholtz) + " each";
  return c;
}

Criterion wave() {
  Criterion c{9, "wave equation 49x49, 42 rollout frames", {}, ""};
  const CaseConfig cfg = preset(Equation::Wave);
  c.checks.push_back({"rollout MSE", train_and_eval(cfg, kBudgetWave).eval.mean_mse, 5e-3});
  c.note = "evaluation budget " + std::to_string(kBudgetWave);
  return c;
}

Criterion fluid() {
  Criterion c{10, "Navier-Stokes projection 32x32, 50 rollout frames", {}, ""};
  const Trained t = train_and_eval(preset(Equation::NavierStokes), kBudgetFluid);
  c.checks.push_back({"rollout MSE", t.eval.mean_mse, 1e-3});
  c.checks.push_back({"classical divergence", t.eval.classical_divergence, 1e-8});
  c.note = "evaluation budget " + std::to_string(kBudgetFluid);
  return c;
}

Criterion oracle_equivalence() {
  Criterion c{11, "learned-operator Picard equals classical Picard", {}, ""};
  const Grid g = make_grid(1, {32}, 1.0 / 31, BoundaryKind::Dirichlet);
  Eigen::VectorXd values = Eigen::VectorXd::Zero(32);
  values[0] = 0.7;
  values[31] = 2.2;
  const BoundaryConditions bc(g, values);
  for (AlphaLaw law : {AlphaLaw::OnePlusAbsPiP, AlphaLaw::OnePlusXSquared, AlphaLaw::OnePlusAbsXSin}) {
    c.checks.push_back({"gap " + to_string(law), check_picard_equivalence(law, g, bc), 1e-10});
  }
  return c;
}

Criterion ablation() {
  Criterion c{12, "optimizer ablation on the zero right-hand side case", {}, ""};
  const AblationResult r = run_optimizer_ablation(preset(Equation::Poisson1DNeumann), kBudgetAblation);
  std::printf("    hybrid %.3e  adam %.3e  momentum %.3e  (budget %ld)\n", r.hybrid.loss, r.adam.loss, r.momentum.loss,
              r.budget);
  c.checks.push_back({"hybrid - adam", r.hybrid.loss - r.adam.loss, 0.0});
  c.checks.push_back({"adam - momentum", r.adam.loss - r.momentum.loss, 0.0});
  c.checks.push_back({"hybrid loss", r.hybrid.loss, 1e-10});
  return c;
}

void report(const Criterion& c) {
  std::printf("%s  %2d  %s  [%.0f s]", c.passed() ? "PASS" : "FAIL", c.id, c.title.c_str(), c.seconds);
  for (const auto& k : c.checks) std::printf("  | %s %.3e (tol %.1e)", k.name.c_str(), k.value, k.tolerance);
  if (!c.note.empty()) std::printf("  | %s", c.note.c_str());
  std::printf("\n");
  std::fflush(stdout);
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const std::vector<std::function<Criterion()>> suite = {
      adjoint_correctness, poisson_linear, poisson_neumann, poisson_sine, poisson_varying, poisson_nonlinear,
      poisson_2d,          helmholtz,      wave,            fluid,        oracle_equivalence, ablation};
  std::vector<Criterion> results;
  for (const auto& run : suite) {
    const auto t0 = Clock::now();
    Criterion c = run();
    c.seconds = seconds_since(t0);
    report(c);
    results.push_back(std::move(c));
  }
  Criterion budget{13, "whole suite within 90 minutes", {{"minutes", seconds_since(start) / 60.0, 90.0}}, ""};
  report(budget);
  results.push_back(budget);

  std::vector<CheckRow> rows;
  int failed = 0;
  for (const auto& c : results) {
    failed += c.passed() ? 0 : 1;
    for (const auto& k : c.checks) {
      rows.push_back({"c" + std::to_string(c.id) + " " + k.name, k.value, k.tolerance, k.passed()});
    }
  }
  std::ofstream csv("acceptance_report.csv");
  write_report(rows, csv);
  std::printf("%d of %zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
