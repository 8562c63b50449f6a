#ifndef FCPDE_EXPERIMENT_HPP
#define FCPDE_EXPERIMENT_HPP

#include "fcpde/config.hpp"
#include "fcpde/datagen.hpp"
#include "fcpde/picard.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fcpde {

struct TestCase {
  std::string label;
  Field predicted;
  Field truth;
  double mse = 0.0;
  /// Picard steps taken (static cases) or 0 for rollout frames.
  int steps = 0;
  bool converged = true;
  /// Final ||x_n - x_{n-1}||_inf of a converge-mode solve.
  double final_residual = 0.0;
};

struct Evaluation {
  std::string tag;
  std::vector<TestCase> tests;
  double mean_mse = 0.0;
  double max_mse = 0.0;
  bool all_converged = true;
  /// Largest post-projection divergence of the classical fluid run.
  double classical_divergence = 0.0;
};

/// Throws ConfigError when the model cannot serve the configured case.
void check_compatible(const StencilModel& model, const CaseConfig& config);

PicardOptions inference_options(const CaseConfig& config);

/// Fresh test problems solved in converge mode (static cases), or a rollout
/// from the last training frames (wave, fluid). n_tests <= 0 uses the
/// configured count; for rollouts it is the number of frames.
Evaluation evaluate(const StencilModel& model, const CaseConfig& config, int n_tests = 0);

/// Learned projection: converge-mode Picard on the pressure problem.
Projector learned_projector(const StencilModel& model, const CaseConfig& config);

/// One test's prediction and reference with enough geometry to plot them.
void write_dump(const TestCase& test, std::ostream& out);
TestCase read_dump(std::istream& in);

/// 1D: rows of (coordinate, predicted, true, abs_error). 2D: labeled
/// row-major matrices for predicted, true and abs_error.
void export_plot(const TestCase& test, std::ostream& out);

}  // namespace fcpde

#endif  // FCPDE_EXPERIMENT_HPP
