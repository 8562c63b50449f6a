#ifndef FCPDE_VERIFICATION_HPP
#define FCPDE_VERIFICATION_HPP

#include "fcpde/datagen.hpp"
#include "fcpde/trainer.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fcpde {

/// Canonical Laplacian row on a footprint, normalized to a unit center.
Eigen::VectorXd normalized_laplacian(const Footprint& footprint);

/// Max over the interior cells of the given states of
/// |row / row[center] - canonical normalized row|. Throws std::domain_error
/// on a center coefficient below 1e-12 in magnitude.
double check_stencil_recovery(const StencilFunction& stencil, const Footprint& footprint,
                              const std::vector<Field>& states);

/// Same check on the clean test solutions of a constant-coefficient case.
double check_stencil_recovery(const StencilModel& model, const CaseConfig& config);

/// Runs the learned-operator Picard loop with the analytic flux-form stencil
/// next to the classical solver and returns the largest gap between matching
/// iterates. b is physical; x0 seeds both runs.
double check_picard_equivalence(AlphaLaw law, const Grid& grid, const BoundaryConditions& bc, const Field& b,
                                const Eigen::VectorXd& x0, int steps);
double check_picard_equivalence(AlphaLaw law, const Grid& grid, const BoundaryConditions& bc, int steps = 12);

struct AblationResult {
  TrainResult hybrid;
  TrainResult adam;
  TrainResult momentum;
  long budget = 0;
  bool ordering_holds() const { return hybrid.loss <= adam.loss && adam.loss <= momentum.loss; }
};

/// Trains the same initial model with each schedule under one evaluation
/// budget.
AblationResult run_optimizer_ablation(const CaseConfig& config, long budget);

/// Shrinks a case for gradient checks: grid extent <= 16, depth <= 3, at
/// most 120 parameters, few samples.
CaseConfig reduced_config(const CaseConfig& config);

struct CheckRow {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// name,value,tolerance,passed
void write_report(const std::vector<CheckRow>& rows, std::ostream& out);

}  // namespace fcpde

#endif  // FCPDE_VERIFICATION_HPP
