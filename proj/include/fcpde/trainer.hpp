#ifndef FCPDE_TRAINER_HPP
#define FCPDE_TRAINER_HPP

#include "fcpde/adjoint.hpp"
#include "fcpde/config.hpp"
#include "fcpde/datagen.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace fcpde {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
};

/// One bias-corrected Adam update in place.
void adam_step(Eigen::VectorXd& theta, const Eigen::VectorXd& g, AdamState& state);

struct MomentumState {
  double lr = 1e-3;
  double momentum = 0.9;
  Eigen::VectorXd velocity;
};

/// Gradient descent with heavy-ball momentum.
void momentum_step(Eigen::VectorXd& theta, const Eigen::VectorXd& g, MomentumState& state);

/// Returns the loss at theta and writes its gradient. Failed forward passes
/// should return +inf.
using LossAndGrad = std::function<double(const Eigen::VectorXd& theta, Eigen::VectorXd& grad)>;

enum class Stage { QuasiNewton, Adam, Momentum };
std::string to_string(Stage s);

struct HistoryEntry {
  long global_step = 0;
  Stage stage = Stage::QuasiNewton;
  double loss = 0.0;
};

struct StageResult {
  Eigen::VectorXd theta;
  double loss = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_theta;
  double best_loss = std::numeric_limits<double>::infinity();
  int iterations = 0;
  long evaluations = 0;
  /// Backtracking could not find a decrease; the stage returned early.
  bool line_search_failed = false;
  bool reached_target = false;
};

struct StageLimits {
  int max_iters = 200;
  /// Stop once ||g||_inf falls to this.
  double grad_tol = 0.0;
  /// Stop once the loss falls to this.
  double loss_target = 0.0;
  /// Evaluation cap shared with the caller (<0 = none).
  long budget = -1;
};

/// Limited-memory BFGS (m = 10) with Armijo backtracking (c = 1e-4).
StageResult quasinewton_stage(const Eigen::VectorXd& theta, const LossAndGrad& f, const StageLimits& limits,
                              std::vector<HistoryEntry>* history = nullptr, long step_offset = 0);

/// Adam until the cap, the target, or the 50-step moving average of the loss
/// stops decreasing.
StageResult adam_stage(const Eigen::VectorXd& theta, const LossAndGrad& f, const StageLimits& limits,
                       AdamState& state, std::vector<HistoryEntry>* history = nullptr, long step_offset = 0);

StageResult momentum_stage(const Eigen::VectorXd& theta, const LossAndGrad& f, const StageLimits& limits,
                           MomentumState& state, std::vector<HistoryEntry>* history = nullptr,
                           long step_offset = 0);

enum class Schedule { Hybrid, AdamOnly, MomentumOnly };

struct TrainOptions {
  Schedule schedule = Schedule::Hybrid;
  /// Total loss-and-gradient evaluations allowed (<0 = bounded by stage caps only).
  long budget = -1;
  /// Sees every gradient handed to an optimizer.
  std::function<void(const Eigen::VectorXd& theta, const Eigen::VectorXd& grad)> on_gradient;
};

struct TrainResult {
  StencilModel model;
  std::vector<HistoryEntry> history;
  double loss = std::numeric_limits<double>::infinity();
  double initial_loss = std::numeric_limits<double>::infinity();
  bool converged = false;
  long evaluations = 0;
  int rounds = 0;
};

/// Model with the case's architecture and seeded initial parameters.
StencilModel initial_model(const CaseConfig& config);

/// Training problems with seeded initial guesses and observation masks.
std::vector<Problem> build_problems(const CaseConfig& config, const Dataset& dataset);

PicardOptions training_options(const CaseConfig& config);

/// Loss and adjoint gradient of the unrolled Picard network over the problems.
LossAndGrad make_objective(const StencilModel& model, const std::vector<Problem>& problems,
                           const PicardOptions& options);

/// Alternates quasi-Newton and Adam stages until the loss reaches the case
/// tolerance or max_rounds alternations; the best parameters seen are kept.
TrainResult train(const CaseConfig& config, const Dataset& dataset, const TrainOptions& options = {});
TrainResult train(const CaseConfig& config, StencilModel model, const std::vector<Problem>& problems,
                  const TrainOptions& options = {});

/// Columns global_step, stage, loss.
void write_history_csv(const std::vector<HistoryEntry>& history, std::ostream& out);

}  // namespace fcpde

#endif  // FCPDE_TRAINER_HPP
