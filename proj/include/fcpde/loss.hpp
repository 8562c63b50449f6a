#ifndef FCPDE_LOSS_HPP
#define FCPDE_LOSS_HPP

#include <Eigen/Dense>

#include <vector>

namespace fcpde {

struct MseResult {
  double value = 0.0;
  /// d(value)/d(prediction_k), one vector per prediction.
  std::vector<Eigen::VectorXd> gradients;
};

/// Mean squared error over all samples and cells. An optional per-sample
/// observation mask (1 = observed) restricts the mean to observed cells.
MseResult loss_mse(const std::vector<Eigen::VectorXd>& predictions,
                   const std::vector<Eigen::VectorXd>& targets,
                   const std::vector<Eigen::VectorXd>& masks = {});

}  // namespace fcpde

#endif  // FCPDE_LOSS_HPP
