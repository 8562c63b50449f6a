#include "fcpde/loss.hpp"

#include <stdexcept>

namespace fcpde {

MseResult loss_mse(const std::vector<Eigen::VectorXd>& predictions,
                   const std::vector<Eigen::VectorXd>& targets,
                   const std::vector<Eigen::VectorXd>& masks) {
  if (predictions.size() != targets.size()) throw std::invalid_argument("prediction/target count mismatch");
  if (!masks.empty() && masks.size() != targets.size()) throw std::invalid_argument("mask count mismatch");
  double count = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    if (predictions[k].size() != targets[k].size()) throw std::invalid_argument("prediction/target shape mismatch");
    const bool masked = !masks.empty() && masks[k].size() > 0;
    if (masked && masks[k].size() != targets[k].size()) throw std::invalid_argument("mask shape mismatch");
    count += masked ? masks[k].sum() : static_cast<double>(targets[k].size());
  }
  MseResult r;
  if (count == 0.0) throw std::invalid_argument("loss over zero observed cells");
  for (std::size_t k = 0; k < targets.size(); ++k) {
    Eigen::VectorXd diff = predictions[k] - targets[k];
    if (!masks.empty() && masks[k].size() > 0) diff = diff.cwiseProduct(masks[k]);
    r.value += diff.squaredNorm();
    r.gradients.push_back(2.0 * diff / count);
  }
  r.value /= count;
  return r;
}

}  // namespace fcpde
