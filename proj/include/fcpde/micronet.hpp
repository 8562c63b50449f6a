#ifndef FCPDE_MICRONET_HPP
#define FCPDE_MICRONET_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace fcpde {

enum class Activation { Tanh, Identity };

inline std::string to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "identity"; }

inline Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "identity" || s == "linear") return Activation::Identity;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

/// Tiny fully connected network: affine layers with the activation between
/// hidden layers and a linear output layer.
///
/// Parameters live in one flat vector, layer-major. Each layer stores its
/// weight matrix (out x in, row-major) followed by its bias (out).
template <typename Scalar>
class MicroNet {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using RowMajorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  MicroNet() = default;

  explicit MicroNet(std::vector<int> layer_sizes, Activation activation = Activation::Tanh)
      : sizes_(std::move(layer_sizes)), activation_(activation) {
    if (sizes_.size() < 2) throw std::invalid_argument("a network needs at least two layer sizes");
    for (int s : sizes_) {
      if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
    }
    offsets_.push_back(0);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      offsets_.push_back(offsets_.back() + static_cast<Eigen::Index>(sizes_[l] + 1) * sizes_[l + 1]);
    }
    params_ = Vector::Zero(offsets_.back());
  }

  static Eigen::Index parameter_count(const std::vector<int>& sizes) {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      n += static_cast<Eigen::Index>(sizes[l] + 1) * sizes[l + 1];
    }
    return n;
  }

  const std::vector<int>& layer_sizes() const { return sizes_; }
  Activation activation() const { return activation_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int layer_count() const { return static_cast<int>(sizes_.size()) - 1; }
  Eigen::Index parameter_count() const { return params_.size(); }

  const Vector& params() const { return params_; }
  Vector& params() { return params_; }
  void set_params(const Vector& theta) {
    if (theta.size() != params_.size()) throw std::invalid_argument("parameter vector has wrong length");
    params_ = theta;
  }

  /// Offset of layer l's weight block inside the flat parameter vector.
  Eigen::Index weight_offset(int l) const { return offsets_[static_cast<std::size_t>(l)]; }
  Eigen::Index bias_offset(int l) const {
    return offsets_[static_cast<std::size_t>(l)] + static_cast<Eigen::Index>(in(l)) * out(l);
  }

  Eigen::Map<const RowMajorMatrix> weight(int l) const {
    return {params_.data() + weight_offset(l), out(l), in(l)};
  }
  Eigen::Map<const Vector> bias(int l) const { return {params_.data() + bias_offset(l), out(l)}; }

  Vector forward(const Eigen::Ref<const Vector>& input) const {
    check_input(input);
    Vector a = input;
    for (int l = 0; l < layer_count(); ++l) {
      Vector z = weight(l) * a + bias(l);
      a = is_last(l) ? z : activate(z);
    }
    return a;
  }

  /// Exact Jacobian of the output with respect to the input (out x in).
  Matrix jacobian_input(const Eigen::Ref<const Vector>& input) const {
    const auto acts = activations(input);
    Matrix j = weight(layer_count() - 1);
    for (int l = layer_count() - 2; l >= 0; --l) {
      j = (j * derivative(acts[static_cast<std::size_t>(l + 1)]).asDiagonal()) * weight(l);
    }
    return j;
  }

  /// Exact Jacobian of the output with respect to the flat parameters.
  Matrix jacobian_params(const Eigen::Ref<const Vector>& input) const {
    const auto acts = activations(input);
    Matrix jac = Matrix::Zero(output_size(), parameter_count());
    // g holds d(output)/d(pre-activation of layer l), shape out x out(l).
    Matrix g = Matrix::Identity(output_size(), output_size());
    for (int l = layer_count() - 1; l >= 0; --l) {
      const Vector& a_in = acts[static_cast<std::size_t>(l)];
      for (int r = 0; r < out(l); ++r) {
        for (int c = 0; c < in(l); ++c) {
          jac.col(weight_offset(l) + static_cast<Eigen::Index>(r) * in(l) + c) = g.col(r) * a_in[c];
        }
        jac.col(bias_offset(l) + r) = g.col(r);
      }
      if (l > 0) g = (g * weight(l)) * derivative(a_in).asDiagonal();
    }
    return jac;
  }

  /// Vector-Jacobian product: given v over the outputs, returns v^T dC/d(input)
  /// and adds v^T dC/dtheta into grad_params.
  Vector vjp(const Eigen::Ref<const Vector>& input, const Eigen::Ref<const Vector>& v,
             Eigen::Ref<Vector> grad_params) const {
    const auto acts = activations(input);
    Vector delta = v;
    for (int l = layer_count() - 1; l >= 0; --l) {
      const Vector& a_in = acts[static_cast<std::size_t>(l)];
      Eigen::Map<RowMajorMatrix> gw(grad_params.data() + weight_offset(l), out(l), in(l));
      gw.noalias() += delta * a_in.transpose();
      grad_params.segment(bias_offset(l), out(l)) += delta;
      delta = weight(l).transpose() * delta;
      if (l > 0) delta = delta.cwiseProduct(derivative(a_in));
    }
    return delta;
  }

 private:
  int in(int l) const { return sizes_[static_cast<std::size_t>(l)]; }
  int out(int l) const { return sizes_[static_cast<std::size_t>(l) + 1]; }
  bool is_last(int l) const { return l == layer_count() - 1; }

  void check_input(const Eigen::Ref<const Vector>& input) const {
    if (input.size() != input_size()) {
      throw std::invalid_argument("network input has length " + std::to_string(input.size()) +
                                  ", expected " + std::to_string(input_size()));
    }
  }

  Vector activate(const Vector& z) const {
    if (activation_ == Activation::Tanh) return z.array().tanh().matrix();
    return z;
  }

  /// Activation derivative expressed through the activation output.
  Vector derivative(const Vector& a) const {
    if (activation_ == Activation::Tanh) return (Scalar(1) - a.array().square()).matrix();
    return Vector::Ones(a.size());
  }

  /// acts[l] is the input of layer l; acts[L] is the network output.
  std::vector<Vector> activations(const Eigen::Ref<const Vector>& input) const {
    check_input(input);
    std::vector<Vector> acts;
    acts.reserve(static_cast<std::size_t>(layer_count()) + 1);
    acts.emplace_back(input);
    for (int l = 0; l < layer_count(); ++l) {
      Vector z = weight(l) * acts.back() + bias(l);
      acts.emplace_back(is_last(l) ? z : activate(z));
    }
    return acts;
  }

  std::vector<int> sizes_;
  Activation activation_ = Activation::Tanh;
  std::vector<Eigen::Index> offsets_;
  Vector params_;
};

/// Seeded uniform initialization in +-sqrt(1 / fan_in) per layer.
template <typename Scalar>
void init_params(MicroNet<Scalar>& net, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto& theta = net.params();
  for (int l = 0; l < net.layer_count(); ++l) {
    const double scale = std::sqrt(1.0 / net.layer_sizes()[static_cast<std::size_t>(l)]);
    for (Eigen::Index k = net.weight_offset(l); k < net.bias_offset(l) + net.layer_sizes()[l + 1]; ++k) {
      theta[k] = static_cast<Scalar>(scale * (2.0 * uniform() - 1.0));
    }
  }
}

/// Layer sizes from the compact width notation used when reporting these
/// networks, where every hidden width is written twice (once for the affine
/// map, once for its activation): "3x4x4x3" is a single hidden layer of 4.
inline std::vector<int> layers_from_reported_notation(const std::vector<int>& reported) {
  if (reported.size() < 2 || reported.size() % 2 != 0) {
    throw std::invalid_argument("reported notation needs paired hidden widths");
  }
  std::vector<int> sizes{reported.front()};
  for (std::size_t k = 1; k + 1 < reported.size(); k += 2) {
    if (reported[k] != reported[k + 1]) throw std::invalid_argument("hidden widths must come in pairs");
    sizes.push_back(reported[k]);
  }
  sizes.push_back(reported.back());
  return sizes;
}

using MicroNetd = MicroNet<double>;

}  // namespace fcpde

#endif  // FCPDE_MICRONET_HPP
