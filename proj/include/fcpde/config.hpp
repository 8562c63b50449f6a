#ifndef FCPDE_CONFIG_HPP
#define FCPDE_CONFIG_HPP

#include "fcpde/grid.hpp"
#include "fcpde/linsolve.hpp"
#include "fcpde/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace fcpde {

/// Equation families with a data generator.
enum class Equation {
  Poisson1DConstant,
  Poisson1DNeumann,
  Poisson1DSine,
  Poisson1DVarying,
  Poisson1DNonlinear,
  Poisson2DCubic,
  Poisson2DSine,
  HelmholtzReciprocal,
  HelmholtzSine,
  Wave,
  NavierStokes,
};

/// Coefficient laws for div(alpha grad x) = b.
enum class AlphaLaw {
  One,             // 1
  OnePlusAbsPiP,   // 1 + |pi p|
  OnePlusXSquared, // 1 + x^2
  OnePlusAbsXSin,  // 1 + |x| + sin(0.001 |x|)
};

/// 1D boundary layouts; 2D grids are Dirichlet on every side.
enum class BoundaryLayout { Dirichlet, DirichletNeumann };

std::string to_string(Equation e);
Equation equation_from_string(const std::string& s);
std::string to_string(AlphaLaw a);
AlphaLaw alpha_law_from_string(const std::string& s);

/// Invalid or inconsistent experiment configuration; the message names the
/// offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything needed to regenerate data, train and evaluate one experiment.
struct CaseConfig {
  Equation equation = Equation::Poisson1DConstant;
  int rank = 1;
  std::vector<Index> shape{128};
  double domain_lo = 0.0;
  double domain_hi = 1.0;
  BoundaryLayout boundary = BoundaryLayout::Dirichlet;
  AlphaLaw alpha = AlphaLaw::One;
  double a_min = 0.5;
  double a_max = 1.5;
  double noise = 0.0;
  int samples = 4;
  int test_samples = 16;

  // Time-dependent families.
  double dt = 0.0;
  int train_frames = 6;
  int test_frames = 42;

  // Network.
  std::vector<int> layers{3, 4, 3};
  Activation activation = Activation::Tanh;
  InputMode input_mode = InputMode::Values;
  FootprintShape footprint = FootprintShape::Full;

  // Training.
  int depth = 2;
  std::uint64_t seed = 1;
  double tolerance = 1e-12;
  int qn_iters = 200;
  int adam_iters = 2000;
  int max_rounds = 10;
  double jitter = 0.0;
  /// Added to the center output bias after initialization.
  double init_center = 0.0;
  /// Observed fraction of cells for the training loss (1 = full observation).
  double observed_fraction = 1.0;
  SolverBackend backend = SolverBackend::SparseLU;

  // Inference.
  double epsilon = 1e-8;
  int max_steps = 50;

  double cell_size() const;
  Grid grid() const;
  std::string tag() const { return to_string(equation); }
  bool time_dependent() const { return equation == Equation::Wave || equation == Equation::NavierStokes; }
};

/// Default recipe for an equation family.
CaseConfig preset(Equation equation);

/// Throws ConfigError naming the first invalid field.
void validate(const CaseConfig& config);

/// Flat key=value text with dotted keys; '#' starts a comment. The
/// case.equation key selects the preset that the remaining keys override.
CaseConfig parse_config(std::istream& in);
CaseConfig load_config(const std::string& path);
void write_config(const CaseConfig& config, std::ostream& out);

/// Independent random stream derived from the config seed.
std::uint64_t substream(std::uint64_t seed, const std::string& name, std::uint64_t index = 0);

}  // namespace fcpde

#endif  // FCPDE_CONFIG_HPP
