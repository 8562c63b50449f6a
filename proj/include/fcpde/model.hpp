#ifndef FCPDE_MODEL_HPP
#define FCPDE_MODEL_HPP

#include "fcpde/grid.hpp"
#include "fcpde/micronet.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fcpde {

/// What the functional convolution sees at each cell.
enum class InputMode { Values, ValuesAndPosition };

std::string to_string(InputMode m);
InputMode input_mode_from_string(const std::string& s);
std::string to_string(FootprintShape f);
FootprintShape footprint_from_string(const std::string& s);

/// A shared micro network plus the conventions that turn it into stencil rows.
struct StencilModel {
  MicroNetd net;
  int rank = 1;
  InputMode input_mode = InputMode::Values;
  FootprintShape footprint_shape = FootprintShape::Full;
  std::uint64_t seed = 0;

  Footprint footprint() const { return Footprint(rank, footprint_shape); }
};

/// Network input width implied by rank, footprint and input mode.
int expected_input_size(int rank, FootprintShape footprint, InputMode mode);

/// Builds a model with validated layer sizes and seeded parameters.
StencilModel make_model(int rank, std::vector<int> layers, Activation activation, InputMode mode,
                        FootprintShape footprint, std::uint64_t seed);

/// Text serialization: header lines followed by one parameter per line,
/// printed with 17 significant digits.
void save_model(const StencilModel& model, std::ostream& out);
StencilModel load_model(std::istream& in);
void save_model(const StencilModel& model, const std::string& path);
StencilModel load_model(const std::string& path);

}  // namespace fcpde

#endif  // FCPDE_MODEL_HPP
