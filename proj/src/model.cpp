#include "fcpde/model.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace fcpde {

std::string to_string(InputMode m) {
  return m == InputMode::Values ? "values" : "values+position";
}

InputMode input_mode_from_string(const std::string& s) {
  if (s == "values") return InputMode::Values;
  if (s == "values+position") return InputMode::ValuesAndPosition;
  throw std::invalid_argument("unknown input mode '" + s + "'");
}

std::string to_string(FootprintShape f) { return f == FootprintShape::Full ? "full" : "cross"; }

FootprintShape footprint_from_string(const std::string& s) {
  if (s == "full") return FootprintShape::Full;
  if (s == "cross") return FootprintShape::Cross;
  throw std::invalid_argument("unknown footprint '" + s + "'");
}

int expected_input_size(int rank, FootprintShape footprint, InputMode mode) {
  const int n = static_cast<int>(Footprint(rank, footprint).size());
  return mode == InputMode::Values ? n : n + n * rank;
}

StencilModel make_model(int rank, std::vector<int> layers, Activation activation, InputMode mode,
                        FootprintShape footprint, std::uint64_t seed) {
  const int in = expected_input_size(rank, footprint, mode);
  const int out = static_cast<int>(Footprint(rank, footprint).size());
  if (layers.size() < 2) throw std::invalid_argument("network needs at least two layer sizes");
  if (layers.front() != in) {
    throw std::invalid_argument("first layer width " + std::to_string(layers.front()) +
                                " does not match input size " + std::to_string(in));
  }
  if (layers.back() != out) {
    throw std::invalid_argument("last layer width " + std::to_string(layers.back()) +
                                " does not match footprint size " + std::to_string(out));
  }
  StencilModel model;
  model.net = MicroNetd(std::move(layers), activation);
  model.rank = rank;
  model.input_mode = mode;
  model.footprint_shape = footprint;
  model.seed = seed;
  init_params(model.net, seed);
  return model;
}

void save_model(const StencilModel& model, std::ostream& out) {
  out << "fcpde-model 1\n";
  out << "layers";
  for (int s : model.net.layer_sizes()) out << ' ' << s;
  out << "\nactivation " << to_string(model.net.activation()) << '\n';
  out << "input_mode " << to_string(model.input_mode) << '\n';
  out << "rank " << model.rank << '\n';
  out << "footprint " << to_string(model.footprint_shape) << '\n';
  out << "seed " << model.seed << '\n';
  out << "params " << model.net.parameter_count() << '\n';
  char buf[40];
  for (Eigen::Index k = 0; k < model.net.parameter_count(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g\n", model.net.params()[k]);
    out << buf;
  }
}

namespace {

std::string expect_key(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("model file truncated before '" + key + "'");
  std::istringstream ls(line);
  std::string k;
  ls >> k;
  if (k != key) throw std::runtime_error("model file: expected '" + key + "', found '" + k + "'");
  std::string rest;
  std::getline(ls, rest);
  const auto first = rest.find_first_not_of(' ');
  return first == std::string::npos ? std::string() : rest.substr(first);
}

}  // namespace

StencilModel load_model(std::istream& in) {
  if (expect_key(in, "fcpde-model") != "1") throw std::runtime_error("unsupported model version");
  std::vector<int> layers;
  {
    std::istringstream ls(expect_key(in, "layers"));
    for (int s; ls >> s;) layers.push_back(s);
  }
  const Activation act = activation_from_string(expect_key(in, "activation"));
  const InputMode mode = input_mode_from_string(expect_key(in, "input_mode"));
  const int rank = std::stoi(expect_key(in, "rank"));
  const FootprintShape fp = footprint_from_string(expect_key(in, "footprint"));
  const std::uint64_t seed = std::stoull(expect_key(in, "seed"));
  const long count = std::stol(expect_key(in, "params"));
  StencilModel model = make_model(rank, layers, act, mode, fp, seed);
  if (count != model.net.parameter_count()) throw std::runtime_error("model parameter count mismatch");
  Eigen::VectorXd theta(count);
  for (long k = 0; k < count; ++k) {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error("model file truncated in parameters");
    theta[k] = std::stod(tok);
  }
  model.net.set_params(theta);
  return model;
}

void save_model(const StencilModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  save_model(model, out);
  if (!out) throw std::ios_base::failure("write to '" + path + "' failed");
}

StencilModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  return load_model(in);
}

}  // namespace fcpde
