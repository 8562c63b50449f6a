#include "fcpde/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace fcpde {

namespace {

const std::map<Equation, std::string>& equation_names() {
  static const std::map<Equation, std::string> names{
      {Equation::Poisson1DConstant, "poisson1d_constant"},
      {Equation::Poisson1DNeumann, "poisson1d_neumann"},
      {Equation::Poisson1DSine, "poisson1d_sine"},
      {Equation::Poisson1DVarying, "poisson1d_varying"},
      {Equation::Poisson1DNonlinear, "poisson1d_nonlinear"},
      {Equation::Poisson2DCubic, "poisson2d_cubic"},
      {Equation::Poisson2DSine, "poisson2d_sine"},
      {Equation::HelmholtzReciprocal, "helmholtz_reciprocal"},
      {Equation::HelmholtzSine, "helmholtz_sine"},
      {Equation::Wave, "wave"},
      {Equation::NavierStokes, "navier_stokes"},
  };
  return names;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long n = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  return static_cast<int>(to_integer(key, v));
}

// Accepts "3,4,3", "3x4x3" or "3 4 3".
std::vector<long long> to_list(const std::string& key, const std::string& v) {
  std::string s = v;
  for (char& c : s) {
    if (c == ',' || c == 'x' || c == 'X') c = ' ';
  }
  std::istringstream in(s);
  std::vector<long long> out;
  std::string tok;
  while (in >> tok) out.push_back(to_integer(key, tok));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

template <class F>
auto translate(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

using Setter = std::function<void(CaseConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"case.alpha", [](CaseConfig& c, const std::string& k, const std::string& v) {
         c.alpha = translate(k, [&] { return alpha_law_from_string(v); });
       }},
      {"case.a_min", [](CaseConfig& c, const std::string& k, const std::string& v) { c.a_min = to_double(k, v); }},
      {"case.a_max", [](CaseConfig& c, const std::string& k, const std::string& v) { c.a_max = to_double(k, v); }},
      {"case.noise", [](CaseConfig& c, const std::string& k, const std::string& v) { c.noise = to_double(k, v); }},
      {"case.samples", [](CaseConfig& c, const std::string& k, const std::string& v) { c.samples = to_int(k, v); }},
      {"case.test_samples",
       [](CaseConfig& c, const std::string& k, const std::string& v) { c.test_samples = to_int(k, v); }},
      {"case.observed_fraction",
       [](CaseConfig& c, const std::string& k, const std::string& v) { c.observed_fraction = to_double(k, v); }},
      {"time.dt", [](CaseConfig& c, const std::string& k, const std::string& v) { c.dt = to_double(k, v); }},
      {"time.train_frames",
       [](CaseConfig& c, const std::string& k, const std::string& v) { c.train_frames = to_int(k, v); }},
      {"time.test_frames",
       [](CaseConfig& c, const std::string& k, const std::string& v) { c.test_frames = to_int(k, v); }},
      {"grid.shape", [](CaseConfig& c, const std::string& k, const std::string& v) {
         c.shape.clear();
         for (long long n : to_list(k, v)) c.shape.push_back(static_cast<Index>(n));
         c.rank = static_cast<int>(c.shape.size());
       }},
      {"grid.domain", [](CaseConfig& c, const std::string& k, const std::string& v) {
         const auto colon = v.find(':');
         if (colon == std::string::npos) throw ConfigError(k + ": expected lo:hi, got '" + v + "'");
         c.domain_lo = to_double(k, trim(v.substr(0, colon)));
         c.domain_hi = to_double(k, trim(v.substr(colon + 1)));
       }},
      {"grid.boundary", [](CaseConfig& c, const std::string& k, const std::string& v) {
         if (v == "dirichlet") c.boundary = BoundaryLayout::Dirichlet;
         else if (v == "dirichlet-neumann") c.boundary = BoundaryLayout::DirichletNeumann;
         else throw ConfigError(k + ": unknown boundary layout '" + v + "'");
       }},
      {"net.layers", [](CaseConfig& c, const std::string& k, const std::string& v) {
         c.layers.clear();
         for (long long n : to_list(k, v)) c.layers.push_back(static_cast<int>(n));
       }},
      {"net.activation", [](CaseConfig& c, const std::string& k, const std::string& v) {
         c.activation = translate(k, [&] { return activation_from_string(v); });
       }},
      {"net.input", [](CaseConfig& c, const std::string& k, const std::string& v) {
         c.input_mode = translate(k, [&] { return input_mode_from_string(v); });
       }},
      {"net.footprint", [](CaseConfig& c, const std::string& k, const std::string& v) {
         c.footprint = translate(k, [&] { return footprint_from_string(v); });
       }},
      {"train.depth_N", [](CaseConfig& c, const std::string& k, const std::string& v) { c.depth = to_int(k, v); }},
      {"train.seed", [](CaseConfig& c, const std::string& k, const std::string& v) {
         const long long s = to_integer(k, v);
         if (s < 0) throw ConfigError(k + ": seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"train.tolerance",
       [](CaseConfig& c, const std::string& k, const std::string& v) { c.tolerance = to_double(k, v); }},
      {"train.qn_iters", [](CaseConfig& c, const std::string& k, const std::string& v) { c.qn_iters = to_int(k, v); }},
      {"train.adam_iters",
       [](CaseConfig& c, const std::string& k, const std::string& v) { c.adam_iters = to_int(k, v); }},
      {"train.max_rounds",
       [](CaseConfig& c, const std::string& k, const std::string& v) { c.max_rounds = to_int(k, v); }},
      {"train.jitter", [](CaseConfig& c, const std::string& k, const std::string& v) { c.jitter = to_double(k, v); }},
      {"train.init_center",
       [](CaseConfig& c, const std::string& k, const std::string& v) { c.init_center = to_double(k, v); }},
      {"train.solver", [](CaseConfig& c, const std::string& k, const std::string& v) {
         c.backend = translate(k, [&] { return solver_backend_from_string(v); });
       }},
      {"eval.epsilon", [](CaseConfig& c, const std::string& k, const std::string& v) { c.epsilon = to_double(k, v); }},
      {"eval.max_steps", [](CaseConfig& c, const std::string& k, const std::string& v) { c.max_steps = to_int(k, v); }},
  };
  return table;
}

bool needs_rank(Equation e, int rank) {
  switch (e) {
    case Equation::Poisson1DConstant:
    case Equation::Poisson1DNeumann:
    case Equation::Poisson1DSine:
    case Equation::Poisson1DVarying:
    case Equation::Poisson1DNonlinear:
      return rank == 1;
    default:
      return rank == 2;
  }
}

}  // namespace

std::string to_string(Equation e) { return equation_names().at(e); }

Equation equation_from_string(const std::string& s) {
  for (const auto& [e, name] : equation_names()) {
    if (name == s) return e;
  }
  throw ConfigError("case.equation: unknown equation tag '" + s + "'");
}

std::string to_string(AlphaLaw a) {
  switch (a) {
    case AlphaLaw::One: return "one";
    case AlphaLaw::OnePlusAbsPiP: return "1+|pi*p|";
    case AlphaLaw::OnePlusXSquared: return "1+x^2";
    case AlphaLaw::OnePlusAbsXSin: return "1+|x|+sin(0.001|x|)";
  }
  return "";
}

AlphaLaw alpha_law_from_string(const std::string& s) {
  for (AlphaLaw a : {AlphaLaw::One, AlphaLaw::OnePlusAbsPiP, AlphaLaw::OnePlusXSquared, AlphaLaw::OnePlusAbsXSin}) {
    if (to_string(a) == s) return a;
  }
  throw std::invalid_argument("unknown coefficient law '" + s + "'");
}

double CaseConfig::cell_size() const {
  const Index n = shape.empty() ? 0 : shape.front();
  return (domain_hi - domain_lo) / static_cast<double>(n - 1);
}

Grid CaseConfig::grid() const {
  std::array<Index, 2> s{shape.at(0), rank == 2 ? shape.at(1) : 1};
  std::array<BoundaryKind, 4> sides{BoundaryKind::Dirichlet, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet,
                                    BoundaryKind::Dirichlet};
  if (boundary == BoundaryLayout::DirichletNeumann) sides[1] = BoundaryKind::Neumann;
  const double y0 = rank == 2 ? domain_lo : 0.0;
  return Grid(rank, s, cell_size(), {domain_lo, y0}, sides);
}

CaseConfig preset(Equation equation) {
  CaseConfig c;
  c.equation = equation;
  switch (equation) {
    case Equation::Poisson1DConstant:
      c.shape = {128};
      break;
    case Equation::Poisson1DNeumann:
      c.shape = {32};
      c.boundary = BoundaryLayout::DirichletNeumann;
      break;
    case Equation::Poisson1DSine:
      c.shape = {32};
      c.samples = 2;
      c.a_min = 1.0;
      c.a_max = 4.0;
      break;
    case Equation::Poisson1DVarying:
      c.shape = {32};
      c.alpha = AlphaLaw::OnePlusAbsPiP;
      c.layers = {6, 6, 6, 3};
      c.input_mode = InputMode::ValuesAndPosition;
      break;
    case Equation::Poisson1DNonlinear:
      c.shape = {32};
      c.alpha = AlphaLaw::OnePlusAbsXSin;
      c.layers = {3, 6, 3};
      c.depth = 5;
      break;
    case Equation::Poisson2DCubic:
      c.rank = 2;
      c.shape = {32, 32};
      c.footprint = FootprintShape::Cross;
      c.layers = {5, 14, 14, 5};
      break;
    case Equation::Poisson2DSine:
      c.rank = 2;
      c.shape = {32, 32};
      c.footprint = FootprintShape::Cross;
      c.layers = {5, 10, 10, 10, 5};
      c.a_min = 1.0;
      c.a_max = 3.0;
      break;
    case Equation::HelmholtzReciprocal:
      c.rank = 2;
      c.shape = {32, 32};
      c.domain_lo = 1.0;
      c.domain_hi = 2.0;
      c.footprint = FootprintShape::Cross;
      c.layers = {5, 5, 5, 5};
      break;
    case Equation::HelmholtzSine:
      c.rank = 2;
      c.shape = {32, 32};
      c.footprint = FootprintShape::Cross;
      c.layers = {5, 5, 5, 5};
      break;
    case Equation::Wave:
      c.rank = 2;
      c.shape = {49, 49};
      c.footprint = FootprintShape::Cross;
      c.layers = {5, 5, 5, 5};
      c.dt = 0.4 * c.cell_size();
      c.samples = 6;
      c.train_frames = 6;
      c.test_frames = 42;
      c.test_samples = 1;
      break;
    case Equation::NavierStokes:
      c.rank = 2;
      c.shape = {32, 32};
      c.footprint = FootprintShape::Cross;
      c.layers = {5, 6, 6, 5};
      c.dt = 0.02;
      c.samples = 6;
      c.train_frames = 6;
      c.test_frames = 50;
      c.test_samples = 1;
      break;
  }
  // Start from the center weight of the classical operator so the first
  // assembled systems are diagonally dominant rather than near singular.
  c.init_center = c.rank == 1 ? 2.0 : 4.0;
  if (equation == Equation::Wave) c.init_center = 2.0 - 4.0 * (c.dt / c.cell_size()) * (c.dt / c.cell_size());
  return c;
}

void validate(const CaseConfig& c) {
  if (c.rank != 1 && c.rank != 2) throw ConfigError("grid.shape: rank must be 1 or 2");
  if (static_cast<int>(c.shape.size()) != c.rank) throw ConfigError("grid.shape: expected one extent per axis");
  for (Index n : c.shape) {
    if (n < 3) throw ConfigError("grid.shape: every extent must be at least 3");
  }
  if (c.rank == 2 && c.shape[0] != c.shape[1]) throw ConfigError("grid.shape: 2D grids must be square");
  if (!needs_rank(c.equation, c.rank)) {
    throw ConfigError("grid.shape: rank " + std::to_string(c.rank) + " does not fit case.equation " + c.tag());
  }
  if (!(c.domain_hi > c.domain_lo)) throw ConfigError("grid.domain: upper bound must exceed lower bound");
  if (c.rank == 2 && c.boundary != BoundaryLayout::Dirichlet) {
    throw ConfigError("grid.boundary: 2D cases support Dirichlet boundaries only");
  }
  if (c.equation == Equation::Poisson1DNeumann && c.boundary != BoundaryLayout::DirichletNeumann) {
    throw ConfigError("grid.boundary: poisson1d_neumann needs dirichlet-neumann");
  }
  const bool nonlinear_family =
      c.equation == Equation::Poisson1DVarying || c.equation == Equation::Poisson1DNonlinear;
  if (!nonlinear_family && c.alpha != AlphaLaw::One) {
    throw ConfigError("case.alpha: only the varying and nonlinear families take a coefficient law");
  }
  if (nonlinear_family && c.alpha == AlphaLaw::One) {
    throw ConfigError("case.alpha: the varying and nonlinear families need a non-constant law");
  }
  if (!(c.a_max > c.a_min)) throw ConfigError("case.a_max: must exceed case.a_min");
  if (!(c.noise >= 0.0 && c.noise <= 0.35)) throw ConfigError("case.noise: must lie in [0, 0.35]");
  if (c.samples < 1) throw ConfigError("case.samples: must be positive");
  if (c.test_samples < 1) throw ConfigError("case.test_samples: must be positive");
  if (!(c.observed_fraction > 0.0 && c.observed_fraction <= 1.0)) {
    throw ConfigError("case.observed_fraction: must lie in (0, 1]");
  }
  if (c.time_dependent()) {
    if (!(c.dt > 0.0)) throw ConfigError("time.dt: must be positive");
    if (c.train_frames < 1) throw ConfigError("time.train_frames: must be positive");
    if (c.test_frames < 1) throw ConfigError("time.test_frames: must be positive");
    if (c.samples != c.train_frames) throw ConfigError("case.samples: must equal time.train_frames");
  }
  if (c.equation == Equation::Wave && c.dt > c.cell_size() / std::sqrt(2.0)) {
    throw ConfigError("time.dt: violates the CFL bound dt <= h / sqrt(2)");
  }
  const int in = expected_input_size(c.rank, c.footprint, c.input_mode);
  const int out = static_cast<int>(Footprint(c.rank, c.footprint).size());
  if (c.layers.size() < 2) throw ConfigError("net.layers: need at least input and output widths");
  for (int w : c.layers) {
    if (w < 1) throw ConfigError("net.layers: widths must be positive");
  }
  if (c.layers.front() != in) {
    throw ConfigError("net.layers: input width must be " + std::to_string(in) + " for this footprint and input");
  }
  if (c.layers.back() != out) {
    throw ConfigError("net.layers: output width must be " + std::to_string(out) + " for this footprint");
  }
  if (c.depth < 1) throw ConfigError("train.depth_N: must be at least 1");
  if (!(c.tolerance >= 0.0)) throw ConfigError("train.tolerance: must be non-negative");
  if (c.qn_iters < 0) throw ConfigError("train.qn_iters: must be non-negative");
  if (c.adam_iters < 0) throw ConfigError("train.adam_iters: must be non-negative");
  if (c.max_rounds < 1) throw ConfigError("train.max_rounds: must be positive");
  if (!(c.jitter >= 0.0)) throw ConfigError("train.jitter: must be non-negative");
  if (!(c.epsilon > 0.0)) throw ConfigError("eval.epsilon: must be positive");
  if (c.max_steps < 1) throw ConfigError("eval.max_steps: must be positive");
}

CaseConfig parse_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  std::string equation;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "case.equation") {
      equation = value;
      continue;
    }
    if (!setters().count(key)) throw ConfigError(key + ": unknown key");
    entries.emplace_back(std::move(key), std::move(value));
  }
  if (equation.empty()) throw ConfigError("case.equation: missing");
  CaseConfig c = preset(equation_from_string(equation));
  const bool dt_given = std::any_of(entries.begin(), entries.end(),
                                    [](const auto& e) { return e.first == "time.dt"; });
  for (const auto& [key, value] : entries) setters().at(key)(c, key, value);
  if (c.equation == Equation::Wave && !dt_given) c.dt = 0.4 * c.cell_size();
  validate(c);
  return c;
}

CaseConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config '" + path + "'");
  return parse_config(in);
}

void write_config(const CaseConfig& c, std::ostream& out) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto list = [](const auto& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
    return s;
  };
  out << "case.equation = " << c.tag() << '\n';
  out << "case.alpha = " << to_string(c.alpha) << '\n';
  out << "case.a_min = " << num(c.a_min) << '\n';
  out << "case.a_max = " << num(c.a_max) << '\n';
  out << "case.noise = " << num(c.noise) << '\n';
  out << "case.samples = " << c.samples << '\n';
  out << "case.test_samples = " << c.test_samples << '\n';
  out << "case.observed_fraction = " << num(c.observed_fraction) << '\n';
  out << "grid.shape = " << list(c.shape) << '\n';
  out << "grid.domain = " << num(c.domain_lo) << ':' << num(c.domain_hi) << '\n';
  out << "grid.boundary = " << (c.boundary == BoundaryLayout::Dirichlet ? "dirichlet" : "dirichlet-neumann") << '\n';
  out << "time.dt = " << num(c.dt) << '\n';
  out << "time.train_frames = " << c.train_frames << '\n';
  out << "time.test_frames = " << c.test_frames << '\n';
  out << "net.layers = " << list(c.layers) << '\n';
  out << "net.activation = " << to_string(c.activation) << '\n';
  out << "net.input = " << to_string(c.input_mode) << '\n';
  out << "net.footprint = " << to_string(c.footprint) << '\n';
  out << "train.depth_N = " << c.depth << '\n';
  out << "train.seed = " << c.seed << '\n';
  out << "train.tolerance = " << num(c.tolerance) << '\n';
  out << "train.qn_iters = " << c.qn_iters << '\n';
  out << "train.adam_iters = " << c.adam_iters << '\n';
  out << "train.max_rounds = " << c.max_rounds << '\n';
  out << "train.jitter = " << num(c.jitter) << '\n';
  out << "train.init_center = " << num(c.init_center) << '\n';
  out << "train.solver = " << to_string(c.backend) << '\n';
  out << "eval.epsilon = " << num(c.epsilon) << '\n';
  out << "eval.max_steps = " << c.max_steps << '\n';
}

std::uint64_t substream(std::uint64_t seed, const std::string& name, std::uint64_t index) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  // splitmix64 finalizer over the mixed key
  std::uint64_t z = seed ^ h;
  z += 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace fcpde
