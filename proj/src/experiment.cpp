#include "fcpde/experiment.hpp"

#include "fcpde/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace fcpde {

namespace {

double mse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (!a.allFinite()) return std::numeric_limits<double>::infinity();
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

void summarize(Evaluation& ev) {
  double sum = 0.0;
  for (const auto& t : ev.tests) {
    sum += t.mse;
    ev.max_mse = std::max(ev.max_mse, t.mse);
    ev.all_converged = ev.all_converged && t.converged;
  }
  ev.mean_mse = ev.tests.empty() ? 0.0 : sum / static_cast<double>(ev.tests.size());
}

Evaluation evaluate_static(const StencilModel& model, const CaseConfig& config, int n_tests) {
  CaseConfig test_config = config;
  if (n_tests > 0) test_config.test_samples = n_tests;
  const Dataset ds = make_dataset(test_config, DatasetRole::Test);
  const PicardOptions opts = inference_options(config);
  Evaluation ev;
  ev.tag = config.tag();
  for (std::size_t k = 0; k < ds.samples.size(); ++k) {
    const Sample& s = ds.samples[k];
    const Eigen::VectorXd x0 = initial_guess(ds.grid, s.bc, substream(config.seed, "test-x0", k));
    TestCase t{"test" + std::to_string(k), Field(ds.grid), s.clean};
    try {
      const Trajectory traj = picard_forward(model, s.b, s.bc, x0, opts);
      t.predicted.values = traj.final_state();
      t.steps = static_cast<int>(traj.depth());
      t.converged = traj.converged;
      t.final_residual = traj.residuals.back();
    } catch (const PicardError& e) {
      t.predicted.values.setConstant(std::numeric_limits<double>::quiet_NaN());
      t.steps = e.step();
      t.converged = false;
      t.final_residual = std::numeric_limits<double>::infinity();
    }
    t.mse = mse(t.predicted.values, t.truth.values);
    ev.tests.push_back(std::move(t));
  }
  summarize(ev);
  return ev;
}

Evaluation evaluate_wave(const StencilModel& model, const CaseConfig& config, int n_tests) {
  const int frames_out = n_tests > 0 ? n_tests : config.test_frames;
  const int first = config.train_frames + 1;  // last frame seen in training
  const auto truth = wave_frames(config, first + frames_out);
  const Grid grid = config.grid();
  const WaveSource source = sine_source(config.dt);
  const BoundaryConditions bc = case_boundary(config, 0.0);
  Evaluation ev;
  ev.tag = config.tag();
  Eigen::VectorXd prev = truth[static_cast<std::size_t>(first - 1)].values;
  Eigen::VectorXd curr = truth[static_cast<std::size_t>(first)].values;
  for (int n = first + 1; n <= first + frames_out; ++n) {
    Eigen::VectorXd next;
    if (curr.allFinite()) {
      next = assemble(model, Field(grid, curr), bc) * curr - prev;
      next[center_cell(grid)] = source(n);
    } else {
      next = curr;
    }
    TestCase t{"frame" + std::to_string(n), Field(grid, next), truth[static_cast<std::size_t>(n)]};
    t.mse = mse(next, t.truth.values);
    ev.tests.push_back(std::move(t));
    prev = std::move(curr);
    curr = std::move(next);
  }
  summarize(ev);
  return ev;
}

Evaluation evaluate_fluid(const StencilModel& model, const CaseConfig& config, int n_tests) {
  const int steps = n_tests > 0 ? n_tests : config.test_frames;
  const Grid grid = config.grid();
  const FluidRun reference = fluid_run(config, steps, classical_projector(grid));
  Evaluation ev;
  ev.tag = config.tag();
  ev.classical_divergence = reference.max_divergence;
  const Projector learned = learned_projector(model, config);
  const Field force(grid, 2);
  const InflowPatch inflow;
  Field vel(grid, 2);
  bool failed = false;
  for (int n = 1; n <= steps; ++n) {
    if (!failed) {
      try {
        vel = ns_step(vel, config.dt, force, learned, &inflow);
      } catch (const std::exception&) {
        failed = true;
      }
    }
    if (failed) vel.values.setConstant(std::numeric_limits<double>::quiet_NaN());
    TestCase t{"frame" + std::to_string(n), vel, reference.velocities[static_cast<std::size_t>(n)]};
    t.mse = mse(vel.values, t.truth.values);
    t.converged = !failed;
    ev.tests.push_back(std::move(t));
  }
  summarize(ev);
  return ev;
}

}  // namespace

void check_compatible(const StencilModel& model, const CaseConfig& config) {
  if (model.rank != config.rank || model.input_mode != config.input_mode ||
      model.footprint_shape != config.footprint || model.net.layer_sizes() != config.layers ||
      model.net.activation() != config.activation) {
    throw ConfigError("net.layers: model architecture does not match the config");
  }
}

PicardOptions inference_options(const CaseConfig& config) {
  PicardOptions opts;
  opts.depth = config.max_steps;
  opts.epsilon = config.epsilon;
  opts.mode = PicardMode::Converge;
  opts.backend = config.backend;
  opts.retain_steps = false;
  return opts;
}

Projector learned_projector(const StencilModel& model, const CaseConfig& config) {
  const Grid grid = config.grid();
  const BoundaryConditions bc(grid);
  const Eigen::VectorXd x0 = initial_guess(grid, bc, substream(config.seed, "test-x0"));
  const PicardOptions opts = inference_options(config);
  return [model, bc, x0, opts](const Field& b) {
    return picard_forward(model, b, bc, x0, opts).final_state();
  };
}

Evaluation evaluate(const StencilModel& model, const CaseConfig& config, int n_tests) {
  check_compatible(model, config);
  switch (config.equation) {
    case Equation::Wave: return evaluate_wave(model, config, n_tests);
    case Equation::NavierStokes: return evaluate_fluid(model, config, n_tests);
    default: return evaluate_static(model, config, n_tests);
  }
}

void write_dump(const TestCase& t, std::ostream& out) {
  const Grid& g = t.truth.grid;
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "fcpde-dump 1\n";
  out << "label " << t.label << '\n';
  out << "rank " << g.rank() << '\n';
  out << "shape " << g.nu() << ' ' << g.nv() << '\n';
  out << "cell_size " << num(g.cell_size()) << '\n';
  out << "origin " << num(g.origin()[0]) << ' ' << num(g.origin()[1]) << '\n';
  out << "channels " << t.truth.channels << '\n';
  out << "mse " << num(t.mse) << '\n';
  out << "predicted";
  for (Index k = 0; k < t.predicted.values.size(); ++k) out << ' ' << num(t.predicted.values[k]);
  out << "\ntrue";
  for (Index k = 0; k < t.truth.values.size(); ++k) out << ' ' << num(t.truth.values[k]);
  out << '\n';
}

TestCase read_dump(std::istream& in) {
  auto fail = [](const std::string& what) { return std::runtime_error("field dump: " + what); };
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != "fcpde-dump" || version != 1) throw fail("missing header");
  std::string label;
  int rank = 0, channels = 0;
  Index nu = 0, nv = 0;
  double h = 0.0, ou = 0.0, ov = 0.0, err = 0.0;
  if (!(in >> word >> label) || word != "label") throw fail("missing label");
  if (!(in >> word >> rank) || word != "rank") throw fail("missing rank");
  if (!(in >> word >> nu >> nv) || word != "shape") throw fail("missing shape");
  if (!(in >> word >> h) || word != "cell_size") throw fail("missing cell_size");
  if (!(in >> word >> ou >> ov) || word != "origin") throw fail("missing origin");
  if (!(in >> word >> channels) || word != "channels") throw fail("missing channels");
  std::string err_text;
  if (!(in >> word >> err_text) || word != "mse") throw fail("missing mse");
  err = std::strtod(err_text.c_str(), nullptr);
  if ((rank != 1 && rank != 2) || channels < 1 || nu < 3 || (rank == 1 ? nv != 1 : nv < 3) || !(h > 0.0)) {
    throw fail("bad geometry");
  }
  const Grid g(rank, {nu, nv}, h, {ou, ov},
               {BoundaryKind::Dirichlet, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet});
  const Index n = g.cell_count() * channels;
  auto block = [&](const char* name) {
    if (!(in >> word) || word != name) throw fail(std::string("missing ") + name);
    Eigen::VectorXd v(n);
    for (Index k = 0; k < n; ++k) {
      if (!(in >> word)) throw fail(std::string(name) + " truncated");
      v[k] = std::strtod(word.c_str(), nullptr);
    }
    return v;
  };
  Eigen::VectorXd pred = block("predicted");
  Eigen::VectorXd truth = block("true");
  TestCase t{label, Field(g, std::move(pred), channels), Field(g, std::move(truth), channels)};
  t.mse = err;
  return t;
}

void export_plot(const TestCase& t, std::ostream& out) {
  const Grid& g = t.truth.grid;
  char buf[128];
  if (g.rank() == 1) {
    out << "# coordinate predicted true abs_error\n";
    for (int ch = 0; ch < t.truth.channels; ++ch) {
      for (Index c = 0; c < g.cell_count(); ++c) {
        const double p = t.predicted.channel(ch)[c];
        const double y = t.truth.channel(ch)[c];
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g\n", g.position(c)[0], p, y, std::abs(p - y));
        out << buf;
      }
    }
    return;
  }
  const Eigen::VectorXd err = (t.predicted.values - t.truth.values).cwiseAbs();
  const std::pair<const char*, const Eigen::VectorXd*> blocks[] = {
      {"predicted", &t.predicted.values}, {"true", &t.truth.values}, {"abs_error", &err}};
  bool first = true;
  for (int ch = 0; ch < t.truth.channels; ++ch) {
    for (const auto& [name, values] : blocks) {
      if (!first) out << '\n';
      first = false;
      out << "# " << name;
      if (t.truth.channels > 1) out << " channel " << ch;
      out << '\n';
      for (Index j = 0; j < g.nv(); ++j) {
        for (Index i = 0; i < g.nu(); ++i) {
          std::snprintf(buf, sizeof buf, "%.17g", (*values)[ch * g.cell_count() + g.index(i, j)]);
          out << (i ? " " : "") << buf;
        }
        out << '\n';
      }
    }
  }
}

}  // namespace fcpde
