#include "fcpde/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>
#include <ostream>
#include <random>

namespace fcpde {

namespace {

bool out_of_budget(const StageLimits& limits, long used) { return limits.budget >= 0 && used >= limits.budget; }

void record(StageResult& r, std::vector<HistoryEntry>* history, long offset, Stage stage, double loss,
            const Eigen::VectorXd& theta) {
  if (history) history->push_back({offset + r.evaluations, stage, loss});
  if (loss < r.best_loss || r.best_theta.size() == 0) {
    r.best_loss = std::min(loss, r.best_loss);
    r.best_theta = theta;
  }
}

struct MemoryPair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

Eigen::VectorXd two_loop(const std::deque<MemoryPair>& mem, const Eigen::VectorXd& g) {
  Eigen::VectorXd q = g;
  std::vector<double> alpha(mem.size());
  for (std::size_t k = mem.size(); k-- > 0;) {
    alpha[k] = mem[k].rho * mem[k].s.dot(q);
    q -= alpha[k] * mem[k].y;
  }
  if (!mem.empty()) q *= mem.back().s.dot(mem.back().y) / mem.back().y.squaredNorm();
  for (std::size_t k = 0; k < mem.size(); ++k) {
    const double beta = mem[k].rho * mem[k].y.dot(q);
    q += (alpha[k] - beta) * mem[k].s;
  }
  return -q;
}

template <class Step>
StageResult first_order_stage(const Eigen::VectorXd& theta, const LossAndGrad& f, const StageLimits& limits,
                              Stage stage, bool average_stop, Step&& step, std::vector<HistoryEntry>* history,
                              long offset) {
  StageResult r;
  r.theta = theta;
  Eigen::VectorXd g(theta.size());
  std::vector<double> losses;
  for (int it = 0; it < limits.max_iters && !out_of_budget(limits, r.evaluations); ++it) {
    const double loss = f(r.theta, g);
    ++r.evaluations;
    record(r, history, offset, stage, loss, r.theta);
    r.loss = loss;
    if (loss <= limits.loss_target) {
      r.reached_target = true;
      break;
    }
    losses.push_back(loss);
    const std::size_t n = losses.size();
    if (average_stop && n >= 100 && n % 50 == 0) {
      const double recent = std::accumulate(losses.end() - 50, losses.end(), 0.0) / 50.0;
      const double before = std::accumulate(losses.end() - 100, losses.end() - 50, 0.0) / 50.0;
      if (!(recent < before)) break;
    }
    step(r.theta, g);
    ++r.iterations;
  }
  return r;
}

}  // namespace

std::string to_string(Stage s) {
  switch (s) {
    case Stage::QuasiNewton: return "quasi-newton";
    case Stage::Adam: return "adam";
    case Stage::Momentum: return "momentum";
  }
  return "";
}

void adam_step(Eigen::VectorXd& theta, const Eigen::VectorXd& g, AdamState& st) {
  if (g.size() != theta.size()) throw std::invalid_argument("gradient size does not match parameters");
  if (st.m.size() != theta.size()) {
    st.m = Eigen::VectorXd::Zero(theta.size());
    st.v = Eigen::VectorXd::Zero(theta.size());
    st.step = 0;
  }
  ++st.step;
  st.m = st.beta1 * st.m + (1.0 - st.beta1) * g;
  st.v = st.beta2 * st.v + (1.0 - st.beta2) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  theta.array() -= st.lr * (st.m.array() / c1) / ((st.v.array() / c2).sqrt() + st.eps);
}

void momentum_step(Eigen::VectorXd& theta, const Eigen::VectorXd& g, MomentumState& st) {
  if (st.velocity.size() != theta.size()) st.velocity = Eigen::VectorXd::Zero(theta.size());
  st.velocity = st.momentum * st.velocity - st.lr * g;
  theta += st.velocity;
}

StageResult quasinewton_stage(const Eigen::VectorXd& theta, const LossAndGrad& f, const StageLimits& limits,
                              std::vector<HistoryEntry>* history, long offset) {
  constexpr std::size_t kMemory = 10;
  constexpr double kArmijo = 1e-4;
  constexpr double kCurvature = 0.1;
  constexpr int kBacktracks = 40;

  StageResult r;
  r.theta = theta;
  if (out_of_budget(limits, 0)) return r;
  Eigen::VectorXd g(theta.size());
  double loss = f(r.theta, g);
  ++r.evaluations;
  record(r, history, offset, Stage::QuasiNewton, loss, r.theta);
  r.loss = loss;
  if (!std::isfinite(loss)) {
    r.line_search_failed = true;
    return r;
  }

  std::deque<MemoryPair> mem;
  Eigen::VectorXd gt(theta.size());
  while (r.iterations < limits.max_iters) {
    if (loss <= limits.loss_target) {
      r.reached_target = true;
      break;
    }
    if (g.lpNorm<Eigen::Infinity>() <= limits.grad_tol || out_of_budget(limits, r.evaluations)) break;

    Eigen::VectorXd d = two_loop(mem, g);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      mem.clear();
      d = -g;
      slope = -g.squaredNorm();
    }
    // Armijo backtracking; curvature pairs with s.y <= 0 are skipped below.
    double t = mem.empty() ? std::min(1.0, 0.1 / d.lpNorm<Eigen::Infinity>()) : 1.0;
    bool accepted = false;
    Eigen::VectorXd trial;
    double trial_loss = 0.0;
    for (int k = 0; k < kBacktracks && !out_of_budget(limits, r.evaluations); ++k, t *= 0.5) {
      trial = r.theta + t * d;
      trial_loss = f(trial, gt);
      ++r.evaluations;
      if (std::isfinite(trial_loss) && trial_loss <= loss + kArmijo * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      r.line_search_failed = !out_of_budget(limits, r.evaluations);
      break;
    }
    // One secant step on the directional derivative when the accepted point
    // is far from stationary along d; exact on quadratics.
    const double end_slope = gt.dot(d);
    if (std::abs(end_slope) > kCurvature * std::abs(slope) && end_slope != slope &&
        !out_of_budget(limits, r.evaluations)) {
      const double ts = t * slope / (slope - end_slope);
      if (ts > 0.0 && std::isfinite(ts)) {
        Eigen::VectorXd g2(theta.size());
        Eigen::VectorXd refined = r.theta + ts * d;
        const double refined_loss = f(refined, g2);
        ++r.evaluations;
        if (std::isfinite(refined_loss) && refined_loss < trial_loss) {
          trial = std::move(refined);
          gt = std::move(g2);
          trial_loss = refined_loss;
        }
      }
    }
    MemoryPair pair{trial - r.theta, gt - g, 0.0};
    const double sy = pair.s.dot(pair.y);
    if (sy > 1e-12 * pair.s.norm() * pair.y.norm()) {
      pair.rho = 1.0 / sy;
      mem.push_back(std::move(pair));
      if (mem.size() > kMemory) mem.pop_front();
    }
    r.theta = trial;
    g = gt;
    loss = trial_loss;
    r.loss = loss;
    ++r.iterations;
    record(r, history, offset, Stage::QuasiNewton, loss, r.theta);
  }
  return r;
}

StageResult adam_stage(const Eigen::VectorXd& theta, const LossAndGrad& f, const StageLimits& limits,
                       AdamState& state, std::vector<HistoryEntry>* history, long offset) {
  return first_order_stage(
      theta, f, limits, Stage::Adam, true,
      [&state](Eigen::VectorXd& th, const Eigen::VectorXd& g) { adam_step(th, g, state); }, history, offset);
}

StageResult momentum_stage(const Eigen::VectorXd& theta, const LossAndGrad& f, const StageLimits& limits,
                           MomentumState& state, std::vector<HistoryEntry>* history, long offset) {
  return first_order_stage(
      theta, f, limits, Stage::Momentum, false,
      [&state](Eigen::VectorXd& th, const Eigen::VectorXd& g) { momentum_step(th, g, state); }, history,
      offset);
}

StencilModel initial_model(const CaseConfig& config) {
  StencilModel model = make_model(config.rank, config.layers, config.activation, config.input_mode,
                                  config.footprint, substream(config.seed, "init"));
  if (config.init_center != 0.0) {
    const int last = model.net.layer_count() - 1;
    model.net.params()[model.net.bias_offset(last) + model.footprint().center()] += config.init_center;
  }
  return model;
}

std::vector<Problem> build_problems(const CaseConfig& config, const Dataset& dataset) {
  if (!dataset.grid.same_layout(config.grid())) throw std::invalid_argument("dataset grid does not match case");
  std::vector<Problem> problems;
  std::mt19937_64 mask_rng(substream(config.seed, "mask"));
  for (std::size_t k = 0; k < dataset.samples.size(); ++k) {
    const Sample& s = dataset.samples[k];
    Problem p{s.b, s.bc, initial_guess(dataset.grid, s.bc, substream(config.seed, "x0", k)), s.target.values, {}};
    if (config.observed_fraction < 1.0) {
      p.mask.resize(dataset.grid.cell_count());
      for (Index c = 0; c < p.mask.size(); ++c) {
        p.mask[c] = static_cast<double>(mask_rng() >> 11) * 0x1.0p-53 < config.observed_fraction ? 1.0 : 0.0;
      }
    }
    problems.push_back(std::move(p));
  }
  return problems;
}

PicardOptions training_options(const CaseConfig& config) {
  PicardOptions opts;
  opts.depth = config.depth;
  opts.mode = PicardMode::Fixed;
  opts.backend = config.backend;
  return opts;
}

LossAndGrad make_objective(const StencilModel& model, const std::vector<Problem>& problems,
                           const PicardOptions& options) {
  return [m = model, &problems, options](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) mutable {
    m.net.set_params(theta);
    try {
      ObjectiveValue v = evaluate_objective(m, problems, options, true);
      if (!std::isfinite(v.loss) || !v.gradient.allFinite()) throw PicardError("non-finite loss", 0);
      grad = std::move(v.gradient);
      return v.loss;
    } catch (const PicardError&) {
      grad = Eigen::VectorXd::Zero(theta.size());
      return std::numeric_limits<double>::infinity();
    }
  };
}

TrainResult train(const CaseConfig& config, StencilModel model, const std::vector<Problem>& problems,
                  const TrainOptions& options) {
  TrainResult out;
  const LossAndGrad raw = make_objective(model, problems, training_options(config));
  const LossAndGrad f = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    const double loss = raw(theta, grad);
    if (options.on_gradient) options.on_gradient(theta, grad);
    return loss;
  };

  Eigen::VectorXd theta = model.net.params();
  Eigen::VectorXd best = theta;
  double best_loss = std::numeric_limits<double>::infinity();
  std::mt19937_64 jitter_rng(substream(config.seed, "jitter"));
  std::normal_distribution<double> normal(0.0, 1.0);

  auto absorb = [&](const StageResult& r) {
    out.evaluations += r.evaluations;
    if (r.best_theta.size() && r.best_loss < best_loss) {
      best_loss = r.best_loss;
      best = r.best_theta;
    }
    return r.reached_target || (options.budget >= 0 && out.evaluations >= options.budget);
  };
  auto limits = [&](int iters) {
    StageLimits l;
    l.max_iters = iters;
    l.loss_target = config.tolerance;
    l.budget = options.budget >= 0 ? options.budget - out.evaluations : -1;
    return l;
  };

  AdamState adam;
  MomentumState heavy;
  for (int round = 0; round < config.max_rounds; ++round) {
    out.rounds = round + 1;
    bool done = false;
    switch (options.schedule) {
      case Schedule::Hybrid: {
        StageResult qn = quasinewton_stage(theta, f, limits(config.qn_iters), &out.history, out.evaluations);
        if (absorb(qn)) {
          done = true;
          break;
        }
        theta = qn.theta;
        if (config.jitter > 0.0) {
          for (Index k = 0; k < theta.size(); ++k) theta[k] += config.jitter * normal(jitter_rng);
        }
        adam = AdamState{};
        StageResult ad = adam_stage(theta, f, limits(config.adam_iters), adam, &out.history, out.evaluations);
        done = absorb(ad);
        theta = ad.theta;
        break;
      }
      case Schedule::AdamOnly: {
        StageResult ad = adam_stage(theta, f, limits(config.adam_iters), adam, &out.history, out.evaluations);
        done = absorb(ad);
        theta = ad.theta;
        break;
      }
      case Schedule::MomentumOnly: {
        StageResult mo = momentum_stage(theta, f, limits(config.adam_iters), heavy, &out.history, out.evaluations);
        done = absorb(mo);
        theta = mo.theta;
        break;
      }
    }
    if (done) break;
  }

  if (out.history.empty()) {
    // no budget at all: report the untouched initial parameters
    Eigen::VectorXd g(theta.size());
    best_loss = raw(theta, g);
    best = theta;
    out.initial_loss = best_loss;
  } else {
    out.initial_loss = out.history.front().loss;
  }
  model.net.set_params(best);
  out.model = std::move(model);
  out.loss = best_loss;
  out.converged = best_loss <= config.tolerance;
  return out;
}

TrainResult train(const CaseConfig& config, const Dataset& dataset, const TrainOptions& options) {
  const auto problems = build_problems(config, dataset);
  return train(config, initial_model(config), problems, options);
}

void write_history_csv(const std::vector<HistoryEntry>& history, std::ostream& out) {
  out << "global_step,stage,loss\n";
  char buf[40];
  for (const auto& h : history) {
    std::snprintf(buf, sizeof buf, "%.17g", h.loss);
    out << h.global_step << ',' << to_string(h.stage) << ',' << buf << '\n';
  }
}

}  // namespace fcpde
