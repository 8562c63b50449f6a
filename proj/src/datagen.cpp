#include "fcpde/datagen.hpp"

#include "fcpde/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace fcpde {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

std::vector<Index> face_neighbors(const Grid& grid, Index cell) {
  if (grid.rank() == 1) return {cell - 1, cell + 1};
  return {cell - grid.nu(), cell - 1, cell + 1, cell + grid.nu()};
}

double coord(const Grid& grid, Index cell) { return grid.position(cell)[0]; }

double face_alpha(AlphaLaw law, const Grid& grid, const Eigen::VectorXd& x, Index c, Index nb) {
  return 0.5 * (alpha_value(law, x[c], coord(grid, c)) + alpha_value(law, x[nb], coord(grid, nb)));
}

bool depends_on_x(AlphaLaw law) {
  return law == AlphaLaw::OnePlusXSquared || law == AlphaLaw::OnePlusAbsXSin;
}

void boundary_row(const Grid& grid, const BoundaryConditions& bc, Index c, Triplets& t) {
  t.emplace_back(c, c, 1.0);
  if (row_kind(grid, bc, c) == RowKind::Neumann) t.emplace_back(c, grid.inward_neighbor(c), -1.0);
}

RowMatrix to_matrix(const Grid& grid, const Triplets& t) {
  RowMatrix::Storage a(grid.cell_count(), grid.cell_count());
  a.setFromTriplets(t.begin(), t.end());
  return RowMatrix(grid, std::move(a));
}

// Frozen-coefficient flux-form operator in physical units.
RowMatrix classical_operator(const Grid& grid, AlphaLaw law, const Eigen::VectorXd& x,
                             const BoundaryConditions& bc) {
  const double h2 = grid.cell_size() * grid.cell_size();
  Triplets t;
  for (Index c = 0; c < grid.cell_count(); ++c) {
    if (row_kind(grid, bc, c) != RowKind::Stencil) {
      boundary_row(grid, bc, c, t);
      continue;
    }
    double diag = 0.0;
    for (Index nb : face_neighbors(grid, c)) {
      const double af = face_alpha(law, grid, x, c, nb) / h2;
      t.emplace_back(c, nb, af);
      diag -= af;
    }
    t.emplace_back(c, c, diag);
  }
  return to_matrix(grid, t);
}

Eigen::VectorXd classical_rhs(const Grid& grid, const Field& b, const BoundaryConditions& bc) {
  Eigen::VectorXd rhs(grid.cell_count());
  for (Index c = 0; c < grid.cell_count(); ++c) {
    rhs[c] = row_kind(grid, bc, c) == RowKind::Stencil ? b.values[c] : bc.values[c];
  }
  return rhs;
}

Eigen::VectorXd boundary_start(const Grid& grid, const BoundaryConditions& bc) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(grid.cell_count());
  for (Index c = 0; c < grid.cell_count(); ++c) {
    if (row_kind(grid, bc, c) == RowKind::Fixed) x[c] = bc.values[c];
  }
  return x;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Clamped bilinear lookup of one staggered velocity component.
double sample_component(const Grid& grid, const Eigen::VectorXd& comp, double fi, double fj) {
  const double imax = static_cast<double>(grid.nu() - 1);
  const double jmax = static_cast<double>(grid.nv() - 1);
  fi = std::clamp(fi, 0.0, imax);
  fj = std::clamp(fj, 0.0, jmax);
  const Index i0 = std::min(static_cast<Index>(fi), grid.nu() - 2);
  const Index j0 = std::min(static_cast<Index>(fj), grid.nv() - 2);
  const double s = fi - static_cast<double>(i0);
  const double r = fj - static_cast<double>(j0);
  const auto at = [&](Index i, Index j) { return comp[grid.index(i, j)]; };
  return (1 - s) * (1 - r) * at(i0, j0) + s * (1 - r) * at(i0 + 1, j0) + (1 - s) * r * at(i0, j0 + 1) +
         s * r * at(i0 + 1, j0 + 1);
}

struct VelocitySampler {
  const Grid& grid;
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  double h;
  double ox;
  double oy;

  explicit VelocitySampler(const Field& vel)
      : grid(vel.grid), u(vel.channel(0)), v(vel.channel(1)), h(vel.grid.cell_size()),
        ox(vel.grid.origin()[0]), oy(vel.grid.origin()[1]) {}

  double su(double x, double y) const { return sample_component(grid, u, (x - ox) / h - 0.5, (y - oy) / h); }
  double sv(double x, double y) const { return sample_component(grid, v, (x - ox) / h, (y - oy) / h - 0.5); }
};

bool active_u(const Grid& g, Index i, Index j) { return i <= g.nu() - 2 && j >= 1 && j <= g.nv() - 2; }
bool active_v(const Grid& g, Index i, Index j) { return j <= g.nv() - 2 && i >= 1 && i <= g.nu() - 2; }

bool manufactured(Equation e) {
  return e == Equation::Poisson1DConstant || e == Equation::Poisson1DSine || e == Equation::Poisson2DCubic ||
         e == Equation::Poisson2DSine;
}

double manufactured_target(const CaseConfig& config, double a, const Eigen::Vector2d& p) {
  switch (config.equation) {
    case Equation::Poisson1DConstant: return (a * p[0]) * (a * p[0]);
    case Equation::Poisson1DSine: return std::sin(a * p[0]);
    case Equation::Poisson2DCubic: return std::pow(a * p[0], 3) + a * p[1] * p[1];
    case Equation::Poisson2DSine: return std::sin(a * p[0] + a * p[1]);
    default: throw std::logic_error("case has no closed-form target");
  }
}

}  // namespace

double alpha_value(AlphaLaw law, double x, double p) {
  switch (law) {
    case AlphaLaw::One: return 1.0;
    case AlphaLaw::OnePlusAbsPiP: return 1.0 + std::abs(std::numbers::pi * p);
    case AlphaLaw::OnePlusXSquared: return 1.0 + x * x;
    case AlphaLaw::OnePlusAbsXSin: return 1.0 + std::abs(x) + std::sin(0.001 * std::abs(x));
  }
  return 1.0;
}

double alpha_dx(AlphaLaw law, double x, double) {
  switch (law) {
    case AlphaLaw::OnePlusXSquared: return 2.0 * x;
    case AlphaLaw::OnePlusAbsXSin: {
      const double s = (x > 0) - (x < 0);
      return s * (1.0 + 0.001 * std::cos(0.001 * std::abs(x)));
    }
    default: return 0.0;
  }
}

Eigen::VectorXd apply_canonical(const Grid& grid, const Eigen::VectorXd& x) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.cell_count());
  for (Index c : grid.interior_cells()) {
    double acc = 2.0 * grid.rank() * x[c];
    for (Index nb : face_neighbors(grid, c)) acc -= x[nb];
    out[c] = acc;
  }
  return out;
}

StencilFunction alpha_stencil(AlphaLaw law, const Footprint& footprint) {
  return [law, footprint](const Field& x, Index cell, Eigen::Ref<Eigen::VectorXd> row) {
    const Grid& grid = x.grid;
    row.setZero();
    const auto cells = neighborhood(grid, footprint, cell);
    const auto& offsets = footprint.offsets();
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      if (std::abs(offsets[k][0]) + std::abs(offsets[k][1]) != 1) continue;
      const double af = face_alpha(law, grid, x.values, cell, cells[k]);
      row[static_cast<Index>(k)] = -af;
      row[footprint.center()] += af;
    }
  };
}

ClassicalPicard classical_picard(const Grid& grid, AlphaLaw law, const Field& b,
                                 const BoundaryConditions& bc, const Eigen::VectorXd& x0,
                                 int max_iterations, double tolerance) {
  ClassicalPicard out;
  out.iterates.push_back(x0);
  const Eigen::VectorXd rhs = classical_rhs(grid, b, bc);
  for (int k = 0; k < max_iterations; ++k) {
    const Eigen::VectorXd& x = out.iterates.back();
    Eigen::VectorXd next = solve(classical_operator(grid, law, x, bc), rhs);
    const double step = (next - x).lpNorm<Eigen::Infinity>();
    out.iterates.push_back(std::move(next));
    if (step <= tolerance) {
      out.converged = true;
      break;
    }
  }
  return out;
}

Field solve_poisson(const Grid& grid, AlphaLaw law, const Field& b, const BoundaryConditions& bc) {
  const Eigen::VectorXd x0 = boundary_start(grid, bc);
  if (!depends_on_x(law)) {
    return Field(grid, solve(classical_operator(grid, law, x0, bc), classical_rhs(grid, b, bc)));
  }
  constexpr int kCap = 200;
  auto run = classical_picard(grid, law, b, bc, x0, kCap, 1e-12);
  if (!run.converged) throw NonConvergence("classical Picard did not converge in 200 iterations", kCap);
  return Field(grid, run.iterates.back());
}

Eigen::VectorXd poisson_residual(const Grid& grid, AlphaLaw law, const Eigen::VectorXd& x,
                                 const Field& b, const BoundaryConditions& bc) {
  const double h2 = grid.cell_size() * grid.cell_size();
  Eigen::VectorXd r(grid.cell_count());
  for (Index c = 0; c < grid.cell_count(); ++c) {
    switch (row_kind(grid, bc, c)) {
      case RowKind::Fixed: r[c] = x[c] - bc.values[c]; break;
      case RowKind::Neumann: r[c] = x[c] - x[grid.inward_neighbor(c)] - bc.values[c]; break;
      case RowKind::Stencil: {
        double acc = 0.0;
        for (Index nb : face_neighbors(grid, c)) acc += face_alpha(law, grid, x, c, nb) * (x[nb] - x[c]);
        r[c] = acc / h2 - b.values[c];
        break;
      }
    }
  }
  return r;
}

Field solve_poisson_newton(const Grid& grid, AlphaLaw law, const Field& b, const BoundaryConditions& bc,
                           double tolerance) {
  const double h2 = grid.cell_size() * grid.cell_size();
  Eigen::VectorXd x = boundary_start(grid, bc);
  Eigen::VectorXd r = poisson_residual(grid, law, x, b, bc);
  constexpr int kCap = 100;
  for (int it = 0; it < kCap; ++it) {
    Triplets t;
    for (Index c = 0; c < grid.cell_count(); ++c) {
      if (row_kind(grid, bc, c) != RowKind::Stencil) {
        boundary_row(grid, bc, c, t);
        continue;
      }
      double diag = 0.0;
      for (Index nb : face_neighbors(grid, c)) {
        const double af = face_alpha(law, grid, x, c, nb);
        const double diff = x[nb] - x[c];
        diag += 0.5 * alpha_dx(law, x[c], coord(grid, c)) * diff - af;
        t.emplace_back(c, nb, (0.5 * alpha_dx(law, x[nb], coord(grid, nb)) * diff + af) / h2);
      }
      t.emplace_back(c, c, diag / h2);
    }
    const Eigen::VectorXd delta = -solve(to_matrix(grid, t), r);
    const double r0 = r.norm();
    double step = 1.0;
    Eigen::VectorXd trial = x + delta;
    Eigen::VectorXd rt = poisson_residual(grid, law, trial, b, bc);
    while (rt.norm() > (1.0 - 1e-4 * step) * r0 && step > 1e-6) {
      step *= 0.5;
      trial = x + step * delta;
      rt = poisson_residual(grid, law, trial, b, bc);
    }
    x = std::move(trial);
    r = std::move(rt);
    if (step * delta.lpNorm<Eigen::Infinity>() <= tolerance * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
      return Field(grid, x);
    }
  }
  throw NonConvergence("damped Newton did not converge", kCap);
}

Field solve_helmholtz(const Grid& grid, const BoundaryConditions& bc) {
  if (grid.rank() != 2) throw std::invalid_argument("Helmholtz cases are two-dimensional");
  const double h2 = grid.cell_size() * grid.cell_size();
  Triplets t;
  for (Index c = 0; c < grid.cell_count(); ++c) {
    if (row_kind(grid, bc, c) != RowKind::Stencil) {
      boundary_row(grid, bc, c, t);
      continue;
    }
    for (Index nb : face_neighbors(grid, c)) t.emplace_back(c, nb, 1.0 / h2);
    t.emplace_back(c, c, 1.0 - 4.0 / h2);
  }
  const Field zero(grid);
  return Field(grid, solve(to_matrix(grid, t), classical_rhs(grid, zero, bc)));
}

WaveSource sine_source(double dt) {
  return [dt](int n) { return std::sin(60.0 * n * dt); };
}

Index center_cell(const Grid& grid) { return grid.index(grid.nu() / 2, grid.rank() == 2 ? grid.nv() / 2 : 0); }

Field step_wave(const Field& x_prev, const Field& x_curr, double dt, const WaveSource& source, int frame) {
  const Grid& grid = x_curr.grid;
  const double s = dt * dt / (grid.cell_size() * grid.cell_size());
  Field next(grid);
  for (Index c : grid.interior_cells()) {
    double lap = -2.0 * grid.rank() * x_curr.values[c];
    for (Index nb : face_neighbors(grid, c)) lap += x_curr.values[nb];
    next.values[c] = 2.0 * x_curr.values[c] - x_prev.values[c] + s * lap;
  }
  if (source) next.values[center_cell(grid)] = source(frame);
  return next;
}

double wave_energy(const Field& x_curr, const Field& x_next, double dt) {
  const Grid& grid = x_curr.grid;
  const double h2 = grid.cell_size() * grid.cell_size();
  double kinetic = 0.0;
  double potential = 0.0;
  for (Index c : grid.interior_cells()) {
    const double vel = (x_next.values[c] - x_curr.values[c]) / dt;
    kinetic += vel * vel;
    double lap = -2.0 * grid.rank() * x_curr.values[c];
    for (Index nb : face_neighbors(grid, c)) lap += x_curr.values[nb];
    potential -= x_next.values[c] * lap / h2;
  }
  return 0.5 * (kinetic + potential);
}

Eigen::VectorXd divergence(const Field& velocity) {
  const Grid& g = velocity.grid;
  const auto u = velocity.channel(0);
  const auto v = velocity.channel(1);
  Eigen::VectorXd div = Eigen::VectorXd::Zero(g.cell_count());
  for (Index c : g.interior_cells()) {
    div[c] = (u[c] - u[c - 1] + v[c] - v[c - g.nu()]) / g.cell_size();
  }
  return div;
}

Field advect(const Field& velocity, double dt) {
  if (velocity.channels != 2 || velocity.grid.rank() != 2) {
    throw std::invalid_argument("advection expects a two-channel 2D velocity");
  }
  const Grid& g = velocity.grid;
  const VelocitySampler s(velocity);
  const double h = g.cell_size();
  Field out(g, 2);
  for (Index j = 0; j < g.nv(); ++j) {
    for (Index i = 0; i < g.nu(); ++i) {
      const Index c = g.index(i, j);
      const double xu = s.ox + (i + 0.5) * h, yu = s.oy + j * h;
      out.values[c] = s.su(xu - dt * s.su(xu, yu), yu - dt * s.sv(xu, yu));
      const double xv = s.ox + i * h, yv = s.oy + (j + 0.5) * h;
      out.values[g.cell_count() + c] = s.sv(xv - dt * s.su(xv, yv), yv - dt * s.sv(xv, yv));
    }
  }
  return out;
}

Projector classical_projector(const Grid& grid) {
  Triplets t;
  const BoundaryConditions bc(grid);
  for (Index c = 0; c < grid.cell_count(); ++c) {
    if (!grid.is_interior(c)) {
      t.emplace_back(c, c, 1.0);
      continue;
    }
    for (Index nb : face_neighbors(grid, c)) t.emplace_back(c, nb, -1.0);
    t.emplace_back(c, c, 2.0 * grid.rank());
  }
  auto solver = std::make_shared<const LinearSolver>(to_matrix(grid, t));
  return [solver, bc](const Field& b) { return solver->solve(assemble_rhs(b, bc)); };
}

Field ns_step(const Field& velocity, double dt, const Field& body_force, const Projector& projector,
              const InflowPatch* inflow, ProjectionRecord* record) {
  const Grid& g = velocity.grid;
  Field w = advect(velocity, dt);
  w.values += dt * body_force.values;
  if (inflow) {
    for (Index j = inflow->j0; j < inflow->j0 + inflow->size; ++j) {
      for (Index i = inflow->i0; i < inflow->i0 + inflow->size; ++i) {
        w.values[g.index(i, j)] = inflow->strength;
        w.values[g.cell_count() + g.index(i, j)] = inflow->strength;
      }
    }
  }
  for (Index j = 0; j < g.nv(); ++j) {
    for (Index i = 0; i < g.nu(); ++i) {
      if (!active_u(g, i, j)) w.values[g.index(i, j)] = 0.0;
      if (!active_v(g, i, j)) w.values[g.cell_count() + g.index(i, j)] = 0.0;
    }
  }
  const double h = g.cell_size();
  Field b(g, Eigen::VectorXd(-h * h * divergence(w)));
  const Eigen::VectorXd p = projector(b);
  if (p.size() != g.cell_count() || !p.allFinite()) throw std::runtime_error("projection solve failed");
  for (Index j = 0; j < g.nv(); ++j) {
    for (Index i = 0; i < g.nu(); ++i) {
      const Index c = g.index(i, j);
      if (active_u(g, i, j)) w.values[c] -= (p[c + 1] - p[c]) / h;
      if (active_v(g, i, j)) w.values[g.cell_count() + c] -= (p[c + g.nu()] - p[c]) / h;
    }
  }
  if (record) {
    record->b = b;
    record->pressure = Field(g, p);
  }
  return w;
}

Field add_noise(const Field& field, double scale, std::uint64_t seed) {
  if (!(scale >= 0.0)) throw std::invalid_argument("noise scale must be non-negative");
  Field out = field;
  if (scale == 0.0) return out;
  const double amp = scale * field.values.cwiseAbs().maxCoeff();
  std::mt19937_64 rng(seed);
  for (Index k = 0; k < out.values.size(); ++k) out.values[k] += amp * (2.0 * uniform01(rng) - 1.0);
  return out;
}

std::vector<double> sample_coefficients(const CaseConfig& config, DatasetRole role) {
  if (config.time_dependent()) {
    std::vector<double> frames;
    for (int k = 0; k < config.samples; ++k) frames.push_back(k + 1);
    return frames;
  }
  auto draw = [&](const char* stream, int count, const std::vector<double>& avoid) {
    std::mt19937_64 rng(substream(config.seed, stream));
    std::vector<double> out;
    while (static_cast<int>(out.size()) < count) {
      const double a = config.a_min + (config.a_max - config.a_min) * uniform01(rng);
      auto clash = [a](double o) { return std::abs(o - a) < 1e-9; };
      if (std::any_of(out.begin(), out.end(), clash) || std::any_of(avoid.begin(), avoid.end(), clash)) continue;
      out.push_back(a);
    }
    return out;
  };
  const auto train = draw("data", config.samples, {});
  if (role == DatasetRole::Train) return train;
  return draw("test", config.test_samples, train);
}

std::vector<Index> pinned_cells(const std::string& tag, const Grid& grid) {
  if (tag == "wave") return {center_cell(grid)};
  return {};
}

BoundaryConditions case_boundary(const CaseConfig& config, double a) {
  const Grid grid = config.grid();
  BoundaryConditions bc(grid);
  for (Index c : grid.boundary_cells()) {
    const Eigen::Vector2d p = grid.position(c);
    double value = 0.0;
    switch (config.equation) {
      case Equation::Poisson1DConstant:
      case Equation::Poisson1DSine:
      case Equation::Poisson2DCubic:
      case Equation::Poisson2DSine:
        value = manufactured_target(config, a, p);
        break;
      case Equation::Poisson1DNeumann:
        value = grid.iu(c) == 0 ? a : (1.0 - a) * grid.cell_size();
        break;
      case Equation::Poisson1DVarying:
        value = grid.iu(c) == 0 ? a : 1.0 - a;
        break;
      case Equation::Poisson1DNonlinear:
        value = grid.iu(c) == 0 ? a : 3.0 - a;
        break;
      case Equation::HelmholtzReciprocal:
        value = -a / (p[0] * p[0] + p[1] * p[1]);
        break;
      case Equation::HelmholtzSine:
        value = a * std::sin(0.02 * p[0] + 0.02 * p[1]);
        break;
      case Equation::Wave:
      case Equation::NavierStokes:
        break;
    }
    bc.values[c] = value;
  }
  for (Index c : pinned_cells(config.tag(), grid)) bc.pin(c);
  return bc;
}

std::vector<Field> wave_frames(const CaseConfig& config, int count) {
  const Grid grid = config.grid();
  const WaveSource source = sine_source(config.dt);
  std::vector<Field> frames{Field(grid)};
  Field prev(grid);
  for (int n = 1; n <= count; ++n) {
    Field next = step_wave(prev, frames.back(), config.dt, source, n);
    prev = frames.back();
    frames.push_back(std::move(next));
  }
  return frames;
}

FluidRun fluid_run(const CaseConfig& config, int steps, const Projector& projector) {
  const Grid grid = config.grid();
  const Field force(grid, 2);
  const InflowPatch inflow;
  FluidRun run;
  run.velocities.emplace_back(grid, 2);
  for (int n = 0; n < steps; ++n) {
    ProjectionRecord rec{Field(grid), Field(grid)};
    run.velocities.push_back(ns_step(run.velocities.back(), config.dt, force, projector, &inflow, &rec));
    run.projections.push_back(std::move(rec));
    run.max_divergence =
        std::max(run.max_divergence, divergence(run.velocities.back()).lpNorm<Eigen::Infinity>());
  }
  return run;
}

Dataset make_dataset(const CaseConfig& config, DatasetRole role) {
  validate(config);
  const Grid grid = config.grid();
  Dataset ds{config.tag(), grid, 1, {}};
  if (config.time_dependent() && role == DatasetRole::Test) {
    throw std::invalid_argument("time-dependent cases are evaluated by rollout");
  }

  if (config.equation == Equation::Wave) {
    // Sample k relates three consecutive frames: A(x^{n-1}) x^{n-1} = x^n + x^{n-2}.
    const auto frames = wave_frames(config, config.samples + 1);
    const Index center = center_cell(grid);
    for (int k = 1; k <= config.samples; ++k) {
      const int n = k + 1;
      BoundaryConditions bc = case_boundary(config, 0.0);
      bc.values[center] = frames[n - 1].values[center];
      Field b(grid, Eigen::VectorXd(frames[n].values + frames[n - 2].values));
      ds.samples.push_back({std::move(b), std::move(bc), frames[n - 1], frames[n - 1]});
    }
    return ds;
  }
  if (config.equation == Equation::NavierStokes) {
    const auto run = fluid_run(config, config.samples, classical_projector(grid));
    for (const auto& rec : run.projections) {
      ds.samples.push_back({rec.b, case_boundary(config, 0.0), rec.pressure, rec.pressure});
    }
    return ds;
  }

  const auto coeffs = sample_coefficients(config, role);
  const char* noise_stream = role == DatasetRole::Train ? "noise" : "test-noise";
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const double a = coeffs[k];
    BoundaryConditions bc = case_boundary(config, a);
    Field b(grid);
    Field clean(grid);
    if (manufactured(config.equation)) {
      for (Index c = 0; c < grid.cell_count(); ++c) clean.values[c] = manufactured_target(config, a, grid.position(c));
      b.values = apply_canonical(grid, clean.values);
    } else if (config.equation == Equation::HelmholtzReciprocal || config.equation == Equation::HelmholtzSine) {
      clean = solve_helmholtz(grid, bc);
    } else {
      clean = solve_poisson(grid, config.alpha, Field(grid), bc);
    }
    Field target = role == DatasetRole::Train ? add_noise(clean, config.noise, substream(config.seed, noise_stream, k))
                                              : clean;
    ds.samples.push_back({std::move(b), std::move(bc), std::move(target), std::move(clean)});
  }
  return ds;
}

}  // namespace fcpde
