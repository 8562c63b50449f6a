#ifndef FCPDE_DATAGEN_HPP
#define FCPDE_DATAGEN_HPP

#include "fcpde/assembly.hpp"
#include "fcpde/config.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fcpde {

/// Classical solver failed to reach its tolerance.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, int iterations)
      : std::runtime_error(what), iterations_(iterations) {}
  int iterations() const { return iterations_; }

 private:
  int iterations_;
};

double alpha_value(AlphaLaw law, double x, double p);
/// d alpha / d x (zero for position-only laws).
double alpha_dx(AlphaLaw law, double x, double p);

/// Canonical constant-coefficient operator in grid units: (-1, 2, -1) in 1D,
/// (-1, -1, 4, -1, -1) in 2D. Zero outside interior cells.
Eigen::VectorXd apply_canonical(const Grid& grid, const Eigen::VectorXd& x);

/// Flux-form rows of div(alpha grad x) scaled by -h^2, so that a grid-unit
/// right-hand side b_grid = -h^2 b reproduces the physical problem. Face
/// coefficients are arithmetic means of alpha at the two adjacent cells.
StencilFunction alpha_stencil(AlphaLaw law, const Footprint& footprint);

struct ClassicalPicard {
  std::vector<Eigen::VectorXd> iterates;
  bool converged = false;
};

/// Classical Picard for div(alpha grad x) = b with physical b, assembled on
/// its own (face averaging, identity boundary rows, one-sided Neumann rows).
ClassicalPicard classical_picard(const Grid& grid, AlphaLaw law, const Field& b,
                                 const BoundaryConditions& bc, const Eigen::VectorXd& x0,
                                 int max_iterations, double tolerance);

/// Solves div(alpha grad x) = b. One solve when alpha does not depend on x,
/// otherwise classical Picard to 1e-12 with a cap of 200 iterations.
Field solve_poisson(const Grid& grid, AlphaLaw law, const Field& b, const BoundaryConditions& bc);

/// Damped Newton on the same discretization; used as a second oracle.
Field solve_poisson_newton(const Grid& grid, AlphaLaw law, const Field& b,
                           const BoundaryConditions& bc, double tolerance = 1e-13);

/// Physical residual of the flux-form discretization at stencil rows, and of
/// the boundary equations elsewhere.
Eigen::VectorXd poisson_residual(const Grid& grid, AlphaLaw law, const Eigen::VectorXd& x,
                                 const Field& b, const BoundaryConditions& bc);

/// lap x + x = 0 with Dirichlet data, 5-point Laplacian, one solve.
Field solve_helmholtz(const Grid& grid, const BoundaryConditions& bc);

/// Source value at frame n; an empty function means no source.
using WaveSource = std::function<double(int frame)>;
WaveSource sine_source(double dt);

/// Leapfrog x_next = 2 x_curr - x_prev + dt^2 lap x_curr with zero Dirichlet
/// boundary; the center cell is then overwritten by source(frame).
Field step_wave(const Field& x_prev, const Field& x_curr, double dt, const WaveSource& source,
                int frame);

/// Discrete energy between two consecutive leapfrog frames; conserved exactly
/// by the scheme without a source.
double wave_energy(const Field& x_curr, const Field& x_next, double dt);

Index center_cell(const Grid& grid);

/// Staggered velocity stored on cells: channel 0 is u on the face right of
/// cell (i, j), channel 1 is v on the face above it. Faces touching the
/// boundary layer are held at zero.
Eigen::VectorXd divergence(const Field& velocity);

/// Semi-Lagrangian advection of both velocity components by themselves.
Field advect(const Field& velocity, double dt);

/// Maps a grid-unit pressure right-hand side (zero Dirichlet boundary) to
/// the pressure at every cell.
using Projector = std::function<Eigen::VectorXd(const Field& b)>;
Projector classical_projector(const Grid& grid);

struct InflowPatch {
  Index i0 = 1;
  Index j0 = 1;
  Index size = 3;
  double strength = 1.0;
};

/// Pressure problem solved during one projection.
struct ProjectionRecord {
  Field b;
  Field pressure;
};

/// Advection, body force, inflow patch, then projection.
Field ns_step(const Field& velocity, double dt, const Field& body_force, const Projector& projector,
              const InflowPatch* inflow = nullptr, ProjectionRecord* record = nullptr);

/// field + uniform noise in +-(scale * max|field|).
Field add_noise(const Field& field, double scale, std::uint64_t seed);

struct Sample {
  Field b;
  BoundaryConditions bc;
  Field target;
  /// Target before noise; evaluation only.
  Field clean;
};

struct Dataset {
  std::string tag;
  Grid grid;
  int channels = 1;
  std::vector<Sample> samples;
};

enum class DatasetRole { Train, Test };

/// Coefficients a of a case, distinct within the role and, for the test
/// role, disjoint from the training draws.
std::vector<double> sample_coefficients(const CaseConfig& config, DatasetRole role);

/// Boundary data and pinned cells implied by a case for one coefficient.
BoundaryConditions case_boundary(const CaseConfig& config, double a);

/// Cells the case pins (the wave source).
std::vector<Index> pinned_cells(const std::string& tag, const Grid& grid);

/// Full wave history x^0 .. x^count from rest.
std::vector<Field> wave_frames(const CaseConfig& config, int count);

/// One row per projection of a classical run from rest.
struct FluidRun {
  std::vector<Field> velocities;  // velocities[n] after n steps
  std::vector<ProjectionRecord> projections;
  double max_divergence = 0.0;
};
FluidRun fluid_run(const CaseConfig& config, int steps, const Projector& projector);

Dataset make_dataset(const CaseConfig& config, DatasetRole role = DatasetRole::Train);

}  // namespace fcpde

#endif  // FCPDE_DATAGEN_HPP
