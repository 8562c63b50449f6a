#ifndef FCPDE_ASSEMBLY_HPP
#define FCPDE_ASSEMBLY_HPP

#include "fcpde/grid.hpp"
#include "fcpde/model.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <vector>

namespace fcpde {

/// Prescribed data for the non-interior rows of the full system.
///
/// values[cell] is the Dirichlet value at Dirichlet cells and the outward
/// normal difference x(cell) - x(inward) at Neumann cells. Pinned cells are
/// interior cells held at values[cell] (point sources).
class BoundaryConditions {
 public:
  BoundaryConditions() = default;
  explicit BoundaryConditions(const Grid& grid);
  BoundaryConditions(const Grid& grid, Eigen::VectorXd values);

  Eigen::VectorXd values;

  void pin(Index cell);
  bool is_pinned(Index cell) const {
    return !pinned_mask_.empty() && pinned_mask_[static_cast<std::size_t>(cell)] != 0;
  }
  const std::vector<Index>& pinned() const { return pinned_; }

 private:
  std::vector<Index> pinned_;
  std::vector<char> pinned_mask_;
};

enum class RowKind { Stencil, Fixed, Neumann };

RowKind row_kind(const Grid& grid, const BoundaryConditions& bc, Index cell);

/// Global operator stored row-wise: stencil rows at interior cells, identity
/// rows at Dirichlet and pinned cells, one-sided difference rows at Neumann
/// cells.
class RowMatrix {
 public:
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  RowMatrix(const Grid& grid, Storage storage);

  const Grid& grid() const { return grid_; }
  const Storage& sparse() const { return storage_; }
  Index size() const { return storage_.rows(); }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(storage_); }

  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const { return storage_ * x; }

 private:
  Grid grid_;
  Storage storage_;
};

/// Writes the stencil row of an interior cell given the current iterate.
using StencilFunction =
    std::function<void(const Field& x, Index cell, Eigen::Ref<Eigen::VectorXd> row)>;

/// Network input at an interior cell: footprint values, then footprint
/// positions when the model is position-aware.
Eigen::VectorXd network_input(const StencilModel& model, const Field& x, Index cell);

StencilFunction stencil_function(const StencilModel& model);

RowMatrix assemble(const StencilFunction& stencil, const Footprint& footprint, const Field& x,
                   const BoundaryConditions& bc);
RowMatrix assemble(const StencilModel& model, const Field& x, const BoundaryConditions& bc);

/// Right-hand side of the full system: b at stencil rows, prescribed values
/// elsewhere.
Eigen::VectorXd assemble_rhs(const Field& b, const BoundaryConditions& bc);

/// Per-row Jacobians of the stencil network at the same inputs assemble uses.
struct OperatorDerivatives {
  Index cell_count = 0;
  Index param_count = 0;
  std::vector<Index> rows;
  std::vector<std::vector<Index>> columns;
  /// d(stencil row) / d(footprint values), out x footprint.
  std::vector<Eigen::MatrixXd> d_values;
  /// d(stencil row) / d(theta), out x |theta|.
  std::vector<Eigen::MatrixXd> d_params;
};

OperatorDerivatives operator_derivatives(const StencilModel& model, const Field& x,
                                         const BoundaryConditions& bc);

/// Returns w^T d(A(x) x_next)/dx as a vector over cells.
Eigen::VectorXd apply_dAdx_transposed(const OperatorDerivatives& derivs,
                                      const Eigen::VectorXd& x_next, const Eigen::VectorXd& w);

/// Returns w^T d(A(theta) x_next)/dtheta as a vector over parameters.
Eigen::VectorXd apply_dAdtheta_transposed(const OperatorDerivatives& derivs,
                                          const Eigen::VectorXd& x_next,
                                          const Eigen::VectorXd& w);

/// Fused form of the two products above without materializing the per-row
/// Jacobians: adds w^T dA/dtheta x_next into grad_theta and w^T dA/dx x_next
/// into grad_x.
void accumulate_layer_adjoint(const StencilModel& model, const Field& x,
                              const BoundaryConditions& bc, const Eigen::VectorXd& x_next,
                              const Eigen::VectorXd& w, Eigen::VectorXd& grad_theta,
                              Eigen::VectorXd& grad_x);

}  // namespace fcpde

#endif  // FCPDE_ASSEMBLY_HPP
