#include "fcpde/assembly.hpp"

#include <stdexcept>

namespace fcpde {

BoundaryConditions::BoundaryConditions(const Grid& grid)
    : values(Eigen::VectorXd::Zero(grid.cell_count())) {}

BoundaryConditions::BoundaryConditions(const Grid& grid, Eigen::VectorXd v) : values(std::move(v)) {
  if (values.size() != grid.cell_count()) {
    throw std::invalid_argument("boundary values must cover every cell");
  }
}

void BoundaryConditions::pin(Index cell) {
  if (cell < 0 || cell >= values.size()) throw std::out_of_range("pinned cell outside grid");
  if (pinned_mask_.empty()) pinned_mask_.assign(static_cast<std::size_t>(values.size()), 0);
  if (!pinned_mask_[static_cast<std::size_t>(cell)]) {
    pinned_mask_[static_cast<std::size_t>(cell)] = 1;
    pinned_.push_back(cell);
  }
}

RowKind row_kind(const Grid& grid, const BoundaryConditions& bc, Index cell) {
  if (bc.is_pinned(cell)) return RowKind::Fixed;
  switch (grid.kind(cell)) {
    case CellKind::Interior: return RowKind::Stencil;
    case CellKind::Dirichlet: return RowKind::Fixed;
    case CellKind::Neumann: return RowKind::Neumann;
  }
  return RowKind::Fixed;
}

RowMatrix::RowMatrix(const Grid& grid, Storage storage)
    : grid_(grid), storage_(std::move(storage)) {
  if (storage_.rows() != grid.cell_count() || storage_.cols() != grid.cell_count()) {
    throw std::invalid_argument("row matrix must be cell_count x cell_count");
  }
}

Eigen::VectorXd network_input(const StencilModel& model, const Field& x, Index cell) {
  const Footprint fp = model.footprint();
  Eigen::VectorXd values = gather(x, fp, cell);
  if (model.input_mode == InputMode::Values) return values;
  const Index n = fp.size();
  const int rank = x.grid.rank();
  Eigen::VectorXd in(values.size() + n * rank);
  in.head(values.size()) = values;
  const auto offsets = x.grid.flat_offsets(fp);
  for (Index k = 0; k < n; ++k) {
    const Eigen::Vector2d p = x.grid.position(cell + offsets[static_cast<std::size_t>(k)]);
    for (int r = 0; r < rank; ++r) in[values.size() + k * rank + r] = p[r];
  }
  return in;
}

StencilFunction stencil_function(const StencilModel& model) {
  return [&model](const Field& x, Index cell, Eigen::Ref<Eigen::VectorXd> row) {
    row = model.net.forward(network_input(model, x, cell));
  };
}

namespace {

void check_field(const Field& x, const BoundaryConditions& bc) {
  if (x.channels != 1) throw std::invalid_argument("operator unknown must be a scalar field");
  if (!x.all_finite()) throw std::invalid_argument("non-finite values in operator input field");
  if (bc.values.size() != x.grid.cell_count()) {
    throw std::invalid_argument("boundary values do not match grid");
  }
}

}  // namespace

RowMatrix assemble(const StencilFunction& stencil, const Footprint& footprint, const Field& x,
                   const BoundaryConditions& bc) {
  check_field(x, bc);
  const Grid& grid = x.grid;
  const auto offsets = grid.flat_offsets(footprint);
  const Index n = grid.cell_count();
  RowMatrix::Storage m(n, n);
  m.reserve(Eigen::VectorXi::Constant(n, static_cast<int>(footprint.size())));
  Eigen::VectorXd row(footprint.size());
  for (Index c = 0; c < n; ++c) {
    switch (row_kind(grid, bc, c)) {
      case RowKind::Stencil:
        stencil(x, c, row);
        for (Index k = 0; k < footprint.size(); ++k) {
          m.insert(c, c + offsets[static_cast<std::size_t>(k)]) = row[k];
        }
        break;
      case RowKind::Fixed:
        m.insert(c, c) = 1.0;
        break;
      case RowKind::Neumann: {
        const Index in = grid.inward_neighbor(c);
        m.insert(c, c) = 1.0;
        m.insert(c, in) = -1.0;
        break;
      }
    }
  }
  m.makeCompressed();
  return RowMatrix(grid, std::move(m));
}

RowMatrix assemble(const StencilModel& model, const Field& x, const BoundaryConditions& bc) {
  if (model.rank != x.grid.rank()) throw std::invalid_argument("model rank does not match grid");
  return assemble(stencil_function(model), model.footprint(), x, bc);
}

Eigen::VectorXd assemble_rhs(const Field& b, const BoundaryConditions& bc) {
  const Grid& grid = b.grid;
  if (b.channels != 1) throw std::invalid_argument("right-hand side must be a scalar field");
  if (bc.values.size() != grid.cell_count()) {
    throw std::invalid_argument("missing boundary values for right-hand side");
  }
  Eigen::VectorXd rhs(grid.cell_count());
  for (Index c = 0; c < grid.cell_count(); ++c) {
    rhs[c] = row_kind(grid, bc, c) == RowKind::Stencil ? b.values[c] : bc.values[c];
  }
  return rhs;
}

OperatorDerivatives operator_derivatives(const StencilModel& model, const Field& x,
                                         const BoundaryConditions& bc) {
  check_field(x, bc);
  const Grid& grid = x.grid;
  const Footprint fp = model.footprint();
  OperatorDerivatives d;
  d.cell_count = grid.cell_count();
  d.param_count = model.net.parameter_count();
  for (Index c = 0; c < grid.cell_count(); ++c) {
    if (row_kind(grid, bc, c) != RowKind::Stencil) continue;
    const Eigen::VectorXd in = network_input(model, x, c);
    d.rows.push_back(c);
    d.columns.push_back(neighborhood(grid, fp, c));
    d.d_values.push_back(model.net.jacobian_input(in).leftCols(fp.size()));
    d.d_params.push_back(model.net.jacobian_params(in));
  }
  return d;
}

namespace {

Eigen::VectorXd restrict_to(const Eigen::VectorXd& v, const std::vector<Index>& cols) {
  Eigen::VectorXd out(static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out[static_cast<Index>(k)] = v[cols[k]];
  return out;
}

}  // namespace

Eigen::VectorXd apply_dAdx_transposed(const OperatorDerivatives& derivs,
                                      const Eigen::VectorXd& x_next, const Eigen::VectorXd& w) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(derivs.cell_count);
  for (std::size_t r = 0; r < derivs.rows.size(); ++r) {
    const auto& cols = derivs.columns[r];
    const Eigen::VectorXd contrib =
        w[derivs.rows[r]] * (derivs.d_values[r].transpose() * restrict_to(x_next, cols));
    for (std::size_t k = 0; k < cols.size(); ++k) out[cols[k]] += contrib[static_cast<Index>(k)];
  }
  return out;
}

Eigen::VectorXd apply_dAdtheta_transposed(const OperatorDerivatives& derivs,
                                          const Eigen::VectorXd& x_next,
                                          const Eigen::VectorXd& w) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(derivs.param_count);
  for (std::size_t r = 0; r < derivs.rows.size(); ++r) {
    out += w[derivs.rows[r]] *
           (derivs.d_params[r].transpose() * restrict_to(x_next, derivs.columns[r]));
  }
  return out;
}

void accumulate_layer_adjoint(const StencilModel& model, const Field& x,
                              const BoundaryConditions& bc, const Eigen::VectorXd& x_next,
                              const Eigen::VectorXd& w, Eigen::VectorXd& grad_theta,
                              Eigen::VectorXd& grad_x) {
  check_field(x, bc);
  const Grid& grid = x.grid;
  const Footprint fp = model.footprint();
  const auto offsets = grid.flat_offsets(fp);
  const Index n = fp.size();
  Eigen::VectorXd v(n);
  for (Index c = 0; c < grid.cell_count(); ++c) {
    if (w[c] == 0.0 || row_kind(grid, bc, c) != RowKind::Stencil) continue;
    for (Index k = 0; k < n; ++k) v[k] = w[c] * x_next[c + offsets[static_cast<std::size_t>(k)]];
    const Eigen::VectorXd gin = model.net.vjp(network_input(model, x, c), v, grad_theta);
    for (Index k = 0; k < n; ++k) grad_x[c + offsets[static_cast<std::size_t>(k)]] += gin[k];
  }
}

}  // namespace fcpde
