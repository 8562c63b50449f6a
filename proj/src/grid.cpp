#include "fcpde/grid.hpp"

#include <string>

namespace fcpde {

Footprint::Footprint(int rank, FootprintShape shape) : rank_(rank), shape_(shape) {
  if (rank == 1) {
    offsets_ = {{0, -1}, {0, 0}, {0, 1}};
  } else if (rank == 2) {
    for (int dv = -1; dv <= 1; ++dv) {
      for (int du = -1; du <= 1; ++du) {
        if (shape == FootprintShape::Cross && dv != 0 && du != 0) continue;
        offsets_.push_back({dv, du});
      }
    }
  } else {
    throw std::invalid_argument("footprint rank must be 1 or 2");
  }
  for (std::size_t k = 0; k < offsets_.size(); ++k) {
    if (offsets_[k][0] == 0 && offsets_[k][1] == 0) center_ = static_cast<Index>(k);
  }
}

Grid::Grid(int rank, std::array<Index, 2> shape, double cell_size,
           std::array<double, 2> origin, std::array<BoundaryKind, 4> sides)
    : rank_(rank), shape_(shape), cell_size_(cell_size), origin_(origin), sides_(sides) {
  if (rank != 1 && rank != 2) throw std::invalid_argument("grid rank must be 1 or 2");
  if (rank == 1) shape_[1] = 1;
  if (shape_[0] < 3 || (rank == 2 && shape_[1] < 3)) {
    throw std::invalid_argument("grid shape components must be >= 3");
  }
  if (!(cell_size > 0.0)) throw std::invalid_argument("grid cell_size must be positive");
}

Eigen::Vector2d Grid::position(Index cell) const {
  return {origin_[0] + cell_size_ * static_cast<double>(iu(cell)),
          rank_ == 2 ? origin_[1] + cell_size_ * static_cast<double>(jv(cell)) : 0.0};
}

CellKind Grid::kind(Index cell) const {
  const Index i = iu(cell);
  const Index j = jv(cell);
  bool on[4] = {i == 0, i == shape_[0] - 1, false, false};
  if (rank_ == 2) {
    on[2] = j == 0;
    on[3] = j == shape_[1] - 1;
  }
  bool boundary = false;
  bool dirichlet = false;
  for (int s = 0; s < 4; ++s) {
    if (!on[s]) continue;
    boundary = true;
    dirichlet = dirichlet || sides_[s] == BoundaryKind::Dirichlet;
  }
  if (!boundary) return CellKind::Interior;
  return dirichlet ? CellKind::Dirichlet : CellKind::Neumann;
}

Index Grid::interior_count() const {
  return rank_ == 1 ? shape_[0] - 2 : (shape_[0] - 2) * (shape_[1] - 2);
}

std::vector<Index> Grid::interior_cells() const {
  std::vector<Index> cells;
  cells.reserve(static_cast<std::size_t>(interior_count()));
  for (Index c = 0; c < cell_count(); ++c) {
    if (is_interior(c)) cells.push_back(c);
  }
  return cells;
}

std::vector<Index> Grid::boundary_cells() const {
  std::vector<Index> cells;
  for (Index c = 0; c < cell_count(); ++c) {
    if (!is_interior(c)) cells.push_back(c);
  }
  return cells;
}

Index Grid::inward_neighbor(Index cell) const {
  if (is_interior(cell)) throw std::invalid_argument("inward_neighbor of an interior cell");
  Index i = iu(cell);
  Index j = jv(cell);
  if (i == 0) ++i;
  else if (i == shape_[0] - 1) --i;
  if (rank_ == 2) {
    if (j == 0) ++j;
    else if (j == shape_[1] - 1) --j;
  }
  return index(i, j);
}

std::vector<Index> Grid::flat_offsets(const Footprint& footprint) const {
  if (footprint.rank() != rank_) throw std::invalid_argument("footprint rank does not match grid");
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(footprint.size()));
  for (const auto& o : footprint.offsets()) out.push_back(o[0] * shape_[0] + o[1]);
  return out;
}

bool Grid::same_layout(const Grid& other) const {
  return rank_ == other.rank_ && shape_ == other.shape_;
}

Grid make_grid(int rank, std::vector<Index> shape, double cell_size, BoundaryKind boundary_kind) {
  if (static_cast<int>(shape.size()) != rank) {
    throw std::invalid_argument("shape has " + std::to_string(shape.size()) +
                                " components for rank " + std::to_string(rank));
  }
  std::array<Index, 2> s = {shape[0], rank == 2 ? shape[1] : 1};
  return Grid(rank, s, cell_size, {0.0, 0.0},
              {boundary_kind, boundary_kind, boundary_kind, boundary_kind});
}

Field::Field(const Grid& g, int channel_count)
    : grid(g), channels(channel_count),
      values(Eigen::VectorXd::Zero(g.cell_count() * channel_count)) {}

Field::Field(const Grid& g, Eigen::VectorXd v, int channel_count)
    : grid(g), channels(channel_count), values(std::move(v)) {
  if (values.size() != grid.cell_count() * channels) {
    throw std::invalid_argument("field value count does not match cell count x channels");
  }
}

std::vector<Index> neighborhood(const Grid& grid, const Footprint& footprint, Index cell) {
  if (cell < 0 || cell >= grid.cell_count() || !grid.is_interior(cell)) {
    throw std::out_of_range("neighborhood requires an interior cell");
  }
  std::vector<Index> cells = grid.flat_offsets(footprint);
  for (auto& c : cells) c += cell;
  return cells;
}

Eigen::VectorXd gather(const Field& field, const Footprint& footprint, Index cell) {
  const auto cells = neighborhood(field.grid, footprint, cell);
  const Index n = static_cast<Index>(cells.size());
  Eigen::VectorXd out(n * field.channels);
  for (int c = 0; c < field.channels; ++c) {
    const auto ch = field.channel(c);
    for (Index k = 0; k < n; ++k) out[c * n + k] = ch[cells[static_cast<std::size_t>(k)]];
  }
  return out;
}

}  // namespace fcpde
