#ifndef FCPDE_GRID_HPP
#define FCPDE_GRID_HPP

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <vector>

namespace fcpde {

using Index = Eigen::Index;

enum class BoundaryKind { Dirichlet, Neumann };
enum class CellKind { Interior, Dirichlet, Neumann };

/// Shape of the local neighborhood feeding one stencil row.
enum class FootprintShape { Full, Cross };

/// Offsets (dv, du) of a local neighborhood, in the fixed flattening order
/// shared by gather, assembly and network input construction: row-major over
/// (dv, du) with the center included.
class Footprint {
 public:
  Footprint(int rank, FootprintShape shape);

  int rank() const { return rank_; }
  FootprintShape shape() const { return shape_; }
  Index size() const { return static_cast<Index>(offsets_.size()); }
  const std::vector<std::array<int, 2>>& offsets() const { return offsets_; }
  /// Position of the zero offset in the flattening order.
  Index center() const { return center_; }

 private:
  int rank_;
  FootprintShape shape_;
  std::vector<std::array<int, 2>> offsets_;
  Index center_ = 0;
};

/// Uniform structured 1D or 2D grid with a one-cell boundary layer.
///
/// Cells are indexed row-major: cell = j * nu + i, where i runs along the
/// first axis (u) and j along the second (v). In 1D nv == 1.
/// Boundary sides are ordered {u-low, u-high, v-low, v-high}.
class Grid {
 public:
  Grid(int rank, std::array<Index, 2> shape, double cell_size,
       std::array<double, 2> origin, std::array<BoundaryKind, 4> sides);

  int rank() const { return rank_; }
  Index nu() const { return shape_[0]; }
  Index nv() const { return shape_[1]; }
  std::array<Index, 2> shape() const { return shape_; }
  Index cell_count() const { return shape_[0] * shape_[1]; }
  double cell_size() const { return cell_size_; }
  std::array<double, 2> origin() const { return origin_; }
  BoundaryKind side(int s) const { return sides_[s]; }

  Index index(Index i, Index j = 0) const { return j * shape_[0] + i; }
  Index iu(Index cell) const { return cell % shape_[0]; }
  Index jv(Index cell) const { return cell / shape_[0]; }

  /// Physical coordinates of a cell (second component is 0 in 1D).
  Eigen::Vector2d position(Index cell) const;

  CellKind kind(Index cell) const;
  bool is_interior(Index cell) const { return kind(cell) == CellKind::Interior; }
  Index interior_count() const;
  std::vector<Index> interior_cells() const;
  std::vector<Index> boundary_cells() const;

  /// Neighbor one step inward along the boundary normal (diagonal at corners).
  Index inward_neighbor(Index cell) const;

  /// Flat index offsets of the footprint on this grid.
  std::vector<Index> flat_offsets(const Footprint& footprint) const;

  bool same_layout(const Grid& other) const;

 private:
  int rank_;
  std::array<Index, 2> shape_;
  double cell_size_;
  std::array<double, 2> origin_;
  std::array<BoundaryKind, 4> sides_;
};

/// Builds a grid whose every side has the same boundary kind, on a domain
/// starting at the origin.
Grid make_grid(int rank, std::vector<Index> shape, double cell_size,
               BoundaryKind boundary_kind);

/// Scalar or multi-channel field. Values are stored channel-major: all cells
/// of channel 0, then all cells of channel 1, ...
struct Field {
  Field(const Grid& g, int channel_count = 1);
  Field(const Grid& g, Eigen::VectorXd v, int channel_count = 1);

  Grid grid;
  int channels = 1;
  Eigen::VectorXd values;

  auto channel(int c) { return values.segment(c * grid.cell_count(), grid.cell_count()); }
  auto channel(int c) const { return values.segment(c * grid.cell_count(), grid.cell_count()); }
  bool all_finite() const { return values.allFinite(); }
};

/// Cell indices of the footprint around an interior cell.
std::vector<Index> neighborhood(const Grid& grid, const Footprint& footprint, Index cell);

/// Field values at the footprint of an interior cell, all channels,
/// channel-major.
Eigen::VectorXd gather(const Field& field, const Footprint& footprint, Index cell);

}  // namespace fcpde

#endif  // FCPDE_GRID_HPP
