#include "fcpde/grid.hpp"

#include <doctest.h>

#include <set>

using namespace fcpde;

TEST_CASE("footprints list offsets row-major with the center in the middle") {
  const Footprint f1(1, FootprintShape::Full);
  CHECK(f1.size() == 3);
  CHECK(f1.center() == 1);
  const Footprint full(2, FootprintShape::Full);
  CHECK(full.size() == 9);
  CHECK(full.center() == 4);
  CHECK(full.offsets().front() == std::array<int, 2>{-1, -1});
  const Footprint cross(2, FootprintShape::Cross);
  CHECK(cross.size() == 5);
  CHECK(cross.center() == 2);
  for (const auto& o : cross.offsets()) CHECK(std::abs(o[0]) + std::abs(o[1]) <= 1);
}

TEST_CASE("cell indexing round-trips") {
  const Grid g = make_grid(2, {5, 4}, 0.25, BoundaryKind::Dirichlet);
  for (Index c = 0; c < g.cell_count(); ++c) CHECK(g.index(g.iu(c), g.jv(c)) == c);
  CHECK(g.position(g.index(2, 3)).isApprox(Eigen::Vector2d(0.5, 0.75)));
}

TEST_CASE("interior and boundary cells partition the grid") {
  for (int rank : {1, 2}) {
    const Grid g = make_grid(rank, rank == 1 ? std::vector<Index>{9} : std::vector<Index>{7, 6}, 0.1,
                             BoundaryKind::Dirichlet);
    const auto in = g.interior_cells();
    const auto out = g.boundary_cells();
    CHECK(static_cast<Index>(in.size()) == g.interior_count());
    CHECK(static_cast<Index>(in.size() + out.size()) == g.cell_count());
    std::set<Index> all(in.begin(), in.end());
    all.insert(out.begin(), out.end());
    CHECK(static_cast<Index>(all.size()) == g.cell_count());
    CHECK(g.interior_count() == (rank == 1 ? 7 : 5 * 4));
  }
}

TEST_CASE("mixed sides: Dirichlet wins at corners") {
  const Grid g(2, {4, 4}, 1.0, {0.0, 0.0},
               {BoundaryKind::Neumann, BoundaryKind::Dirichlet, BoundaryKind::Neumann, BoundaryKind::Neumann});
  CHECK(g.kind(g.index(0, 1)) == CellKind::Neumann);
  CHECK(g.kind(g.index(3, 1)) == CellKind::Dirichlet);
  CHECK(g.kind(g.index(3, 0)) == CellKind::Dirichlet);
  CHECK(g.kind(g.index(0, 0)) == CellKind::Neumann);
  CHECK(g.inward_neighbor(g.index(0, 2)) == g.index(1, 2));
  CHECK(g.inward_neighbor(g.index(0, 0)) == g.index(1, 1));
}

TEST_CASE("gather follows the footprint order") {
  const Grid g = make_grid(2, {5, 5}, 1.0, BoundaryKind::Dirichlet);
  Eigen::VectorXd v(g.cell_count());
  for (Index c = 0; c < v.size(); ++c) v[c] = 10.0 * g.jv(c) + g.iu(c);
  const Footprint fp(2, FootprintShape::Full);
  const Eigen::VectorXd n = gather(Field(g, v), fp, g.index(2, 3));
  for (Index k = 0; k < fp.size(); ++k) {
    const auto o = fp.offsets()[static_cast<std::size_t>(k)];
    CHECK(n[k] == doctest::Approx(10.0 * (3 + o[0]) + (2 + o[1])));
  }
  const auto offsets = g.flat_offsets(fp);
  const auto cells = neighborhood(g, fp, g.index(2, 3));
  for (std::size_t k = 0; k < cells.size(); ++k) CHECK(cells[k] == g.index(2, 3) + offsets[k]);
}

TEST_CASE("multi-channel gather is channel-major") {
  const Grid g = make_grid(1, {5}, 1.0, BoundaryKind::Dirichlet);
  Eigen::VectorXd v(10);
  for (Index k = 0; k < 10; ++k) v[k] = static_cast<double>(k);
  const Eigen::VectorXd n = gather(Field(g, v, 2), Footprint(1, FootprintShape::Full), 2);
  CHECK(n.size() == 6);
  CHECK(n[0] == 1.0);
  CHECK(n[2] == 3.0);
  CHECK(n[3] == 6.0);
  CHECK(n[5] == 8.0);
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(make_grid(1, {2}, 1.0, BoundaryKind::Dirichlet), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(3, {4}, 1.0, BoundaryKind::Dirichlet), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1, {4}, 0.0, BoundaryKind::Dirichlet), std::invalid_argument);
}
