#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "crossdiff/state.hpp"

namespace crossdiff {

using Point = std::array<double, 2>;

struct Cell {
  Point center{0.0, 0.0};
  double measure = 0.0;
  /// Axis-aligned extent (hx, hy) of structured cells, used for quadrature of
  /// initial data. Absent for meshes loaded from generic files.
  std::optional<Point> extent;
};

struct InteriorEdge {
  std::size_t left = 0;   // K
  std::size_t right = 0;  // L
  double measure = 0.0;   // m(sigma)
  Point normal{1.0, 0.0}; // unit normal pointing from K to L
  // Derived from the raw geometry above and the cell centers.
  double distance = 0.0;          // d_sigma = |x_L - x_K|
  double transmissibility = 0.0;  // tau_sigma = m(sigma) / d_sigma
  double diamond_measure = 0.0;   // m(T_{K,sigma})
  double dist_left = 0.0;         // d(x_K, sigma)
  double dist_right = 0.0;        // d(x_L, sigma)
};

struct BoundaryEdge {
  std::size_t cell = 0;
  double measure = 0.0;
  double distance = 0.0;  // d(x_K, sigma)
  double transmissibility = 0.0;
};

struct MeshRegularityReport {
  double zeta = 1.0;
  /// Index into the combined edge numbering (interior edges first, then
  /// boundary edges) of the first edge whose ratio falls below the threshold.
  std::optional<std::size_t> offending_edge;
};

/// Admissible two-point-flux mesh: cell centers, cell measures and edges with
/// the center-to-center segment orthogonal to every interior edge.
/// Immutable once constructed; all invariants are checked by the constructor.
class Mesh {
 public:
  /// Builds a mesh from raw geometry. Derived edge quantities are recomputed,
  /// and every invariant is validated (throws ValidationError).
  /// `domain_measure`, if given, is compared against the sum of cell measures.
  /// `interior_split`, if given, holds d(x_K, sigma) for each interior edge;
  /// otherwise the edge is taken to bisect the center segment.
  Mesh(int dimension, std::vector<Cell> cells, std::vector<InteriorEdge> interior,
       std::vector<BoundaryEdge> boundary, std::optional<double> domain_measure = std::nullopt,
       std::optional<std::vector<double>> interior_split = std::nullopt);

  int dimension() const noexcept { return dimension_; }
  std::size_t num_cells() const noexcept { return cells_.size(); }
  const std::vector<Cell>& cells() const noexcept { return cells_; }
  const std::vector<InteriorEdge>& interior_edges() const noexcept { return interior_; }
  const std::vector<BoundaryEdge>& boundary_edges() const noexcept { return boundary_; }
  double total_measure() const noexcept { return total_measure_; }
  /// Max cell diameter, computed from extents when known, measure otherwise.
  double size() const noexcept { return size_; }

  /// Cells sharing an interior edge with `cell`, in ascending order.
  const std::vector<std::size_t>& neighbors(std::size_t cell) const { return neighbors_[cell]; }

  /// Canonical FVMESH text.
  std::string to_fvmesh() const;
  void write_fvmesh(std::ostream& os) const;

 private:
  int dimension_;
  std::vector<Cell> cells_;
  std::vector<InteriorEdge> interior_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<std::vector<std::size_t>> neighbors_;
  double total_measure_ = 0.0;
  double size_ = 0.0;
};

Mesh build_interval_mesh(double a, double b, std::size_t n_cells);
Mesh build_rectangle_mesh(double lx, double ly, std::size_t nx, std::size_t ny);

Mesh parse_fvmesh(std::istream& is);
Mesh load_mesh(const std::filesystem::path& path);

MeshRegularityReport regularity_zeta(const Mesh& mesh, double threshold = 0.0);

/// Initial datum: position -> species vector (u_1, ..., u_n).
using InitialField = std::function<std::vector<double>(const Point&)>;

/// Cell averages of `field` by the midpoint rule on a 4x subdivision per axis
/// (exact for piecewise-constant data aligned with cell boundaries). Cells
/// without a known extent fall back to the value at the center.
/// Throws RangeError if an average leaves [0,1] or the species sum exceeds 1 + 1e-12.
StateField cell_averages(const InitialField& field, const Mesh& mesh);

}  // namespace crossdiff
