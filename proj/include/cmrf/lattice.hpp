#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

namespace cmrf {

/// Sorted list of linear node indices, strictly increasing.
using IndexSet = std::vector<int>;

/// Equispaced lattice over [0,1] (1D) or [0,1]^2 (2D).
/// 2D storage is row-major: linear index = i*ny + j for node (i,j).
struct Lattice {
  int dims = 1;
  int nx = 2;
  int ny = 1;

  static Lattice line(int n);
  static Lattice grid(int nx, int ny);

  int size() const { return nx * ny; }
  double hx() const { return 1.0 / (nx - 1); }
  double hy() const { return 1.0 / (ny - 1); }
  /// Node spacing; in 2D requires a square grid.
  double h() const;

  int index(int i, int j) const { return i * ny + j; }
  std::pair<int, int> coords(int linear) const { return {linear / ny, linear % ny}; }

  double x(int i) const { return i * hx(); }
  double y(int j) const { return j * hy(); }

  bool in_range(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
  bool on_boundary(int i, int j) const;

  bool operator==(const Lattice&) const = default;
};

/// Real-valued field aligned to a lattice; values.size() == lattice.size().
struct Field {
  Lattice lattice;
  Eigen::VectorXd values;

  Field() = default;
  Field(Lattice lat, Eigen::VectorXd vals);
  static Field zero(const Lattice& lat);
  static Field constant(const Lattice& lat, double c);

  double operator[](int k) const { return values[k]; }
  double& operator[](int k) { return values[k]; }
  int size() const { return static_cast<int>(values.size()); }
};

/// All nodes with i in {0, nx-1} or j in {0, ny-1}; endpoints in 1D.
IndexSet boundary_indices(const Lattice& lat);

/// Complement of boundary_indices, sorted.
IndexSet interior_indices(const Lattice& lat);

/// Closest lattice node strictly inside the domain: corners map to the
/// diagonal neighbor, edge nodes to the inward-normal neighbor.
/// Throws std::invalid_argument for interior (i,j).
std::pair<int, int> nearest_interior_neighbor(const Lattice& lat, int i, int j);

bool is_index_set(const IndexSet& s, int n);

}  // namespace cmrf
