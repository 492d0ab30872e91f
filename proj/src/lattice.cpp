#include "cmrf/lattice.hpp"

#include <algorithm>
#include <stdexcept>

namespace cmrf {

Lattice Lattice::line(int n) {
  if (n < 2) throw std::invalid_argument("lattice needs at least 2 nodes per axis");
  Lattice lat;
  lat.dims = 1;
  lat.nx = n;
  lat.ny = 1;
  return lat;
}

Lattice Lattice::grid(int nx, int ny) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("lattice needs at least 2 nodes per axis");
  Lattice lat;
  lat.dims = 2;
  lat.nx = nx;
  lat.ny = ny;
  return lat;
}

double Lattice::h() const {
  if (dims == 2 && nx != ny)
    throw std::invalid_argument("h() requires a square grid");
  return hx();
}

bool Lattice::on_boundary(int i, int j) const {
  if (dims == 1) return i == 0 || i == nx - 1;
  return i == 0 || i == nx - 1 || j == 0 || j == ny - 1;
}

Field::Field(Lattice lat, Eigen::VectorXd vals) : lattice(lat), values(std::move(vals)) {
  if (values.size() != lattice.size())
    throw std::invalid_argument("field length does not match lattice");
}

Field Field::zero(const Lattice& lat) {
  return Field(lat, Eigen::VectorXd::Zero(lat.size()));
}

Field Field::constant(const Lattice& lat, double c) {
  return Field(lat, Eigen::VectorXd::Constant(lat.size(), c));
}

IndexSet boundary_indices(const Lattice& lat) {
  IndexSet out;
  if (lat.dims == 1) {
    out = {0, lat.nx - 1};
    return out;
  }
  for (int i = 0; i < lat.nx; ++i)
    for (int j = 0; j < lat.ny; ++j)
      if (lat.on_boundary(i, j)) out.push_back(lat.index(i, j));
  return out;
}

IndexSet interior_indices(const Lattice& lat) {
  IndexSet out;
  if (lat.dims == 1) {
    for (int i = 1; i + 1 < lat.nx; ++i) out.push_back(i);
    return out;
  }
  for (int i = 1; i + 1 < lat.nx; ++i)
    for (int j = 1; j + 1 < lat.ny; ++j) out.push_back(lat.index(i, j));
  std::sort(out.begin(), out.end());
  return out;
}

std::pair<int, int> nearest_interior_neighbor(const Lattice& lat, int i, int j) {
  if (!lat.in_range(i, j)) throw std::invalid_argument("node out of range");
  if (!lat.on_boundary(i, j)) throw std::invalid_argument("node is interior");
  auto step = [](int k, int n) {
    if (k == 0) return 1;
    if (k == n - 1) return -1;
    return 0;
  };
  if (lat.dims == 1) return {i + step(i, lat.nx), 0};
  return {i + step(i, lat.nx), j + step(j, lat.ny)};
}

bool is_index_set(const IndexSet& s, int n) {
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] < 0 || s[k] >= n) return false;
    if (k > 0 && s[k] <= s[k - 1]) return false;
  }
  return true;
}

}  // namespace cmrf
