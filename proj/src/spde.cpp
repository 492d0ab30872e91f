#include "cmrf/spde.hpp"

#include <algorithm>
#include <vector>

namespace cmrf {

namespace {

// Row of -Lap scaled by ell: c*( deg*u[row] - sum of neighbors ), c = ell/h^2.
// Zero-Dirichlet: missing neighbors contribute nothing and deg stays 2*dims.
double neg_lap_row(const Lattice& lat, double ell, double h, const Eigen::VectorXd& u,
                   int i, int j) {
  const double c = ell / (h * h);
  const int deg = 2 * lat.dims;
  double acc = deg * u[lat.index(i, j)];
  if (i > 0) acc -= u[lat.index(i - 1, j)];
  if (i + 1 < lat.nx) acc -= u[lat.index(i + 1, j)];
  if (lat.dims == 2) {
    if (j > 0) acc -= u[lat.index(i, j - 1)];
    if (j + 1 < lat.ny) acc -= u[lat.index(i, j + 1)];
  }
  return c * acc;
}

}  // namespace

double spde_apply_row(const Lattice& lat, double ell, double h, bool with_identity,
                      const Eigen::VectorXd& u, int row) {
  const auto [i, j] = lat.coords(row);
  double p = neg_lap_row(lat, ell, h, u, i, j);
  if (with_identity) p += u[row];
  return p;
}

void spde_apply(const Lattice& lat, double ell, double h, bool with_identity,
                const Eigen::VectorXd& u, Eigen::VectorXd& p) {
  p.resize(lat.size());
  for (int row = 0; row < lat.size(); ++row)
    p[row] = spde_apply_row(lat, ell, h, with_identity, u, row);
}

Eigen::SparseMatrix<double> spde_matrix(const Lattice& lat, double ell, double h,
                                        bool with_identity) {
  const double c = ell / (h * h);
  const int n = lat.size();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n) * (1 + 2 * lat.dims));
  const double diag = (with_identity ? 1.0 : 0.0) + c * 2 * lat.dims;
  for (int i = 0; i < lat.nx; ++i) {
    for (int j = 0; j < lat.ny; ++j) {
      const int row = lat.index(i, j);
      trips.emplace_back(row, row, diag);
      if (i > 0) trips.emplace_back(row, lat.index(i - 1, j), -c);
      if (i + 1 < lat.nx) trips.emplace_back(row, lat.index(i + 1, j), -c);
      if (lat.dims == 2) {
        if (j > 0) trips.emplace_back(row, lat.index(i, j - 1), -c);
        if (j + 1 < lat.ny) trips.emplace_back(row, lat.index(i, j + 1), -c);
      }
    }
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

IndexSet spde_rows_touching(const Lattice& lat, int site) {
  const auto [i, j] = lat.coords(site);
  IndexSet rows;
  if (lat.dims == 2 && j > 0) rows.push_back(lat.index(i, j - 1));
  if (i > 0) rows.push_back(lat.index(i - 1, j));
  rows.push_back(site);
  if (i + 1 < lat.nx) rows.push_back(lat.index(i + 1, j));
  if (lat.dims == 2 && j + 1 < lat.ny) rows.push_back(lat.index(i, j + 1));
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace cmrf
