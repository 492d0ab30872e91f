#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "cmrf/lattice.hpp"

namespace cmrf {

/// Discrete operator behind the Matern-type equation: A = I - ell*Lap, with
/// Lap the 3-point (1D) or 5-point (2D) Laplacian over spacing h and
/// zero-Dirichlet extension outside the lattice. Dropping the identity gives
/// the pure -ell*Lap form. For ell > 0 the full operator is symmetric
/// positive definite.

/// One output component: (A u)[row].
double spde_apply_row(const Lattice& lat, double ell, double h, bool with_identity,
                      const Eigen::VectorXd& u, int row);

/// p = A u.
void spde_apply(const Lattice& lat, double ell, double h, bool with_identity,
                const Eigen::VectorXd& u, Eigen::VectorXd& p);

/// Sparse assembly of A.
Eigen::SparseMatrix<double> spde_matrix(const Lattice& lat, double ell, double h,
                                        bool with_identity);

/// Linear indices of nodes whose stencil row touches `site` (the site itself
/// and its lattice neighbors).
IndexSet spde_rows_touching(const Lattice& lat, int site);

}  // namespace cmrf
