#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstdint>
#include <functional>
#include <vector>

#include "cmrf/lattice.hpp"

namespace cmrf {

/// Gaussian convolution kernel k(r) = exp(-r^2/s)/sqrt(pi s); integrates to 1.
double kernel_eval(double r, double s);
/// Separable 2D form exp(-|r|^2/s)/(pi s); integrates to 1 over the plane.
double kernel_eval2(double rx, double ry, double s);

/// Convolution matrix on the reconstruction grid: F[a][b] = w_b k(x_a - x_b)
/// with midpoint weights w_b = h (1D) or h^2 (2D). Entries below
/// eps_trunc * k(0) are dropped and the matrix is stored sparse.
struct ForwardOperator {
  Eigen::SparseMatrix<double> F;  // data points x recon nodes
  Lattice data_grid;
  Lattice recon_grid;
  double s = 0.0;
  double eps_trunc = 0.0;

  int rows() const { return static_cast<int>(F.rows()); }
  int cols() const { return static_cast<int>(F.cols()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const { return F * u; }
};

ForwardOperator build_operator(const Lattice& data_grid, const Lattice& recon_grid,
                               double s, double eps_trunc = 1e-8);

/// Piecewise test signal on [0,1]: a plateau on [0.75,0.9), two triangular
/// ramps and an exponential spike at 0.4. Heaviside convention H(0) = 1.
double test_function_1d(double x);
/// Kink and jump locations of test_function_1d, endpoints included.
const std::vector<double>& test_function_1d_breakpoints();

/// Analytic 2D phantom: a diagonal strip, a diagonally decaying rectangle,
/// an exponential peak and a cone.
double phantom_2d_value(double x, double y);
Field phantom_2d(const Lattice& lat);

struct Measurement {
  Eigen::VectorXd y;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  Lattice data_grid;
};

/// Adaptive Gauss-Kronrod integral of f over [a,b] to relative tolerance.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-8,
                          const std::vector<double>& breakpoints = {});

/// Noisy convolution data for a 1D phantom, evaluated by adaptive quadrature
/// on the analytic signal (independent of any reconstruction operator).
Measurement simulate_data_1d(const std::function<double(double)>& phantom,
                             const std::vector<double>& breakpoints,
                             const Lattice& data_grid, double s, double sigma,
                             std::uint64_t seed, double rel_tol = 1e-8);
/// Same with the built-in test signal.
Measurement simulate_data_1d(const Lattice& data_grid, double s, double sigma,
                             std::uint64_t seed);

/// Noisy convolution data for a 2D phantom sampled on a fine simulation grid;
/// the convolution sum is evaluated directly, no operator matrix is formed.
Measurement simulate_data_2d(const Field& fine_phantom, const Lattice& data_grid,
                             double s, double sigma, std::uint64_t seed,
                             double eps_trunc = 1e-8);

double log_likelihood(const ForwardOperator& op, const Eigen::VectorXd& y,
                      const Field& u, double sigma);
Field grad_log_likelihood(const ForwardOperator& op, const Eigen::VectorXd& y,
                          const Field& u, double sigma);

}  // namespace cmrf
