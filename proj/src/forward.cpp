#include "cmrf/forward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cmrf/rng.hpp"

namespace cmrf {

double kernel_eval(double r, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("kernel width s must be positive");
  return std::exp(-r * r / s) / std::sqrt(M_PI * s);
}

double kernel_eval2(double rx, double ry, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("kernel width s must be positive");
  return std::exp(-(rx * rx + ry * ry) / s) / (M_PI * s);
}

namespace {

// Kernel support radius at relative cut eps: exp(-r^2/s) >= eps.
double trunc_radius(double s, double eps) { return std::sqrt(-s * std::log(eps)); }

}  // namespace

ForwardOperator build_operator(const Lattice& data_grid, const Lattice& recon_grid,
                               double s, double eps_trunc) {
  if (!(eps_trunc > 0.0 && eps_trunc < 1.0))
    throw std::invalid_argument("eps_trunc must be in (0,1)");
  if (data_grid.dims != recon_grid.dims)
    throw std::invalid_argument("grid dimensionality mismatch");

  ForwardOperator op;
  op.data_grid = data_grid;
  op.recon_grid = recon_grid;
  op.s = s;
  op.eps_trunc = eps_trunc;

  const double radius = trunc_radius(s, eps_trunc);
  std::vector<Eigen::Triplet<double>> trips;

  if (data_grid.dims == 1) {
    const double w = recon_grid.hx();
    for (int a = 0; a < data_grid.nx; ++a) {
      const double xa = data_grid.x(a);
      const int lo = std::max(0, static_cast<int>(std::ceil((xa - radius) / w)));
      const int hi = std::min(recon_grid.nx - 1,
                              static_cast<int>(std::floor((xa + radius) / w)));
      for (int b = lo; b <= hi; ++b)
        trips.emplace_back(a, b, w * kernel_eval(xa - recon_grid.x(b), s));
    }
  } else {
    const double hx = recon_grid.hx(), hy = recon_grid.hy();
    const double w = hx * hy;
    for (int ai = 0; ai < data_grid.nx; ++ai) {
      const double xa = data_grid.x(ai);
      const int ilo = std::max(0, static_cast<int>(std::ceil((xa - radius) / hx)));
      const int ihi = std::min(recon_grid.nx - 1,
                               static_cast<int>(std::floor((xa + radius) / hx)));
      for (int aj = 0; aj < data_grid.ny; ++aj) {
        const double ya = data_grid.y(aj);
        const int row = data_grid.index(ai, aj);
        const int jlo = std::max(0, static_cast<int>(std::ceil((ya - radius) / hy)));
        const int jhi = std::min(recon_grid.ny - 1,
                                 static_cast<int>(std::floor((ya + radius) / hy)));
        for (int bi = ilo; bi <= ihi; ++bi) {
          const double rx = xa - recon_grid.x(bi);
          for (int bj = jlo; bj <= jhi; ++bj) {
            const double ry = ya - recon_grid.y(bj);
            if (rx * rx + ry * ry > radius * radius) continue;
            trips.emplace_back(row, recon_grid.index(bi, bj),
                               w * kernel_eval2(rx, ry, s));
          }
        }
      }
    }
  }

  op.F.resize(data_grid.size(), recon_grid.size());
  op.F.setFromTriplets(trips.begin(), trips.end());
  op.F.makeCompressed();
  return op;
}

namespace {
inline double heaviside(double x) { return x >= 0.0 ? 1.0 : 0.0; }
inline double tent(double x) { return std::max(0.0, 1.0 - std::abs(x)); }
}  // namespace

double test_function_1d(double x) {
  return heaviside(x - 0.75) * heaviside(-x + 0.9) + tent(10.0 * (x - 0.15)) +
         tent(10.0 * (x - 0.55)) * heaviside(x - 0.55) +
         std::exp(-70.0 * std::abs(x - 0.4));
}

const std::vector<double>& test_function_1d_breakpoints() {
  static const std::vector<double> pts = {0.0,  0.05, 0.15, 0.25, 0.4,
                                          0.55, 0.65, 0.75, 0.9,  1.0};
  return pts;
}

double phantom_2d_value(double x, double y) {
  double v = 0.0;
  // Constant diagonal strip near the lower-left corner.
  if (std::abs(x + y - 0.5) < 0.07) v += 1.0;
  // Rectangle with a diagonally decaying level.
  if (x >= 0.55 && x <= 0.9 && y >= 0.1 && y <= 0.4)
    v += std::clamp(1.6 - (x + y), 0.0, 1.0);
  // Exponential peak.
  v += std::exp(-30.0 * std::hypot(x - 0.3, y - 0.7));
  // Cone.
  v += std::max(0.0, 1.0 - std::hypot(x - 0.75, y - 0.75) / 0.15);
  return v;
}

Field phantom_2d(const Lattice& lat) {
  Field f = Field::zero(lat);
  for (int i = 0; i < lat.nx; ++i)
    for (int j = 0; j < lat.ny; ++j)
      f.values[lat.index(i, j)] = phantom_2d_value(lat.x(i), lat.y(j));
  return f;
}

namespace {

// Gauss(7)-Kronrod(15) pair on [-1,1]; positive half of the node set.
constexpr double kr_nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kr_weights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double gauss_weights[4] = {0.129484966168870, 0.279705391489277,
                                     0.381830050505119, 0.417959183673469};

struct PanelResult {
  double kronrod;
  double err;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
  double resk = kr_weights[7] * f(c);
  double resg = gauss_weights[3] * f(c);
  for (int i = 0; i < 7; ++i) {
    const double fa = f(c - hw * kr_nodes[i]);
    const double fb = f(c + hw * kr_nodes[i]);
    resk += kr_weights[i] * (fa + fb);
    if (i % 2 == 1) resg += gauss_weights[i / 2] * (fa + fb);
  }
  return {resk * hw, std::abs(resk - resg) * hw};
}

double integrate_recursive(const std::function<double(double)>& f, double a, double b,
                           double tol, int depth) {
  const PanelResult r = gk15(f, a, b);
  if (r.err <= tol || depth >= 48) return r.kronrod;
  const double c = 0.5 * (a + b);
  return integrate_recursive(f, a, c, 0.5 * tol, depth + 1) +
         integrate_recursive(f, c, b, 0.5 * tol, depth + 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, const std::vector<double>& breakpoints) {
  std::vector<double> cuts = {a, b};
  for (double p : breakpoints)
    if (p > a && p < b) cuts.push_back(p);
  std::sort(cuts.begin(), cuts.end());

  // First pass estimates the scale so the per-panel tolerance is relative.
  double rough = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    rough += gk15(f, cuts[k], cuts[k + 1]).kronrod;
  const double tol = rel_tol * std::max(1e-12, std::abs(rough));

  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    total += integrate_recursive(f, cuts[k], cuts[k + 1],
                                 tol * (cuts[k + 1] - cuts[k]) / (b - a), 0);
  return total;
}

Measurement simulate_data_1d(const std::function<double(double)>& phantom,
                             const std::vector<double>& breakpoints,
                             const Lattice& data_grid, double s, double sigma,
                             std::uint64_t seed, double rel_tol) {
  if (data_grid.dims != 1) throw std::invalid_argument("1D data grid expected");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be nonnegative");
  Measurement m;
  m.data_grid = data_grid;
  m.sigma = sigma;
  m.seed = seed;
  m.y.resize(data_grid.size());
  for (int a = 0; a < data_grid.nx; ++a) {
    const double xa = data_grid.x(a);
    m.y[a] = integrate_adaptive(
        [&](double t) { return kernel_eval(xa - t, s) * phantom(t); }, 0.0, 1.0,
        rel_tol, breakpoints);
  }
  Rng rng(seed);
  for (int a = 0; a < m.y.size(); ++a) m.y[a] += sigma * rng.normal();
  return m;
}

Measurement simulate_data_1d(const Lattice& data_grid, double s, double sigma,
                             std::uint64_t seed) {
  return simulate_data_1d([](double x) { return test_function_1d(x); },
                          test_function_1d_breakpoints(), data_grid, s, sigma, seed);
}

Measurement simulate_data_2d(const Field& fine_phantom, const Lattice& data_grid,
                             double s, double sigma, std::uint64_t seed,
                             double eps_trunc) {
  const Lattice& fine = fine_phantom.lattice;
  if (fine.dims != 2 || data_grid.dims != 2)
    throw std::invalid_argument("2D grids expected");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be nonnegative");

  Measurement m;
  m.data_grid = data_grid;
  m.sigma = sigma;
  m.seed = seed;
  m.y.resize(data_grid.size());

  const double radius = trunc_radius(s, eps_trunc);
  const double hx = fine.hx(), hy = fine.hy();
  const double w = hx * hy;
  for (int ai = 0; ai < data_grid.nx; ++ai) {
    const double xa = data_grid.x(ai);
    const int ilo = std::max(0, static_cast<int>(std::ceil((xa - radius) / hx)));
    const int ihi = std::min(fine.nx - 1, static_cast<int>(std::floor((xa + radius) / hx)));
    for (int aj = 0; aj < data_grid.ny; ++aj) {
      const double ya = data_grid.y(aj);
      const int jlo = std::max(0, static_cast<int>(std::ceil((ya - radius) / hy)));
      const int jhi = std::min(fine.ny - 1, static_cast<int>(std::floor((ya + radius) / hy)));
      double acc = 0.0;
      for (int bi = ilo; bi <= ihi; ++bi) {
        const double rx = xa - fine.x(bi);
        for (int bj = jlo; bj <= jhi; ++bj) {
          const double ry = ya - fine.y(bj);
          if (rx * rx + ry * ry > radius * radius) continue;
          acc += kernel_eval2(rx, ry, s) * fine_phantom.values[fine.index(bi, bj)];
        }
      }
      m.y[data_grid.index(ai, aj)] = w * acc;
    }
  }
  Rng rng(seed);
  for (int a = 0; a < m.y.size(); ++a) m.y[a] += sigma * rng.normal();
  return m;
}

double log_likelihood(const ForwardOperator& op, const Eigen::VectorXd& y,
                      const Field& u, double sigma) {
  if (y.size() != op.rows() || u.size() != op.cols())
    throw std::invalid_argument("log_likelihood: dimension mismatch");
  const Eigen::VectorXd r = y - op.F * u.values;
  return -r.squaredNorm() / (2.0 * sigma * sigma);
}

Field grad_log_likelihood(const ForwardOperator& op, const Eigen::VectorXd& y,
                          const Field& u, double sigma) {
  if (y.size() != op.rows() || u.size() != op.cols())
    throw std::invalid_argument("grad_log_likelihood: dimension mismatch");
  const Eigen::VectorXd r = y - op.F * u.values;
  Field g = Field::zero(u.lattice);
  g.values = op.F.transpose() * r / (sigma * sigma);
  return g;
}

}  // namespace cmrf
