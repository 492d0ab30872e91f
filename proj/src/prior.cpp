#include "cmrf/prior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cmrf/spde.hpp"

namespace cmrf {

namespace {

// -log of a Cauchy kernel with squared scale s2 at offset x.
inline double clog(double s2, double x) { return -std::log(s2 + x * x); }
// Bivariate radial Cauchy term.
inline double clog2(double s2, double a, double b) {
  return -1.5 * std::log(s2 + a * a + b * b);
}
inline double charbonnier(double rate, double d2, double a, double b = 0.0) {
  return -rate * std::sqrt(a * a + b * b + d2);
}
inline double quad(double inv2s2, double a, double b = 0.0) {
  return -(a * a + b * b) * inv2s2;
}

inline int inward(int k, int n) { return k == 0 ? 1 : (k == n - 1 ? -1 : 0); }

struct Direct {
  const Eigen::VectorXd& u;
  double operator()(int k) const { return u[k]; }
};

struct Overlay {
  const Eigen::VectorXd& u;
  int site;
  double v;
  double operator()(int k) const { return k == site ? v : u[k]; }
};

// ---------------------------------------------------------------- 1D chains

template <class Acc>
PriorLogParts parts_diff1_1d(const PriorSpec& s, const Lattice& lat, Acc a) {
  const double l2 = s.lambda * s.lambda, g2 = s.gamma * s.gamma;
  PriorLogParts out;
  out.boundary = clog(g2, a(0));
  for (int i = 0; i + 1 < lat.nx; ++i) out.interior += clog(l2, a(i + 1) - a(i));
  return out;
}

template <class Acc>
double local_diff1_1d(const PriorSpec& s, const Lattice& lat, Acc a, int k) {
  const double l2 = s.lambda * s.lambda, g2 = s.gamma * s.gamma;
  double acc = 0.0;
  if (k == 0) acc += clog(g2, a(0));
  if (k > 0) acc += clog(l2, a(k) - a(k - 1));
  if (k + 1 < lat.nx) acc += clog(l2, a(k + 1) - a(k));
  return acc;
}

template <class Acc>
PriorLogParts parts_diff2_1d(const PriorSpec& s, const Lattice& lat, Acc a) {
  const double l2 = s.lambda * s.lambda, g2 = s.gamma * s.gamma,
               gp2 = s.gamma_prime * s.gamma_prime;
  PriorLogParts out;
  out.boundary = clog(g2, a(0)) + clog(gp2, a(1) - a(0));
  for (int i = 1; i + 1 < lat.nx; ++i)
    out.interior += clog(l2, a(i + 1) - 2.0 * a(i) + a(i - 1));
  return out;
}

template <class Acc>
double local_diff2_1d(const PriorSpec& s, const Lattice& lat, Acc a, int k) {
  const double l2 = s.lambda * s.lambda, g2 = s.gamma * s.gamma,
               gp2 = s.gamma_prime * s.gamma_prime;
  double acc = 0.0;
  if (k == 0) acc += clog(g2, a(0));
  if (k <= 1) acc += clog(gp2, a(1) - a(0));
  const int lo = std::max(1, k - 1), hi = std::min(lat.nx - 2, k + 1);
  for (int i = lo; i <= hi; ++i) acc += clog(l2, a(i + 1) - 2.0 * a(i) + a(i - 1));
  return acc;
}

// ------------------------------------------------------- 2D first order

// Interior pixel term for the four first-order 2D families, on forward
// differences dh = u(i+1,j)-u(i,j), dv = u(i,j+1)-u(i,j).
template <class Acc>
double pair1_term(const PriorSpec& s, Acc, double dh, double dv) {
  switch (s.variant) {
    case PriorVariant::cauchy_iso1_2d:
      return clog2(s.lambda * s.lambda, dh, dv);
    case PriorVariant::cauchy_aniso1_2d:
      return clog(s.lambda * s.lambda, dh) + clog(s.lambda * s.lambda, dv);
    case PriorVariant::tv1:
      return charbonnier(s.zeta, s.delta * s.delta, dh, dv);
    case PriorVariant::gauss_diff1:
      return quad(0.5 / (s.sigma1 * s.sigma1), dh, dv);
    default:
      throw std::logic_error("pair1_term");
  }
}

template <class Acc>
double node1_boundary_term(const PriorSpec& s, Acc, double u) {
  switch (s.variant) {
    case PriorVariant::cauchy_iso1_2d:
    case PriorVariant::cauchy_aniso1_2d:
      return clog(s.gamma * s.gamma, u);
    case PriorVariant::tv1:
      return charbonnier(s.zeta_prime, s.delta * s.delta, u);
    case PriorVariant::gauss_diff1:
      return quad(0.5 / (s.sigma0 * s.sigma0), u);
    default:
      throw std::logic_error("node1_boundary_term");
  }
}

template <class Acc>
PriorLogParts parts_first_order_2d(const PriorSpec& s, const Lattice& lat, Acc a) {
  const int nx = lat.nx, ny = lat.ny;
  auto id = [&](int i, int j) { return i * ny + j; };
  PriorLogParts out;
  for (int i = 0; i + 1 < nx; ++i)
    for (int j = 0; j + 1 < ny; ++j) {
      const double c = a(id(i, j));
      out.interior += pair1_term(s, a, a(id(i + 1, j)) - c, a(id(i, j + 1)) - c);
    }
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      if (lat.on_boundary(i, j)) out.boundary += node1_boundary_term(s, a, a(id(i, j)));
  return out;
}

template <class Acc>
double local_first_order_2d(const PriorSpec& s, const Lattice& lat, Acc a, int site) {
  const int nx = lat.nx, ny = lat.ny;
  auto id = [&](int i, int j) { return i * ny + j; };
  const auto [p, q] = lat.coords(site);
  double acc = 0.0;
  const int pix[3][2] = {{p, q}, {p - 1, q}, {p, q - 1}};
  for (auto& ij : pix) {
    const int i = ij[0], j = ij[1];
    if (i < 0 || j < 0 || i + 1 >= nx || j + 1 >= ny) continue;
    const double c = a(id(i, j));
    acc += pair1_term(s, a, a(id(i + 1, j)) - c, a(id(i, j + 1)) - c);
  }
  if (lat.on_boundary(p, q)) acc += node1_boundary_term(s, a, a(site));
  return acc;
}

// ------------------------------------------------------- 2D second order

template <class Acc>
double pair2_term(const PriorSpec& s, Acc, double sdx, double sdy) {
  switch (s.variant) {
    case PriorVariant::cauchy_iso2_2d:
      return clog2(s.lambda * s.lambda, sdx, sdy);
    case PriorVariant::cauchy_aniso2_2d:
      return clog(s.lambda * s.lambda, sdx) + clog(s.lambda * s.lambda, sdy);
    case PriorVariant::tv2:
      return charbonnier(s.zeta, s.delta * s.delta, sdx, sdy);
    case PriorVariant::gauss_diff2:
      return quad(0.5 / (s.sigma2 * s.sigma2), sdx, sdy);
    default:
      throw std::logic_error("pair2_term");
  }
}

// Boundary factor of the second-order families: a node term plus a first
// difference toward the nearest interior neighbor.
template <class Acc>
double node2_boundary_term(const PriorSpec& s, Acc, double u, double u_nin) {
  switch (s.variant) {
    case PriorVariant::cauchy_iso2_2d:
    case PriorVariant::cauchy_aniso2_2d:
      return clog(s.gamma * s.gamma, u - u_nin) +
             clog(s.gamma_prime * s.gamma_prime, u);
    case PriorVariant::tv2:
      return charbonnier(s.psi, s.delta * s.delta, u) +
             charbonnier(s.zeta_prime, s.delta * s.delta, u - u_nin);
    case PriorVariant::gauss_diff2:
      return quad(0.5 / (s.sigma0 * s.sigma0), u) +
             quad(0.5 / (s.sigma1 * s.sigma1), u - u_nin);
    default:
      throw std::logic_error("node2_boundary_term");
  }
}

template <class Acc>
PriorLogParts parts_second_order_2d(const PriorSpec& s, const Lattice& lat, Acc a) {
  const int nx = lat.nx, ny = lat.ny;
  auto id = [&](int i, int j) { return i * ny + j; };
  PriorLogParts out;
  for (int i = 1; i + 1 < nx; ++i)
    for (int j = 1; j + 1 < ny; ++j) {
      const double c = a(id(i, j));
      const double sdx = a(id(i + 1, j)) - 2.0 * c + a(id(i - 1, j));
      const double sdy = a(id(i, j + 1)) - 2.0 * c + a(id(i, j - 1));
      out.interior += pair2_term(s, a, sdx, sdy);
    }
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      if (lat.on_boundary(i, j)) {
        const int ni = i + inward(i, nx), nj = j + inward(j, ny);
        out.boundary += node2_boundary_term(s, a, a(id(i, j)), a(id(ni, nj)));
      }
  return out;
}

template <class Acc>
double local_second_order_2d(const PriorSpec& s, const Lattice& lat, Acc a, int site) {
  const int nx = lat.nx, ny = lat.ny;
  auto id = [&](int i, int j) { return i * ny + j; };
  const auto [p, q] = lat.coords(site);
  double acc = 0.0;
  const int centers[5][2] = {{p, q}, {p - 1, q}, {p + 1, q}, {p, q - 1}, {p, q + 1}};
  for (auto& ij : centers) {
    const int i = ij[0], j = ij[1];
    if (i < 1 || j < 1 || i + 1 >= nx || j + 1 >= ny) continue;
    const double c = a(id(i, j));
    const double sdx = a(id(i + 1, j)) - 2.0 * c + a(id(i - 1, j));
    const double sdy = a(id(i, j + 1)) - 2.0 * c + a(id(i, j - 1));
    acc += pair2_term(s, a, sdx, sdy);
  }
  // Boundary terms involve the boundary node and its nearest interior
  // neighbor; scan the 3x3 neighborhood for either role.
  for (int i = std::max(0, p - 1); i <= std::min(nx - 1, p + 1); ++i)
    for (int j = std::max(0, q - 1); j <= std::min(ny - 1, q + 1); ++j) {
      if (!lat.on_boundary(i, j)) continue;
      const int ni = i + inward(i, nx), nj = j + inward(j, ny);
      if ((i == p && j == q) || (ni == p && nj == q))
        acc += node2_boundary_term(s, a, a(id(i, j)), a(id(ni, nj)));
    }
  return acc;
}

// ------------------------------------------------------------------ sheet

template <class Acc>
PriorLogParts parts_sheet(const PriorSpec& s, const Lattice& lat, Acc a) {
  const double l2 = s.lambda * s.lambda, g2 = s.gamma * s.gamma;
  const int nx = lat.nx, ny = lat.ny;
  auto id = [&](int i, int j) { return i * ny + j; };
  PriorLogParts out;
  for (int i = 0; i + 1 < nx; ++i)
    for (int j = 0; j + 1 < ny; ++j) {
      const double m =
          a(id(i + 1, j + 1)) - a(id(i + 1, j)) - a(id(i, j + 1)) + a(id(i, j));
      out.interior += clog(l2, m);
    }
  // First-order Cauchy chains along the first row and first column, anchored
  // by a Cauchy term on the corner node.
  out.boundary = clog(g2, a(id(0, 0)));
  for (int i = 0; i + 1 < nx; ++i)
    out.boundary += clog(g2, a(id(i + 1, 0)) - a(id(i, 0)));
  for (int j = 0; j + 1 < ny; ++j)
    out.boundary += clog(g2, a(id(0, j + 1)) - a(id(0, j)));
  return out;
}

template <class Acc>
double local_sheet(const PriorSpec& s, const Lattice& lat, Acc a, int site) {
  const double l2 = s.lambda * s.lambda, g2 = s.gamma * s.gamma;
  const int nx = lat.nx, ny = lat.ny;
  auto id = [&](int i, int j) { return i * ny + j; };
  const auto [p, q] = lat.coords(site);
  double acc = 0.0;
  const int pix[4][2] = {{p, q}, {p - 1, q}, {p, q - 1}, {p - 1, q - 1}};
  for (auto& ij : pix) {
    const int i = ij[0], j = ij[1];
    if (i < 0 || j < 0 || i + 1 >= nx || j + 1 >= ny) continue;
    const double m =
        a(id(i + 1, j + 1)) - a(id(i + 1, j)) - a(id(i, j + 1)) + a(id(i, j));
    acc += clog(l2, m);
  }
  if (p == 0 && q == 0) acc += clog(g2, a(id(0, 0)));
  if (q == 0)
    for (int i = std::max(0, p - 1); i <= std::min(nx - 2, p); ++i)
      acc += clog(g2, a(id(i + 1, 0)) - a(id(i, 0)));
  if (p == 0)
    for (int j = std::max(0, q - 1); j <= std::min(ny - 2, q); ++j)
      acc += clog(g2, a(id(0, j + 1)) - a(id(0, j)));
  return acc;
}

// ------------------------------------------------------------------- SPDE

struct SpdeForm {
  double ell;
  bool with_identity;
  bool gaussian;
  double scale2;  // xi^2 or sigma_w^2
};

SpdeForm spde_form(const PriorSpec& s) {
  switch (s.variant) {
    case PriorVariant::cauchy_spde:
      return {s.ell, true, false, s.xi * s.xi};
    case PriorVariant::cauchy_laplace_only:
      return {s.ell, false, false, s.xi * s.xi};
    case PriorVariant::gauss_spde:
      return {s.ell, true, true, s.sigma_w * s.sigma_w};
    default:
      throw std::logic_error("spde_form");
  }
}

inline double spde_term(const SpdeForm& f, double p) {
  return f.gaussian ? -0.5 * p * p / f.scale2 : clog(f.scale2, p);
}

PriorLogParts parts_spde(const PriorSpec& s, const Field& u) {
  const SpdeForm f = spde_form(s);
  const double h = resolved_spde_spacing(s, u.lattice);
  PriorLogParts out;
  for (int row = 0; row < u.lattice.size(); ++row)
    out.interior +=
        spde_term(f, spde_apply_row(u.lattice, f.ell, h, f.with_identity, u.values, row));
  return out;
}

double delta_spde(const PriorSpec& s, const Field& u, int site, double v) {
  const SpdeForm f = spde_form(s);
  const Lattice& lat = u.lattice;
  const double h = resolved_spde_spacing(s, lat);
  const double c = f.ell / (h * h);
  const double diag = (f.with_identity ? 1.0 : 0.0) + c * 2 * lat.dims;
  const double dv = v - u.values[site];
  double acc = 0.0;
  for (int row : spde_rows_touching(lat, site)) {
    const double p = spde_apply_row(lat, f.ell, h, f.with_identity, u.values, row);
    const double coef = (row == site) ? diag : -c;
    acc += spde_term(f, p + coef * dv) - spde_term(f, p);
  }
  return acc;
}

void grad_spde(const PriorSpec& s, const Field& u, Eigen::VectorXd& grad) {
  const SpdeForm f = spde_form(s);
  const double h = resolved_spde_spacing(s, u.lattice);
  Eigen::VectorXd p;
  spde_apply(u.lattice, f.ell, h, f.with_identity, u.values, p);
  Eigen::VectorXd w(p.size());
  for (int k = 0; k < p.size(); ++k)
    w[k] = f.gaussian ? -p[k] / f.scale2 : -2.0 * p[k] / (f.scale2 + p[k] * p[k]);
  // The operator is symmetric, so the chain rule A^T w is another apply.
  spde_apply(u.lattice, f.ell, h, f.with_identity, w, grad);
}

// ------------------------------------------- 1D comparison (TV / Gaussian)

template <class Acc>
PriorLogParts parts_comparison_1d(const PriorSpec& s, const Lattice& lat, Acc a) {
  const double d2 = s.delta * s.delta;
  PriorLogParts out;
  switch (s.variant) {
    case PriorVariant::gauss_diff1: {
      const double w1 = 0.5 / (s.sigma1 * s.sigma1);
      out.boundary = quad(0.5 / (s.sigma0 * s.sigma0), a(0));
      for (int i = 0; i + 1 < lat.nx; ++i) out.interior += quad(w1, a(i + 1) - a(i));
      return out;
    }
    case PriorVariant::gauss_diff2: {
      out.boundary = quad(0.5 / (s.sigma0 * s.sigma0), a(0)) +
                     quad(0.5 / (s.sigma1 * s.sigma1), a(1) - a(0));
      const double w2 = 0.5 / (s.sigma2 * s.sigma2);
      for (int i = 1; i + 1 < lat.nx; ++i)
        out.interior += quad(w2, a(i + 1) - 2.0 * a(i) + a(i - 1));
      return out;
    }
    case PriorVariant::tv1: {
      out.boundary = charbonnier(s.zeta_prime, d2, a(0));
      for (int i = 0; i + 1 < lat.nx; ++i)
        out.interior += charbonnier(s.zeta, d2, a(i + 1) - a(i));
      return out;
    }
    case PriorVariant::tv2: {
      out.boundary = charbonnier(s.psi, d2, a(0)) +
                     charbonnier(s.zeta_prime, d2, a(1) - a(0));
      for (int i = 1; i + 1 < lat.nx; ++i)
        out.interior += charbonnier(s.zeta, d2, a(i + 1) - 2.0 * a(i) + a(i - 1));
      return out;
    }
    default:
      throw std::logic_error("parts_comparison_1d");
  }
}

template <class Acc>
double local_comparison_1d(const PriorSpec& s, const Lattice& lat, Acc a, int k) {
  const double d2 = s.delta * s.delta;
  double acc = 0.0;
  switch (s.variant) {
    case PriorVariant::gauss_diff1: {
      if (k == 0) acc += quad(0.5 / (s.sigma0 * s.sigma0), a(0));
      const double w1 = 0.5 / (s.sigma1 * s.sigma1);
      if (k > 0) acc += quad(w1, a(k) - a(k - 1));
      if (k + 1 < lat.nx) acc += quad(w1, a(k + 1) - a(k));
      return acc;
    }
    case PriorVariant::tv1: {
      if (k == 0) acc += charbonnier(s.zeta_prime, d2, a(0));
      if (k > 0) acc += charbonnier(s.zeta, d2, a(k) - a(k - 1));
      if (k + 1 < lat.nx) acc += charbonnier(s.zeta, d2, a(k + 1) - a(k));
      return acc;
    }
    case PriorVariant::gauss_diff2: {
      if (k == 0) acc += quad(0.5 / (s.sigma0 * s.sigma0), a(0));
      if (k <= 1) acc += quad(0.5 / (s.sigma1 * s.sigma1), a(1) - a(0));
      const double w2 = 0.5 / (s.sigma2 * s.sigma2);
      const int lo = std::max(1, k - 1), hi = std::min(lat.nx - 2, k + 1);
      for (int i = lo; i <= hi; ++i) acc += quad(w2, a(i + 1) - 2.0 * a(i) + a(i - 1));
      return acc;
    }
    case PriorVariant::tv2: {
      if (k == 0) acc += charbonnier(s.psi, d2, a(0));
      if (k <= 1) acc += charbonnier(s.zeta_prime, d2, a(1) - a(0));
      const int lo = std::max(1, k - 1), hi = std::min(lat.nx - 2, k + 1);
      for (int i = lo; i <= hi; ++i)
        acc += charbonnier(s.zeta, d2, a(i + 1) - 2.0 * a(i) + a(i - 1));
      return acc;
    }
    default:
      throw std::logic_error("local_comparison_1d");
  }
}

// --------------------------------------------------------------- dispatch

bool is_comparison(PriorVariant v) {
  return v == PriorVariant::gauss_diff1 || v == PriorVariant::gauss_diff2 ||
         v == PriorVariant::tv1 || v == PriorVariant::tv2;
}

template <class Acc>
PriorLogParts parts_any(const PriorSpec& s, const Lattice& lat, Acc a) {
  switch (s.variant) {
    case PriorVariant::cauchy_diff1_1d:
      return parts_diff1_1d(s, lat, a);
    case PriorVariant::cauchy_diff2_1d:
      return parts_diff2_1d(s, lat, a);
    case PriorVariant::cauchy_iso1_2d:
    case PriorVariant::cauchy_aniso1_2d:
      return parts_first_order_2d(s, lat, a);
    case PriorVariant::cauchy_iso2_2d:
    case PriorVariant::cauchy_aniso2_2d:
      return parts_second_order_2d(s, lat, a);
    case PriorVariant::cauchy_sheet:
      return parts_sheet(s, lat, a);
    case PriorVariant::gauss_diff1:
    case PriorVariant::tv1:
      if (lat.dims == 1) return parts_comparison_1d(s, lat, a);
      return parts_first_order_2d(s, lat, a);
    case PriorVariant::gauss_diff2:
    case PriorVariant::tv2:
      if (lat.dims == 1) return parts_comparison_1d(s, lat, a);
      return parts_second_order_2d(s, lat, a);
    default:
      throw std::logic_error("parts_any: spde handled separately");
  }
}

template <class Acc>
double local_any(const PriorSpec& s, const Lattice& lat, Acc a, int site) {
  switch (s.variant) {
    case PriorVariant::cauchy_diff1_1d:
      return local_diff1_1d(s, lat, a, site);
    case PriorVariant::cauchy_diff2_1d:
      return local_diff2_1d(s, lat, a, site);
    case PriorVariant::cauchy_iso1_2d:
    case PriorVariant::cauchy_aniso1_2d:
      return local_first_order_2d(s, lat, a, site);
    case PriorVariant::cauchy_iso2_2d:
    case PriorVariant::cauchy_aniso2_2d:
      return local_second_order_2d(s, lat, a, site);
    case PriorVariant::cauchy_sheet:
      return local_sheet(s, lat, a, site);
    case PriorVariant::gauss_diff1:
    case PriorVariant::tv1:
      if (lat.dims == 1) return local_comparison_1d(s, lat, a, site);
      return local_first_order_2d(s, lat, a, site);
    case PriorVariant::gauss_diff2:
    case PriorVariant::tv2:
      if (lat.dims == 1) return local_comparison_1d(s, lat, a, site);
      return local_second_order_2d(s, lat, a, site);
    default:
      throw std::logic_error("local_any: spde handled separately");
  }
}

// --------------------------------------------------------------- gradients

// d/dx of the scalar term families, as functions of the offset x.
inline double dclog(double s2, double x) { return -2.0 * x / (s2 + x * x); }

void grad_non_spde(const PriorSpec& s, const Field& field, Eigen::VectorXd& g) {
  const Lattice& lat = field.lattice;
  const Eigen::VectorXd& u = field.values;
  const int nx = lat.nx, ny = lat.ny;
  auto id = [&](int i, int j) { return i * ny + j; };
  const double d2 = s.delta * s.delta;

  // Weight pair (wa, wb) = partial derivatives of the interior term with
  // respect to its two difference arguments.
  auto pair1_w = [&](double a, double b, double& wa, double& wb) {
    switch (s.variant) {
      case PriorVariant::cauchy_iso1_2d: {
        const double r = -3.0 / (s.lambda * s.lambda + a * a + b * b);
        wa = r * a;
        wb = r * b;
        return;
      }
      case PriorVariant::cauchy_aniso1_2d:
        wa = dclog(s.lambda * s.lambda, a);
        wb = dclog(s.lambda * s.lambda, b);
        return;
      case PriorVariant::tv1: {
        const double r = -s.zeta / std::sqrt(a * a + b * b + d2);
        wa = r * a;
        wb = r * b;
        return;
      }
      case PriorVariant::gauss_diff1:
        wa = -a / (s.sigma1 * s.sigma1);
        wb = -b / (s.sigma1 * s.sigma1);
        return;
      default:
        throw std::logic_error("pair1_w");
    }
  };
  auto pair2_w = [&](double a, double b, double& wa, double& wb) {
    switch (s.variant) {
      case PriorVariant::cauchy_iso2_2d: {
        const double r = -3.0 / (s.lambda * s.lambda + a * a + b * b);
        wa = r * a;
        wb = r * b;
        return;
      }
      case PriorVariant::cauchy_aniso2_2d:
        wa = dclog(s.lambda * s.lambda, a);
        wb = dclog(s.lambda * s.lambda, b);
        return;
      case PriorVariant::tv2: {
        const double r = -s.zeta / std::sqrt(a * a + b * b + d2);
        wa = r * a;
        wb = r * b;
        return;
      }
      case PriorVariant::gauss_diff2:
        wa = -a / (s.sigma2 * s.sigma2);
        wb = -b / (s.sigma2 * s.sigma2);
        return;
      default:
        throw std::logic_error("pair2_w");
    }
  };

  switch (s.variant) {
    case PriorVariant::cauchy_diff1_1d: {
      g[0] += dclog(s.gamma * s.gamma, u[0]);
      for (int i = 0; i + 1 < nx; ++i) {
        const double w = dclog(s.lambda * s.lambda, u[i + 1] - u[i]);
        g[i + 1] += w;
        g[i] -= w;
      }
      return;
    }
    case PriorVariant::cauchy_diff2_1d: {
      g[0] += dclog(s.gamma * s.gamma, u[0]);
      const double wb = dclog(s.gamma_prime * s.gamma_prime, u[1] - u[0]);
      g[1] += wb;
      g[0] -= wb;
      for (int i = 1; i + 1 < nx; ++i) {
        const double w = dclog(s.lambda * s.lambda, u[i + 1] - 2.0 * u[i] + u[i - 1]);
        g[i + 1] += w;
        g[i] -= 2.0 * w;
        g[i - 1] += w;
      }
      return;
    }
    case PriorVariant::cauchy_iso1_2d:
    case PriorVariant::cauchy_aniso1_2d:
    case PriorVariant::tv1:
    case PriorVariant::gauss_diff1: {
      if (lat.dims == 1) {
        // 1D reduction: increments along the chain plus the node-0 factor.
        for (int i = 0; i + 1 < nx; ++i) {
          double wa, wb;
          pair1_w(u[i + 1] - u[i], 0.0, wa, wb);
          g[i + 1] += wa;
          g[i] -= wa;
        }
        if (s.variant == PriorVariant::tv1)
          g[0] += -s.zeta_prime * u[0] / std::sqrt(u[0] * u[0] + d2);
        else
          g[0] += -u[0] / (s.sigma0 * s.sigma0);
        return;
      }
      for (int i = 0; i + 1 < nx; ++i)
        for (int j = 0; j + 1 < ny; ++j) {
          const double c = u[id(i, j)];
          double wa, wb;
          pair1_w(u[id(i + 1, j)] - c, u[id(i, j + 1)] - c, wa, wb);
          g[id(i + 1, j)] += wa;
          g[id(i, j + 1)] += wb;
          g[id(i, j)] -= wa + wb;
        }
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
          if (!lat.on_boundary(i, j)) continue;
          const double ub = u[id(i, j)];
          switch (s.variant) {
            case PriorVariant::cauchy_iso1_2d:
            case PriorVariant::cauchy_aniso1_2d:
              g[id(i, j)] += dclog(s.gamma * s.gamma, ub);
              break;
            case PriorVariant::tv1:
              g[id(i, j)] += -s.zeta_prime * ub / std::sqrt(ub * ub + d2);
              break;
            case PriorVariant::gauss_diff1:
              g[id(i, j)] += -ub / (s.sigma0 * s.sigma0);
              break;
            default:
              break;
          }
        }
      return;
    }
    case PriorVariant::cauchy_iso2_2d:
    case PriorVariant::cauchy_aniso2_2d:
    case PriorVariant::tv2:
    case PriorVariant::gauss_diff2: {
      if (lat.dims == 1) {
        for (int i = 1; i + 1 < nx; ++i) {
          double wa, wb;
          pair2_w(u[i + 1] - 2.0 * u[i] + u[i - 1], 0.0, wa, wb);
          g[i + 1] += wa;
          g[i] -= 2.0 * wa;
          g[i - 1] += wa;
        }
        const double du = u[1] - u[0];
        if (s.variant == PriorVariant::tv2) {
          g[0] += -s.psi * u[0] / std::sqrt(u[0] * u[0] + d2);
          const double w = -s.zeta_prime * du / std::sqrt(du * du + d2);
          g[1] += w;
          g[0] -= w;
        } else {
          g[0] += -u[0] / (s.sigma0 * s.sigma0);
          const double w = -du / (s.sigma1 * s.sigma1);
          g[1] += w;
          g[0] -= w;
        }
        return;
      }
      for (int i = 1; i + 1 < nx; ++i)
        for (int j = 1; j + 1 < ny; ++j) {
          const double c = u[id(i, j)];
          const double sdx = u[id(i + 1, j)] - 2.0 * c + u[id(i - 1, j)];
          const double sdy = u[id(i, j + 1)] - 2.0 * c + u[id(i, j - 1)];
          double wa, wb;
          pair2_w(sdx, sdy, wa, wb);
          g[id(i + 1, j)] += wa;
          g[id(i - 1, j)] += wa;
          g[id(i, j + 1)] += wb;
          g[id(i, j - 1)] += wb;
          g[id(i, j)] -= 2.0 * (wa + wb);
        }
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
          if (!lat.on_boundary(i, j)) continue;
          const int ni = i + inward(i, nx), nj = j + inward(j, ny);
          const double ub = u[id(i, j)];
          const double dn = ub - u[id(ni, nj)];
          double w_node = 0.0, w_diff = 0.0;
          switch (s.variant) {
            case PriorVariant::cauchy_iso2_2d:
            case PriorVariant::cauchy_aniso2_2d:
              w_node = dclog(s.gamma_prime * s.gamma_prime, ub);
              w_diff = dclog(s.gamma * s.gamma, dn);
              break;
            case PriorVariant::tv2:
              w_node = -s.psi * ub / std::sqrt(ub * ub + d2);
              w_diff = -s.zeta_prime * dn / std::sqrt(dn * dn + d2);
              break;
            case PriorVariant::gauss_diff2:
              w_node = -ub / (s.sigma0 * s.sigma0);
              w_diff = -dn / (s.sigma1 * s.sigma1);
              break;
            default:
              break;
          }
          g[id(i, j)] += w_node + w_diff;
          g[id(ni, nj)] -= w_diff;
        }
      return;
    }
    case PriorVariant::cauchy_sheet: {
      const double l2 = s.lambda * s.lambda, g2 = s.gamma * s.gamma;
      for (int i = 0; i + 1 < nx; ++i)
        for (int j = 0; j + 1 < ny; ++j) {
          const double m = u[id(i + 1, j + 1)] - u[id(i + 1, j)] - u[id(i, j + 1)] +
                           u[id(i, j)];
          const double w = dclog(l2, m);
          g[id(i + 1, j + 1)] += w;
          g[id(i, j)] += w;
          g[id(i + 1, j)] -= w;
          g[id(i, j + 1)] -= w;
        }
      g[id(0, 0)] += dclog(g2, u[id(0, 0)]);
      for (int i = 0; i + 1 < nx; ++i) {
        const double w = dclog(g2, u[id(i + 1, 0)] - u[id(i, 0)]);
        g[id(i + 1, 0)] += w;
        g[id(i, 0)] -= w;
      }
      for (int j = 0; j + 1 < ny; ++j) {
        const double w = dclog(g2, u[id(0, j + 1)] - u[id(0, j)]);
        g[id(0, j + 1)] += w;
        g[id(0, j)] -= w;
      }
      return;
    }
    default:
      throw std::logic_error("grad_non_spde");
  }
}

void check_variant_dims(const PriorSpec& s, const Lattice& lat) {
  const PriorVariant v = s.variant;
  const bool needs_1d =
      v == PriorVariant::cauchy_diff1_1d || v == PriorVariant::cauchy_diff2_1d;
  const bool needs_2d =
      v == PriorVariant::cauchy_iso1_2d || v == PriorVariant::cauchy_aniso1_2d ||
      v == PriorVariant::cauchy_iso2_2d || v == PriorVariant::cauchy_aniso2_2d ||
      v == PriorVariant::cauchy_sheet;
  if (needs_1d && lat.dims != 1)
    throw std::invalid_argument(std::string(to_string(v)) + " requires a 1D lattice");
  if (needs_2d && lat.dims != 2)
    throw std::invalid_argument(std::string(to_string(v)) + " requires a 2D lattice");
}

}  // namespace

const char* to_string(PriorVariant v) {
  switch (v) {
    case PriorVariant::cauchy_diff1_1d: return "cauchy_diff1_1d";
    case PriorVariant::cauchy_diff2_1d: return "cauchy_diff2_1d";
    case PriorVariant::cauchy_iso1_2d: return "cauchy_iso1_2d";
    case PriorVariant::cauchy_aniso1_2d: return "cauchy_aniso1_2d";
    case PriorVariant::cauchy_iso2_2d: return "cauchy_iso2_2d";
    case PriorVariant::cauchy_aniso2_2d: return "cauchy_aniso2_2d";
    case PriorVariant::cauchy_sheet: return "cauchy_sheet";
    case PriorVariant::cauchy_spde: return "cauchy_spde";
    case PriorVariant::cauchy_laplace_only: return "cauchy_laplace_only";
    case PriorVariant::gauss_diff1: return "gauss_diff1";
    case PriorVariant::gauss_diff2: return "gauss_diff2";
    case PriorVariant::gauss_spde: return "gauss_spde";
    case PriorVariant::tv1: return "tv1";
    case PriorVariant::tv2: return "tv2";
  }
  throw std::logic_error("unknown variant");
}

PriorVariant prior_variant_from_string(const std::string& name) {
  static const std::pair<const char*, PriorVariant> table[] = {
      {"cauchy_diff1_1d", PriorVariant::cauchy_diff1_1d},
      {"cauchy_diff2_1d", PriorVariant::cauchy_diff2_1d},
      {"cauchy_iso1_2d", PriorVariant::cauchy_iso1_2d},
      {"cauchy_aniso1_2d", PriorVariant::cauchy_aniso1_2d},
      {"cauchy_iso2_2d", PriorVariant::cauchy_iso2_2d},
      {"cauchy_aniso2_2d", PriorVariant::cauchy_aniso2_2d},
      {"cauchy_sheet", PriorVariant::cauchy_sheet},
      {"cauchy_spde", PriorVariant::cauchy_spde},
      {"cauchy_laplace_only", PriorVariant::cauchy_laplace_only},
      {"gauss_diff1", PriorVariant::gauss_diff1},
      {"gauss_diff2", PriorVariant::gauss_diff2},
      {"gauss_spde", PriorVariant::gauss_spde},
      {"tv1", PriorVariant::tv1},
      {"tv2", PriorVariant::tv2},
  };
  for (const auto& [key, v] : table)
    if (name == key) return v;
  throw std::invalid_argument("unknown prior variant: " + name);
}

bool is_second_order(PriorVariant v) {
  return v == PriorVariant::cauchy_diff2_1d || v == PriorVariant::cauchy_iso2_2d ||
         v == PriorVariant::cauchy_aniso2_2d || v == PriorVariant::gauss_diff2 ||
         v == PriorVariant::tv2;
}

bool is_spde_family(PriorVariant v) {
  return v == PriorVariant::cauchy_spde || v == PriorVariant::cauchy_laplace_only ||
         v == PriorVariant::gauss_spde;
}

double resolved_spde_spacing(const PriorSpec& spec, const Lattice& lat) {
  return spec.h_spde > 0.0 ? spec.h_spde : lat.h();
}

void validate_prior(const PriorSpec& s, const Lattice& lat) {
  check_variant_dims(s, lat);
  auto positive = [](double x, const char* name) {
    if (!(x > 0.0)) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  switch (s.variant) {
    case PriorVariant::cauchy_diff1_1d:
    case PriorVariant::cauchy_iso1_2d:
    case PriorVariant::cauchy_aniso1_2d:
    case PriorVariant::cauchy_sheet:
      positive(s.lambda, "lambda");
      positive(s.gamma, "gamma");
      break;
    case PriorVariant::cauchy_diff2_1d:
    case PriorVariant::cauchy_iso2_2d:
    case PriorVariant::cauchy_aniso2_2d:
      positive(s.lambda, "lambda");
      positive(s.gamma, "gamma");
      positive(s.gamma_prime, "gamma_prime");
      break;
    case PriorVariant::cauchy_spde:
    case PriorVariant::gauss_spde:
      positive(s.ell, "ell");
      positive(s.variant == PriorVariant::cauchy_spde ? s.xi : s.sigma_w,
               "noise scale");
      positive(resolved_spde_spacing(s, lat), "h_spde");
      break;
    case PriorVariant::cauchy_laplace_only:
      if (s.ell == 0.0) throw std::invalid_argument("ell must be nonzero");
      positive(s.xi, "xi");
      positive(resolved_spde_spacing(s, lat), "h_spde");
      break;
    case PriorVariant::gauss_diff1:
      positive(s.sigma0, "sigma0");
      positive(s.sigma1, "sigma1");
      break;
    case PriorVariant::gauss_diff2:
      positive(s.sigma0, "sigma0");
      positive(s.sigma1, "sigma1");
      positive(s.sigma2, "sigma2");
      break;
    case PriorVariant::tv1:
      positive(s.zeta, "zeta");
      positive(s.zeta_prime, "zeta_prime");
      positive(s.delta, "delta");
      break;
    case PriorVariant::tv2:
      positive(s.zeta, "zeta");
      positive(s.zeta_prime, "zeta_prime");
      positive(s.psi, "psi");
      positive(s.delta, "delta");
      break;
  }
  if (is_second_order(s.variant)) {
    if (lat.nx < 3 || (lat.dims == 2 && lat.ny < 3))
      throw std::invalid_argument("second-order variants need >= 3 nodes per axis");
  }
}

PriorLogParts log_prior_parts(const PriorSpec& spec, const Field& u) {
  validate_prior(spec, u.lattice);
  if (is_spde_family(spec.variant)) return parts_spde(spec, u);
  return parts_any(spec, u.lattice, Direct{u.values});
}

double log_prior(const PriorSpec& spec, const Field& u) {
  return log_prior_parts(spec, u).total();
}

void grad_log_prior(const PriorSpec& spec, const Field& u, Eigen::VectorXd& grad) {
  validate_prior(spec, u.lattice);
  if (is_spde_family(spec.variant)) {
    grad_spde(spec, u, grad);
    return;
  }
  grad.setZero(u.size());
  grad_non_spde(spec, u, grad);
}

Field grad_log_prior(const PriorSpec& spec, const Field& u) {
  Field g = Field::zero(u.lattice);
  grad_log_prior(spec, u, g.values);
  return g;
}

double delta_log_prior(const PriorSpec& spec, const Field& u, int site, double new_value) {
  if (site < 0 || site >= u.size()) throw std::out_of_range("site out of range");
  validate_prior(spec, u.lattice);
  if (new_value == u.values[site]) return 0.0;
  if (is_spde_family(spec.variant)) return delta_spde(spec, u, site, new_value);
  const double before = local_any(spec, u.lattice, Direct{u.values}, site);
  const double after =
      local_any(spec, u.lattice, Overlay{u.values, site, new_value}, site);
  return after - before;
}

double log_prior_1d(const PriorSpec& spec, const Field& u) {
  if (spec.variant != PriorVariant::cauchy_diff1_1d &&
      spec.variant != PriorVariant::cauchy_diff2_1d)
    throw std::invalid_argument("log_prior_1d: not a 1D Cauchy difference variant");
  return log_prior(spec, u);
}

double log_prior_2d_difference(const PriorSpec& spec, const Field& u) {
  switch (spec.variant) {
    case PriorVariant::cauchy_iso1_2d:
    case PriorVariant::cauchy_aniso1_2d:
    case PriorVariant::cauchy_iso2_2d:
    case PriorVariant::cauchy_aniso2_2d:
    case PriorVariant::cauchy_sheet:
      return log_prior(spec, u);
    default:
      throw std::invalid_argument("log_prior_2d_difference: wrong variant");
  }
}

double log_prior_spde(const PriorSpec& spec, const Field& u) {
  if (!is_spde_family(spec.variant))
    throw std::invalid_argument("log_prior_spde: wrong variant");
  return log_prior(spec, u);
}

double log_prior_comparison(const PriorSpec& spec, const Field& u) {
  if (!is_comparison(spec.variant))
    throw std::invalid_argument("log_prior_comparison: wrong variant");
  return log_prior(spec, u);
}

}  // namespace cmrf
