#include "cmrf/realizations.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <stdexcept>

#include "cmrf/spde.hpp"

namespace cmrf {

double sample_cauchy(double scale, Rng& rng) {
  if (!(scale > 0.0)) throw std::invalid_argument("cauchy scale must be positive");
  return rng.cauchy(scale);
}

namespace {

double draw(const NoiseSpec& spec, Rng& rng) {
  return spec.family == NoiseFamily::cauchy ? rng.cauchy(spec.scale)
                                            : spec.scale * rng.normal();
}

}  // namespace

Field random_walk_1d(int order, const NoiseSpec& noise, int n, double h) {
  if (n < 2) throw std::invalid_argument("walk needs n >= 2");
  if (order != 1 && order != 2) throw std::invalid_argument("order must be 1 or 2");
  if (!(noise.scale > 0.0) || !(h > 0.0))
    throw std::invalid_argument("scale and h must be positive");

  Rng rng(noise.seed);
  const double inc_scale =
      noise.family == NoiseFamily::cauchy ? h * noise.scale : std::sqrt(h) * noise.scale;
  Field f = Field::zero(Lattice::line(n));
  if (order == 1) {
    for (int i = 1; i < n; ++i) {
      const double step = noise.family == NoiseFamily::cauchy
                              ? rng.cauchy(inc_scale)
                              : inc_scale * rng.normal();
      f.values[i] = f.values[i - 1] + step;
    }
    return f;
  }
  // Integrated walk: velocity starts at zero, so the first increment is zero
  // and second differences are the raw noise.
  double velocity = 0.0;
  for (int i = 1; i < n; ++i) {
    f.values[i] = f.values[i - 1] + velocity;
    const double step = noise.family == NoiseFamily::cauchy
                            ? rng.cauchy(inc_scale)
                            : inc_scale * rng.normal();
    velocity += step;
  }
  return f;
}

Field spde_realization(const Lattice& lat, double ell, const NoiseSpec& noise) {
  if (!(ell > 0.0)) throw std::invalid_argument("ell must be positive");
  Rng rng(noise.seed);
  Eigen::VectorXd m(lat.size());
  for (int i = 0; i < m.size(); ++i) m[i] = draw(noise, rng);

  const Eigen::SparseMatrix<double> A = spde_matrix(lat, ell, lat.h(), true);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  Eigen::VectorXd u;
  if (solver.info() == Eigen::Success) {
    u = solver.solve(m);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-10);
    cg.compute(A);
    u = cg.solve(m);
    if (cg.info() != Eigen::Success)
      throw std::runtime_error("spde_realization: linear solve failed");
  }
  return Field(lat, std::move(u));
}

Field normalize_max_abs(const Field& f) {
  const double peak = f.values.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) return f;
  return Field(f.lattice, f.values / peak);
}

}  // namespace cmrf
