#pragma once

#include <cstdint>

#include "cmrf/lattice.hpp"
#include "cmrf/rng.hpp"

namespace cmrf {

enum class NoiseFamily { cauchy, gaussian };

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::cauchy;
  double scale = 1.0;  // Cauchy scale or Gaussian std-dev
  std::uint64_t seed = 0;
};

/// Centered Cauchy draw, scale * tan(pi (U - 1/2)).
double sample_cauchy(double scale, Rng& rng);

/// Random walk on n nodes starting at zero. Order 1 accumulates iid
/// increments with scale h (Cauchy) or std-dev sqrt(h) (Gaussian); order 2
/// integrates the walk once more, with zero initial value and slope.
Field random_walk_1d(int order, const NoiseSpec& noise, int n, double h);

/// Solves (I - ell*Lap) u = m for iid noise m on the lattice, by sparse
/// Cholesky with a conjugate-gradient fallback.
Field spde_realization(const Lattice& lat, double ell, const NoiseSpec& noise);

/// Rescales to unit max-abs for overlay plots; zero fields pass through.
Field normalize_max_abs(const Field& f);

}  // namespace cmrf
