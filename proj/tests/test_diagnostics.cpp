#include <doctest.h>

#include <cmath>

#include "cmrf/diagnostics.hpp"
#include "cmrf/rng.hpp"

using namespace cmrf;

namespace {

Eigen::VectorXd gaussian_chain(int n, double mean, double sd, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = mean + sd * rng.normal();
  return v;
}

}  // namespace

TEST_SUITE_BEGIN("diagnostics");

TEST_CASE("psrf hand-computed examples") {
  Eigen::VectorXd a(4), b(4);
  a << 0, 1, 0, 1;
  b << 1, 0, 1, 0;
  CHECK(psrf({a, b}) == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
  CHECK(psrf({a, b}) == doctest::Approx(0.8660).epsilon(1e-4));

  Eigen::VectorXd c(4), d(4);
  c << 0, 0, 1, 1;
  d << 10, 10, 11, 11;
  CHECK(psrf({c, d}) == doctest::Approx(std::sqrt(150.75)).epsilon(1e-12));
  CHECK(psrf({c, d}) == doctest::Approx(12.2780).epsilon(1e-4));

  // The alternative convention squares the within-chain variances.
  const double w = (1.0 / 9.0);  // mean of squared within variances (1/3)^2
  const double want = std::sqrt((0.75 * w + 200.0 / 4.0) / w);
  CHECK(psrf({c, d}, true) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("long well-mixed chains approach one") {
  std::vector<Eigen::VectorXd> chains;
  for (int c = 0; c < 6; ++c) chains.push_back(gaussian_chain(20000, 0.0, 1.0, 40 + c));
  CHECK(psrf(chains) == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(psrf(chains) < 1.2);
}

TEST_CASE("psrf is invariant under affine maps") {
  std::vector<Eigen::VectorXd> chains;
  for (int c = 0; c < 4; ++c) chains.push_back(gaussian_chain(500, 0.3, 2.0, 60 + c));
  const double base = psrf(chains);
  std::vector<Eigen::VectorXd> mapped = chains;
  for (auto& ch : mapped) ch = (-3.7 * ch.array() + 11.0).matrix();
  CHECK(psrf(mapped) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("identical chains with tiny jitter hit the floor value") {
  const Eigen::VectorXd base = gaussian_chain(2000, 0.0, 1.0, 77);
  std::vector<Eigen::VectorXd> chains;
  for (int c = 0; c < 5; ++c) {
    Eigen::VectorXd jittered = base;
    Rng rng(100 + c);
    for (int i = 0; i < jittered.size(); ++i) jittered[i] += 1e-9 * rng.normal();
    chains.push_back(jittered);
  }
  const double n = static_cast<double>(base.size());
  CHECK(std::abs(psrf(chains) - std::sqrt((n - 1.0) / n)) <= 1e-3);
}

TEST_CASE("psrf input validation") {
  const Eigen::VectorXd a = gaussian_chain(100, 0, 1, 1);
  CHECK_THROWS_AS(psrf({a}), std::invalid_argument);
  CHECK_THROWS_AS(psrf({a, gaussian_chain(50, 0, 1, 2)}), std::invalid_argument);
  const Eigen::VectorXd flat = Eigen::VectorXd::Zero(100);
  CHECK_THROWS_AS(psrf({flat, flat}), std::invalid_argument);
}

TEST_CASE("autocorrelation basics") {
  const Eigen::VectorXd chain = gaussian_chain(4000, 0.0, 1.0, 5);
  const Eigen::VectorXd rho = autocorr(chain, 50);
  CHECK(rho[0] == 1.0);

  Eigen::VectorXd alt(1000);
  for (int i = 0; i < 1000; ++i) alt[i] = (i % 2 == 0) ? 1.0 : -1.0;
  CHECK(autocorr(alt, 1)[1] == doctest::Approx(-1.0).epsilon(1e-2));

  // Mean shift leaves the acf untouched.
  Eigen::VectorXd shifted = chain.array() + 123.0;
  CHECK((autocorr(shifted, 50) - rho).cwiseAbs().maxCoeff() <= 1e-9);

  // White-noise band: most lags within 3/sqrt(N).
  int inside = 0;
  for (int k = 1; k <= 50; ++k)
    if (std::abs(rho[k]) <= 3.0 / std::sqrt(4000.0)) ++inside;
  CHECK(inside >= 49);

  CHECK_THROWS_AS(autocorr(Eigen::VectorXd::Ones(10), 2), std::invalid_argument);
  CHECK_THROWS_AS(autocorr(chain, 4000), std::invalid_argument);
}

TEST_CASE("effective sample size") {
  const int n = 10000;
  const Eigen::VectorXd iid = gaussian_chain(n, 0.0, 1.0, 9);
  CHECK(ess(iid) == doctest::Approx(n).epsilon(0.15));

  // AR(1): rho_k = phi^k, ESS -> n (1-phi)/(1+phi).
  Rng rng(10);
  const double phi = 0.9;
  Eigen::VectorXd ar(n);
  ar[0] = rng.normal();
  for (int i = 1; i < n; ++i)
    ar[i] = phi * ar[i - 1] + std::sqrt(1 - phi * phi) * rng.normal();
  CHECK(ess(ar) == doctest::Approx(n * (1 - phi) / (1 + phi)).epsilon(0.20));

  Eigen::VectorXd alt(1000);
  for (int i = 0; i < 1000; ++i) alt[i] = (i % 2 == 0) ? 1.0 : -1.0;
  const double super = ess(alt);
  CHECK(super >= 1000.0);
  CHECK(super <= 10000.0);  // clamped at 10N

  CHECK_THROWS_AS(ess(Eigen::VectorXd::Zero(100)), std::invalid_argument);
}

TEST_CASE("kernel density estimation") {
  // Single sample with a forced bandwidth is one Gaussian bump.
  Eigen::VectorXd one(1);
  one << 0.0;
  Eigen::VectorXd at(1);
  at << 0.0;
  const double b = 0.37;
  CHECK(kde(one, at, b)[0] ==
        doctest::Approx(1.0 / (b * std::sqrt(2 * M_PI))).epsilon(1e-12));

  const Eigen::VectorXd samples = gaussian_chain(100000, 0.0, 1.0, 123);
  Eigen::VectorXd grid(1601);
  for (int i = 0; i < grid.size(); ++i) grid[i] = -8.0 + i * 0.01;
  const Eigen::VectorXd dens = kde(samples, grid);
  // Integrates to one.
  double integral = 0.0;
  for (int i = 0; i + 1 < grid.size(); ++i)
    integral += 0.5 * (dens[i] + dens[i + 1]) * 0.01;
  CHECK(integral == doctest::Approx(1.0).epsilon(0.01));
  // Close to the true density on [-3, 3].
  double worst = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    if (grid[i] < -3.0 || grid[i] > 3.0) continue;
    const double phi = std::exp(-0.5 * grid[i] * grid[i]) / std::sqrt(2 * M_PI);
    worst = std::max(worst, std::abs(dens[i] - phi));
  }
  CHECK(worst <= 0.02);

  CHECK_THROWS_AS(kde(Eigen::VectorXd::Ones(5), grid), std::invalid_argument);
}

TEST_CASE("report assembles per-component metrics") {
  std::vector<Eigen::MatrixXd> chains;
  for (int c = 0; c < 3; ++c) {
    Eigen::MatrixXd m(500, 2);
    m.col(0) = gaussian_chain(500, 0.0, 1.0, 200 + c);
    m.col(1) = gaussian_chain(500, 5.0, 2.0, 300 + c);
    chains.push_back(m);
  }
  const DiagnosticsReport rep = diagnose(chains, 20);
  CHECK(rep.psrf.size() == 2);
  CHECK(rep.ess.size() == 2);
  CHECK(rep.acf.rows() == 2);
  CHECK(rep.acf.cols() == 21);
  CHECK(rep.psrf.maxCoeff() < 1.05);
  CHECK(rep.acf(0, 0) == 1.0);
  CHECK(rep.ess.minCoeff() > 0.0);
}

TEST_SUITE_END();
