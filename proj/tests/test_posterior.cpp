#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "cmrf/posterior.hpp"
#include "cmrf/rng.hpp"
#include "oracles.hpp"

using namespace cmrf;

namespace {

Posterior small_posterior(PriorVariant v, std::uint64_t seed = 2) {
  const Lattice recon = oracle::is_1d_variant(v) || !oracle::is_2d_only_variant(v)
                            ? Lattice::line(40)
                            : Lattice::grid(8, 8);
  const Lattice data = recon.dims == 1 ? Lattice::line(25) : Lattice::grid(6, 6);
  Posterior p;
  p.op = build_operator(data, recon, recon.dims == 1 ? 1.0 / 400.0 : 1.0 / 120.0);
  Rng rng(seed);
  p.y.resize(p.op.rows());
  for (int i = 0; i < p.y.size(); ++i) p.y[i] = rng.normal();
  p.sigma = 0.2;
  for (const PriorSpec& s : oracle::all_variant_specs())
    if (s.variant == v) p.prior = s;
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("posterior");

TEST_CASE("log post is likelihood plus prior") {
  const Posterior p = small_posterior(PriorVariant::cauchy_diff1_1d);
  Rng rng(8);
  const Field u = oracle::random_field(p.lattice(), rng);
  const double total = log_post(p, u);
  const double lik = log_likelihood(p.op, p.y, u, p.sigma);
  const double pri = log_prior(p.prior, u);
  CHECK(total == doctest::Approx(lik + pri).epsilon(1e-14));
}

TEST_CASE("posterior gradient matches finite differences for several priors") {
  Rng rng(10);
  for (PriorVariant v :
       {PriorVariant::cauchy_diff1_1d, PriorVariant::cauchy_diff2_1d,
        PriorVariant::cauchy_spde, PriorVariant::cauchy_iso1_2d, PriorVariant::tv2,
        PriorVariant::gauss_diff1}) {
    const Posterior p = small_posterior(v);
    const Field u = oracle::random_field(p.lattice(), rng);
    const Field g = grad_log_post(p, u);
    const Eigen::VectorXd fd = oracle::fd_gradient(
        [&](const Eigen::VectorXd& x) { return log_post(p, Field(p.lattice(), x)); },
        u.values);
    CHECK(oracle::rel_gradient_error(g.values, fd) <= 1e-5);
  }
}

TEST_CASE("gradient vanishes at the normal equations solution") {
  Posterior p = small_posterior(PriorVariant::gauss_diff1);
  // Dense normal equations with the quadratic prior's precision matrix.
  const int n = p.dim();
  const double s0 = p.prior.sigma0, s1 = p.prior.sigma1;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  K(0, 0) += 1.0 / (s0 * s0);
  for (int i = 0; i + 1 < n; ++i) {
    const double w = 1.0 / (s1 * s1);
    K(i, i) += w;
    K(i + 1, i + 1) += w;
    K(i, i + 1) -= w;
    K(i + 1, i) -= w;
  }
  const Eigen::MatrixXd F = Eigen::MatrixXd(p.op.F);
  const Eigen::MatrixXd A = F.transpose() * F / (p.sigma * p.sigma) + K;
  const Eigen::VectorXd b = F.transpose() * p.y / (p.sigma * p.sigma);
  const Eigen::VectorXd star = A.ldlt().solve(b);
  const Field g = grad_log_post(p, Field(p.lattice(), star));
  CHECK(g.values.cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("cached state deltas equal full recompute") {
  Rng rng(12);
  for (PriorVariant v :
       {PriorVariant::cauchy_diff1_1d, PriorVariant::cauchy_spde, PriorVariant::tv1,
        PriorVariant::cauchy_iso2_2d, PriorVariant::cauchy_sheet}) {
    const Posterior p = small_posterior(v);
    CachedState state(p, oracle::random_field(p.lattice(), rng));
    for (int rep = 0; rep < 200; ++rep) {
      const int site = static_cast<int>(rng.below(p.dim()));
      const double val = 2.0 * rng.uniform() - 1.0;
      const double fast = state.delta_log_post(site, val);
      Field mod = state.field();
      mod.values[site] = val;
      const double slow = log_post(p, mod) - log_post(p, state.field());
      CHECK(std::abs(fast - slow) <= 1e-9 * (1.0 + std::abs(slow)));
      if (rep % 3 == 0) state.commit(site, val);
    }
  }
}

TEST_CASE("deltas compose across commits") {
  const Posterior p = small_posterior(PriorVariant::cauchy_diff2_1d);
  Rng rng(13);
  CachedState state(p, Field::zero(p.lattice()));
  const int site = 17;
  const double a = state.field().values[site];
  const double b = 0.8, c = -0.4;
  const double d_ab = state.delta_log_post(site, b);
  const double d_ac = state.delta_log_post(site, c);
  state.commit(site, b);
  const double d_bc = state.delta_log_post(site, c);
  CHECK(d_ab + d_bc == doctest::Approx(d_ac).epsilon(1e-9));
  state.commit(site, a);  // restore
  CHECK(state.delta_log_post(site, b) == doctest::Approx(d_ab).epsilon(1e-9));
}

TEST_CASE("commit keeps the residual cache consistent") {
  const Posterior p = small_posterior(PriorVariant::cauchy_diff1_1d);
  Rng rng(14);
  CachedState state(p, oracle::random_field(p.lattice(), rng));
  const double before = state.log_post_value();

  const int site = 5;
  const double old = state.field().values[site];
  state.commit(site, 1.3);
  state.commit(site, old);
  CHECK(state.log_post_value() == doctest::Approx(before).epsilon(1e-9));

  // Long enough to cross the periodic full-refresh boundary twice.
  for (int rep = 0; rep < 25000; ++rep) {
    const int s = static_cast<int>(rng.below(p.dim()));
    state.commit(s, 2.0 * rng.uniform() - 1.0);
  }
  const Eigen::VectorXd want = p.y - p.op.F * state.field().values;
  CHECK((state.residual() - want).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(state.log_post_value() ==
        doctest::Approx(log_post(p, state.field())).epsilon(1e-8));
}

TEST_CASE("block deltas match joint full recompute") {
  const Posterior p = small_posterior(PriorVariant::cauchy_iso1_2d);
  Rng rng(15);
  CachedState state(p, oracle::random_field(p.lattice(), rng));
  const IndexSet sites = {3, 4, 11};
  Eigen::VectorXd vals(3);
  for (int k = 0; k < 3; ++k) vals[k] = rng.normal();
  const double fast = state.delta_log_post_block(sites, vals);
  Field mod = state.field();
  for (int k = 0; k < 3; ++k) mod.values[sites[static_cast<std::size_t>(k)]] = vals[k];
  const double slow = log_post(p, mod) - log_post(p, state.field());
  CHECK(fast == doctest::Approx(slow).epsilon(1e-9));
}

TEST_CASE("dimension validation") {
  Posterior p = small_posterior(PriorVariant::cauchy_diff1_1d);
  p.y = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  Posterior q = small_posterior(PriorVariant::cauchy_diff1_1d);
  CHECK_THROWS_AS(CachedState(q, Field::zero(Lattice::line(7))), std::invalid_argument);
}

TEST_SUITE_END();
