#include <doctest.h>

#include <Eigen/SparseCholesky>
#include <cmath>

#include "cmrf/realizations.hpp"
#include "cmrf/spde.hpp"

using namespace cmrf;

TEST_SUITE_BEGIN("realizations");

TEST_CASE("cauchy quantile identities") {
  Rng rng(1);
  // U = 1/2 maps to the median exactly; check via the quantile transform.
  CHECK(2.0 * std::tan(M_PI * (0.5 - 0.5)) == 0.0);
  CHECK(2.0 * std::tan(M_PI * (0.75 - 0.5)) == doctest::Approx(2.0).epsilon(1e-12));

  // Empirical CDF at -scale, 0, +scale over many draws.
  const double scale = 1.7;
  const int n = 1000000;
  int below_neg = 0, below_zero = 0, below_pos = 0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_cauchy(scale, rng);
    if (x < -scale) ++below_neg;
    if (x < 0.0) ++below_zero;
    if (x < scale) ++below_pos;
  }
  CHECK(below_neg / static_cast<double>(n) == doctest::Approx(0.25).epsilon(0.01));
  CHECK(below_zero / static_cast<double>(n) == doctest::Approx(0.50).epsilon(0.005));
  CHECK(below_pos / static_cast<double>(n) == doctest::Approx(0.75).epsilon(0.01));
}

TEST_CASE("gaussian walk variance grows linearly") {
  const int n = 100, reps = 10000;
  const double h = 0.01;
  double acc = 0.0;
  for (int r = 0; r < reps; ++r) {
    const Field f =
        random_walk_1d(1, {NoiseFamily::gaussian, 1.0, static_cast<std::uint64_t>(r)}, n, h);
    acc += f.values[n - 1] * f.values[n - 1];
  }
  acc /= reps;
  CHECK(acc == doctest::Approx(n * h).epsilon(0.10));
}

TEST_CASE("cauchy walk endpoint is cauchy with summed scale") {
  const int n = 100, reps = 10000;
  const double h = 0.01;
  int q25 = 0, q50 = 0, q75 = 0;
  for (int r = 0; r < reps; ++r) {
    const Field f =
        random_walk_1d(1, {NoiseFamily::cauchy, 1.0, static_cast<std::uint64_t>(r)}, n, h);
    const double z = f.values[n - 1] / (n * h);
    if (z < -1.0) ++q25;
    if (z < 0.0) ++q50;
    if (z < 1.0) ++q75;
  }
  CHECK(q25 / static_cast<double>(reps) == doctest::Approx(0.25).epsilon(0.08));
  CHECK(q50 / static_cast<double>(reps) == doctest::Approx(0.50).epsilon(0.04));
  CHECK(q75 / static_cast<double>(reps) == doctest::Approx(0.75).epsilon(0.08));
}

TEST_CASE("second order walk starts flat") {
  const Field f = random_walk_1d(2, {NoiseFamily::cauchy, 1.0, 3}, 50, 0.02);
  CHECK(f.values[0] == 0.0);
  CHECK(f.values[1] == 0.0);  // zero initial slope
  CHECK(f.values[2] != 0.0);
}

TEST_CASE("zero and tiny noise collapse the walk") {
  const Field f = random_walk_1d(1, {NoiseFamily::gaussian, 1e-300, 4}, 20, 0.05);
  CHECK(f.values.cwiseAbs().maxCoeff() <= 1e-250);
}

TEST_CASE("spde solve satisfies the residual bound") {
  for (const Lattice& lat : {Lattice::line(200), Lattice::grid(24, 24)}) {
    const NoiseSpec noise{NoiseFamily::cauchy, 1.0, 11};
    const double ell = lat.dims == 1 ? 0.015 * 0.015 : 0.01;
    const Field u = spde_realization(lat, ell, noise);

    // Rebuild the noise stream and verify A u = m.
    Rng rng(noise.seed);
    Eigen::VectorXd m(lat.size());
    for (int i = 0; i < m.size(); ++i) m[i] = rng.cauchy(noise.scale);
    Eigen::VectorXd residual;
    spde_apply(lat, ell, lat.h(), true, u.values, residual);
    residual -= m;
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-9 * m.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("operator is symmetric positive definite for positive ell") {
  const Lattice lat = Lattice::grid(16, 16);
  const Eigen::SparseMatrix<double> A = spde_matrix(lat, 0.02, lat.h(), true);
  const Eigen::MatrixXd D = Eigen::MatrixXd(A);
  CHECK((D - D.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("matrix and matrix-free operator agree") {
  const Lattice lat = Lattice::grid(9, 13);
  const double ell = 0.003, h = 0.07;
  const Eigen::SparseMatrix<double> A = spde_matrix(lat, ell, h, true);
  Rng rng(5);
  Eigen::VectorXd u(lat.size());
  for (int i = 0; i < u.size(); ++i) u[i] = rng.normal();
  Eigen::VectorXd direct;
  spde_apply(lat, ell, h, true, u, direct);
  CHECK((A * u - direct).cwiseAbs().maxCoeff() <= 1e-14);
  for (int site : {0, 5, lat.size() - 1})
    for (int row : spde_rows_touching(lat, site))
      CHECK(spde_apply_row(lat, ell, h, true, u, row) ==
            doctest::Approx(direct[row]).epsilon(1e-15));
}

TEST_CASE("gaussian spde interior variance is stationary") {
  const Lattice lat = Lattice::line(101);
  const double ell = 4e-4;
  const int reps = 1000;
  Eigen::VectorXd second_moment = Eigen::VectorXd::Zero(lat.size());
  for (int r = 0; r < reps; ++r) {
    const Field f = spde_realization(
        lat, ell, {NoiseFamily::gaussian, 1.0, static_cast<std::uint64_t>(1000 + r)});
    second_moment.array() += f.values.array().square();
  }
  second_moment /= reps;
  // Compare a few deep-interior nodes pairwise.
  const double ref = second_moment[50];
  for (int k : {40, 45, 55, 60})
    CHECK(second_moment[k] == doctest::Approx(ref).epsilon(0.10));
}

TEST_CASE("constant noise is reproduced in the interior") {
  const Lattice lat = Lattice::line(401);
  const double ell = 1e-5;
  const Eigen::SparseMatrix<double> A = spde_matrix(lat, ell, lat.h(), true);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  const Eigen::VectorXd u = solver.solve(Eigen::VectorXd::Constant(lat.size(), 3.0));
  CHECK(u[200] == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("fixed seed reproduces the realization") {
  const Lattice lat = Lattice::line(64);
  const Field a = spde_realization(lat, 0.001, {NoiseFamily::cauchy, 1.0, 9});
  const Field b = spde_realization(lat, 0.001, {NoiseFamily::cauchy, 1.0, 9});
  CHECK(a.values == b.values);
}

TEST_CASE("max-abs normalization") {
  Field f(Lattice::line(3), Eigen::Vector3d{1.0, -4.0, 2.0});
  const Field n = normalize_max_abs(f);
  CHECK(n.values.cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(n.values[1] == doctest::Approx(-1.0).epsilon(1e-15));
  const Field z = normalize_max_abs(Field::zero(Lattice::line(3)));
  CHECK(z.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(random_walk_1d(3, {NoiseFamily::cauchy, 1.0, 0}, 10, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(random_walk_1d(1, {NoiseFamily::cauchy, -1.0, 0}, 10, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(spde_realization(Lattice::line(10), -0.1, {NoiseFamily::cauchy, 1.0, 0}),
                  std::invalid_argument);
}

TEST_SUITE_END();
