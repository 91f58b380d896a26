#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "errcal/matrix.hpp"
#include "errcal/stats.hpp"
#include "test_util.hpp"

using namespace errcal;
using test_util::kind_of;

TEST_CASE("sample moments on tiny hand cases") {
  auto one = sample_moments({{0.0}, {2.0}});
  REQUIRE(one.mean[0] == Catch::Approx(1.0));
  REQUIRE(one.cov(0, 0) == Catch::Approx(1.0));  // divisor n = 2

  auto two = sample_moments({{1.0, 0.0}, {0.0, 1.0}});
  REQUIRE(two.mean[0] == Catch::Approx(0.5));
  REQUIRE(two.mean[1] == Catch::Approx(0.5));
  REQUIRE(two.cov(0, 0) == Catch::Approx(0.25));
  REQUIRE(two.cov(0, 1) == Catch::Approx(-0.25));
  REQUIRE(two.cov(1, 0) == Catch::Approx(-0.25));
  REQUIRE(two.cov(1, 1) == Catch::Approx(0.25));
}

TEST_CASE("sample moments match a correlated normal population") {
  // Independent generator on purpose: the library's own RNG must not be the
  // oracle for the library's own moments.
  std::mt19937_64 gen(12345);
  std::normal_distribution<double> nd;
  std::vector<Vector> draws;
  draws.reserve(10000);
  for (int i = 0; i < 10000; ++i) {
    const double a = nd(gen);
    const double b = 0.5 * a + std::sqrt(1.0 - 0.25) * nd(gen);
    draws.push_back({a, b});
  }
  auto m = sample_moments(draws);
  REQUIRE(std::abs(m.cov(0, 0) - 1.0) < 0.05);
  REQUIRE(std::abs(m.cov(1, 1) - 1.0) < 0.05);
  REQUIRE(std::abs(m.cov(0, 1) - 0.5) < 0.05);
}

TEST_CASE("sample moments error and invariance") {
  REQUIRE(kind_of([] { sample_moments({{1.0}}); }) == ErrorKind::InsufficientData);

  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  std::vector<Vector> draws, shifted;
  for (int i = 0; i < 200; ++i) {
    Vector v{nd(gen), nd(gen)};
    draws.push_back(v);
    shifted.push_back({v[0] + 1000.0, v[1] - 55.5});
  }
  auto a = sample_moments(draws);
  auto b = sample_moments(shifted);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      REQUIRE(a.cov(i, j) == Catch::Approx(b.cov(i, j)).margin(1e-10));
}

TEST_CASE("vech stacks lower-triangle columns") {
  REQUIRE(vech(Matrix{{4.2}}) == Vector{4.2});
  REQUIRE(vech(Matrix{{1, 2}, {2, 3}}) == Vector{1, 2, 3});

  Matrix m{{1, 2, 3}, {2, 4, 5}, {3, 5, 6}};
  REQUIRE(vech(m) == Vector{1, 2, 3, 4, 5, 6});

  Matrix back = unvech(vech(m), 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) REQUIRE(back(i, j) == m(i, j));

  REQUIRE(kind_of([] { vech(Matrix{{1, 2}, {2.1, 3}}); }) == ErrorKind::NotSymmetric);
}

TEST_CASE("symmetric solves") {
  Vector b{3.0, -1.0};
  REQUIRE(solve_symmetric(Matrix::identity(2), b) == b);

  Vector x = solve_symmetric(Matrix{{2, 0}, {0, 4}}, Vector{1.0, 1.0});
  REQUIRE(x[0] == Catch::Approx(0.5));
  REQUIRE(x[1] == Catch::Approx(0.25));

  // Random SPD round trip: m = G·Gᵀ + I.
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nd;
  Matrix g(5, 5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) g(i, j) = nd(gen);
  Matrix m = g * transpose(g) + Matrix::identity(5);
  Vector rhs{1, 2, 3, 4, 5};
  Vector sol = solve_symmetric(m, rhs, "round-trip");
  Vector recovered = m * sol;
  double norm_rhs = 0, norm_res = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    norm_rhs += rhs[i] * rhs[i];
    norm_res += (recovered[i] - rhs[i]) * (recovered[i] - rhs[i]);
  }
  REQUIRE(std::sqrt(norm_res) < 1e-8 * std::sqrt(norm_rhs));

  auto kind = kind_of([] {
    solve_symmetric(Matrix{{1.0, 1.0}, {1.0, 1.0 + 1e-15}}, Vector{1.0, 1.0}, "collinear block");
  });
  REQUIRE(kind == ErrorKind::NearSingular);
  try {
    solve_symmetric(Matrix{{1.0, 1.0}, {1.0, 1.0 + 1e-15}}, Vector{1.0, 1.0}, "collinear block");
  } catch (const Error& e) {
    REQUIRE(std::string(e.what()).find("collinear block") != std::string::npos);
  }
}

TEST_CASE("general solve handles asymmetric systems") {
  Matrix a{{2, 1, 0}, {0, 3, -1}, {4, 0, 1}};
  Vector b{1, 2, 3};
  Vector x = solve_general(a, b);
  Vector ax = a * x;
  for (std::size_t i = 0; i < 3; ++i) REQUIRE(ax[i] == Catch::Approx(b[i]).margin(1e-12));
}

TEST_CASE("least squares basics") {
  Matrix ones(3, 1, 1.0);
  REQUIRE(ols(ones, Vector{1, 2, 3})[0] == Catch::Approx(2.0));

  Matrix line(4, 2, 1.0);
  Vector y(4);
  for (std::size_t i = 0; i < 4; ++i) {
    line(i, 1) = static_cast<double>(i);
    y[i] = 3.0 + 2.0 * static_cast<double>(i);
  }
  Vector beta = ols(line, y);
  REQUIRE(beta[0] == Catch::Approx(3.0).margin(1e-10));
  REQUIRE(beta[1] == Catch::Approx(2.0).margin(1e-10));
}

TEST_CASE("least squares consistency under noise") {
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> nd;
  OlsAccumulator acc(3);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = nd(gen);
    const double z = nd(gen);
    const double y = 2.0 + x - z + 5.0 * nd(gen);
    const double row[3] = {1.0, x, z};
    acc.add(row, y);
  }
  auto fit = acc.solve();
  REQUIRE(std::abs(fit.beta[0] - 2.0) < 0.1);
  REQUIRE(std::abs(fit.beta[1] - 1.0) < 0.1);
  REQUIRE(std::abs(fit.beta[2] + 1.0) < 0.1);
  // Classical SEs for this design: sigma/sqrt(n) scale.
  REQUIRE(fit.se()[1] == Catch::Approx(5.0 / std::sqrt(double(n))).epsilon(0.05));
}

TEST_CASE("least squares rank deficiency") {
  Matrix dup(5, 2);
  Vector y(5);
  for (std::size_t i = 0; i < 5; ++i) {
    dup(i, 0) = static_cast<double>(i);
    dup(i, 1) = 2.0 * static_cast<double>(i);  // exact multiple of column 0
    y[i] = static_cast<double>(i);
  }
  REQUIRE(kind_of([&] { ols(dup, y); }) == ErrorKind::RankDeficient);
  REQUIRE(kind_of([] { ols(Matrix(1, 2, 1.0), Vector{1.0}); }) == ErrorKind::RankDeficient);
}

TEST_CASE("least squares affine equivariance is exact for binary scalings") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  Matrix x(50, 3, 1.0);
  Vector y(50);
  for (std::size_t i = 0; i < 50; ++i) {
    x(i, 1) = nd(gen);
    x(i, 2) = nd(gen);
    y[i] = 1.0 + 0.5 * x(i, 1) - 2.0 * x(i, 2) + nd(gen);
  }
  Vector base = ols(x, y);

  Vector y2 = y;
  for (auto& v : y2) v *= 2.0;
  Vector scaled_response = ols(x, y2);
  for (std::size_t j = 0; j < 3; ++j) REQUIRE(scaled_response[j] == 2.0 * base[j]);

  Matrix xc = x;
  for (std::size_t i = 0; i < 50; ++i) xc(i, 1) *= 0.5;
  Vector scaled_column = ols(xc, y);
  REQUIRE(scaled_column[0] == base[0]);
  REQUIRE(scaled_column[1] == 2.0 * base[1]);
  REQUIRE(scaled_column[2] == base[2]);
}
