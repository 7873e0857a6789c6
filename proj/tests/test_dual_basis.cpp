#include <doctest.h>

#include <random>

#include "bezred/dual_basis.hpp"
#include "support/oracles.hpp"

using namespace bezred;
using testing::kNaturalWeights;
using testing::max_abs;

namespace {

Eigen::VectorXd unit(int size, int i) { return Eigen::VectorXd::Unit(size, i); }

// Pair integral by quadrature.
double pair_quadrature(int N, int i, int M, int j, double a, double b) {
  return testing::weighted_integral(
      [&](double t) { return testing::bernstein_sum(unit(N + 1, i), t) * testing::bernstein_sum(unit(M + 1, j), t); },
      a, b);
}

// phi from quadrature Gram and cross integrals and a generic inverse.
Eigen::MatrixXd phi_by_quadrature(int n, int m, int k, int l, double a, double b) {
  const int size = m - k - l - 1;
  Eigen::MatrixXd g(size, size), cross(size, n + 1);
  for (int s = 0; s < size; ++s) {
    for (int t = 0; t < size; ++t) g(s, t) = pair_quadrature(m, k + 1 + s, m, k + 1 + t, a, b);
    for (int j = 0; j <= n; ++j) cross(s, j) = pair_quadrature(m, k + 1 + s, n, j, a, b);
  }
  return g.inverse() * cross;
}

}  // namespace

TEST_CASE("constrained gram: small cases") {
  const Weight legendre(0, 0);
  const auto g = constrained_gram(1, -1, -1, legendre);
  Eigen::Matrix2d expect;
  expect << 1.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3;
  CHECK(max_abs(g.entries - expect) <= 1e-15);
  CHECK(pair_quadrature(1, 0, 1, 1, 0, 0) == doctest::Approx(1.0 / 6).epsilon(1e-13));

  const auto g2 = constrained_gram(2, 0, 0, legendre);
  REQUIRE(g2.entries.rows() == 1);
  CHECK(g2.entries(0, 0) == doctest::Approx(2.0 / 15).epsilon(1e-14));
  CHECK(pair_quadrature(2, 1, 2, 1, 0, 0) == doctest::Approx(2.0 / 15).epsilon(1e-13));

  CHECK_THROWS_AS(constrained_gram(3, 1, 1, legendre), DomainError);
  CHECK_THROWS_AS(constrained_gram(4, -2, 0, legendre), DomainError);
}

TEST_CASE("constrained gram is symmetric positive definite and matches quadrature") {
  for (auto [a, b] : kNaturalWeights) {
    const Weight w(a, b);
    for (int m = 2; m <= 8; ++m) {
      for (int k = -1; k <= 3; ++k) {
        for (int l = -1; l <= 3; ++l) {
          if (k + l >= m - 1) continue;
          const auto g = constrained_gram(m, k, l, w);
          REQUIRE(g.entries.rows() == m - k - l - 1);
          REQUIRE(max_abs(g.entries - g.entries.transpose()) == 0.0);
          REQUIRE(Eigen::LLT<Eigen::MatrixXd>(g.entries).info() == Eigen::Success);
        }
      }
      if (m < 3) continue;
      const auto g = constrained_gram(m, 0, 1, w);
      for (int s = 0; s < g.size(); ++s)
        REQUIRE(g.entries(s, 0) ==
                doctest::Approx(pair_quadrature(m, 1 + s, m, 1, a, b)).epsilon(1e-9));
    }
  }
}

TEST_CASE("dual coefficients") {
  const Weight legendre(0, 0);
  const auto c = dual_coefficients(constrained_gram(1, -1, -1, legendre));
  Eigen::Matrix2d expect;
  expect << 4, -2, -2, 4;
  CHECK(max_abs(c - expect) <= 1e-13);
  CHECK(dual_coefficients(constrained_gram(2, 0, 0, legendre))(0, 0) == doctest::Approx(7.5).epsilon(1e-14));
}

TEST_CASE("dual coefficients invert the gram matrix up to m = 12") {
  for (auto [a, b] : kNaturalWeights) {
    const Weight w(a, b);
    for (int m = 1; m <= 12; ++m)
      for (int k = -1; k <= 3; ++k)
        for (int l = -1; l <= 3; ++l) {
          if (k + l >= m - 1) continue;
          const auto g = constrained_gram(m, k, l, w);
          const Eigen::MatrixXd c = dual_coefficients(g);
          const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(g.size(), g.size());
          REQUIRE(max_abs(c * g.entries - id) <= 1e-8);
        }
  }
}

TEST_CASE("singular gram is reported with its condition estimate") {
  GramMatrix<double> g{2, -1, -1, Weight(0, 0), Eigen::MatrixXd::Ones(3, 3)};
  try {
    dual_coefficients(g);
    FAIL("expected IllConditionedError");
  } catch (const IllConditionedError& e) {
    CHECK(e.condition() > 1e12);
    CHECK(std::string(e.what()).find("condition") != std::string::npos);
  }
}

TEST_CASE("phi table: small cases") {
  const Weight legendre(0, 0);
  const auto phi = phi_table(2, 1, -1, -1, legendre);
  CHECK(phi(0, 0) == doctest::Approx(5.0 / 6).epsilon(1e-14));
  // Hand solve: 4 <B_0^2, B_0^1> - 2 <B_0^2, B_1^1> = 4/4 - 2/12.
  CHECK(pair_quadrature(2, 0, 1, 0, 0, 0) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(pair_quadrature(2, 0, 1, 1, 0, 0) == doctest::Approx(1.0 / 12).epsilon(1e-13));

  for (auto [a, b] : kNaturalWeights) {
    const auto same = phi_table(5, 5, -1, -1, Weight(a, b));
    CHECK(max_abs(same.entries - Eigen::MatrixXd::Identity(6, 6)) <= 1e-11);
  }
  CHECK_THROWS_AS(phi_table(3, 4, -1, -1, legendre), DomainError);
}

TEST_CASE("phi table matches a quadrature-built table") {
  const struct {
    int n, m, k, l;
  } cases[] = {{4, 2, -1, -1}, {7, 4, 1, 1}, {9, 5, 0, 2}, {11, 7, 3, 1}, {6, 5, 2, -1}};
  for (auto [a, b] : kNaturalWeights) {
    for (const auto& c : cases) {
      const auto phi = phi_table(c.n, c.m, c.k, c.l, Weight(a, b));
      const Eigen::MatrixXd q = phi_by_quadrature(c.n, c.m, c.k, c.l, a, b);
      REQUIRE(max_abs(phi.entries - q) <= 1e-7 * std::max(1.0, max_abs(q)));
    }
  }
}

TEST_CASE("phi table duality") {
  for (auto [a, b] : kNaturalWeights) {
    const Weight w(a, b);
    for (int m = 1; m <= 8; ++m)
      for (int n = m; n <= 13; ++n)
        for (int k = -1; k <= 3; ++k)
          for (int l = -1; l <= 3; ++l) {
            if (k + l >= m - 1) continue;
            const auto phi = phi_table(n, m, k, l, w);
            for (int s = k + 1; s <= m - l - 1; ++s) {
              const Curve bs(Points(unit(m + 1, s)));
              const Eigen::VectorXd e = elevate(bs, n).coordinate(0);
              for (int i = k + 1; i <= m - l - 1; ++i) {
                double acc = 0.0;
                for (int j = 0; j <= n; ++j) acc += e(j) * phi(i, j);
                REQUIRE(std::abs(acc - (i == s ? 1.0 : 0.0)) <= 1e-9);
              }
            }
          }
  }
}

TEST_CASE("phi table reproduces members of the constrained space") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 2 + trial % 7, n = m + 1 + trial % 5;
    const int k = trial % 3 - 1, l = (trial / 3) % 3 - 1;
    if (k + l >= m - 1) continue;
    const auto [a, b] = kNaturalWeights[trial % 5];
    Eigen::VectorXd q = Eigen::VectorXd::Zero(m + 1);
    q.segment(k + 1, m - k - l - 1) = testing::random_vector(rng, m - k - l - 1, -2, 2);
    const Eigen::VectorXd qn = elevate(Curve(Points(q)), n).coordinate(0);
    const auto phi = phi_table(n, m, k, l, Weight(a, b));
    const Eigen::VectorXd back = phi.entries * qn;
    REQUIRE(max_abs(back - q.segment(k + 1, m - k - l - 1)) <= 1e-9);
  }
}
