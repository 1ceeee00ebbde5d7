#include <doctest.h>

#include <cmath>
#include <random>

#include "hypstrata/sensitivity.hpp"
#include "hypstrata/strata.hpp"
#include "oracles.hpp"

using namespace hypstrata;

namespace {

RootConfiguration random_strict(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    std::vector<double> y(static_cast<std::size_t>(n));
    for (auto& v : y) v = u(rng);
    std::sort(y.begin(), y.end());
    bool ok = true;
    for (std::size_t i = 1; i < y.size(); ++i) ok = ok && y[i] - y[i - 1] > 1e-3;
    if (ok) return RootConfiguration::simple(y);
  }
}

// S[1][2] for roots (0,1,2), k = 1, from -P(xi) / ((xi - c)^2 P''(xi)).
double closed_form_s12() {
  const double xi = 1.0 - 1.0 / std::sqrt(3.0);
  const double p = xi * (xi - 1.0) * (xi - 2.0);
  const double p2 = 6.0 * xi - 6.0;
  return -p / ((xi - 1.0) * (xi - 1.0) * p2);
}

}  // namespace

TEST_CASE("sensitivity_matrix examples") {
  const auto s = sensitivity_matrix(RootConfiguration::simple({0, 1, 2}), 1);
  CHECK(closed_form_s12() == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(std::fabs(s(0, 1) - closed_form_s12()) < 1e-10);
  CHECK(std::fabs(s(0, 1) - 1.0 / 3.0) < 1e-10);

  const auto t = sensitivity_matrix(RootConfiguration::simple({-1, 1}), 1);
  CHECK(t(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(t(0, 1) == doctest::Approx(0.5).epsilon(1e-14));

  const auto u = sensitivity_matrix(RootConfiguration({0, 1}, {2, 1}), 1);
  REQUIRE(u.rows() == 2);
  CHECK(u.carried[0] == 0);
  CHECK(u(0, 0) == 1.0);
  CHECK(u(0, 1) == 0.0);
}

TEST_CASE("single root of P^(n-1) is the weighted mean") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> mu(1, 3);
  for (int t = 0; t < 30; ++t) {
    std::vector<int> m;
    for (int i = 0; i < 2 + t % 4; ++i) m.push_back(mu(rng));
    const auto base = random_strict(rng, static_cast<int>(m.size()));
    const RootConfiguration rc({base.roots().begin(), base.roots().end()}, m);
    const int n = rc.degree();
    const auto s = sensitivity_matrix(rc, n - 1);
    REQUIRE(s.rows() == 1);
    for (std::size_t i = 0; i < rc.distinct(); ++i)
      CHECK(s(0, i) == doctest::Approx(static_cast<double>(m[i]) / n).epsilon(1e-12));
  }
}

TEST_CASE("k = 1 entries match long-double differences") {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 20; ++t) {
    const auto rc = random_strict(rng, 3 + t % 6);
    const auto s = sensitivity_matrix(rc, 1);
    const std::vector<double> ys(rc.roots().begin(), rc.roots().end());
    for (std::size_t j = 0; j < s.rows(); ++j)
      for (std::size_t i = 0; i < s.cols(); ++i) CHECK(std::fabs(s(j, i) - oracle::k1_sensitivity(ys, j, i)) < 1e-7);
  }
}

TEST_CASE("sensitivity_fd") {
  const auto fd = sensitivity_fd(RootConfiguration::simple({0, 1, 2}), 1);
  CHECK(std::fabs(fd(0, 1) - 1.0 / 3.0) < 1e-6);
  const auto half = sensitivity_fd(RootConfiguration::simple({-1, 1}), 1);
  CHECK(std::fabs(half(0, 0) - 0.5) < 1e-8);
  CHECK(std::fabs(half(0, 1) - 0.5) < 1e-8);

  const auto m = sensitivity_fd(RootConfiguration::simple({0, 0.3, 1}), 2);
  double row = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(m(0, i) > 0.0);
    CHECK(m(0, i) < 1.0 / 3.0 + 1e-6);
    row += m(0, i);
  }
  CHECK(std::fabs(row - 1.0) < 1e-6);
  CHECK_THROWS_AS(sensitivity_fd(RootConfiguration::simple({0, 1}), 1, 2.0), DomainError);
}

TEST_CASE("analytic and finite-difference matrices agree") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 100; ++t) {
    const int n = 3 + t % 8;
    const auto rc = random_strict(rng, n);
    for (int k = 1; k < n; ++k) {
      const auto a = sensitivity_matrix(rc, k);
      const auto f = sensitivity_fd(rc, k);
      double worst = 0.0;
      for (std::size_t j = 0; j < a.rows(); ++j)
        for (std::size_t i = 0; i < a.cols(); ++i) worst = std::max(worst, std::fabs(a(j, i) - f(j, i)));
      CHECK(worst <= 1e-6);
    }
  }
}

TEST_CASE("deriv_k1_formula") {
  const auto rc = RootConfiguration::simple({0, 1, 2});
  CHECK(deriv_k1_formula(rc, 1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(deriv_k1_formula(RootConfiguration::simple({-1, 1}), 0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  const double v = deriv_k1_formula(rc, 0, 0);
  CHECK(v > 0.0);
  CHECK(v < 2.0 / 3.0);
  CHECK_THROWS_AS(deriv_k1_formula(RootConfiguration({0, 1}, {2, 1}), 0, 0), DomainError);

  std::mt19937_64 rng(24);
  for (int t = 0; t < 50; ++t) {
    const auto r = random_strict(rng, 2 + t % 9);
    const auto s = sensitivity_matrix(r, 1);
    for (std::size_t j = 0; j < s.rows(); ++j)
      for (std::size_t i = 0; i < s.cols(); ++i) CHECK(std::fabs(deriv_k1_formula(r, i, j) - s(j, i)) < 1e-10);
  }
}

TEST_CASE("lemma_report examples") {
  const auto a = lemma_report(RootConfiguration::simple({0, 1, 2}), 1);
  CHECK(a.ok());
  const auto s = sensitivity_matrix(RootConfiguration::simple({0, 1, 2}), 1);
  CHECK(s(0, 1) + s(1, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  const auto b = lemma_report(RootConfiguration::simple({-1, 0, 1}), 2);
  CHECK(b.ok());
  const auto sb = sensitivity_matrix(RootConfiguration::simple({-1, 0, 1}), 2);
  for (std::size_t i = 0; i < 3; ++i) CHECK(sb(0, i) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // P = x^3 (x - 1), k = 2: xi = 0 is carried by the triple root.
  const auto rc = RootConfiguration({0, 1}, {3, 1});
  const auto c = lemma_report(rc, 2);
  CHECK(c.ok());
  const auto sc = sensitivity_matrix(rc, 2);
  REQUIRE(sc.carried[0] == 0);
  CHECK(sc(0, 1) == 0.0);
  CHECK(sc(0, 0) == 1.0);
}

TEST_CASE("lemma properties on random configurations") {
  std::mt19937_64 rng(25);
  std::uniform_int_distribution<int> mu(1, 4);
  for (int t = 0; t < 300; ++t) {
    const bool strict = t % 3 != 0;
    std::vector<int> m;
    const int q = 2 + t % 6;
    for (int i = 0; i < q; ++i) m.push_back(strict ? 1 : mu(rng));
    const auto base = random_strict(rng, q);
    const RootConfiguration rc({base.roots().begin(), base.roots().end()}, m);
    for (int k = 1; k < rc.degree(); ++k) {
      const auto rep = lemma_report(rc, k);
      CHECK(rep.at("row_sums").worst <= 1e-8);
      CHECK(rep.at("column_sums").worst <= 1e-8);
      CHECK(rep.at("signs").pass);
      CHECK(rep.at("entry_bound").pass);
      if (strict) {
        const auto s = sensitivity_matrix(rc, k);
        CHECK(s.values.minCoeff() > 0.0);
      }
    }
  }
}

TEST_CASE("zero entries exactly for rows carried by another root") {
  // Roots of multiplicity >= k+1 carry rows; every other entry of such a row is zero.
  const RootConfiguration rc({0.0, 0.4, 1.0}, {4, 1, 2});
  for (int k = 1; k < rc.degree(); ++k) {
    const auto s = sensitivity_matrix(rc, k);
    for (std::size_t j = 0; j < s.rows(); ++j) {
      for (std::size_t i = 0; i < s.cols(); ++i) {
        if (s.carried[j] >= 0 && static_cast<std::size_t>(s.carried[j]) != i)
          CHECK(s(j, i) == 0.0);
        else
          CHECK(s(j, i) > 0.0);
      }
    }
  }
}

TEST_CASE("transversality_jacobian") {
  const auto rc = RootConfiguration::simple({0, 0.5, 1});
  const std::vector<Equality> eqs{{1, 2, 0}};
  const auto cert = transversality_jacobian(rc, eqs);
  REQUIRE(cert.jacobian.rows() == 1);
  CHECK(cert.jacobian(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(cert.dominance_margin == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(cert.valid());

  const auto empty = transversality_jacobian(rc, std::vector<Equality>{});
  CHECK(empty.valid());
  CHECK(empty.jacobian.size() == 0);

  CHECK_THROWS_AS(transversality_jacobian(RootConfiguration::simple({0, 0.3, 1}), eqs), DomainError);
}

TEST_CASE("mixed-order equalities stay diagonally dominant") {
  // y_2 on a root of P'' and y_4 on a root of P''' for n = 6.
  std::mt19937_64 rng(26);
  int certified = 0;
  for (int t = 0; t < 40; ++t) {
    const auto rc = random_strict(rng, 6);
    auto nearest = [&](std::size_t root, int order) {
      const auto d = derivative_roots(rc, order);
      std::size_t best = 0;
      for (std::size_t j = 1; j < d.size(); ++j)
        if (std::fabs(d.roots[j] - rc.root(root)) < std::fabs(d.roots[best] - rc.root(root))) best = j;
      return Equality{root, order, best};
    };
    const std::vector<Equality> eqs{nearest(1, 2), nearest(3, 3)};
    try {
      const auto pt = solve_equalities(rc, eqs);
      if (pt.min_gap() < 1e-7) continue;
      CHECK(equality_residual(pt, eqs) < 1e-10);
      const auto cert = transversality_jacobian(pt, eqs);
      CHECK(cert.dominance_margin > 0.0);
      ++certified;
    } catch (const NumericalError&) {
    }
  }
  CHECK(certified > 10);
}
