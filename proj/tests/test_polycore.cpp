#include <doctest.h>

#include <cmath>
#include <random>

#include "hypstrata/configvec.hpp"
#include "hypstrata/polycore.hpp"
#include "oracles.hpp"

using namespace hypstrata;

namespace {

RootConfiguration random_rc(std::mt19937_64& rng, int n, bool strict) {
  std::uniform_int_distribution<int> mult(1, 3);
  std::vector<int> m;
  int left = n;
  while (left > 0) {
    const int v = strict ? 1 : std::min(left, mult(rng));
    m.push_back(v);
    left -= v;
  }
  if (m.size() < 2) m = {n - 1, 1};
  std::uniform_real_distribution<double> u(-2.0, 3.0);
  std::vector<double> y;
  while (y.size() < m.size()) {
    const double v = u(rng);
    bool far = true;
    for (double w : y) far = far && std::fabs(v - w) > 1e-2;
    if (far) y.push_back(v);
  }
  std::sort(y.begin(), y.end());
  return RootConfiguration(y, m);
}

}  // namespace

TEST_CASE("root configuration validation") {
  CHECK_THROWS_AS(RootConfiguration({1.0, 0.0}, {1, 1}), DomainError);
  CHECK_THROWS_AS(RootConfiguration({0.0, 1.0}, {1, 0}), DomainError);
  CHECK_THROWS_AS(RootConfiguration({0.0}, {1, 1}), DomainError);
  const RootConfiguration rc({0.0, 1.0}, {2, 3});
  CHECK(rc.degree() == 5);
  CHECK(rc.expanded() == std::vector<double>{0, 0, 1, 1, 1});
  CHECK(rc.min_gap() == doctest::Approx(1.0));
}

TEST_CASE("coeffs_from_roots") {
  CHECK(coeffs_from_roots(RootConfiguration::simple({-1, 1})).coeffs == std::vector<double>{0, -1});
  CHECK(coeffs_from_roots(RootConfiguration({0}, {3})).coeffs == std::vector<double>{0, 0, 0});

  const auto want = oracle::esf_coeffs({0, 1, 2});
  const auto got = coeffs_from_roots(RootConfiguration::simple({0, 1, 2})).coeffs;
  REQUIRE(got.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-15));
  CHECK(got == std::vector<double>{-3, 2, 0});

  SUBCASE("random configurations against elementary symmetric functions") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 50; ++t) {
      const auto rc = random_rc(rng, 2 + t % 9, t % 2 == 0);
      const auto want_r = oracle::esf_coeffs(rc.expanded());
      const auto got_r = coeffs_from_roots(rc).coeffs;
      double sum = 0.0;
      for (std::size_t i = 0; i < rc.distinct(); ++i) sum += rc.mult(i) * rc.root(i);
      CHECK(got_r[0] == doctest::Approx(-sum));
      for (std::size_t i = 0; i < got_r.size(); ++i)
        CHECK(got_r[i] == doctest::Approx(want_r[i]).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("derivative_roots examples") {
  const auto d1 = derivative_roots(RootConfiguration::simple({-1, 0, 1}), 1);
  REQUIRE(d1.size() == 2);
  CHECK(d1.roots[0] == doctest::Approx(-1 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(d1.roots[1] == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-12));

  const auto d2 = derivative_roots(RootConfiguration({0}, {3}), 1);
  CHECK(d2.roots == std::vector<double>{0, 0});
  CHECK(d2.carried == std::vector<int>{0, 0});

  const auto d3 = derivative_roots(RootConfiguration::simple({0, 1, 2}), 2);
  REQUIRE(d3.size() == 1);
  CHECK(d3.roots[0] == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(derivative_roots(RootConfiguration::simple({0, 1, 2}), 3), DomainError);
  CHECK_THROWS_AS(derivative_roots(RootConfiguration::simple({0, 1, 2}), 0), DomainError);
}

TEST_CASE("derivative_roots agree with long-double critical points") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 30; ++t) {
    const auto rc = random_rc(rng, 3 + t % 8, true);
    const std::vector<long double> ys(rc.roots().begin(), rc.roots().end());
    const auto want = oracle::critical_points(ys);
    const auto got = derivative_roots(rc, 1);
    REQUIRE(got.size() == want.size());
    for (std::size_t j = 0; j < want.size(); ++j) CHECK(std::fabs(got.roots[j] - static_cast<double>(want[j])) < 1e-11);
  }
}

TEST_CASE("interlacing, count and multiplicity carry") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + t % 9;
    const auto rc = random_rc(rng, n, t % 3 == 0);
    const auto x = rc.expanded();
    for (int k = 1; k < n; ++k) {
      const auto d = derivative_roots(rc, k);
      REQUIRE(static_cast<int>(d.size()) == n - k);
      for (int i = 0; i < n - k; ++i) {
        CHECK(x[static_cast<std::size_t>(i)] <= d.roots[static_cast<std::size_t>(i)] + kRootTol);
        CHECK(d.roots[static_cast<std::size_t>(i)] <= x[static_cast<std::size_t>(i + k)] + kRootTol);
      }
      for (std::size_t r = 0; r < rc.distinct(); ++r) {
        const int carried = static_cast<int>(std::count(d.carried.begin(), d.carried.end(), static_cast<int>(r)));
        CHECK(carried == std::max(0, rc.mult(r) - k));
      }
      const auto q = rc.distinct();
      if (rc.mult(0) <= k) CHECK(d.roots.front() > rc.root(0));
      if (rc.mult(q - 1) <= k) CHECK(d.roots.back() < rc.root(q - 1));
    }
  }
}

TEST_CASE("gamma_normalize") {
  const auto a = gamma_normalize(RootConfiguration::simple({-1, 3}));
  CHECK(a.root(0) == 0.0);
  CHECK(a.root(1) == 1.0);
  const auto b = gamma_normalize(RootConfiguration::simple({0, 1}));
  CHECK(b == RootConfiguration::simple({0, 1}));
  const auto c = gamma_normalize(RootConfiguration::simple({2, 2.6, 4}));
  CHECK(c.root(1) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK_THROWS_AS(gamma_normalize(RootConfiguration({1.0}, {3})), DomainError);
}

TEST_CASE("std_normalize") {
  const auto a = std_normalize(RootConfiguration::simple({-1, 1}));
  CHECK(a.root(0) == doctest::Approx(-1.0));
  CHECK(a.root(1) == doctest::Approx(1.0));
  const auto b = std_normalize(RootConfiguration::simple({0, 2}));
  const auto cb = coeffs_from_roots(b).coeffs;
  CHECK(std::fabs(cb[0]) < 1e-14);
  CHECK(cb[1] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(b.root(0) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(std_normalize(RootConfiguration({0.0}, {3})), DomainError);

  std::mt19937_64 rng(4);
  for (int t = 0; t < 40; ++t) {
    const auto rc = random_rc(rng, 3 + t % 6, t % 2 == 0);
    const auto s = std_normalize(rc);
    const auto cs = coeffs_from_roots(s).coeffs;
    CHECK(std::fabs(cs[0]) < 1e-12);
    CHECK(cs[1] == doctest::Approx(-1.0).epsilon(1e-12));
    for (int k = 1; k < rc.degree(); ++k) {
      CHECK(classify(s, k) == classify(rc, k));
      CHECK(classify(gamma_normalize(rc), k) == classify(rc, k));
    }
  }
}

TEST_CASE("roots_from_coeffs") {
  const auto a = roots_from_coeffs({{0, -1}});
  CHECK(a.distinct() == 2);
  CHECK(a.root(0) == doctest::Approx(-1.0));
  CHECK(a.root(1) == doctest::Approx(1.0));
  const auto b = roots_from_coeffs({{-3, 2, 0}});
  REQUIRE(b.distinct() == 3);
  CHECK(std::fabs(b.root(0)) < 1e-12);
  CHECK(b.root(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.root(2) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(roots_from_coeffs({{0, 1}}), DomainError);

  SUBCASE("round trip") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 100; ++t) {
      const auto rc = random_rc(rng, 1 + 1 + t % 9, true);
      const auto back = roots_from_coeffs(coeffs_from_roots(rc));
      REQUIRE(back.distinct() == rc.distinct());
      for (std::size_t i = 0; i < rc.distinct(); ++i) {
        CHECK(back.mult(i) == rc.mult(i));
        CHECK(std::fabs(back.root(i) - rc.root(i)) < 1e-9);
      }
    }
  }

  SUBCASE("multiplicities are detected") {
    const auto rc = roots_from_coeffs(coeffs_from_roots(RootConfiguration({0.0, 1.0}, {2, 1})));
    REQUIRE(rc.distinct() == 2);
    CHECK(rc.mult(0) == 2);
    CHECK(rc.mult(1) == 1);
  }
}
