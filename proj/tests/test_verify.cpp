#include <doctest.h>

#include "hypstrata/verify.hpp"

using namespace hypstrata;

TEST_CASE("sample seeds are stable and distinct") {
  CHECK(sample_seed(7, 0) == sample_seed(7, 0));
  CHECK(sample_seed(7, 0) != sample_seed(7, 1));
  CHECK(sample_seed(7, 0) != sample_seed(8, 0));
}

TEST_CASE("random_configuration") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto rc = random_configuration(rng, 2 + t % 8, t % 2 == 0);
    CHECK(rc.degree() == 2 + t % 8);
    CHECK(rc.distinct() >= 2);
    CHECK(rc.root(0) == 0.0);
    CHECK(rc.root(rc.distinct() - 1) == 1.0);
    if (t % 2 == 0) CHECK(rc.strictly_hyperbolic());
  }
  CHECK_THROWS_AS(random_configuration(rng, 1, true), DomainError);
}

TEST_CASE("suites pass and do not depend on the thread count") {
  for (const auto& name : suite_names()) {
    VerifyOptions one{5, 12, 3, 1};
    VerifyOptions many{5, 12, 3, 4};
    const auto a = run_suite(name, one);
    const auto b = run_suite(name, many);
    CHECK_MESSAGE(a.ok(), name);
    REQUIRE(a.properties.size() == b.properties.size());
    for (std::size_t i = 0; i < a.properties.size(); ++i) {
      CHECK(a.properties[i].name == b.properties[i].name);
      CHECK(a.properties[i].worst == b.properties[i].worst);
      CHECK(a.properties[i].checked == b.properties[i].checked);
    }
  }
  CHECK_THROWS_AS(run_suite("nope", {}), DomainError);
}
