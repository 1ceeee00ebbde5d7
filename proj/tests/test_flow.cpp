#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hypstrata/flow.hpp"
#include "hypstrata/strata.hpp"

using namespace hypstrata;

TEST_CASE("solve_speeds") {
  SUBCASE("no class B roots") {
    const auto st = make_flow_state(RootConfiguration::simple({0, 0.3, 1}), 2, 1);
    const auto sp = solve_speeds(st);
    CHECK(sp.class_b.empty());
    CHECK(sp.speeds == std::vector<double>{0.0, 1.0, 0.0});
  }

  SUBCASE("one class B root matches the 1x1 solve and differences") {
    std::mt19937_64 rng(31);
    const auto cv = ConfigVector::parse("(1,1_a,a,1,1)", 2);
    const auto rc = sample_point(cv, rng);
    const auto st = make_flow_state(rc, 2, 2);
    REQUIRE(st.bindings.size() == 1);
    const auto& b = st.bindings[0];
    const auto s = sensitivity_matrix(st.rc, 2);
    const auto sp = solve_speeds(st);
    REQUIRE(sp.class_b.size() == 1);
    const double expect = s(b.xi, 2) / (1.0 - s(b.xi, b.root));
    CHECK(sp.class_b[0] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(sp.class_b[0] > 0.0);
    CHECK(sp.class_b[0] < 1.0);
    CHECK(sp.series_deviation < 1e-8);

    // Move the mover by h, restore the binding, and difference y_b.
    const double h = 1e-6;
    auto shifted = [&](double d) {
      std::vector<double> y(st.rc.roots().begin(), st.rc.roots().end());
      y[2] += d;
      return solve_equalities(st.rc.with_roots(y), st.bindings).root(b.root);
    };
    CHECK(std::fabs((shifted(h) - shifted(-h)) / (2 * h) - sp.class_b[0]) < 1e-6);

    // Reversed field.
    auto back = st;
    back.direction = -1;
    const auto rs = solve_speeds(back);
    CHECK(rs.class_b[0] == doctest::Approx(-sp.class_b[0]).epsilon(1e-12));
    CHECK(rs.class_b[0] >= -1.0);
    CHECK(rs.class_b[0] <= 0.0);
  }
}

TEST_CASE("advance") {
  const auto st = make_flow_state(RootConfiguration::simple({0, 0.3, 1}), 2, 1);
  const auto next = advance(st, 0.1);
  CHECK(next.rc.root(1) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(next.rc.root(0) == 0.0);
  CHECK(next.rc.root(2) == 1.0);
  CHECK(next.sigma == doctest::Approx(0.1));
  const auto same = advance(st, 0.0);
  CHECK(same.rc == st.rc);
  CHECK(same.sigma == st.sigma);
}

TEST_CASE("flow_to_boundary examples") {
  SUBCASE("mover meets xi") {
    const auto res = flow_to_boundary(RootConfiguration::simple({0, 0.3, 1}), 2, 1);
    // xi(sigma) = (1.3 + sigma) / 3 meets 0.3 + sigma at sigma = 0.2.
    const double sigma = (1.3 - 3 * 0.3) / 2;
    CHECK(std::fabs(res.sigma0 - sigma) < 1e-6);
    CHECK(res.endpoint_cv.str() == "(1,1_a,1)");
    CHECK(std::fabs(res.endpoint.root(1) - 0.5) < 1e-9);
    REQUIRE(res.events.size() == 1);
    CHECK(res.events[0].kind == EventKind::MoverMeetsXi);
  }

  SUBCASE("mover meets a class A root") {
    const auto res = flow_to_boundary(RootConfiguration::simple({0, 0.8, 1}), 2, 1);
    CHECK(std::fabs(res.sigma0 - 0.2) < 1e-6);
    CHECK(res.endpoint_cv.str() == "(1,a,2)");
    CHECK(res.endpoint == RootConfiguration({0.0, 1.0}, {1, 2}));
    REQUIRE(res.events.size() == 1);
    CHECK(res.events[0].kind == EventKind::MoverMeetsARoot);
  }

  SUBCASE("trajectory") {
    const auto res = flow_to_boundary(RootConfiguration::simple({0, 0.3, 1}), 2, 1);
    const auto& s = res.trajectory.samples;
    REQUIRE(s.size() >= 2);
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].sigma > s[i - 1].sigma);
    for (const auto& row : s) {
      CHECK(row.y.front() == 0.0);
      CHECK(row.y.back() == 1.0);
    }
    std::istringstream csv(res.trajectory.to_csv());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "sigma,y_1,y_2,y_3,xi_1");
  }

  CHECK_THROWS_AS(flow_to_boundary(RootConfiguration::simple({0, 0.3, 1}), 2, 0), DomainError);
}

TEST_CASE("retract examples") {
  const auto a = retract(RootConfiguration::simple({0, 0.3, 1}), 2);
  REQUIRE(a.chain.size() == 2);
  CHECK(a.final().cv.str() == "(1,1_a,1)");
  CHECK(std::fabs(a.final().rc.root(1) - 0.5) < 1e-9);

  const auto b = retract(RootConfiguration({0, 1}, {2, 1}), 2);
  CHECK(b.chain.size() == 1);

  const auto c = retract(RootConfiguration::simple({0, 0.2, 1}), 2);
  const auto d = retract(RootConfiguration::simple({0, 0.45, 1}), 2);
  CHECK(c.final().cv == d.final().cv);
  CHECK(std::fabs(c.final().rc.root(1) - d.final().rc.root(1)) < 1e-6);
}

TEST_CASE("reverse_check") {
  const auto res = flow_to_boundary(RootConfiguration::simple({0, 0.3, 1}), 2, 1);
  const auto rev = reverse_check(res);
  CHECK(rev.ok());
  REQUIRE(rev.reentered_cv);
  CHECK(rev.reentered_cv->str() == "(1,1,a,1)");
  REQUIRE(rev.confluence_xi_rates.size() == 1);
  CHECK(rev.confluence_xi_rates[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("flow invariants over random strata") {
  std::mt19937_64 rng(32);
  for (int n = 4; n <= 6; ++n) {
    for (int k = 2; k < n; ++k) {
      const auto poset = build_poset(n, k);
      for (const auto& cv : enumerate_cvs(n, k)) {
        if (dimension(cv).conv_dim < 1) continue;
        RootConfiguration start = RootConfiguration::simple({0, 1});
        try {
          start = sample_point(cv, rng, 200);
        } catch (const NumericalError&) {
          continue;
        }
        const auto res = retract(start, k);
        CHECK(res.legs.size() <= static_cast<std::size_t>(dimension(cv).conv_dim));
        for (const auto& leg : res.legs) {
          const int dir = leg.start.direction;
          CHECK(std::min(dir * leg.min_class_b_speed, dir * leg.max_class_b_speed) >= -1e-9);
          CHECK(std::max(dir * leg.min_class_b_speed, dir * leg.max_class_b_speed) <= 1.0 + 1e-9);
          CHECK(leg.sigma0 <= 1.0 + 1e-9);
          CHECK(leg.max_drift < 1e-10);
          CHECK(dimension(leg.endpoint_cv).conv_dim == dimension(leg.start.cv).conv_dim - static_cast<int>(leg.events.size()));
          const auto lo = poset.find(leg.endpoint_cv);
          const auto hi = poset.find(leg.start.cv);
          REQUIRE(lo);
          REQUIRE(hi);
          CHECK(poset.reachable(*lo, *hi));
        }
        const auto z = zero_dim_point(res.final().cv);
        for (std::size_t i = 0; i < z.distinct(); ++i) CHECK(std::fabs(z.root(i) - res.final().rc.root(i)) < 1e-6);
      }
    }
  }
}

TEST_CASE("speeds settle as the confluence approaches") {
  std::mt19937_64 rng(33);
  const auto cv = ConfigVector::parse("(1,1_a,a,1,1)", 2);
  const auto res = flow_to_boundary(sample_point(cv, rng), 2, 2);
  const auto& s = res.trajectory.samples;
  REQUIRE(s.size() >= 4);
  // Late increments shrink with the step: Cauchy behaviour of the samples.
  const double late = std::fabs(s[s.size() - 2].class_b_speeds[0] - s[s.size() - 3].class_b_speeds[0]);
  const double dsig = s[s.size() - 2].sigma - s[s.size() - 3].sigma;
  CHECK(late <= 10.0 * dsig + 1e-12);
}

TEST_CASE("policies") {
  CHECK(parse_policy("targeted") == MoverPolicy::Targeted);
  CHECK(to_string(MoverPolicy::Leftmost) == "leftmost");
  CHECK_THROWS_AS(parse_policy("nope"), DomainError);
  const auto cv = ConfigVector::parse("(1,a,1,a,1,1)", 2);
  CHECK(mover_candidates(cv) == std::vector<std::size_t>{1, 2});
  CHECK(choose_move(cv, MoverPolicy::Leftmost).mover == 1);
  CHECK(choose_move(cv, MoverPolicy::Rightmost).mover == 2);
  const auto target = plan_target(cv);
  REQUIRE(target);
  CHECK(dimension(*target).conv_dim == 0);
  for (const auto& out : leg_outcomes(cv, 1)) CHECK(dimension(out).conv_dim == 1);
}
