#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "lipzoom/analysis.hpp"
#include "lipzoom/needle.hpp"
#include "lipzoom/simulator.hpp"
#include "lipzoom/tree_space.hpp"

using namespace lipzoom;

TEST_CASE("covering dimension of intervals") {
  IntervalSpace l1;
  auto a = covering_dimension_fit(l1, dyadic_scales(4, 10));
  CHECK(a.dimension == doctest::Approx(1.0).epsilon(0.1));
  IntervalSpace root(0.5);
  auto b = covering_dimension_fit(root, dyadic_scales(4, 10));
  CHECK(std::abs(b.dimension - 2.0) <= 0.2);
  for (const auto* rep : {&a, &b})
    for (std::size_t i = 1; i < rep->counts.size(); ++i) CHECK(rep->counts[i] >= rep->counts[i - 1]);
}

TEST_CASE("covering dimension of finite and tree spaces") {
  auto f = FiniteSpace::uniform(6, 0.5);
  auto rep = covering_dimension_fit(*f, dyadic_scales(3, 10));
  CHECK(rep.dimension == doctest::Approx(0.0));
  auto t = TreeSpace::uniform(0.5, 2);
  CHECK(covering_dimension_fit(*t, dyadic_scales(3, 10)).dimension == doctest::Approx(1.0).epsilon(0.1));
  CHECK(covering_dimension_fit(IntervalSpace(), dyadic_scales(3, 4)).note == "fewer than 3 usable scales");
}

TEST_CASE("fat subtree covering dimension") {
  auto t = TreeSpace::fat_subtree(1.0);
  auto rep = covering_dimension_fit(*t, dyadic_scales(2, 7));
  CHECK(rep.dimension == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("log-covering fit of a doubling space is small") {
  // ln N_r grows like ln 1/r, so log log N_r against log 1/r flattens.
  auto lrep = covering_dimension_fit(IntervalSpace(), dyadic_scales(2, 12), true);
  CHECK(lrep.log_covering);
  CHECK(lrep.dimension >= 0.0);
  CHECK(lrep.dimension < 0.5);
}

TEST_CASE("zooming dimension of a single peak") {
  auto s = std::make_shared<IntervalSpace>();
  auto env = std::make_shared<FunctionEnvironment>(
      s, "peak", [](const Point& x) { return 1.0 - std::abs(std::get<double>(x) - 0.5); }, 1.0,
      Point{0.5}, json::object());
  auto rep = zooming_dimension_estimate(*env, 16.0, dyadic_scales(1, 8));
  CHECK(rep.dimension == 0.0);
  for (double c : rep.counts) CHECK(c == 8.0);
  CHECK_FALSE(rep.approximate);
}

TEST_CASE("zooming dimension of a constant payoff") {
  auto s = std::make_shared<IntervalSpace>();
  auto env = std::make_shared<FunctionEnvironment>(
      s, "flat", [](const Point&) { return 0.5; }, 0.5, Point{0.5}, json::object());
  auto rep = zooming_dimension_estimate(*env, 1.0, dyadic_scales(1, 8));
  CHECK(rep.dimension == 0.0);
  for (double c : rep.counts) CHECK(c == 0.0);
}

TEST_CASE("zooming dimension never exceeds the covering dimension") {
  auto s = std::make_shared<IntervalSpace>();
  auto cov = covering_dimension_fit(*s, dyadic_scales(3, 10)).dimension;
  for (double center : {0.1, 0.5, 0.77}) {
    auto env = make_cone(s, Point{center});
    auto z = zooming_dimension_estimate(*env, 16.0, dyadic_scales(3, 10));
    CHECK(z.dimension <= cov + 0.1);
  }
  auto tree = std::make_shared<BallTree>(build_ball_tree_strength(s, 0.5, 2));
  auto needle = BanditNeedle::sampled(tree, 3, 2);
  auto nz = zooming_dimension_estimate(*needle, 16.0, dyadic_scales(3, 8));
  CHECK(nz.dimension <= cov + 0.1);
}

TEST_CASE("deterministic runs audit clean") {
  auto s = std::make_shared<IntervalSpace>();
  auto env = make_cone(s, Point{0.3}, 0.9, 1.0, 0.0, NoiseModel::deterministic());
  ZoomingOptions o;
  o.radius = RadiusPolicy::deterministic();
  Zooming z(s, o);
  CleanRunAuditor audit(*env);
  z.add_observer(&audit);
  RunOptions ro;
  ro.horizon = (1u << 10) - 2;
  run(z, *env, ro);
  REQUIRE_FALSE(audit.phases().empty());
  // Zero radii void the covering-based bounds; only cleanliness is promised.
  for (const auto& p : audit.phases()) CHECK(p.clean);
}

TEST_CASE("clean phases keep the lemma, packing and pull bounds") {
  auto s = std::make_shared<IntervalSpace>();
  auto env = make_cone(s, Point{0.3});
  int clean = 0, violated = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Zooming z(s);
    CleanRunAuditor audit(*env);
    z.add_observer(&audit);
    RunOptions ro;
    ro.horizon = (1u << 12) - 2;
    ro.seed = seed;
    run(z, *env, ro);
    for (const auto& p : audit.phases()) {
      if (!p.complete || !p.clean) continue;
      ++clean;
      if (!p.bounds_held()) ++violated;
    }
  }
  CHECK(clean > 0);
  CHECK(violated == 0);
}

TEST_CASE("covering probes find no holes") {
  auto s = std::make_shared<IntervalSpace>();
  auto env = make_cone(s, Point{0.3});
  Zooming z(s);
  CoveringProbeAuditor probes(5, 200, 8);
  z.add_observer(&probes);
  RunOptions ro;
  ro.horizon = 1u << 12;
  run(z, *env, ro);
  CHECK(probes.audited_rounds() > 0);
  CHECK(probes.probes() == probes.audited_rounds() * 200);
  CHECK(probes.violations() == 0);
}

TEST_CASE("dimension reports serialize") {
  auto rep = covering_dimension_fit(IntervalSpace(), dyadic_scales(3, 6));
  auto j = rep.to_json();
  CHECK(j["scales"].size() == 4);
  CHECK(j["dimension"].get<double>() == doctest::Approx(rep.dimension));
  CHECK_THROWS_AS(dyadic_scales(5, 3), ValidationError);
}
