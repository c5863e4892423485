#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "lipzoom/needle.hpp"
#include "lipzoom/space.hpp"
#include "lipzoom/tree_space.hpp"

using namespace lipzoom;

namespace {

// Children c and c + r/2 of radius r/4 on the unit interval; child 0 keeps
// the parent's center.
TreePtr quartering_tree(double root_radius, int depth) {
  auto s = std::make_shared<IntervalSpace>();
  auto t = std::make_shared<BallTree>(s, Point{0.0}, root_radius,
                                      [](const MetricSpace&, const BallNode& n) {
                                        const double c = std::get<double>(n.center);
                                        return ChildSpec{n.radius / 4, {Point{c}, Point{c + n.radius / 2}}};
                                      });
  t->extend_to(depth);
  return t;
}

std::vector<int> first_child_path(const BallTree& t, int depth) {
  std::vector<int> path{t.root()};
  while (static_cast<int>(path.size()) <= depth) path.push_back(t.node(path.back()).children.at(0));
  return path;
}

}  // namespace

TEST_CASE("bump function") {
  IntervalSpace s;
  CHECK(bump(s, Point{0.5}, 0.4, Point{0.6}) == doctest::Approx(0.2));
  CHECK(bump(s, Point{0.5}, 0.4, Point{0.85}) == doctest::Approx(0.05));
  CHECK(bump(s, Point{0.5}, 0.4, Point{0.9}) == 0.0);
  CHECK(bump(s, Point{0.5}, 0.4, Point{0.5}) == doctest::Approx(0.2));
}

TEST_CASE("bandit needle at the shared center") {
  auto t = quartering_tree(1.0, 12);
  BanditNeedle needle(t, first_child_path(*t, 12));
  CHECK(needle.mu(Point{0.0}) == doctest::Approx(7.0 / 18.0).epsilon(1e-7));
  CHECK(needle.mu_star() == doctest::Approx(needle.mu(Point{0.0})));
  CHECK(needle.truncation_error() < 7e-9);
  CHECK(needle.mu(Point{0.99}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("sampled needles are Lipschitz") {
  auto s = std::make_shared<IntervalSpace>();
  auto tree = std::make_shared<BallTree>(build_ball_tree_binary(s, 12));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto n = BanditNeedle::sampled(tree, seed, 12);
    auto f = [&](const Point& x) { return n->mu(x); };
    CHECK(lipschitz_audit(*s, f, 1.0, 10000, seed).worst_excess <= 1e-9);
    CHECK(tree_lipschitz_audit(*tree, f, 1.0, 10000, seed).worst_excess <= 1e-9);
    CHECK(n->mu(*n->optimum()) == doctest::Approx(n->mu_star()));
  }
}

TEST_CASE("experts needle realized payoffs are Lipschitz for every sign pattern") {
  auto s = std::make_shared<IntervalSpace>();
  auto tree = std::make_shared<BallTree>(build_ball_tree_binary(s, 10));
  tree->extend_to(10);
  ExpertsNeedle e(tree, 3, 10, BiasSchedule{});
  for (std::uint64_t round = 1; round <= 20; ++round) {
    auto f = [&](const Point& x) { return e.realized(round, x); };
    CHECK(tree_lipschitz_audit(*tree, f, 1.0, 10000, round).worst_excess <= 1e-9);
  }
  auto m = [&](const Point& x) { return e.mu(x); };
  CHECK(lipschitz_audit(*s, m, 1.0, 10000, 1).worst_excess <= 1e-9);
}

TEST_CASE("experts needle empirical means approach the closed form") {
  auto s = std::make_shared<IntervalSpace>();
  auto tree = std::make_shared<BallTree>(build_ball_tree_binary(s, 8));
  tree->extend_to(8);
  const std::uint64_t rounds = 4000;
  int failures = 0, checks = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ExpertsNeedle e(tree, seed, 8, BiasSchedule{BiasSchedule::Kind::inverse_sqrt2});
    std::vector<Point> probes{*e.optimum(), Point{0.1}, Point{0.5}, Point{0.77}};
    for (const auto& x : probes) {
      double sum = 0;
      for (std::uint64_t r = 1; r <= rounds; ++r) sum += e.realized(r, x);
      ++checks;
      if (std::abs(sum / rounds - e.mu(x)) > 4.0 / std::sqrt(static_cast<double>(rounds))) ++failures;
    }
  }
  CHECK(failures <= checks / 100);
}

TEST_CASE("bias schedules") {
  BiasSchedule c;
  CHECK(c.at(1) == doctest::Approx(1.0 / 3.0));
  BiasSchedule h{BiasSchedule::Kind::inverse_sqrt2};
  CHECK(h.at(2) == doctest::Approx(0.5));
  CHECK(h.at(3) < h.at(2));
}

TEST_CASE("bandit ensemble from a node with small children") {
  auto t = quartering_tree(1.0, 8);
  const int node = t->node(t->root()).children.at(0);
  auto e = make_bandit_ensemble(t, node, 5, 8);
  CHECK(e.epsilon == doctest::Approx(1.0 / 96.0));
  CHECK(e.alternatives.size() == 2);
  CHECK(validate_bandit_ensemble(e, 1000).ok());
}

TEST_CASE("ensembles from the binary tree validate") {
  auto s = std::make_shared<IntervalSpace>();
  auto tree = std::make_shared<BallTree>(build_ball_tree_binary(s, 8));
  tree->extend_to(8);
  for (int node : {0, 1, 4}) {
    auto e = make_bandit_ensemble(tree, node, 2, 8);
    CHECK(validate_bandit_ensemble(e, 1000).ok());
  }
  const auto lineage = lineage_path(*tree, 9, 8);
  for (std::size_t i : {0u, 2u}) {
    auto e = make_experts_ensemble(tree, lineage[i], 9, 8, BiasSchedule{});
    auto check = validate_experts_ensemble(e, 1000);
    for (const auto& v : check.violations) MESSAGE(v);
    CHECK(check.ok());
  }
}

TEST_CASE("target instance and quasi-distance") {
  auto s = std::make_shared<IntervalSpace>();
  auto env = make_target_instance(s, {Point{0.5}}, Shape{0.9, 0.0, 1.0});
  CHECK(env->mu(Point{0.7}) == doctest::Approx(0.7));
  CHECK(env->mu_star() == doctest::Approx(0.9));

  Shape sq{1.0, 0.0, 2.0};
  auto q = quasi_distance_transform(s, [sq](double z) { return sq(z); });
  CHECK(q->distance(Point{0.25}, Point{0.0}) == doctest::Approx(0.5));
  CHECK(q->quasimetric());
  CHECK_THROWS_AS(quasi_distance_transform(s, [](double z) { return z; }), ValidationError);
  CHECK_THROWS_AS((Shape{0.5, 0.6, 1.0}.validate()), ValidationError);
}

TEST_CASE("log t family") {
  auto s = std::make_shared<IntervalSpace>();
  std::vector<Point> approach{Point{0.25}, Point{0.05}, Point{0.01}};
  LogTFamily base(s, Point{0.0}, approach, 0);
  CHECK(base.mu(Point{0.0}) == doctest::Approx(0.5));
  CHECK(base.lipschitz() == doctest::Approx(7.0 / 8.0));
  for (std::size_t i = 0; i <= approach.size(); ++i) {
    LogTFamily m(s, Point{0.0}, approach, i);
    auto f = [&](const Point& x) { return m.mu(x); };
    CHECK(lipschitz_audit(*s, f, 7.0 / 8.0, 10000, i).worst_excess <= 1e-9);
    CHECK(m.mu(*m.optimum()) == doctest::Approx(m.mu_star()));
  }
  CHECK_THROWS_AS(LogTFamily(s, Point{0.0}, {Point{0.25}, Point{0.2}}, 1), ValidationError);
}

TEST_CASE("cones and random Lipschitz instances") {
  auto s = std::make_shared<IntervalSpace>(0.5);
  auto cone = make_cone(s, Point{0.3});
  CHECK(cone->mu(Point{0.3}) == doctest::Approx(0.9));
  CHECK(lipschitz_audit(*s, [&](const Point& x) { return cone->mu(x); }, 1.0, 10000, 1).worst_excess <= 1e-9);
  auto r = make_random_lipschitz(s, 4);
  CHECK(lipschitz_audit(*s, [&](const Point& x) { return r->mu(x); }, 1.0, 10000, 2).worst_excess <= 1e-9);
  CHECK(r->mu(*r->optimum()) == doctest::Approx(r->mu_star()));
  CHECK_THROWS_AS(make_cone(s, Point{1.5}), ValidationError);
}

TEST_CASE("noise models have the stated means") {
  std::vector<NoiseModel> models{NoiseModel::bernoulli(), NoiseModel::deterministic(),
                                 NoiseModel::normal(0.2),
                                 NoiseModel::point_mass({-0.2, 0.1}, {1.0 / 3.0, 2.0 / 3.0}),
                                 NoiseModel::sharp_peak(0.5, 0.3)};
  for (const auto& m : models) {
    CAPTURE(m.describe().dump());
    Rng rng(derive_seed(1, Purpose::environment));
    const int n = 100000;
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += m.sample(0.4, rng);
    CHECK(std::abs(sum / n - 0.4) < 0.01);
  }
  CHECK_THROWS_AS(NoiseModel::point_mass({0.1, 0.2}, {0.5, 0.5}), ValidationError);
  CHECK_THROWS_AS(NoiseModel::sharp_peak(1.5), ValidationError);
  CHECK_THROWS_AS(NoiseModel::normal(0.0), ValidationError);
}

TEST_CASE("environment sampling is reproducible") {
  auto s = std::make_shared<IntervalSpace>();
  auto env = make_cone(s, Point{0.3});
  std::vector<Point> q{Point{0.1}, Point{0.3}, Point{0.8}};
  std::vector<double> a(3), b(3);
  Rng r1(42), r2(42);
  env->sample(7, q, a, r1);
  env->sample(7, q, b, r2);
  CHECK(a == b);
}
