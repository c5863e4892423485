#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "lipzoom/bandit.hpp"
#include "lipzoom/decomposition.hpp"
#include "lipzoom/environment.hpp"
#include "lipzoom/simulator.hpp"
#include "lipzoom/zooming.hpp"

using namespace lipzoom;

namespace {

// Checks the per-round selection, activation and quota rules.
class RuleChecker : public ZoomingObserver {
 public:
  void phase_started(const Zooming& z, std::uint64_t) override {
    CHECK(z.phase_length() == (std::uint64_t{1} << z.phase()));
    ++phases;
  }
  void after_activation(const Zooming&, std::uint64_t round, std::size_t) override {
    if (round == last_activation) ++double_activations;
    last_activation = round;
  }
  void before_play(const Zooming& z, std::uint64_t) override {
    const auto& arms = z.arms();
    if (arms.empty()) {
      ++selection_errors;
      return;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < arms.size(); ++i)
      if (arms[i].index > arms[best].index) best = i;
    if (z.current() != best) ++selection_errors;
    for (const auto& a : arms) {
      const double expect = a.estimate + z.multiplier() * a.radius;
      if (std::abs(a.index - expect) > 1e-12) ++index_errors;
    }
    if (z.options().variant == ZoomingVariant::quota) {
      for (auto c : z.layer_counts())
        if (c > z.quota()) ++quota_errors;
    }
    // The first round of a phase activates one arm and plays it.
    if (z.round_in_phase() == 0 && arms.size() != 1) ++first_round_errors;
  }

  std::uint64_t last_activation = 0;
  int phases = 0;
  int double_activations = 0;
  int selection_errors = 0;
  int index_errors = 0;
  int quota_errors = 0;
  int first_round_errors = 0;
};

RegretTrace play(Algorithm& alg, const Environment& env, std::uint64_t horizon,
                 std::uint64_t seed = 1) {
  RunOptions o;
  o.horizon = horizon;
  o.seed = seed;
  o.audit_accounting = true;
  return run(alg, env, o);
}

}  // namespace

TEST_CASE("confidence radius") {
  CHECK(confidence_radius(0, 2) == doctest::Approx(4.0));
  CHECK(confidence_radius(31, 4) == doctest::Approx(1.0));
  for (std::uint64_t n = 0; n < 100; ++n) CHECK(confidence_radius(n + 1, 3) < confidence_radius(n, 3));
  CHECK(confidence_radius(0, 1) > 1.0);
}

TEST_CASE("sharp radius") {
  CHECK(sharp_radius_alpha(99, 1.0, 10.0) == doctest::Approx(0.1));
  CHECK(sharp_radius_alpha(99, 0.0, 10.0) == doctest::Approx(0.1 + std::sqrt(0.1)));
  CHECK(sharp_radius_alpha(99, 0.0, 10.0) == doctest::Approx(0.4162).epsilon(1e-4));
  for (double mean : {0.0, 0.3, 1.0})
    for (std::uint64_t n = 0; n < 1000; ++n)
      CHECK(sharp_radius_alpha(n + 1, mean, 32.0) <= sharp_radius_alpha(n, mean, 32.0));
  CHECK(sharp_radius(10, 0.5, 2, 16.0) == doctest::Approx(sharp_radius_alpha(10, 0.5, 32.0)));
}

TEST_CASE("radius policies") {
  ArmStats st;
  auto det = RadiusPolicy::deterministic();
  det.record(st, 0.7);
  auto e = det.estimate(st, 3);
  CHECK(e.value == doctest::Approx(0.7));
  CHECK(e.radius == 0.0);

  ArmStats ns;
  auto normal = RadiusPolicy::normal(0.1);
  for (int i = 0; i < 10; ++i) normal.record(ns, 0.5);
  CHECK(normal.estimate(ns, 3).radius == doctest::Approx(0.1 * confidence_radius(10, 3)));

  // Degenerate point mass: exact once past the threshold.
  auto pm = RadiusPolicy::point_mass({0.0}, {1.0});
  ArmStats ps;
  const auto need = static_cast<int>(std::ceil(pm.point_mass_threshold(4)));
  for (int i = 0; i < need; ++i) pm.record(ps, 0.35);
  CHECK(pm.estimate(ps, 4).value == doctest::Approx(0.35));
  CHECK(pm.estimate(ps, 4).radius == 0.0);
  ArmStats few;
  pm.record(few, 0.35);
  CHECK(pm.estimate(few, 4).radius == doctest::Approx(confidence_radius(1, 4)));

  CHECK_THROWS_AS(RadiusPolicy::sharp_peak(1.2).validate(), ValidationError);
  CHECK_THROWS_AS(RadiusPolicy::point_mass({}, {}).validate(), ValidationError);
}

TEST_CASE("radius policies never grow with more samples") {
  std::vector<RadiusPolicy> policies{RadiusPolicy::standard(), RadiusPolicy::sharp(),
                                     RadiusPolicy::normal(0.2), RadiusPolicy::deterministic(),
                                     RadiusPolicy::sharp_peak(0.5)};
  for (const auto& p : policies) {
    CAPTURE(p.name());
    ArmStats s;
    double prev = p.estimate(s, 5).radius;
    CHECK(prev >= 0.0);
    for (int i = 0; i < 500; ++i) {
      // Constant rewards keep the sharp radius monotone too.
      p.record(s, 0.6);
      const double r = p.estimate(s, 5).radius;
      CHECK(r >= 0.0);
      CHECK(r <= prev + 1e-12);
      prev = r;
    }
  }
}

TEST_CASE("sharp peak estimator finds the peak") {
  auto p = RadiusPolicy::sharp_peak(0.5);
  auto noise = NoiseModel::sharp_peak(0.5, 0.5);
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    ArmStats s;
    for (int i = 0; i < 4000; ++i) p.record(s, noise.sample(0.42, rng));
    const auto e = p.estimate(s, 4);
    if (std::abs(e.value - 0.42) <= e.radius) ++hits;
  }
  CHECK(hits >= 198);
}

TEST_CASE("ucb1") {
  Ucb1 u;
  u.reset(3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(u.select() == i);
    u.update(i, 0.5);
  }
  // Equal means: the least pulled arm has the largest bonus.
  u.update(0, 0.5);
  u.update(1, 0.5);
  CHECK(u.select() == 2);

  Ucb1 one;
  one.reset(1);
  for (int i = 0; i < 5; ++i) {
    CHECK(one.select() == 0);
    one.update(0, 0.1);
  }
  CHECK(one.mean(0) == doctest::Approx(0.1));
  CHECK(one.count(0) == 5);
}

TEST_CASE("naive mesh scale") {
  CHECK(naive_delta(1, 1, 1024) == doctest::Approx(0.0520).epsilon(1e-3));
  CHECK(naive_delta(0, 2, 64) == doctest::Approx(std::pow(2 * 64 * std::log(64.0), -0.5)));
  CHECK(naive_delta(3, 1, 2) <= 1.0);
  CHECK_THROWS_AS(naive_delta(1, 0, 16), ValidationError);
}

TEST_CASE("naive algorithm phases") {
  auto s = std::make_shared<IntervalSpace>();
  auto env = make_cone(s, Point{0.3});
  NaiveAlg alg(s, 1.0);
  auto tr = play(alg, *env, 1u << 10);
  CHECK(tr.accounting_ok);
  CHECK(alg.phase() == 10);
  CHECK(alg.delta() == doctest::Approx(naive_delta(1, 1, 1024)));
  CHECK(alg.net().size() <= static_cast<std::size_t>(std::ceil(1.0 / alg.delta())) + 1);
  CHECK(alg.audit().count("phase") == 10);

  NaiveAlg tight(std::make_shared<IntervalSpace>(1.0, 0.25), 1.0);
  CHECK_THROWS_AS(play(tight, *make_cone(std::make_shared<IntervalSpace>(1.0, 0.25), Point{0.25}), 64),
                  ResolutionError);
}

TEST_CASE("boundary schedule") {
  auto d = boundary_schedule({1, 1, 1, 1}, 3);
  REQUIRE(d.size() == 3);
  CHECK(d[0] == doctest::Approx(8 * std::log(4.0)));
  double sum = d[0];
  for (std::size_t i = 1; i < d.size(); ++i) {
    CHECK(d[i] <= 2 * sum + 1e-9);
    CHECK(d[i] > 0);
    sum += d[i];
  }
  auto g = boundary_schedule({2, 4, 8, 16, 32}, 4);
  for (double t : g) CHECK(t > 0);
  CHECK_THROWS_AS(boundary_schedule({2, 1}, 1), ValidationError);
  CHECK_THROWS_AS(boundary_schedule({0, 1}, 1), ValidationError);
}

TEST_CASE("boundary algorithm runs its schedule") {
  auto s = std::make_shared<IntervalSpace>();
  auto env = make_cone(s, Point{0.6});
  BoundaryAlg alg(s);
  auto tr = play(alg, *env, 1u << 12);
  CHECK(tr.accounting_ok);
  CHECK(alg.phase() >= 2);
  CHECK(alg.durations().size() >= 2);
}

TEST_CASE("zooming selection, activation and phase rules") {
  auto s = std::make_shared<IntervalSpace>();
  auto env = make_cone(s, Point{0.3});
  Zooming z(s);
  RuleChecker rc;
  z.add_observer(&rc);
  auto tr = play(z, *env, (1u << 11) - 2);
  CHECK(tr.accounting_ok);
  CHECK(rc.phases == 10);
  CHECK(rc.double_activations == 0);
  CHECK(rc.selection_errors == 0);
  CHECK(rc.index_errors == 0);
  CHECK(rc.first_round_errors == 0);
  CHECK(z.multiplier() == 2.0);
}

TEST_CASE("fresh arms dominate sampled ones") {
  ArmStats fresh;
  const auto e = RadiusPolicy::standard().estimate(fresh, 1);
  CHECK(e.value + 2 * e.radius > 2.0);
  ArmStats full;
  for (int i = 0; i < 31; ++i) RadiusPolicy::standard().record(full, 0.5);
  const auto f = RadiusPolicy::standard().estimate(full, 4);
  CHECK(f.value + 2 * f.radius == doctest::Approx(2.5));
  CHECK((f.value + 3 * f.radius) - (f.value + 2 * f.radius) == doctest::Approx(f.radius));
}

TEST_CASE("zooming ties go to the earliest arm") {
  // Deterministic constant payoff: equal estimates, radii and indices.
  auto s = FiniteSpace::uniform(4);
  auto env = std::make_shared<FunctionEnvironment>(
      s, "flat", [](const Point&) { return 0.5; }, 0.5, Point{std::size_t{0}}, json::object(),
      NoiseModel::deterministic());
  ZoomingOptions o;
  o.radius = RadiusPolicy::deterministic();
  Zooming z(s, o);
  RuleChecker rc;
  z.add_observer(&rc);
  play(z, *env, 200);
  CHECK(rc.selection_errors == 0);
}

TEST_CASE("quota variant respects its quotas") {
  auto s = std::make_shared<IntervalSpace>();
  auto dec = std::make_shared<NestedIntervalDecomposition>(
      s, std::vector<std::pair<double, double>>{{0.25, 0.75}}, 1.0);
  ZoomingOptions o;
  o.variant = ZoomingVariant::quota;
  o.decomposition = dec;
  Zooming z(s, o);
  RuleChecker rc;
  z.add_observer(&rc);
  auto env = make_cone(s, Point{0.5});
  auto tr = play(z, *env, 1u << 12);
  CHECK(tr.accounting_ok);
  CHECK(rc.quota_errors == 0);
  CHECK(z.quota() == static_cast<std::uint64_t>(std::floor(std::pow(z.rho(), -1.0) + 1e-9)));
  CHECK(z.audit().count("quota_exceeded") == 0);
}

TEST_CASE("quota of one arm per layer") {
  auto s = std::make_shared<IntervalSpace>();
  auto dec = std::make_shared<NestedIntervalDecomposition>(
      s, std::vector<std::pair<double, double>>{{0.4, 0.6}}, 0.0);
  CHECK(dec->layer_of(Point{0.5}) == 1);
  CHECK(dec->layer_of(Point{0.1}) == 0);
  ZoomingOptions o;
  o.variant = ZoomingVariant::quota;
  o.decomposition = dec;
  Zooming z(s, o);
  auto env = make_cone(s, Point{0.5});
  RuleChecker rc;
  z.add_observer(&rc);
  play(z, *env, 1u << 10);
  CHECK(z.quota() == 1);
  CHECK(rc.quota_errors == 0);
}

TEST_CASE("pmo variant target selection") {
  auto s = std::make_shared<IntervalSpace>();
  SUBCASE("single layer keeps the whole space") {
    ZoomingOptions o;
    o.variant = ZoomingVariant::pmo;
    o.decomposition = std::make_shared<TrivialDecomposition>(s, 1.0);
    Zooming z(s, o);
    auto env = make_cone(s, Point{0.3});
    play(z, *env, 1u << 10);
    CHECK(z.target() == 0);
    CHECK(z.multiplier() == 3.0);
  }
  SUBCASE("sharp arms inside the inner layer move the target") {
    auto dec = std::make_shared<NestedIntervalDecomposition>(
        s, std::vector<std::pair<double, double>>{{0.3, 0.7}}, 1.0);
    ZoomingOptions o;
    o.variant = ZoomingVariant::pmo;
    o.decomposition = dec;
    o.radius = RadiusPolicy::deterministic();
    auto env = make_cone(s, Point{0.5}, 0.9, 1.0, 0.0, NoiseModel::deterministic());
    Zooming z(s, o);
    double last_eps = 2.0;
    bool monotone = true;
    for (std::uint64_t h : {64u, 256u, 1024u, 4096u}) {
      Zooming w(s, o);
      play(w, *env, h);
      if (w.eps0() > last_eps + 1e-12) monotone = false;
      last_eps = w.eps0();
    }
    CHECK(monotone);
    play(z, *env, 1u << 10);
    CHECK(z.target() == 1);
  }
}

TEST_CASE("zooming needs a decomposition for the quota variants") {
  auto s = std::make_shared<IntervalSpace>();
  ZoomingOptions o;
  o.variant = ZoomingVariant::quota;
  CHECK_THROWS_AS(Zooming(s, o), ValidationError);
  CHECK(parse_variant("pmo") == ZoomingVariant::pmo);
  CHECK_THROWS_AS(parse_variant("bogus"), ValidationError);
}
