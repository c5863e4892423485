#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "lipzoom/environment.hpp"
#include "lipzoom/experts.hpp"
#include "lipzoom/simulator.hpp"

using namespace lipzoom;

namespace {

RegretTrace play(Algorithm& alg, const Environment& env, std::uint64_t horizon,
                 std::uint64_t seed = 1) {
  RunOptions o;
  o.horizon = horizon;
  o.seed = seed;
  o.audit_accounting = true;
  return run(alg, env, o);
}

// Deterministic payoffs given per index on a finite space.
EnvPtr table_env(std::shared_ptr<const FiniteSpace> s, std::vector<double> mu,
                 Feedback fb = Feedback::bandit) {
  const double top = *std::max_element(mu.begin(), mu.end());
  return std::make_shared<FunctionEnvironment>(
      s, "table", [mu](const Point& x) { return mu[std::get<std::size_t>(x)]; }, top,
      std::nullopt, json::object(), NoiseModel::deterministic(), fb, 1e9);
}

// Payoff 3/4 - x/4 on the sequence space: the maximum sits at the limit point.
EnvPtr limit_peak(std::shared_ptr<const SequenceSpace> s, Feedback fb = Feedback::bandit) {
  return make_cone(s, Point{s->limit_index()}, 0.75, 0.25, 0.0, NoiseModel::bernoulli(), fb);
}

}  // namespace

TEST_CASE("naive experts mesh scale") {
  CHECK(NaiveExp::phase_delta(2, true, 4096) == doctest::Approx(1.0 / 64));
  CHECK(NaiveExp::phase_delta(2, false, 4096) == doctest::Approx(1.0 / 8));
  auto s = std::make_shared<IntervalSpace>();
  CHECK_THROWS_AS(NaiveExp(s, 1.0, true), ValidationError);
  CHECK_THROWS_AS(NaiveExp(s, 0.0), ValidationError);
}

TEST_CASE("naive experts bets on the exact maximizer") {
  auto s = std::make_shared<IntervalSpace>();
  auto env = make_cone(s, Point{0.0}, 0.9, 1.0, 0.0, NoiseModel::deterministic(), Feedback::full);
  NaiveExp alg(s, 1.0);
  auto tr = play(alg, *env, 1u << 10);
  CHECK(tr.accounting_ok);
  // Phase 1 bets on the first net point, which is the peak; no regret after that.
  CHECK(tr.final_regret() == doctest::Approx(0.0));
}

TEST_CASE("naive experts on a constant payoff has no regret") {
  auto s = std::make_shared<IntervalSpace>();
  auto env = std::make_shared<FunctionEnvironment>(
      s, "flat", [](const Point&) { return 0.4; }, 0.4, Point{0.0}, json::object(),
      NoiseModel::bernoulli(), Feedback::full);
  NaiveExp alg(s, 1.0);
  CHECK(play(alg, *env, 4096).final_regret() == doctest::Approx(0.0));
}

TEST_CASE("naive experts hitting set cap") {
  auto s = std::make_shared<IntervalSpace>();
  auto env = make_cone(s, Point{0.3}, 0.9, 1.0, 0.0, NoiseModel::bernoulli(), Feedback::full);
  NaiveExp alg(s, 1.0, false, 8);
  CHECK_THROWS_AS(play(alg, *env, 4096), CapExceeded);
}

TEST_CASE("naive experts against a bandit environment is rejected") {
  auto s = std::make_shared<IntervalSpace>();
  auto env = make_cone(s, Point{0.3});
  NaiveExp alg(s, 1.0);
  CHECK_THROWS_AS(play(alg, *env, 64), ValidationError);
}

TEST_CASE("exploration subroutine rules") {
  auto s = std::make_shared<const FiniteSpace>(*FiniteSpace::uniform(4, 1.0));

  SUBCASE("equal means leave no losers") {
    auto env = table_env(s, {0.5, 0.5, 0.5, 0.5});
    auto out = run_expl(*env, ExplRun::Mode::expl, 4, 3, 0.1, 1);
    for (bool f : out.flags) CHECK_FALSE(f);
    // The oracle returns the order-maximal point among all balls.
    CHECK(std::get<std::size_t>(out.chosen) == 3);
  }
  SUBCASE("a gap beyond 2r + delta marks the loser") {
    auto env = table_env(s, {0.9, 0.5, 0.88, 0.1});
    auto out = run_expl(*env, ExplRun::Mode::expl, 4, 3, 0.05, 1);
    REQUIRE(out.points.size() == 4);
    CHECK(out.delta < 1.0);
    CHECK_FALSE(out.flags[0]);
    CHECK(out.flags[1]);
    CHECK_FALSE(out.flags[2]);
    CHECK(out.flags[3]);
    CHECK(std::get<std::size_t>(out.chosen) == 2);
  }
  SUBCASE("budget is the sample size times n") {
    auto env = table_env(s, {0.1, 0.2, 0.3, 0.4});
    ExplRun run(*s, ExplRun::Mode::expl, 3, 5, 0.1);
    std::uint64_t pulls = 0;
    while (!run.done()) {
      run.record(env->mu(run.next()));
      ++pulls;
    }
    CHECK(pulls == run.budget());
    CHECK(run.budget() == run.outcome().points.size() * 5);
    CHECK(run.outcome().points.size() <= 3);
  }
  CHECK_THROWS_AS(ExplRun(*s, ExplRun::Mode::expl, 0, 1, 0.1), ValidationError);
  CHECK_THROWS_AS(ExplRun(IntervalSpace(), ExplRun::Mode::expl, 2, 1, 0.1), ValidationError);
}

TEST_CASE("exploration outcomes are consistent on noisy runs") {
  auto s = std::make_shared<const SequenceSpace>(200);
  auto env = limit_peak(s);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto out = run_expl(*env, ExplRun::Mode::expl, 40, 200, 0.1, seed);
    // The empirical maximum is never a loser.
    const auto best = static_cast<std::size_t>(
        std::max_element(out.means.begin(), out.means.end()) - out.means.begin());
    CHECK_FALSE(out.flags[best]);
    // Loser rule recomputed from the recorded means.
    const double top = out.means[best];
    for (std::size_t i = 0; i < out.means.size(); ++i)
      CHECK(out.flags[i] == (top - out.means[i] > 2 * 0.1 + out.delta));
    // The chosen point lies in some closed ball around a non-loser.
    bool inside = false;
    for (std::size_t i = 0; i < out.points.size(); ++i)
      if (!out.flags[i] && s->distance(out.points[i], out.chosen) <= out.delta) inside = true;
    CHECK(inside);
  }
}

TEST_CASE("rank exploration") {
  auto s = std::make_shared<const SequenceSpace>(30);
  SUBCASE("equal means pick a top-rank point") {
    auto flat = std::make_shared<FunctionEnvironment>(
        s, "flat", [](const Point&) { return 0.5; }, 0.5, std::nullopt, json::object(),
        NoiseModel::deterministic());
    auto out = run_expl(*flat, ExplRun::Mode::expl_prime, 10, 2, 0.1, 1);
    CHECK_FALSE(out.fallback);
    CHECK(s->rank_of(out.chosen) == s->max_rank());
  }
  SUBCASE("separated means give the unique undominated point") {
    std::vector<double> mu(31);
    for (std::size_t i = 0; i < mu.size(); ++i) mu[i] = 0.01 * static_cast<double>(i);
    mu[3] = 0.95;
    auto env = table_env(s, mu);
    auto out = run_expl(*env, ExplRun::Mode::expl_prime, 40, 2, 0.01, 1);
    std::size_t winners = 0;
    for (bool w : out.flags) winners += w;
    if (std::find(out.points.begin(), out.points.end(), Point{std::size_t{3}}) != out.points.end()) {
      CHECK(winners == 1);
      CHECK(std::get<std::size_t>(out.chosen) == 3);
    }
  }
  SUBCASE("winners are stable under small perturbations") {
    auto env = limit_peak(std::make_shared<const SequenceSpace>(200));
    auto out = run_expl(*env, ExplRun::Mode::expl_prime, 40, 400, 0.1, 4);
    double slack = INFINITY;
    for (std::size_t i = 0; i < out.means.size(); ++i)
      for (std::size_t j = 0; j < out.means.size(); ++j) {
        const double g = std::abs(out.means[i] - out.means[j] - 0.2);
        if (i != j) slack = std::min(slack, g);
      }
    // Shifting every mean by less than slack / 2 cannot change any dominance.
    std::vector<double> moved = out.means;
    for (std::size_t i = 0; i < moved.size(); ++i) moved[i] += ((i % 2) ? 0.49 : -0.49) * slack;
    for (std::size_t i = 0; i < moved.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < moved.size(); ++j)
        if (moved[j] - moved[i] > 0.2) dominated = true;
      bool orig = false;
      for (std::size_t j = 0; j < moved.size(); ++j)
        if (out.means[j] - out.means[i] > 0.2) orig = true;
      CHECK(dominated == orig);
    }
  }
}

TEST_CASE("rank exploration finds the limit point") {
  auto s = std::make_shared<const SequenceSpace>(200);
  auto env = limit_peak(s);
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto out = run_expl(*env, ExplRun::Mode::expl_prime, 200, 4000, 0.02, seed);
    if (std::get<std::size_t>(out.chosen) == s->limit_index()) ++hits;
  }
  CHECK(hits >= 95);
}

TEST_CASE("well-ordered bandit wrapper schedule") {
  auto s = std::make_shared<const SequenceSpace>(200);
  WellOrderedBanditWrapper w(s, 2.0, 4);
  for (int i = 1; i <= 4; ++i) {
    const auto sc = w.schedule(i);
    CHECK(sc.T == doctest::Approx(std::exp2(std::exp2(i))));
    const double lt = std::log(sc.T);
    CHECK(sc.k == std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(lt)))));
    CHECK(static_cast<double>(sc.k * sc.n) <= w.growth(sc.T) + 1e-9);
    CHECK(sc.r == doctest::Approx(4 * std::sqrt(lt / static_cast<double>(sc.n))));
  }
  CHECK(w.schedule(3).T == doctest::Approx(256));

  auto env = limit_peak(s);
  auto tr = play(w, *env, 1u << 16);
  CHECK(tr.accounting_ok);
  for (const auto& ev : w.audit().events())
    if (ev.kind == "phase") CHECK(ev.data["budget"].get<double>() <= ev.data["growth"].get<double>() + 1e-9);
  CHECK_THROWS_AS(WellOrderedBanditWrapper(std::make_shared<IntervalSpace>()), ValidationError);
}

TEST_CASE("free-peek wrapper keeps one bet per phase") {
  auto s = std::make_shared<const SequenceSpace>(200);
  auto env = limit_peak(s, Feedback::double_feedback);
  FreePeekWrapper w(s);
  w.start(3);
  Rng rng(derive_seed(3, Purpose::environment));
  int phase = 0;
  Point bet;
  int changes_within_phase = 0;
  for (std::uint64_t t = 1; t <= 4096; ++t) {
    const Point x = w.act(t);
    if (w.phase() == phase && !(x == bet)) ++changes_within_phase;
    phase = w.phase();
    bet = x;
    const auto q = w.queries();
    REQUIRE(q.size() == 1);
    std::vector<double> out(1);
    env->sample(t, q, out, rng);
    w.observe(t, env->mu(x), out);
  }
  CHECK(changes_within_phase == 0);
  CHECK(w.radius(256, 16) == doctest::Approx(4 * std::sqrt(4.0 / 16)));
}

TEST_CASE("free-peek regret stops growing") {
  auto s = std::make_shared<const SequenceSpace>(200);
  auto env = limit_peak(s, Feedback::double_feedback);
  FreePeekWrapper w(s);
  auto tr = play(w, *env, 1u << 14);
  CHECK(tr.accounting_ok);
  CHECK(tr.regret_at(1u << 14) >= tr.regret_at(1u << 12));
}
