// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria. `acceptance N ...` runs only the listed ones.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "lipzoom/analysis.hpp"
#include "lipzoom/bandit.hpp"
#include "lipzoom/covering.hpp"
#include "lipzoom/decomposition.hpp"
#include "lipzoom/experts.hpp"
#include "lipzoom/needle.hpp"
#include "lipzoom/simulator.hpp"
#include "lipzoom/tree_space.hpp"
#include "lipzoom/zooming.hpp"

using namespace lipzoom;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
  std::function<Outcome()> body;
};

std::vector<std::uint64_t> seed_range(std::uint64_t start, std::size_t count) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = start + i;
  return s;
}

RunOptions options(std::uint64_t horizon, int per_octave = 4) {
  RunOptions o;
  o.horizon = horizon;
  o.checkpoints_per_octave = per_octave;
  return o;
}

std::string slope_text(const SlopeFit& f) {
  return f.defined ? fmt::format("{:.3f}", f.gamma) : f.note;
}

// Cone max(0, 0.9 - |x - x*|): zooming dimension 0.
Outcome zooming_beats_mesh() {
  auto s = std::make_shared<IntervalSpace>();
  auto env = make_cone(s, Point{0.3});
  const auto o = options(1u << 17);
  const auto seeds = seed_range(100, 20);
  const auto zoom = replicate([&](std::uint64_t) { return RunSetup{std::make_unique<Zooming>(s), env}; },
                              o, seeds);
  const auto naive = replicate([&](std::uint64_t) { return RunSetup{std::make_unique<NaiveAlg>(s, 1.0), env}; },
                               o, seeds);
  const auto fz = slope_fit(zoom, 1u << 12, 1u << 17);
  const auto fn = slope_fit(naive, 1u << 12, 1u << 17);
  const bool pass = fz.defined && fn.defined && fz.gamma <= 0.65 && fn.gamma >= fz.gamma + 0.05;
  return {pass, fmt::format("zooming slope {} (need <= 0.65), naive slope {} (need >= zooming + 0.05)",
                            slope_text(fz), slope_text(fn))};
}

// Random Lipschitz instances over ([0,1], |x-y|^(1/d)).
Outcome naive_tracks_dimension() {
  const auto o = options(1u << 17);
  const auto seeds = seed_range(200, 20);
  SlopeFit fit[2];
  for (int d = 1; d <= 2; ++d) {
    auto s = std::make_shared<IntervalSpace>(1.0 / d);
    const auto agg = replicate(
        [&](std::uint64_t seed) {
          return RunSetup{std::make_unique<NaiveAlg>(s, static_cast<double>(d)),
                          make_random_lipschitz(s, seed)};
        },
        o, seeds);
    fit[d - 1] = slope_fit(agg, 1u << 12, 1u << 17);
  }
  const bool pass = fit[0].defined && fit[1].defined && fit[0].gamma >= 0.55 &&
                    fit[0].gamma <= 0.80 && fit[1].gamma - fit[0].gamma >= 0.03;
  return {pass, fmt::format("slope(d=1) {} (need [0.55, 0.80]), slope(d=2) {} (need >= d=1 + 0.03)",
                            slope_text(fit[0]), slope_text(fit[1]))};
}

// Runs zooming with a clean-run auditor per seed and returns the audits.
std::vector<std::vector<PhaseAudit>> audited_runs(std::size_t runs, std::uint64_t horizon,
                                                  std::uint64_t seed0) {
  auto s = std::make_shared<IntervalSpace>();
  std::vector<std::vector<PhaseAudit>> out(runs);
  parallel_for(runs, [&](std::size_t i) {
    const double center = 0.1 + 0.8 * static_cast<double>(i % 7) / 6.0;
    auto env = make_cone(s, Point{center});
    Zooming z(s);
    CleanRunAuditor audit(*env);
    z.add_observer(&audit);
    RunOptions o;
    o.horizon = horizon;
    o.seed = seed0 + i;
    run(z, *env, o);
    out[i] = audit.phases();
  });
  return out;
}

Outcome clean_phase_rate() {
  const auto runs = audited_runs(200, (1u << 15) - 2, 300);
  std::size_t phases = 0, dirty = 0;
  for (const auto& r : runs)
    for (const auto& p : r) {
      if (!p.complete || p.phase < 6) continue;
      ++phases;
      dirty += !p.clean;
    }
  const double frac = phases ? static_cast<double>(dirty) / static_cast<double>(phases) : 1.0;
  return {phases > 0 && frac <= 0.01,
          fmt::format("{} of {} phases >= 6 not clean ({:.3f}%, need <= 1%)", dirty, phases, 100 * frac)};
}

Outcome covering_invariant() {
  auto s = std::make_shared<IntervalSpace>();
  const std::size_t runs = 20;
  std::vector<std::uint64_t> rounds(runs), probes(runs), holes(runs);
  parallel_for(runs, [&](std::size_t i) {
    auto env = make_cone(s, Point{0.15 + 0.035 * static_cast<double>(i)});
    Zooming z(s);
    CoveringProbeAuditor audit(400 + i, 200, 1);
    z.add_observer(&audit);
    RunOptions o;
    o.horizon = 1u << 12;
    o.seed = 400 + i;
    run(z, *env, o);
    rounds[i] = audit.audited_rounds();
    probes[i] = audit.probes();
    holes[i] = audit.violations();
  });
  std::uint64_t r = 0, p = 0, h = 0;
  for (std::size_t i = 0; i < runs; ++i) {
    r += rounds[i];
    p += probes[i];
    h += holes[i];
  }
  return {r > 0 && p == 200 * r && h == 0,
          fmt::format("{} audited rounds, {} probes, {} uncovered", r, p, h)};
}

Outcome clean_run_lemmas() {
  const auto runs = audited_runs(100, (1u << 15) - 2, 500);
  std::size_t clean = 0;
  std::uint64_t lemma = 0, packing = 0, pulls = 0;
  for (const auto& r : runs)
    for (const auto& p : r) {
      if (!p.complete || !p.clean) continue;
      ++clean;
      lemma += p.lemma_violations;
      packing += p.packing_violations;
      pulls += p.pull_violations;
    }
  return {clean > 0 && lemma + packing + pulls == 0,
          fmt::format("{} clean phases; violations: lemma {}, packing {}, pulls {}", clean, lemma,
                      packing, pulls)};
}

Outcome lower_bound_constructions() {
  auto s = std::make_shared<IntervalSpace>();
  std::vector<TreePtr> trees{std::make_shared<BallTree>(build_ball_tree_binary(s, 10)),
                             std::make_shared<BallTree>(build_ball_tree_strength(s, 0.5, 2))};
  std::size_t audits = 0, ensembles = 0;
  std::vector<std::string> failures;
  for (std::size_t ti = 0; ti < trees.size(); ++ti) {
    auto& tree = trees[ti];
    const int depth = ti == 0 ? 10 : 2;
    tree->extend_to(depth);
    for (const auto& v : tree->validate()) failures.push_back("tree: " + v);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto n = BanditNeedle::sampled(tree, seed, depth);
      auto f = [&](const Point& x) { return n->mu(x); };
      ++audits;
      if (lipschitz_audit(*s, f, 1.0, 10000, seed).worst_excess > 1e-9 ||
          tree_lipschitz_audit(*tree, f, 1.0, 10000, seed).worst_excess > 1e-9)
        failures.push_back(fmt::format("bandit needle tree {} seed {}", ti, seed));
      ExpertsNeedle e(tree, seed, depth, BiasSchedule{});
      for (std::uint64_t round = 1; round <= 5; ++round) {
        ++audits;
        auto g = [&](const Point& x) { return e.realized(round, x); };
        if (tree_lipschitz_audit(*tree, g, 1.0, 10000, round).worst_excess > 1e-9)
          failures.push_back(fmt::format("experts needle tree {} seed {} round {}", ti, seed, round));
      }
    }
    for (int node : {0, tree->node(0).children.at(0)}) {
      ++ensembles;
      auto be = make_bandit_ensemble(tree, node, 7, depth);
      for (const auto& v : validate_bandit_ensemble(be, 1000).violations) failures.push_back(v);
    }
    const auto lineage = lineage_path(*tree, 9, depth);
    for (std::size_t i = 0; i + 1 < lineage.size() && i < 3; ++i) {
      ++ensembles;
      auto ee = make_experts_ensemble(tree, lineage[i], 9, depth, BiasSchedule{});
      for (const auto& v : validate_experts_ensemble(ee, 1000).violations) failures.push_back(v);
    }
  }
  return {failures.empty(),
          fmt::format("{} Lipschitz audits, {} trees, {} ensembles; {} failures{}", audits, trees.size(),
                      ensembles, failures.size(), failures.empty() ? "" : ": " + failures.front())};
}

// r(alpha, x) = alpha/n + sqrt(alpha x / n), written out directly.
double theorem_radius(double alpha, double x, double n) { return alpha / n + std::sqrt(alpha * x / n); }

Outcome sharp_radius_concentration() {
  const double zeta = 0.05, alpha = 200;
  const std::uint64_t n = 2000;
  const int trials = 10000;
  Rng rng(derive_seed(700, Purpose::environment));
  const NoiseModel bern = NoiseModel::bernoulli();
  int failures = 0;
  double route_gap = 0;
  const double r_true = theorem_radius(alpha, zeta, n);
  for (int k = 0; k < trials; ++k) {
    double sum = 0;
    for (std::uint64_t i = 0; i < n; ++i) sum += bern.sample(zeta, rng);
    const double z = sum / static_cast<double>(n);
    const double r = theorem_radius(alpha, z, n);
    // The library form is in terms of 1 - mean and 1 + n.
    route_gap = std::max(route_gap, std::abs(r - sharp_radius_alpha(n - 1, 1.0 - z, alpha)));
    if (!(std::abs(z - zeta) < r && r < 3 * r_true)) ++failures;
  }
  const double rate = static_cast<double>(failures) / trials;
  return {rate <= 0.15 && route_gap < 1e-12,
          fmt::format("failure rate {:.4f} (need <= 0.15, bound {:.4f}); library radius gap {:.1e}", rate,
                      std::pow(2.0, -alpha) + 2 * std::exp(-alpha / 72), route_gap)};
}

Outcome sharp_radius_near_one() {
  auto s = std::make_shared<IntervalSpace>();
  auto env = make_target_instance(s, {Point{0.37}}, Shape{1.0, 0.0, 1.0});
  const auto o = options(1u << 16);
  const auto seeds = seed_range(800, 20);
  auto with = [&](RadiusPolicy p) {
    return replicate(
        [&, p](std::uint64_t) {
          ZoomingOptions zo;
          zo.radius = p;
          return RunSetup{std::make_unique<Zooming>(s, zo), env};
        },
        o, seeds);
  };
  const auto policy = RadiusPolicy::sharp();
  const double sharp = with(policy).mean.back();
  const double standard = with(RadiusPolicy::standard()).mean.back();
  return {sharp <= 0.5 * standard,
          fmt::format("mean regret at 2^16: sharp (c_alpha {}) {:.1f}, standard {:.1f} (ratio {:.3f}, need <= 0.5)",
                      policy.c_alpha, sharp, standard, sharp / standard)};
}

Outcome expl_on_sequence() {
  auto s = std::make_shared<const SequenceSpace>(200);
  // 3/4 - x/4: Lipschitz, maximized only at the limit point.
  auto env = make_cone(s, Point{s->limit_index()}, 0.75, 0.25);
  std::vector<int> hit(100, 0);
  parallel_for(100, [&](std::size_t i) {
    const auto out = run_expl(*env, ExplRun::Mode::expl, 200, 4000, 0.02, 900 + i);
    hit[i] = std::get<std::size_t>(out.chosen) == s->limit_index();
  });
  const int hits = std::accumulate(hit.begin(), hit.end(), 0);

  auto peek_env = make_cone(s, Point{s->limit_index()}, 0.75, 0.25, 0.0, NoiseModel::bernoulli(),
                            Feedback::double_feedback);
  // Phase i lasts 2^i rounds, so phase i ends at 2^(i+1) - 2.
  const std::uint64_t horizon = (1u << 17) - 2, settle = (1u << 15) - 2;
  std::vector<int> flat(100, 0);
  parallel_for(100, [&](std::size_t i) {
    FreePeekWrapper w(s);
    RunOptions o;
    o.horizon = horizon;
    o.seed = 1000 + i;
    const auto tr = run(w, *peek_env, o);
    flat[i] = std::abs(tr.final_regret() - tr.regret_at(settle)) <= 1e-9;
  });
  const int flats = std::accumulate(flat.begin(), flat.end(), 0);
  return {hits >= 95 && flats >= 90,
          fmt::format("EXPL found the optimum in {}/100 (need >= 95); free-peek regret flat over the last two "
                      "phases in {}/100 (need >= 90)",
                      hits, flats)};
}

// Checks every layer count against the quota after each activation.
class QuotaWatch : public ZoomingObserver {
 public:
  void after_activation(const Zooming& z, std::uint64_t, std::size_t) override {
    for (auto c : z.layer_counts())
      if (c > z.quota()) ++excess;
    ++checks;
  }
  std::uint64_t checks = 0, excess = 0;
};

Outcome quota_on_fat_subtree() {
  auto tree = TreeSpace::fat_subtree(1.0);
  const double d = *tree->max_min_covering_dimension() + 0.25;
  auto decomp = std::make_shared<FatSubtreeDecomposition>(tree, d);
  // Optimum in the thin region: index 2 at the first level leaves the fat part.
  const Point target{TreePath({2, 1, 0, 1, 1, 0, 1})};
  if (tree->is_fat(target)) return {false, "target is not thin"};
  auto env = make_target_instance(tree, {target}, Shape{0.9, 0.0, 1.0});
  const std::size_t runs = 20;
  std::vector<QuotaWatch> watch(runs);
  std::vector<RegretTrace> traces(runs);
  parallel_for(runs, [&](std::size_t i) {
    ZoomingOptions zo;
    zo.variant = ZoomingVariant::quota;
    zo.decomposition = decomp;
    zo.quota_dim = d;
    Zooming z(tree, zo);
    z.add_observer(&watch[i]);
    traces[i] = run(z, *env, [&] {
      auto o = options(1u << 16);
      o.seed = 1100 + i;
      return o;
    }());
  });
  std::uint64_t checks = 0, excess = 0;
  for (const auto& w : watch) {
    checks += w.checks;
    excess += w.excess;
  }
  std::vector<std::uint64_t> t;
  std::vector<double> mean;
  for (const auto& c : traces[0].points) {
    double m = 0;
    for (const auto& tr : traces) m += tr.regret_at(c.t);
    t.push_back(c.t);
    mean.push_back(m / static_cast<double>(runs));
  }
  const auto fit = slope_fit(t, mean, 1u << 12, 1u << 16);
  const double bound = (d + 1) / (d + 2) + 0.08;
  return {excess == 0 && checks > 0 && fit.defined && fit.gamma <= bound,
          fmt::format("{} quota checks, {} exceeded; slope {} (need <= {:.3f}, d = {:.2f})", checks, excess,
                      slope_text(fit), bound, d)};
}

Outcome dimension_estimators() {
  const auto l1 = covering_dimension_fit(IntervalSpace(), dyadic_scales(4, 12)).dimension;
  const auto root = covering_dimension_fit(IntervalSpace(0.5), dyadic_scales(4, 10)).dimension;
  auto s = std::make_shared<IntervalSpace>();
  auto env = std::make_shared<FunctionEnvironment>(
      s, "peak", [](const Point& x) { return 1.0 - std::abs(std::get<double>(x) - 0.5); }, 1.0, Point{0.5},
      json::object());
  const auto z = zooming_dimension_estimate(*env, 16.0, dyadic_scales(1, 10)).dimension;
  return {std::abs(l1 - 1.0) <= 0.1 && std::abs(root - 2.0) <= 0.2 && z == 0.0,
          fmt::format("covering dim: l1 {:.3f} (need 1 +- 0.1), sqrt {:.3f} (need 2 +- 0.2); zooming dim {}",
                      l1, root, z)};
}

Outcome oracle_equivalence() {
  Rng rng(derive_seed(1200, Purpose::probe));
  CubeSpace cube(2);
  int spaces = 0, ratio_fail = 0, sandwich_fail = 0;
  double worst = 1.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 11;
    std::vector<Point> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back(cube.sample(rng));
    const auto d = distance_matrix(cube, pts);
    ++spaces;
    for (double r : {0.1, 0.25, 0.5, 0.8}) {
      const auto exact = covering_number(d, r, CountMode::exact);
      const auto greedy = covering_number(d, r, CountMode::greedy);
      worst = std::max(worst, static_cast<double>(greedy) / static_cast<double>(exact));
      if (greedy > 2 * exact || greedy < exact) ++ratio_fail;
      const auto pack = packing_number(d, r, CountMode::exact);
      if (covering_number(d, 2 * r, CountMode::exact) > pack || pack > exact) ++sandwich_fail;
    }
  }
  return {ratio_fail == 0 && sandwich_fail == 0,
          fmt::format("{} spaces; worst greedy/exact {:.2f} (need <= 2); sandwich failures {}", spaces, worst,
                      sandwich_fail)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "zooming beats the mesh on a cone", 180, zooming_beats_mesh},
      {2, "naive exponent tracks the covering dimension", 300, naive_tracks_dimension},
      {3, "late phases are clean", 120, clean_phase_rate},
      {4, "active balls cover the space", 60, covering_invariant},
      {5, "clean phases satisfy the structural bounds", 120, clean_run_lemmas},
      {6, "lower-bound constructions are valid", 0, lower_bound_constructions},
      {7, "sharp radius concentration", 30, sharp_radius_concentration},
      {8, "sharp radius helps when the best payoff is 1", 180, sharp_radius_near_one},
      {9, "exploration on a countable compact space", 240, expl_on_sequence},
      {10, "quota zooming on the fat subtree", 300, quota_on_fat_subtree},
      {11, "dimension estimators", 60, dimension_estimators},
      {12, "greedy and exact covering agree within 2", 60, oracle_equivalence},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.body();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // A zero budget means the criterion sets no time limit.
    const bool in_time = c.budget_seconds <= 0 || secs <= c.budget_seconds;
    const bool pass = out.pass && in_time;
    failed += !pass;
    const std::string limit = c.budget_seconds > 0 ? fmt::format(" of {:.0f} s", c.budget_seconds) : "";
    fmt::print("[{}] C{:<2} {}: {} [{:.1f} s{}{}]\n", pass ? "PASS" : "FAIL", c.id, c.title, out.detail, secs,
               limit, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failed;
}
