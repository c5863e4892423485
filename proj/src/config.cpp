#include "lipzoom/config.hpp"

#include <fstream>

#include "lipzoom/bandit.hpp"
#include "lipzoom/decomposition.hpp"
#include "lipzoom/experts.hpp"
#include "lipzoom/needle.hpp"
#include "lipzoom/tree_space.hpp"
#include "lipzoom/zooming.hpp"

namespace lipzoom {

namespace {

std::string kind_of(const json& j, const char* what) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw ValidationError(std::string(what) + " descriptor needs a string \"kind\"");
  return j["kind"].get<std::string>();
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("bad value for \"") + key + "\"");
  }
}

}  // namespace

SpacePtr make_space(const json& j) {
  const auto kind = kind_of(j, "space");
  if (kind == "interval")
    return std::make_shared<IntervalSpace>(get_or(j, "exponent", 1.0), get_or(j, "eta", 0x1.0p-20));
  if (kind == "cube") return std::make_shared<CubeSpace>(get_or(j, "dim", 2), get_or(j, "eta", 0x1.0p-10));
  if (kind == "uniform_finite")
    return FiniteSpace::uniform(get_or<std::size_t>(j, "n", 10), get_or(j, "distance", 1.0));
  if (kind == "finite") {
    auto d = get_or<std::vector<std::vector<double>>>(j, "distances", {});
    return std::make_shared<FiniteSpace>(std::move(d), get_or<std::string>(j, "label", "finite"));
  }
  if (kind == "sequence") return std::make_shared<SequenceSpace>(get_or<std::size_t>(j, "terms", 200));
  if (kind == "tree")
    return TreeSpace::uniform(get_or(j, "epsilon", 0.5), get_or<std::uint32_t>(j, "branching", 2));
  if (kind == "fat_subtree") return TreeSpace::fat_subtree(get_or(j, "thin_dim", 1.0));
  throw ValidationError("unknown space kind: " + kind);
}

NoiseModel parse_noise(const json& j) {
  if (j.is_null()) return {};
  const auto kind = j.is_string() ? j.get<std::string>() : kind_of(j, "noise");
  const json p = j.is_object() ? j : json::object();
  NoiseModel n;
  if (kind == "bernoulli") n = NoiseModel::bernoulli();
  else if (kind == "deterministic") n = NoiseModel::deterministic();
  else if (kind == "normal") n = NoiseModel::normal(get_or(p, "sigma", 0.1));
  else if (kind == "point_mass")
    n = NoiseModel::point_mass(get_or<std::vector<double>>(p, "values", {}),
                               get_or<std::vector<double>>(p, "probs", {}));
  else if (kind == "sharp_peak")
    n = NoiseModel::sharp_peak(get_or(p, "alpha", 0.5), get_or(p, "spread", 0.5));
  else throw ValidationError("unknown noise kind: " + kind);
  n.validate();
  return n;
}

Point parse_point(const MetricSpace& space, const json& j) {
  Point p;
  try {
    switch (space.point_kind()) {
      case PointKind::real1d: p = j.get<double>(); break;
      case PointKind::realvec: p = j.get<std::vector<double>>(); break;
      case PointKind::tree_path: p = TreePath(j.get<std::vector<std::uint32_t>>()); break;
      case PointKind::index: p = j.get<std::size_t>(); break;
    }
  } catch (const json::exception&) {
    throw KindMismatch(std::string("point does not match a ") + kind_name(space.point_kind()) +
                       " space");
  }
  if (!space.contains(p)) throw ValidationError("point lies outside the space: " + j.dump());
  return p;
}

json point_json(const Point& p) {
  switch (kind_of(p)) {
    case PointKind::real1d: return std::get<double>(p);
    case PointKind::realvec: return std::get<std::vector<double>>(p);
    case PointKind::tree_path: return std::get<TreePath>(p).idx;
    case PointKind::index: return std::get<std::size_t>(p);
  }
  return nullptr;
}

namespace {

TreePtr make_tree(const json& j, SpacePtr space) {
  const auto kind = j.is_null() ? std::string("binary") : kind_of(j, "tree");
  const int depth = get_or(j.is_null() ? json::object() : j, "depth", 12);
  if (kind == "binary") return std::make_shared<BallTree>(build_ball_tree_binary(space, depth));
  if (kind == "strength")
    return std::make_shared<BallTree>(build_ball_tree_strength(space, get_or(j, "d", 1.0), depth));
  throw ValidationError("unknown ball-tree kind: " + kind);
}

BiasSchedule parse_bias(const json& j) {
  BiasSchedule b;
  if (j.is_null()) return b;
  const auto kind = kind_of(j, "bias");
  if (kind == "constant") {
    b.kind = BiasSchedule::Kind::constant;
    b.value = get_or(j, "value", 1.0 / 3.0);
  } else if (kind == "inverse_sqrt2") {
    b.kind = BiasSchedule::Kind::inverse_sqrt2;
  } else if (kind == "list") {
    b.kind = BiasSchedule::Kind::explicit_list;
    b.list = get_or<std::vector<double>>(j, "values", {});
  } else {
    throw ValidationError("unknown bias schedule: " + kind);
  }
  return b;
}

}  // namespace

EnvPtr make_environment(const json& j, SpacePtr space, std::uint64_t seed) {
  const auto kind = kind_of(j, "environment");
  const auto noise = parse_noise(j.value("noise", json()));
  const auto feedback = parse_feedback(get_or<std::string>(j, "feedback", "bandit"));
  const auto inst_seed = get_or<std::uint64_t>(j, "seed", seed);
  if (kind == "cone") {
    const Point c = j.contains("center") ? parse_point(*space, j["center"]) : space->mesh(1).front();
    return make_cone(space, c, get_or(j, "peak", 0.9), get_or(j, "slope", 1.0),
                     get_or(j, "floor", 0.0), noise, feedback);
  }
  if (kind == "random_lipschitz")
    return make_random_lipschitz(space, inst_seed, get_or(j, "cones", 3), noise, feedback);
  if (kind == "target") {
    std::vector<Point> targets;
    for (const auto& t : j.value("targets", json::array())) targets.push_back(parse_point(*space, t));
    Shape shape;
    if (j.contains("shape")) {
      shape.high = get_or(j["shape"], "high", 1.0);
      shape.low = get_or(j["shape"], "low", 0.0);
      shape.alpha = get_or(j["shape"], "alpha", 1.0);
    }
    return make_target_instance(space, std::move(targets), shape, noise, feedback);
  }
  if (kind == "bandit_needle") {
    auto tree = make_tree(j.value("tree", json()), space);
    return BanditNeedle::sampled(tree, inst_seed, get_or(j, "depth", 12), noise, feedback);
  }
  if (kind == "experts_needle") {
    auto tree = make_tree(j.value("tree", json()), space);
    return std::make_shared<ExpertsNeedle>(tree, inst_seed, get_or(j, "depth", 12),
                                           parse_bias(j.value("bias", json())),
                                           std::map<int, int>{}, noise,
                                           parse_feedback(get_or<std::string>(j, "feedback", "full")));
  }
  if (kind == "logt") {
    const Point limit = parse_point(*space, j.at("limit"));
    std::vector<Point> approach;
    for (const auto& p : j.value("approach", json::array())) approach.push_back(parse_point(*space, p));
    const auto center = get_or<std::string>(j, "center", "approach_point") == "limit_point"
                            ? LogTFamily::Center::limit_point
                            : LogTFamily::Center::approach_point;
    return std::make_shared<LogTFamily>(space, limit, std::move(approach),
                                        get_or<std::size_t>(j, "member", 0), center, noise, feedback);
  }
  throw ValidationError("unknown environment kind: " + kind);
}

RadiusPolicy parse_radius(const json& j, const Environment& env) {
  if (j.is_null()) return RadiusPolicy::for_noise(env.noise());
  const auto kind = j.is_string() ? j.get<std::string>() : kind_of(j, "radius");
  const json p = j.is_object() ? j : json::object();
  if (kind == "auto") return RadiusPolicy::for_noise(env.noise());
  RadiusPolicy r;
  r.kind = parse_radius_kind(kind);
  r.c_alpha = get_or(p, "c_alpha", r.c_alpha);
  r.sigma = get_or(p, "sigma", env.noise().kind == NoiseModel::Kind::normal ? env.noise().sigma : r.sigma);
  r.peak_alpha = get_or(p, "alpha", r.peak_alpha);
  r.peak_constant = get_or(p, "constant", r.peak_constant);
  r.masses = get_or(p, "values", env.noise().values);
  r.probs = get_or(p, "probs", env.noise().probs);
  r.mass_constant = get_or(p, "mass_constant", r.mass_constant);
  r.validate();
  return r;
}

namespace {

DecompositionPtr make_decomposition(const json& j, SpacePtr space) {
  const auto kind = kind_of(j, "decomposition");
  if (kind == "trivial") return std::make_shared<TrivialDecomposition>(space, get_or(j, "dimension", 0.0));
  if (kind == "nested_interval") {
    auto interval = std::dynamic_pointer_cast<const IntervalSpace>(space);
    if (!interval) throw ValidationError("nested_interval decomposition needs an interval space");
    auto regions = get_or<std::vector<std::pair<double, double>>>(j, "regions", {});
    return std::make_shared<NestedIntervalDecomposition>(interval, std::move(regions),
                                                         get_or(j, "dimension", 1.0));
  }
  if (kind == "fat_subtree") {
    auto tree = std::dynamic_pointer_cast<const TreeSpace>(space);
    if (!tree || tree->family() != TreeSpace::Family::fat_subtree)
      throw ValidationError("fat_subtree decomposition needs a fat-subtree space");
    const double d = j.contains("dimension") ? j["dimension"].get<double>()
                                             : tree->max_min_covering_dimension().value_or(1.0);
    return std::make_shared<FatSubtreeDecomposition>(tree, d);
  }
  throw ValidationError("unknown decomposition kind: " + kind);
}

}  // namespace

std::unique_ptr<Algorithm> make_algorithm(const json& j, SpacePtr space, const Environment& env) {
  const auto kind = kind_of(j, "algorithm");
  if (kind == "ucb1") {
    std::vector<Point> arms;
    if (j.contains("arms"))
      for (const auto& a : j["arms"]) arms.push_back(parse_point(*space, a));
    else
      arms = space->mesh(get_or<std::size_t>(j, "mesh", 16));
    return std::make_unique<Ucb1Policy>(std::move(arms));
  }
  if (kind == "naive")
    return std::make_unique<NaiveAlg>(space, get_or(j, "d", 1.0), get_or(j, "c", 1.0));
  if (kind == "boundary") return std::make_unique<BoundaryAlg>(space, get_or(j, "max_phases", 24));
  if (kind == "zooming") {
    ZoomingOptions o;
    o.variant = parse_variant(get_or<std::string>(j, "variant", "plain"));
    o.radius = parse_radius(j.value("radius", json()), env);
    o.multiplier = get_or(j, "multiplier", 0.0);
    if (j.contains("decomposition")) o.decomposition = make_decomposition(j["decomposition"], space);
    o.quota_dim = get_or(j, "quota_dim", -1.0);
    return std::make_unique<Zooming>(space, std::move(o));
  }
  if (kind == "naive_exp")
    return std::make_unique<NaiveExp>(space, get_or(j, "b", 1.0), get_or(j, "uniform", false),
                                      get_or<std::size_t>(j, "cap", 100000));
  if (kind == "well_ordered_bandit")
    return std::make_unique<WellOrderedBanditWrapper>(
        space, get_or(j, "growth_power", 2.0), get_or(j, "max_phase", 5),
        parse_expl_mode(get_or<std::string>(j, "mode", "expl")));
  if (kind == "free_peek")
    return std::make_unique<FreePeekWrapper>(
        space, get_or<std::string>(j, "radius_rule", "verbatim") == "log",
        parse_expl_mode(get_or<std::string>(j, "mode", "expl")));
  throw ValidationError("unknown algorithm kind: " + kind);
}

json RunConfig::to_json() const {
  return {{"label", label},
          {"space", space},
          {"environment", environment},
          {"algorithm", algorithm},
          {"horizon", horizon},
          {"seeds", seeds},
          {"checkpoints_per_octave", checkpoints_per_octave},
          {"out", out}};
}

RunSetup RunConfig::build(std::uint64_t seed) const {
  auto sp = make_space(space);
  RunSetup s;
  s.environment = make_environment(environment, sp, seed);
  s.algorithm = make_algorithm(algorithm, sp, *s.environment);
  if (s.algorithm->feedback() != s.environment->feedback())
    throw ValidationError(std::string("feedback mismatch: ") + s.algorithm->name() + " expects " +
                          feedback_name(s.algorithm->feedback()) + " but the instance provides " +
                          feedback_name(s.environment->feedback()));
  return s;
}

void RunConfig::validate() const {
  if (horizon == 0) throw ValidationError("horizon must be positive");
  if (seeds.empty()) throw ValidationError("at least one seed is required");
  if (checkpoints_per_octave < 1) throw ValidationError("checkpoints_per_octave must be >= 1");
  build(seeds.front());
}

RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) throw ValidationError("run configuration must be a JSON object");
  RunConfig c;
  for (const char* key : {"space", "environment", "algorithm"})
    if (!j.contains(key)) throw ValidationError(std::string("missing \"") + key + "\"");
  c.space = j["space"];
  c.environment = j["environment"];
  c.algorithm = j["algorithm"];
  c.horizon = get_or<std::uint64_t>(j, "horizon", c.horizon);
  if (j.contains("seeds")) {
    const auto& s = j["seeds"];
    if (s.is_array()) {
      c.seeds = s.get<std::vector<std::uint64_t>>();
    } else if (s.is_object()) {
      const auto count = get_or<std::uint64_t>(s, "count", 1);
      const auto start = get_or<std::uint64_t>(s, "start", 0);
      c.seeds.clear();
      for (std::uint64_t i = 0; i < count; ++i) c.seeds.push_back(start + i);
    } else {
      c.seeds = {s.get<std::uint64_t>()};
    }
  }
  c.checkpoints_per_octave = get_or(j, "checkpoints_per_octave", 1);
  c.out = get_or<std::string>(j, "out", c.out);
  c.label = get_or<std::string>(j, "label", c.label);
  return c;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace lipzoom
