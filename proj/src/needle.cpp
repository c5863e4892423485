#include "lipzoom/needle.hpp"

#include <algorithm>
#include <cmath>

#include "lipzoom/space.hpp"

namespace lipzoom {

double bump(const MetricSpace& space, const Point& center, double radius, const Point& x) {
  const double d = space.distance(x, center);
  if (!(d < radius)) return 0.0;
  return std::min(radius - d, radius / 2.0);
}

std::vector<int> lineage_path(BallTree& tree, std::uint64_t seed, int depth,
                              const std::map<int, int>& overrides) {
  std::vector<int> path{tree.root()};
  while (static_cast<int>(path.size()) <= depth) {
    const int node = path.back();
    std::size_t pos;
    if (auto it = overrides.find(node); it != overrides.end()) {
      if (it->second < 0) break;
      pos = static_cast<std::size_t>(it->second);
    } else {
      pos = static_cast<std::size_t>(
          derive_seed(seed, Purpose::instance, static_cast<std::uint64_t>(node)));
    }
    const auto& kids = tree.expand(node);
    if (kids.empty()) break;
    path.push_back(kids[pos % kids.size()]);
  }
  return path;
}

namespace {

// Sum of weight(i) * F_{path[i]}(x) over the nested balls containing x.
template <class Weight>
double path_sum(const BallTree& tree, const std::vector<int>& path, const Point& x, Weight w) {
  double s = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const auto& n = tree.node(path[i]);
    const double f = bump(tree.space(), n.center, n.radius, x);
    if (f == 0.0) break;
    s += w(i) * f;
  }
  return s;
}

json path_json(const BallTree& tree, const std::vector<int>& path) {
  json j = json::array();
  for (int id : path) {
    const auto& n = tree.node(id);
    j.push_back({{"center", to_string(n.center)}, {"radius", n.radius}});
  }
  return j;
}

}  // namespace

// ------------------------------------------------------------ bandit needle

BanditNeedle::BanditNeedle(TreePtr tree, std::vector<int> path, NoiseModel noise,
                           Feedback feedback)
    : Environment(tree->space_ptr(), std::move(noise), feedback),
      tree_(std::move(tree)),
      path_(std::move(path)) {
  double s = 0.0;
  for (std::size_t i = 1; i < path_.size(); ++i) s += tree_->node(path_[i]).radius / 2.0;
  mu_star_ = 1.0 / 3.0 + s / 3.0;
}

std::shared_ptr<BanditNeedle> BanditNeedle::sampled(TreePtr tree, std::uint64_t seed, int depth,
                                                    NoiseModel noise, Feedback feedback) {
  auto path = lineage_path(*tree, seed, depth);
  return std::make_shared<BanditNeedle>(std::move(tree), std::move(path), std::move(noise),
                                        feedback);
}

double BanditNeedle::mu(const Point& x) const {
  return 1.0 / 3.0 + path_sum(*tree_, path_, x, [](std::size_t) { return 1.0; }) / 3.0;
}

std::optional<Point> BanditNeedle::optimum() const { return tree_->node(path_.back()).center; }

double BanditNeedle::truncation_error() const {
  return std::pow(4.0, -static_cast<double>(path_.size() - 1)) / 9.0;
}

json BanditNeedle::parameters() const {
  return {{"depth", path_.size() - 1}, {"lineage", path_json(*tree_, path_)}};
}

// ------------------------------------------------------------ bias schedule

double BiasSchedule::at(int depth) const {
  switch (kind) {
    case Kind::constant: return value;
    case Kind::inverse_sqrt2: return std::exp2(-0.5 * depth);
    case Kind::explicit_list:
      if (list.empty()) return 0.0;
      return list[std::min<std::size_t>(static_cast<std::size_t>(depth - 1), list.size() - 1)];
  }
  return 0.0;
}

json BiasSchedule::describe() const {
  switch (kind) {
    case Kind::constant: return {{"kind", "constant"}, {"value", value}};
    case Kind::inverse_sqrt2: return {{"kind", "inverse_sqrt2"}};
    case Kind::explicit_list: return {{"kind", "list"}, {"values", list}};
  }
  return {};
}

// ----------------------------------------------------------- experts needle

ExpertsNeedle::ExpertsNeedle(TreePtr tree, std::uint64_t seed, int depth, BiasSchedule bias,
                             std::map<int, int> overrides, NoiseModel noise, Feedback feedback)
    : Environment(tree->space_ptr(), std::move(noise), feedback),
      tree_(std::move(tree)),
      seed_(seed),
      depth_(depth),
      bias_(std::move(bias)) {
  if (depth_ < 0) throw ValidationError("needle depth must be non-negative");
  for (int i = 1; i <= depth_; ++i) {
    const double b = bias_.at(i);
    if (!(b >= 0.0 && b < 1.0)) throw ValidationError("bias must lie in [0,1)");
  }
  tree_->extend_to(depth_);
  path_ = lineage_path(*tree_, seed_, depth_, overrides);
  node_bias_.assign(tree_->size(), 0.0);
  double s = 0.0;
  for (std::size_t i = 1; i < path_.size(); ++i) {
    const double b = bias_.at(static_cast<int>(i));
    node_bias_[static_cast<std::size_t>(path_[i])] = b;
    s += b * tree_->node(path_[i]).radius / 2.0;
  }
  mu_star_ = 0.5 + s / 3.0;
}

double ExpertsNeedle::sign_bias(int node) const {
  return static_cast<std::size_t>(node) < node_bias_.size()
             ? node_bias_[static_cast<std::size_t>(node)]
             : 0.0;
}

double ExpertsNeedle::mu(const Point& x) const {
  return 0.5 + path_sum(*tree_, path_, x, [&](std::size_t i) {
           return node_bias_[static_cast<std::size_t>(path_[i])];
         }) / 3.0;
}

std::optional<Point> ExpertsNeedle::optimum() const { return tree_->node(path_.back()).center; }

double ExpertsNeedle::truncation_error() const {
  return std::pow(4.0, -static_cast<double>(depth_)) / 9.0;
}

int ExpertsNeedle::sign(std::uint64_t round, int node) const {
  const double p_plus = 0.5 * (1.0 + sign_bias(node));
  const double u = unit_interval(
      derive_seed(seed_, Purpose::signs, round, static_cast<std::uint64_t>(node)));
  return u < p_plus ? 1 : -1;
}

double ExpertsNeedle::realized(std::uint64_t round, const Point& x) const {
  double s = 0.0;
  int node = tree_->root();
  for (int level = 1; level <= depth_; ++level) {
    const auto& n = tree_->node(node);
    if (!n.expanded) break;
    int next = -1;
    for (int c : n.children) {
      const auto& ch = tree_->node(c);
      const double f = bump(space(), ch.center, ch.radius, x);
      if (f > 0.0) {
        s += sign(round, c) * f;
        next = c;
        break;
      }
    }
    if (next < 0) break;
    node = next;
  }
  return 0.5 + s / 3.0;
}

void ExpertsNeedle::sample(std::uint64_t round, std::span<const Point> queries,
                           std::span<double> out, Rng&) const {
  for (std::size_t i = 0; i < queries.size(); ++i) out[i] = realized(round, queries[i]);
}

json ExpertsNeedle::parameters() const {
  return {{"depth", depth_},
          {"seed", seed_},
          {"bias", bias_.describe()},
          {"lineage", path_json(*tree_, path_)}};
}

// --------------------------------------------------------------- ensembles

BanditEnsemble make_bandit_ensemble(TreePtr tree, int node, std::uint64_t seed, int depth) {
  const auto& kids = tree->expand(node);
  if (kids.size() < 2) throw ValidationError("ensemble node needs at least two children");
  const std::vector<int> children = kids;
  // Root path down to the node.
  std::vector<int> up;
  for (int v = node; v >= 0; v = tree->node(v).parent) up.push_back(v);
  std::reverse(up.begin(), up.end());

  BanditEnsemble e;
  e.node = node;
  const double r = tree->node(children.front()).radius;
  e.epsilon = r / 6.0;
  e.base = std::make_shared<BanditNeedle>(tree, up);
  for (std::size_t i = 0; i < children.size(); ++i) {
    std::map<int, int> ov;
    for (std::size_t a = 0; a + 1 < up.size(); ++a) {
      const auto& ks = tree->node(up[a]).children;
      ov[up[a]] = static_cast<int>(std::find(ks.begin(), ks.end(), up[a + 1]) - ks.begin());
    }
    ov[node] = static_cast<int>(i);
    auto path = lineage_path(*tree, seed, std::max(depth, static_cast<int>(up.size())), ov);
    e.regions.push_back(Ball{tree->node(children[i]).center, r, false});
    e.alternatives.push_back(std::make_shared<BanditNeedle>(tree, std::move(path)));
  }
  return e;
}

ExpertsEnsemble make_experts_ensemble(TreePtr tree, int node, std::uint64_t seed, int depth,
                                      BiasSchedule bias) {
  tree->extend_to(depth);
  const auto lineage = lineage_path(*tree, seed, depth);
  if (std::find(lineage.begin(), lineage.end(), node) == lineage.end())
    throw ValidationError("experts ensemble node must lie on the sampled lineage");
  const std::vector<int> children = tree->node(node).children;
  if (children.size() < 2) throw ValidationError("ensemble node needs at least two children");
  const int child_depth = tree->node(node).depth + 1;
  const double r = tree->node(children.front()).radius;
  const double dj = bias.at(child_depth);

  ExpertsEnsemble e;
  e.node = node;
  e.epsilon = r * dj / 6.0;
  e.delta = 2.0 * dj;
  e.base = std::make_shared<ExpertsNeedle>(tree, seed, depth, bias, std::map<int, int>{{node, -1}});
  for (std::size_t i = 0; i < children.size(); ++i) {
    // The alternative biases exactly one more node than the base.
    std::map<int, int> ov{{node, static_cast<int>(i)}, {children[i], -1}};
    e.regions.push_back(Ball{tree->node(children[i]).center, r, false});
    e.alternatives.push_back(std::make_shared<ExpertsNeedle>(tree, seed, depth, bias, ov));
  }
  return e;
}

std::vector<Point> ensemble_mesh(const MetricSpace& space, const BallTree& tree,
                                 const std::vector<Ball>& regions, std::size_t target) {
  std::vector<Point> pts = space.mesh(target);
  for (std::size_t i = 0; i < tree.size(); ++i) pts.push_back(tree.node(static_cast<int>(i)).center);
  if (const auto* iv = dynamic_cast<const IntervalSpace*>(&space)) {
    for (const auto& b : regions) {
      const double c = std::get<double>(b.center);
      const double w = iv->reach(b.radius);
      for (double f : {0.5, 1.0 - 1e-9, 1.0 + 1e-9})
        for (double s : {-1.0, 1.0}) {
          const double x = c + s * w * f;
          if (x >= 0.0 && x <= 1.0) pts.emplace_back(x);
        }
    }
  }
  return pts;
}

namespace {

constexpr double kSlack = 1e-12;

}  // namespace

EnsembleCheck validate_bandit_ensemble(const BanditEnsemble& e, std::size_t mesh_target) {
  EnsembleCheck out;
  const auto& tree = e.base->tree();
  const auto& space = e.base->space();
  const auto mesh = ensemble_mesh(space, tree, e.regions, mesh_target);
  out.mesh_points = mesh.size();
  const std::size_t k = e.regions.size();

  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b)
      for (const auto& p : mesh)
        if (space.in_ball(e.regions[a], p) && space.in_ball(e.regions[b], p))
          out.violations.push_back("regions " + std::to_string(a) + " and " + std::to_string(b) +
                                   " overlap at " + to_string(p));

  double sup0 = e.base->mu_star();
  for (const auto& p : mesh) sup0 = std::max(sup0, e.base->mu(p));
  for (const auto& p : mesh) {
    const double m0 = e.base->mu(p);
    if (m0 < 1.0 / 3.0 - kSlack || m0 > 2.0 / 3.0 + kSlack)
      out.violations.push_back("base payoff outside [1/3, 2/3] at " + to_string(p));
  }

  for (std::size_t i = 0; i < k; ++i) {
    const auto& mi = *e.alternatives[i];
    double sup_i = -1.0;
    for (const auto& p : mesh) {
      const double m0 = e.base->mu(p), v = mi.mu(p);
      if (space.in_ball(e.regions[i], p)) {
        sup_i = std::max(sup_i, v);
        if (v - m0 < -kSlack || v - m0 > 2.0 * e.epsilon + kSlack)
          out.violations.push_back("clause (iii) fails for member " + std::to_string(i) + " at " +
                                   to_string(p));
      } else {
        for (std::size_t l = 0; l < k; ++l)
          if (l != i && space.in_ball(e.regions[l], p) && v != m0)
            out.violations.push_back("clause (i) fails for member " + std::to_string(i) + " at " +
                                     to_string(p));
      }
    }
    if (sup_i - sup0 < e.epsilon - kSlack)
      out.violations.push_back("clause (ii) fails for member " + std::to_string(i) + ": gap " +
                               std::to_string(sup_i - sup0));
  }
  return out;
}

EnsembleCheck validate_experts_ensemble(const ExpertsEnsemble& e, std::size_t mesh_target) {
  EnsembleCheck out;
  const auto& tree = e.base->tree();
  const auto& space = e.base->space();
  const auto mesh = ensemble_mesh(space, tree, e.regions, mesh_target);
  out.mesh_points = mesh.size();
  const std::size_t k = e.regions.size();

  for (std::size_t i = 0; i < k; ++i) {
    const auto& mi = *e.alternatives[i];
    // Clause (1): the two measures differ in the law of one sign, so every
    // event's likelihood ratio lies between the two atom ratios.
    std::size_t differing = 0;
    double ratio_lo = 1.0, ratio_hi = 1.0;
    for (std::size_t n = 0; n < tree.size(); ++n) {
      const double b0 = e.base->sign_bias(static_cast<int>(n));
      const double bi = mi.sign_bias(static_cast<int>(n));
      if (b0 == bi) continue;
      ++differing;
      const double plus = (1.0 + b0) / (1.0 + bi), minus = (1.0 - b0) / (1.0 - bi);
      ratio_lo *= std::min(plus, minus);
      ratio_hi *= std::max(plus, minus);
    }
    if (differing != 1)
      out.violations.push_back("member " + std::to_string(i) + " differs from the base in " +
                               std::to_string(differing) + " signs");
    if (!(1.0 - e.delta < ratio_lo && ratio_hi < 1.0 + e.delta))
      out.violations.push_back("clause (1) fails for member " + std::to_string(i));

    // Clause (ii) on the mesh, with the closed-form supremum outside the region.
    double inside = -1.0, outside = -1.0;
    for (const auto& p : mesh) {
      const double v = mi.mu(p);
      (space.in_ball(e.regions[i], p) ? inside : outside) =
          std::max(space.in_ball(e.regions[i], p) ? inside : outside, v);
    }
    outside = std::max(outside, e.base->mu_star());
    if (inside - outside < e.epsilon * (1.0 - 1e-9) - kSlack)
      out.violations.push_back("clause (ii) fails for member " + std::to_string(i) + ": gap " +
                               std::to_string(inside - outside) + " < " +
                               std::to_string(e.epsilon));
  }
  return out;
}

LipschitzAudit tree_lipschitz_audit(const BallTree& tree,
                                    const std::function<double(const Point&)>& f,
                                    double lipschitz, std::size_t pairs, std::uint64_t seed) {
  LipschitzAudit out;
  const auto& space = tree.space();
  Rng rng(derive_seed(seed, Purpose::probe, 0x7ee));
  std::uniform_int_distribution<std::size_t> pick(0, tree.size() - 1);
  for (std::size_t i = 0; i < pairs; ++i) {
    const auto& n = tree.node(static_cast<int>(pick(rng)));
    Point x = n.center;
    if (auto near = space.sample_near(n.center, n.radius * (0.05 + 1.2 * rng.uniform()))) x = *near;
    std::optional<Point> y;
    switch (i % 3) {
      case 0: y = space.sample_near(x, n.radius * rng.uniform() + 1e-12); break;
      case 1: y = tree.node(static_cast<int>(pick(rng))).center; break;
      default: y = space.sample(rng); break;
    }
    if (!y) continue;
    const double d = space.distance(x, *y);
    if (!(d > 0.0)) continue;
    ++out.pairs;
    const double gap = std::abs(f(x) - f(*y));
    out.worst_ratio = std::max(out.worst_ratio, gap / d);
    out.worst_excess = std::max(out.worst_excess, gap - lipschitz * d);
  }
  return out;
}

}  // namespace lipzoom
