#include "lipzoom/tree_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace lipzoom {

namespace {

constexpr std::uint64_t kDegreeCap = std::numeric_limits<std::uint32_t>::max();

const TreePath& as_path(const Point& p) { return std::get<TreePath>(p); }

}  // namespace

TreeSpace::TreeSpace(Family family, double base, std::uint32_t branching, double thin_dim)
    : family_(family), base_(base), branching_(branching), thin_dim_(thin_dim) {
  depth_cap_ = 1;
  while (depth_cap_ < 400 && width(depth_cap_) > 0x1.0p-40) ++depth_cap_;
}

std::shared_ptr<TreeSpace> TreeSpace::uniform(double epsilon, std::uint32_t branching) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("tree epsilon must lie in (0,1)");
  if (branching < 2) throw ValidationError("tree branching must be at least 2");
  return std::shared_ptr<TreeSpace>(new TreeSpace(Family::uniform, epsilon, branching, 0.0));
}

std::shared_ptr<TreeSpace> TreeSpace::fat_subtree(double thin_dim) {
  if (!(thin_dim > 0.0 && thin_dim <= 8.0))
    throw ValidationError("fat subtree thin dimension must lie in (0,8]");
  return std::shared_ptr<TreeSpace>(
      new TreeSpace(Family::fat_subtree, std::exp2(-1.0 / thin_dim), 0, thin_dim));
}

std::string TreeSpace::name() const {
  return family_ == Family::uniform ? "uniform_tree" : "fat_subtree";
}

double TreeSpace::width(std::size_t level) const {
  return std::pow(base_, static_cast<double>(level));
}

std::uint64_t TreeSpace::degree(const std::vector<std::uint32_t>& path, std::size_t level) const {
  if (family_ == Family::uniform) return branching_;
  for (std::size_t l = 0; l < level; ++l)
    if ((l < path.size() ? path[l] : 0u) >= 2) return 2;
  if (level + 1 >= 32) return kDegreeCap;
  return std::min<std::uint64_t>(kDegreeCap, (std::uint64_t{1} << (level + 1)) + 2);
}

double TreeSpace::level_count(std::size_t level) const {
  const double b = family_ == Family::uniform ? static_cast<double>(branching_) : 4.0;
  return std::pow(b, static_cast<double>(level));
}

std::size_t TreeSpace::lcp(const TreePath& a, const TreePath& b) const {
  const std::size_t n = std::max(a.idx.size(), b.idx.size());
  for (std::size_t l = 0; l < n; ++l)
    if (a.at(l) != b.at(l)) return l;
  return std::numeric_limits<std::size_t>::max();
}

double TreeSpace::distance(const Point& x, const Point& y) const {
  check_kind(x);
  check_kind(y);
  const std::size_t l = lcp(as_path(x), as_path(y));
  return l == std::numeric_limits<std::size_t>::max() ? 0.0 : width(l);
}

bool TreeSpace::contains(const Point& p) const {
  if (kind_of(p) != PointKind::tree_path) return false;
  const auto& v = as_path(p).idx;
  for (std::size_t l = 0; l < v.size(); ++l)
    if (v[l] >= degree(v, l)) return false;
  return true;
}

bool TreeSpace::is_fat(const Point& p) const {
  if (family_ != Family::fat_subtree) return false;
  const auto& v = as_path(p).idx;
  return std::all_of(v.begin(), v.end(), [](std::uint32_t i) { return i < 2; });
}

bool TreeSpace::in_region(const Point& p, Region region) const {
  if (region == Region::any || family_ == Family::uniform) return true;
  return is_fat(p) == (region == Region::fat);
}

std::size_t TreeSpace::ball_level(const Ball& b) const {
  if (b.radius > 1.0 || (b.closed && b.radius >= 1.0)) return 0;
  if (!(b.radius > 0.0)) return depth_cap_;
  auto j = static_cast<std::size_t>(
      std::max(0.0, std::floor(std::log(b.radius) / std::log(base_))));
  auto ok = [&](std::size_t l) { return b.closed ? width(l) <= b.radius : width(l) < b.radius; };
  while (j > 0 && ok(j - 1)) --j;
  while (j < depth_cap_ && !ok(j)) ++j;
  return std::min(j, depth_cap_);
}

namespace {

struct Prefix {
  std::vector<std::uint32_t> idx;  // padded with zeros to the ball level
};

}  // namespace

std::optional<Point> TreeSpace::find_uncovered(std::span<const Ball> balls) const {
  return find_uncovered_in(balls, Region::any);
}

std::optional<Point> TreeSpace::find_uncovered_near(std::span<const Ball> balls,
                                                    const Ball& hint) const {
  return find_uncovered_in(balls, Region::any, &hint);
}

std::optional<Point> TreeSpace::find_uncovered_in(std::span<const Ball> balls, Region region,
                                                  const Ball* hint) const {
  if (family_ == Family::uniform) region = Region::any;
  std::vector<std::uint32_t> start;
  if (hint) {
    check_kind(hint->center);
    const std::size_t j = ball_level(*hint);
    start.resize(j);
    for (std::size_t l = 0; l < j; ++l) start[l] = as_path(hint->center).at(l);
  }
  std::vector<Prefix> prefixes;
  prefixes.reserve(balls.size());
  for (const auto& b : balls) {
    check_kind(b.center);
    if (!b.closed && !(b.radius > 0.0)) continue;
    const std::size_t j = ball_level(b);
    const auto& c = as_path(b.center);
    const std::size_t common = std::min(j, start.size());
    bool related = true;
    for (std::size_t l = 0; l < common && related; ++l) related = c.at(l) == start[l];
    if (!related) continue;
    // A ball containing the whole start subtree settles the search.
    if (j <= start.size()) return std::nullopt;
    Prefix p;
    p.idx.resize(j);
    for (std::size_t l = 0; l < j; ++l) p.idx[l] = c.at(l);
    prefixes.push_back(std::move(p));
  }
  std::vector<std::uint32_t> node = start;

  auto witness = [&](std::uint32_t c, bool node_fat) {
    std::vector<std::uint32_t> w = node;
    w.push_back(c);
    if (region == Region::thin && node_fat && c < 2) w.push_back(2);
    return Point{TreePath(std::move(w))};
  };

  // Depth-first search in lexicographic order over the nodes that some ball
  // prefix passes through; every other child is an uncovered subtree.
  auto search = [&](auto&& self, std::vector<const Prefix*>& here,
                    bool node_fat) -> std::optional<Point> {
    const std::size_t level = node.size();
    std::map<std::uint32_t, std::vector<const Prefix*>> groups;
    for (const auto* p : here) {
      if (p->idx.size() == level) return std::nullopt;
      groups[p->idx[level]].push_back(p);
    }
    const std::uint64_t deg = degree(node, level);
    std::uint64_t limit = deg;
    if (region == Region::fat) limit = std::min<std::uint64_t>(deg, 2);
    std::uint64_t c = 0;
    for (auto& [k, sub] : groups) {
      if (k >= limit) break;
      if (c < k) return witness(static_cast<std::uint32_t>(c), node_fat);
      node.push_back(k);
      auto found = self(self, sub, node_fat && k < 2);
      node.pop_back();
      if (found) return found;
      c = static_cast<std::uint64_t>(k) + 1;
    }
    if (c < limit) return witness(static_cast<std::uint32_t>(c), node_fat);
    return std::nullopt;
  };

  std::vector<const Prefix*> all;
  for (const auto& p : prefixes) all.push_back(&p);
  bool start_fat = family_ == Family::fat_subtree;
  for (auto v : start) start_fat = start_fat && v < 2;
  if (region == Region::fat && !start_fat) return std::nullopt;
  if (start.size() >= depth_cap_) {
    if (!all.empty()) return std::nullopt;
    if (region == Region::thin && start_fat) return std::nullopt;
    return Point{TreePath(start)};
  }
  return search(search, all, start_fat);
}

bool TreeSpace::region_meets_ball(Region region, const Ball& b) const {
  if (region != Region::fat || family_ == Family::uniform) return true;
  const std::size_t j = ball_level(b);
  for (std::size_t l = 0; l < j; ++l)
    if (as_path(b.center).at(l) >= 2) return false;
  return true;
}

void TreeSpace::enumerate(std::vector<std::uint32_t>& prefix, std::size_t level,
                          std::size_t target_level, std::size_t cap,
                          std::vector<Point>& out) const {
  if (out.size() >= cap) return;
  if (level == target_level) {
    out.emplace_back(TreePath(prefix));
    return;
  }
  const std::uint64_t deg = degree(prefix, level);
  for (std::uint64_t c = 0; c < deg && out.size() < cap; ++c) {
    prefix.push_back(static_cast<std::uint32_t>(c));
    enumerate(prefix, level + 1, target_level, cap, out);
    prefix.pop_back();
  }
}

std::optional<Net> TreeSpace::greedy_net(double delta, std::size_t cap) const {
  if (!(delta > 0)) throw ValidationError("net resolution must be positive");
  const std::size_t j = ball_level(Ball{Point{TreePath{}}, delta, false});
  if (level_count(j) > static_cast<double>(cap)) return std::nullopt;
  Net net{delta, {}};
  std::vector<std::uint32_t> prefix;
  enumerate(prefix, 0, j, cap, net.points);
  return net;
}

std::vector<Point> TreeSpace::mesh(std::size_t target) const {
  std::size_t j = 0;
  while (j < depth_cap_ && level_count(j + 1) <= static_cast<double>(target)) ++j;
  std::vector<Point> out;
  std::vector<std::uint32_t> prefix;
  enumerate(prefix, 0, j, target, out);
  return out;
}

Point TreeSpace::sample(Rng& rng) const {
  std::vector<std::uint32_t> v;
  v.reserve(depth_cap_);
  for (std::size_t l = 0; l < depth_cap_; ++l) {
    std::uniform_int_distribution<std::uint64_t> pick(0, degree(v, l) - 1);
    v.push_back(static_cast<std::uint32_t>(pick(rng)));
  }
  return Point{TreePath(std::move(v))};
}

std::optional<Point> TreeSpace::sample_near(const Point& y, double rho) const {
  check_kind(y);
  const std::size_t j = ball_level(Ball{y, rho, false});
  if (!(width(j) < rho)) return std::nullopt;
  std::vector<std::uint32_t> v(j + 1);
  for (std::size_t l = 0; l <= j; ++l) v[l] = as_path(y).at(l);
  v[j] = v[j] == 0 ? 1 : 0;
  std::vector<std::uint32_t> tail(as_path(y).idx.begin() + std::min(j + 1, as_path(y).idx.size()),
                                  as_path(y).idx.end());
  v.insert(v.end(), tail.begin(), tail.end());
  return Point{TreePath(std::move(v))};
}

std::vector<Point> TreeSpace::packing_in_ball(const Ball& ball, double separation,
                                              std::size_t cap) const {
  check_kind(ball.center);
  const std::size_t j0 = ball_level(ball);
  const std::size_t m = ball_level(Ball{ball.center, separation, true});
  std::vector<std::uint32_t> prefix(j0);
  for (std::size_t l = 0; l < j0; ++l) prefix[l] = as_path(ball.center).at(l);
  std::vector<Point> out;
  if (m <= j0) {
    out.emplace_back(TreePath(prefix));
    return out;
  }
  enumerate(prefix, j0, m, cap, out);
  return out;
}

std::optional<double> TreeSpace::covering_dimension() const {
  if (family_ == Family::uniform)
    return std::log(static_cast<double>(branching_)) / -std::log(base_);
  return 2.0 * thin_dim_;
}

std::optional<double> TreeSpace::max_min_covering_dimension() const {
  if (family_ == Family::uniform) return covering_dimension();
  return thin_dim_;
}

std::optional<double> TreeSpace::log_covering_number(double r) const {
  const std::size_t j = ball_level(Ball{Point{TreePath{}}, r, false});
  return std::log(level_count(j));
}

json TreeSpace::describe() const {
  json j{{"kind", name()},
         {"covering_dimension", *covering_dimension()},
         {"max_min_covering_dimension", *max_min_covering_dimension()},
         {"depth_cap", depth_cap_},
         {"eta", resolution()}};
  if (family_ == Family::uniform) {
    j["epsilon"] = base_;
    j["branching"] = branching_;
  } else {
    j["thin_dim"] = thin_dim_;
  }
  return j;
}

}  // namespace lipzoom
