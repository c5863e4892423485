#include "lipzoom/ball_tree.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lipzoom {

BallTree::BallTree(SpacePtr space, Point root_center, double root_radius, Expander expander,
                   std::optional<double> strength)
    : space_(std::move(space)), expander_(std::move(expander)), strength_(strength) {
  if (!(root_radius > 0.0 && root_radius <= 1.0))
    throw ValidationError("ball-tree radius must lie in (0,1]");
  space_->check_kind(root_center);
  nodes_.push_back(BallNode{std::move(root_center), root_radius, -1, 0, false, {}});
}

const std::vector<int>& BallTree::expand(int id) {
  auto idx = static_cast<std::size_t>(id);
  if (!nodes_.at(idx).expanded) {
    ChildSpec spec = expander_(*space_, nodes_[idx]);
    const int depth = nodes_[idx].depth + 1;
    std::vector<int> ids;
    for (auto& c : spec.centers) {
      ids.push_back(static_cast<int>(nodes_.size()));
      nodes_.push_back(BallNode{std::move(c), spec.radius, id, depth, false, {}});
    }
    nodes_[idx].children = std::move(ids);
    nodes_[idx].expanded = true;
  }
  return nodes_[idx].children;
}

void BallTree::extend_to(int depth) {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].depth < depth) expand(static_cast<int>(i));
}

std::vector<int> BallTree::extend_path(
    int depth, const std::function<std::size_t(const BallTree&, int)>& choose) {
  std::vector<int> path{0};
  while (static_cast<int>(path.size()) <= depth) {
    const auto& kids = expand(path.back());
    if (kids.empty()) break;
    const std::size_t pos = choose(*this, path.back()) % kids.size();
    path.push_back(kids[pos]);
  }
  return path;
}

int BallTree::depth() const {
  int d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

std::vector<std::string> BallTree::validate() const {
  std::vector<std::string> bad;
  auto report = [&](int id, const std::string& what) {
    std::ostringstream os;
    os << "node " << id << " (depth " << nodes_[static_cast<std::size_t>(id)].depth
       << "): " << what;
    bad.push_back(os.str());
  };
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    const int id = static_cast<int>(i);
    if (!(n.radius > 0.0 && n.radius <= 1.0)) report(id, "radius outside (0,1]");
    if (!n.expanded) continue;
    if (n.children.empty()) {
      report(id, "expanded node without children");
      continue;
    }
    const double r = nodes_[static_cast<std::size_t>(n.children.front())].radius;
    for (int c : n.children) {
      const auto& ch = nodes_[static_cast<std::size_t>(c)];
      if (ch.radius != r) report(c, "siblings with different radii");
      if (!(ch.radius <= n.radius / 4.0)) report(c, "child radius above a quarter of the parent's");
      if (!(space_->distance(n.center, ch.center) + ch.radius < n.radius / 2.0))
        report(c, "child ball not nested within half the parent radius");
    }
    for (std::size_t a = 0; a < n.children.size(); ++a)
      for (std::size_t b = a + 1; b < n.children.size(); ++b) {
        const auto& x = nodes_[static_cast<std::size_t>(n.children[a])];
        const auto& y = nodes_[static_cast<std::size_t>(n.children[b])];
        if (!(x.radius + y.radius < space_->distance(x.center, y.center)))
          report(n.children[a], "siblings " + std::to_string(n.children[a]) + " and " +
                                    std::to_string(n.children[b]) + " not separated");
      }
    if (strength_) {
      const double need = std::max(2.0, std::pow(r, -*strength_));
      if (static_cast<double>(n.children.size()) < need)
        report(id, "has " + std::to_string(n.children.size()) + " children, strength needs " +
                       std::to_string(need));
    } else if (n.children.size() < 2) {
      report(id, "fewer than two children");
    }
  }
  return bad;
}

namespace {

Point default_root(const MetricSpace& space) {
  auto m = space.mesh(2);
  if (space.point_kind() == PointKind::real1d) return Point{0.5};
  if (space.point_kind() == PointKind::realvec) {
    const auto dim = std::get<std::vector<double>>(m.front()).size();
    return Point{std::vector<double>(dim, 0.5)};
  }
  return m.front();
}

}  // namespace

BallTree build_ball_tree_binary(SpacePtr space, int depth, std::optional<Point> root_center) {
  Point root = root_center ? *root_center : default_root(*space);
  auto expander = [](const MetricSpace& s, const BallNode& n) {
    auto near = s.sample_near(n.center, n.radius / 3.0);
    if (!near)
      throw PerfectnessViolated("no distinct point within " + std::to_string(n.radius / 3.0) +
                                " of " + to_string(n.center) + " at depth " +
                                std::to_string(n.depth));
    const double gap = s.distance(n.center, *near);
    if (!(gap > 0.0))
      throw PerfectnessViolated("sampler returned the same point at depth " +
                                std::to_string(n.depth));
    return ChildSpec{0.45 * gap, {n.center, *near}};
  };
  BallTree tree(std::move(space), std::move(root), 1.0, expander);
  tree.extend_to(depth);
  return tree;
}

BallTree build_ball_tree_strength(SpacePtr space, double d, int depth,
                                  std::optional<Point> root_center) {
  if (!(d >= 0.0)) throw ValidationError("strength must be non-negative");
  Point root = root_center ? *root_center : default_root(*space);
  constexpr double kMaxChildren = 1 << 20;
  auto expander = [d](const MetricSpace& s, const BallNode& n) {
    const double floor_r = std::max(s.resolution(), 1e-12);
    for (double rp = n.radius / 4.0; rp >= floor_r; rp /= 2.0) {
      const double need = std::max(2.0, std::ceil(std::pow(rp, -d)));
      if (need > kMaxChildren) break;
      auto pts = s.packing_in_ball(Ball{n.center, n.radius / 4.0, false}, 2.0 * rp,
                                   static_cast<std::size_t>(need));
      if (static_cast<double>(pts.size()) >= need) return ChildSpec{rp, std::move(pts)};
    }
    throw StrengthUnreachable(n.depth + 1, "no packing inside " + to_string(n.center) +
                                               " supports strength " + std::to_string(d) +
                                               " at depth " + std::to_string(n.depth + 1));
  };
  BallTree tree(std::move(space), std::move(root), 1.0, expander, d);
  tree.extend_to(depth);
  return tree;
}

}  // namespace lipzoom
