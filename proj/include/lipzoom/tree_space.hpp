#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipzoom/space.hpp"

namespace lipzoom {

// Ends of a rooted tree under the ultrametric D(x,y) = width(lcp(x,y)), where
// lcp is the depth of the deepest common ancestor and width(i) = base^i.
//
// Two families:
//  - uniform: every node has `branching` children, base = epsilon.
//  - fat subtree: level i has 4^i nodes. Fat nodes (indices 0 and 1 all the
//    way down) have 2^{i+1}+2 children, two of them fat; thin nodes have two
//    children. base = 2^{-1/s}, so the thin part has dimension s and the
//    whole tree has dimension 2s.
class TreeSpace : public MetricSpace {
 public:
  enum class Family { uniform, fat_subtree };
  enum class Region { any, thin, fat };

  static std::shared_ptr<TreeSpace> uniform(double epsilon, std::uint32_t branching);
  static std::shared_ptr<TreeSpace> fat_subtree(double thin_dim);

  PointKind point_kind() const override { return PointKind::tree_path; }
  std::string name() const override;
  double distance(const Point& x, const Point& y) const override;
  double resolution() const override { return width(depth_cap_); }
  bool contains(const Point& p) const override;
  std::optional<Point> find_uncovered(std::span<const Ball> balls) const override;
  std::optional<Point> find_uncovered_near(std::span<const Ball> balls,
                                           const Ball& hint) const override;
  std::optional<Net> greedy_net(double delta, std::size_t cap) const override;
  std::vector<Point> mesh(std::size_t target) const override;
  Point sample(Rng& rng) const override;
  std::optional<Point> sample_near(const Point& y, double rho) const override;
  std::vector<Point> packing_in_ball(const Ball& ball, double separation,
                                     std::size_t cap) const override;
  std::optional<double> covering_dimension() const override;
  std::optional<double> max_min_covering_dimension() const override;
  std::optional<double> log_covering_number(double r) const override;
  json describe() const override;

  Family family() const { return family_; }
  double base() const { return base_; }
  double width(std::size_t level) const;
  std::size_t depth_cap() const { return depth_cap_; }
  // Children of the node reached by the first `level` entries of `path`.
  std::uint64_t degree(const std::vector<std::uint32_t>& path, std::size_t level) const;
  // Number of nodes at a level, as a double (it overflows integers quickly).
  double level_count(std::size_t level) const;
  // Subtree level of a ball: the ball is the subtree rooted at center[0..level).
  std::size_t ball_level(const Ball& b) const;

  bool is_fat(const Point& p) const;
  bool in_region(const Point& p, Region region) const;
  // Lowest uncovered end inside the region, searched inside the hint's
  // subtree when one is given.
  std::optional<Point> find_uncovered_in(std::span<const Ball> balls, Region region,
                                         const Ball* hint = nullptr) const;
  // Whether the region meets the ball.
  bool region_meets_ball(Region region, const Ball& b) const;

 private:
  TreeSpace(Family family, double base, std::uint32_t branching, double thin_dim);
  std::size_t lcp(const TreePath& a, const TreePath& b) const;
  void enumerate(std::vector<std::uint32_t>& prefix, std::size_t level, std::size_t target_level,
                 std::size_t cap, std::vector<Point>& out) const;

  Family family_;
  double base_;
  std::uint32_t branching_;
  double thin_dim_;
  std::size_t depth_cap_;
};

}  // namespace lipzoom
