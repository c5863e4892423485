#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lipzoom/space.hpp"

namespace lipzoom {

struct BallNode {
  Point center;
  double radius = 1.0;
  int parent = -1;
  int depth = 0;
  bool expanded = false;
  std::vector<int> children;
};

struct ChildSpec {
  double radius = 0.0;
  std::vector<Point> centers;
};

// Rooted tree of nested, separated balls, stored to a finite depth and
// extended on demand. Extension is deterministic; it mutates the tree, so
// callers sharing a tree across threads must expand it up front.
class BallTree {
 public:
  using Expander = std::function<ChildSpec(const MetricSpace&, const BallNode&)>;

  BallTree(SpacePtr space, Point root_center, double root_radius, Expander expander,
           std::optional<double> strength = std::nullopt);

  const MetricSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  std::optional<double> strength() const { return strength_; }
  std::size_t size() const { return nodes_.size(); }
  const BallNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  int root() const { return 0; }

  // Expands the node if needed and returns its children.
  const std::vector<int>& expand(int id);
  // Expands every node above the given depth.
  void extend_to(int depth);
  // Expands a single root path, following `choose(node) -> child position`.
  std::vector<int> extend_path(int depth, const std::function<std::size_t(const BallTree&, int)>& choose);
  int depth() const;

  // Violations of the ball-tree axioms among the stored nodes; empty when valid.
  std::vector<std::string> validate() const;

 private:
  SpacePtr space_;
  Expander expander_;
  std::optional<double> strength_;
  std::vector<BallNode> nodes_;
};

// Two children per node: the parent center y and a nearby y' with
// radius 0.45 D(y, y').
BallTree build_ball_tree_binary(SpacePtr space, int depth,
                                std::optional<Point> root_center = std::nullopt);

// Children of radius r' from a 2r'-packing inside B(y, r/4), with r' searched
// over r/4, r/8, ... until the packing has max(2, ceil(r'^-d)) points.
BallTree build_ball_tree_strength(SpacePtr space, double d, int depth,
                                  std::optional<Point> root_center = std::nullopt);

}  // namespace lipzoom
