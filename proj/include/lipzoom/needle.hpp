#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lipzoom/ball_tree.hpp"
#include "lipzoom/environment.hpp"

namespace lipzoom {

using TreePtr = std::shared_ptr<BallTree>;

// min(r0 - D(x, x0), r0/2) inside B(x0, r0), zero outside.
double bump(const MetricSpace& space, const Point& center, double radius, const Point& x);

// Node path from the root following seeded per-node child choices, with
// optional overrides: a node mapped to -1 ends the path there.
std::vector<int> lineage_path(BallTree& tree, std::uint64_t seed, int depth,
                              const std::map<int, int>& overrides = {});

// 1/3 + (1/3) sum_{i>=1} F_{w_i} along a node path.
class BanditNeedle : public Environment {
 public:
  BanditNeedle(TreePtr tree, std::vector<int> path, NoiseModel noise = {},
               Feedback feedback = Feedback::bandit);
  // Lineage sampled from the seed, expanded to the truncation depth.
  static std::shared_ptr<BanditNeedle> sampled(TreePtr tree, std::uint64_t seed, int depth = 12,
                                               NoiseModel noise = {},
                                               Feedback feedback = Feedback::bandit);

  std::string name() const override { return "bandit_needle"; }
  double mu(const Point& x) const override;
  double mu_star() const override { return mu_star_; }
  std::optional<Point> optimum() const override;
  // Bound on the tail beyond the truncation depth: 4^-L / 9.
  double truncation_error() const override;
  const std::vector<int>& path() const { return path_; }
  const BallTree& tree() const { return *tree_; }

 protected:
  json parameters() const override;

 private:
  TreePtr tree_;
  std::vector<int> path_;
  double mu_star_;
};

// Bias schedule for the experts construction: delta_i for depth i >= 1.
struct BiasSchedule {
  enum class Kind { constant, inverse_sqrt2, explicit_list };
  Kind kind = Kind::constant;
  double value = 1.0 / 3.0;
  std::vector<double> list;

  double at(int depth) const;
  json describe() const;
};

// Random sign patterns over a binary ball-tree: pi = 1/2 + (1/3) sum sigma(w) F_w
// over all non-root nodes, with E[sigma(w)] = delta_i on the depth-i lineage
// node and 0 elsewhere. Signs are shared by all queries of one round.
class ExpertsNeedle : public Environment {
 public:
  ExpertsNeedle(TreePtr tree, std::uint64_t seed, int depth, BiasSchedule bias,
                std::map<int, int> overrides = {}, NoiseModel noise = {},
                Feedback feedback = Feedback::full);

  std::string name() const override { return "experts_needle"; }
  double mu(const Point& x) const override;
  double mu_star() const override { return mu_star_; }
  std::optional<Point> optimum() const override;
  double truncation_error() const override;
  void sample(std::uint64_t round, std::span<const Point> queries, std::span<double> out,
              Rng& rng) const override;

  // Realized payoff at x under the round's sign pattern.
  double realized(std::uint64_t round, const Point& x) const;
  double sign_bias(int node) const;
  const std::vector<int>& path() const { return path_; }
  const BallTree& tree() const { return *tree_; }
  int depth() const { return depth_; }

 protected:
  json parameters() const override;

 private:
  int sign(std::uint64_t round, int node) const;

  TreePtr tree_;
  std::uint64_t seed_;
  int depth_;
  BiasSchedule bias_;
  std::vector<int> path_;
  std::vector<double> node_bias_;
  double mu_star_;
};

// (eps, k)-ensemble built from the children of one node.
struct BanditEnsemble {
  double epsilon = 0.0;
  int node = 0;
  std::vector<Ball> regions;  // S_i = B(x_i, r)
  std::shared_ptr<BanditNeedle> base;
  std::vector<std::shared_ptr<BanditNeedle>> alternatives;
};

BanditEnsemble make_bandit_ensemble(TreePtr tree, int node, std::uint64_t seed, int depth = 12);

// (eps, delta, k)-ensemble built from the children of one lineage node.
struct ExpertsEnsemble {
  double epsilon = 0.0;
  double delta = 0.0;
  int node = 0;
  std::vector<Ball> regions;
  std::shared_ptr<ExpertsNeedle> base;
  std::vector<std::shared_ptr<ExpertsNeedle>> alternatives;
};

ExpertsEnsemble make_experts_ensemble(TreePtr tree, int node, std::uint64_t seed, int depth,
                                      BiasSchedule bias);

struct EnsembleCheck {
  std::size_t mesh_points = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Mesh of the space plus tree centers and points just inside and outside each region.
std::vector<Point> ensemble_mesh(const MetricSpace& space, const BallTree& tree,
                                 const std::vector<Ball>& regions, std::size_t target);

EnsembleCheck validate_bandit_ensemble(const BanditEnsemble& e, std::size_t mesh_target = 1000);
EnsembleCheck validate_experts_ensemble(const ExpertsEnsemble& e, std::size_t mesh_target = 1000);

// Lipschitz audit with pairs concentrated inside the tree's balls.
LipschitzAudit tree_lipschitz_audit(const BallTree& tree,
                                    const std::function<double(const Point&)>& f,
                                    double lipschitz, std::size_t pairs, std::uint64_t seed);

}  // namespace lipzoom
