#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lipzoom/point.hpp"
#include "lipzoom/random.hpp"

namespace lipzoom {

using json = nlohmann::json;

// (delta, S): S is a delta-covering set with at most k points.
struct CoverSet {
  double delta = 1.0;
  std::vector<Point> points;
};

class WellOrder {
 public:
  virtual ~WellOrder() = default;
  virtual bool precedes(const Point& a, const Point& b) const = 0;
  // The order-maximal point covered by the closure of the balls.
  virtual std::optional<Point> ordering_oracle(std::span<const Ball> balls) const = 0;
};

class RankStructure {
 public:
  virtual ~RankStructure() = default;
  virtual int max_rank() const = 0;
  virtual int rank_of(const Point& p) const = 0;
  virtual CoverSet rank_covering_set(int rank, std::size_t k) const = 0;
};

class MetricSpace {
 public:
  virtual ~MetricSpace() = default;

  virtual PointKind point_kind() const = 0;
  virtual std::string name() const = 0;
  virtual double distance(const Point& x, const Point& y) const = 0;
  virtual double diameter() const { return 1.0; }
  virtual bool quasimetric() const { return false; }
  // Grid resolution for continuous spaces; 0 for spaces handled exactly.
  virtual double resolution() const = 0;
  virtual bool contains(const Point& p) const = 0;

  // Some point of the space lying in no ball, or nullopt if the balls cover
  // the space (exact up to the resolution).
  virtual std::optional<Point> find_uncovered(std::span<const Ball> balls) const = 0;
  // As find_uncovered, for callers that know every point outside `hint` is
  // covered; implementations may restrict the search to the hint.
  virtual std::optional<Point> find_uncovered_near(std::span<const Ball> balls,
                                                   const Ball& hint) const {
    (void)hint;
    return find_uncovered(balls);
  }

  // Greedy delta-net, lowest uncovered point first; nullopt if it exceeds cap.
  virtual std::optional<Net> greedy_net(double delta, std::size_t cap) const;

  virtual std::vector<Point> mesh(std::size_t target) const = 0;
  virtual Point sample(Rng& rng) const = 0;
  // Some y' != y with distance(y, y') < rho.
  virtual std::optional<Point> sample_near(const Point& y, double rho) const;
  // Points strictly inside the ball with pairwise distances > separation.
  virtual std::vector<Point> packing_in_ball(const Ball& ball, double separation,
                                             std::size_t cap) const;

  // Analytic metadata where known.
  virtual std::optional<double> covering_dimension() const { return std::nullopt; }
  virtual std::optional<double> max_min_covering_dimension() const { return std::nullopt; }
  // ln N_r when the covering number has a closed form.
  virtual std::optional<double> log_covering_number(double) const { return std::nullopt; }

  virtual const WellOrder* well_order() const { return nullptr; }
  virtual const RankStructure* ranks() const { return nullptr; }

  virtual json describe() const = 0;

  bool in_ball(const Ball& b, const Point& p) const {
    const double d = distance(b.center, p);
    return b.closed ? d <= b.radius : d < b.radius;
  }
  bool covered(std::span<const Ball> balls, const Point& p) const;
  void check_kind(const Point& p) const;
};

using SpacePtr = std::shared_ptr<const MetricSpace>;

// Covering oracle with the uncovered witness checked exactly against every ball.
struct CoverResult {
  bool covered = true;
  std::optional<Point> witness;
};
CoverResult covering_oracle(const MetricSpace& space, std::span<const Ball> balls);

// Smallest dyadic delta whose greedy net has at most k points.
CoverSet dyadic_covering_set(const MetricSpace& space, std::size_t k);

// [0,1] with distance |x-y|^p on a grid of resolution eta.
class IntervalSpace : public MetricSpace {
 public:
  explicit IntervalSpace(double exponent = 1.0, double eta = 0x1.0p-20);

  PointKind point_kind() const override { return PointKind::real1d; }
  std::string name() const override;
  double distance(const Point& x, const Point& y) const override;
  double resolution() const override { return eta_; }
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
  std::optional<double> covering_dimension() const override { return 1.0 / exponent_; }
  std::optional<double> max_min_covering_dimension() const override { return 1.0 / exponent_; }
  json describe() const override;

  double exponent() const { return exponent_; }
  std::int64_t grid_size() const { return cells_; }
  double grid_point(std::int64_t k) const { return static_cast<double>(k) * eta_; }
  double metric(double gap) const;
  // Coordinate half-width of a ball of metric radius r.
  double reach(double r) const;

  // Lowest uncovered grid index inside the union of the given closed index ranges.
  std::optional<std::int64_t> uncovered_in_ranges(
      std::span<const Ball> balls,
      std::span<const std::pair<std::int64_t, std::int64_t>> ranges) const;
  // Grid index range covered by a ball; empty when first > second.
  std::pair<std::int64_t, std::int64_t> grid_range(const Ball& b) const;

 private:
  double exponent_;
  double eta_;
  std::int64_t cells_;
};

// [0,1]^dim under the sup-norm on a per-axis grid of resolution eta.
class CubeSpace : public MetricSpace {
 public:
  explicit CubeSpace(int dim, double eta = 0x1.0p-10);

  PointKind point_kind() const override { return PointKind::realvec; }
  std::string name() const override;
  double distance(const Point& x, const Point& y) const override;
  double resolution() const override { return eta_; }
  bool contains(const Point& p) const override;
  std::optional<Point> find_uncovered(std::span<const Ball> balls) const override;
  std::optional<Net> greedy_net(double delta, std::size_t cap) const override;
  std::vector<Point> mesh(std::size_t target) const override;
  Point sample(Rng& rng) const override;
  std::optional<Point> sample_near(const Point& y, double rho) const override;
  std::optional<double> covering_dimension() const override { return dim_; }
  std::optional<double> max_min_covering_dimension() const override { return dim_; }
  json describe() const override;

  int dim() const { return dim_; }

 private:
  int dim_;
  double eta_;
  std::int64_t cells_;
};

// Finite space given by an explicit distance matrix. Index order doubles as
// the well-ordering; optional per-point Cantor-Bendixson ranks.
class FiniteSpace : public MetricSpace, public WellOrder, public RankStructure {
 public:
  FiniteSpace(std::vector<std::vector<double>> distances, std::string label = "finite",
              bool quasimetric = false);

  static std::shared_ptr<FiniteSpace> uniform(std::size_t n, double d = 1.0);

  PointKind point_kind() const override { return PointKind::index; }
  std::string name() const override { return label_; }
  double distance(const Point& x, const Point& y) const override;
  double diameter() const override { return diameter_; }
  bool quasimetric() const override { return quasimetric_; }
  double resolution() const override { return 0.0; }
  bool contains(const Point& p) const override;
  std::optional<Point> find_uncovered(std::span<const Ball> balls) const override;
  std::optional<Net> greedy_net(double delta, std::size_t cap) const override;
  std::vector<Point> mesh(std::size_t target) const override;
  Point sample(Rng& rng) const override;
  std::optional<Point> sample_near(const Point& y, double rho) const override;
  std::optional<double> covering_dimension() const override { return 0.0; }
  std::optional<double> max_min_covering_dimension() const override { return 0.0; }
  json describe() const override;

  const WellOrder* well_order() const override { return this; }
  const RankStructure* ranks() const override { return ranks_.empty() ? nullptr : this; }

  bool precedes(const Point& a, const Point& b) const override;
  std::optional<Point> ordering_oracle(std::span<const Ball> balls) const override;

  int max_rank() const override;
  int rank_of(const Point& p) const override;
  CoverSet rank_covering_set(int rank, std::size_t k) const override;

  void set_ranks(std::vector<int> ranks);
  std::size_t size() const { return d_.size(); }
  double dist(std::size_t i, std::size_t j) const { return d_[i][j]; }

 private:
  std::vector<std::vector<double>> d_;
  std::string label_;
  bool quasimetric_;
  double diameter_ = 0.0;
  std::vector<int> ranks_;
};

// {1, 1/2, ..., 1/m} U {0} with |x-y|. Index i < m is 1/(i+1); index m is 0.
// Order 1 < 1/2 < ... < 0; the limit point 0 has rank 1.
class SequenceSpace : public FiniteSpace {
 public:
  explicit SequenceSpace(std::size_t m);
  double value(std::size_t i) const { return i < m_ ? 1.0 / static_cast<double>(i + 1) : 0.0; }
  double value(const Point& p) const;
  std::size_t terms() const { return m_; }
  std::size_t limit_index() const { return m_; }
  json describe() const override;

 private:
  std::size_t m_;
};

}  // namespace lipzoom
