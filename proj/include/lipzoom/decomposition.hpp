#pragma once

#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lipzoom/space.hpp"
#include "lipzoom/tree_space.hpp"

namespace lipzoom {

// Nested closed regions X = S_0 > S_1 > ... > S_k > S_{k+1} = empty. Layer i
// is S_i minus S_{i+1}.
class Decomposition {
 public:
  virtual ~Decomposition() = default;

  virtual const MetricSpace& space() const = 0;
  // k: the number of non-trivial regions.
  virtual int length() const = 0;
  // Largest i with x in S_i.
  virtual int layer_of(const Point& x) const = 0;
  bool in_set(int lambda, const Point& x) const { return layer_of(x) >= lambda; }

  // Uncovered point lying in one of the enabled layers. With a hint, the
  // caller promises every enabled point outside the hint is covered.
  virtual std::optional<Point> find_uncovered_in_layers(std::span<const Ball> balls,
                                                        const std::vector<bool>& layers,
                                                        const Ball* hint = nullptr) const = 0;
  std::optional<Point> find_uncovered_in_set(std::span<const Ball> balls, int lambda,
                                             const Ball* hint = nullptr) const;
  // Whether S_lambda meets the union of the balls.
  virtual bool set_meets_balls(int lambda, std::span<const Ball> balls) const = 0;

  virtual double dimension() const = 0;
  virtual json describe() const = 0;
};

using DecompositionPtr = std::shared_ptr<const Decomposition>;

// S_0 = X only.
class TrivialDecomposition : public Decomposition {
 public:
  TrivialDecomposition(SpacePtr space, double dimension);

  const MetricSpace& space() const override { return *space_; }
  int length() const override { return 0; }
  int layer_of(const Point&) const override { return 0; }
  std::optional<Point> find_uncovered_in_layers(std::span<const Ball> balls,
                                                const std::vector<bool>& layers,
                                                const Ball* hint = nullptr) const override;
  bool set_meets_balls(int lambda, std::span<const Ball> balls) const override;
  double dimension() const override { return dimension_; }
  json describe() const override;

 private:
  SpacePtr space_;
  double dimension_;
};

// Nested closed intervals S_1 > S_2 > ... of the unit interval.
class NestedIntervalDecomposition : public Decomposition {
 public:
  NestedIntervalDecomposition(std::shared_ptr<const IntervalSpace> space,
                              std::vector<std::pair<double, double>> regions, double dimension);

  const MetricSpace& space() const override { return *space_; }
  int length() const override { return static_cast<int>(regions_.size()); }
  int layer_of(const Point& x) const override;
  std::optional<Point> find_uncovered_in_layers(std::span<const Ball> balls,
                                                const std::vector<bool>& layers,
                                                const Ball* hint = nullptr) const override;
  bool set_meets_balls(int lambda, std::span<const Ball> balls) const override;
  double dimension() const override { return dimension_; }
  json describe() const override;

 private:
  // Grid index ranges of layer i.
  std::vector<std::pair<std::int64_t, std::int64_t>> layer_ranges(int layer) const;

  std::shared_ptr<const IntervalSpace> space_;
  std::vector<std::pair<double, double>> regions_;
  std::vector<std::pair<std::int64_t, std::int64_t>> grid_;
  double dimension_;
};

// Fat-subtree metric with S_1 the fat ends; layer 0 is the thin region.
class FatSubtreeDecomposition : public Decomposition {
 public:
  FatSubtreeDecomposition(std::shared_ptr<const TreeSpace> space, double dimension);

  const MetricSpace& space() const override { return *space_; }
  int length() const override { return 1; }
  int layer_of(const Point& x) const override { return space_->is_fat(x) ? 1 : 0; }
  std::optional<Point> find_uncovered_in_layers(std::span<const Ball> balls,
                                                const std::vector<bool>& layers,
                                                const Ball* hint = nullptr) const override;
  bool set_meets_balls(int lambda, std::span<const Ball> balls) const override;
  double dimension() const override { return dimension_; }
  json describe() const override;

 private:
  std::shared_ptr<const TreeSpace> space_;
  double dimension_;
};

}  // namespace lipzoom
