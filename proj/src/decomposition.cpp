#include "lipzoom/decomposition.hpp"

#include <algorithm>
#include <cmath>

namespace lipzoom {

std::optional<Point> Decomposition::find_uncovered_in_set(std::span<const Ball> balls, int lambda,
                                                          const Ball* hint) const {
  std::vector<bool> layers(static_cast<std::size_t>(length() + 1), false);
  for (int i = std::max(lambda, 0); i <= length(); ++i) layers[static_cast<std::size_t>(i)] = true;
  return find_uncovered_in_layers(balls, layers, hint);
}

// ------------------------------------------------------------------ trivial

TrivialDecomposition::TrivialDecomposition(SpacePtr space, double dimension)
    : space_(std::move(space)), dimension_(dimension) {}

std::optional<Point> TrivialDecomposition::find_uncovered_in_layers(std::span<const Ball> balls,
                                                                    const std::vector<bool>& layers,
                                                                    const Ball* hint) const {
  if (layers.empty() || !layers[0]) return std::nullopt;
  return hint ? space_->find_uncovered_near(balls, *hint) : space_->find_uncovered(balls);
}

bool TrivialDecomposition::set_meets_balls(int lambda, std::span<const Ball> balls) const {
  return lambda <= 0 && !balls.empty();
}

json TrivialDecomposition::describe() const {
  return {{"kind", "trivial"}, {"length", 0}, {"dimension", dimension_}};
}

// ---------------------------------------------------------- nested interval

NestedIntervalDecomposition::NestedIntervalDecomposition(
    std::shared_ptr<const IntervalSpace> space, std::vector<std::pair<double, double>> regions,
    double dimension)
    : space_(std::move(space)), regions_(std::move(regions)), dimension_(dimension) {
  const double eta = space_->resolution();
  std::pair<std::int64_t, std::int64_t> outer{0, space_->grid_size()};
  for (const auto& [a, b] : regions_) {
    if (!(0.0 <= a && a <= b && b <= 1.0)) throw ValidationError("region must be [a,b] in [0,1]");
    std::pair<std::int64_t, std::int64_t> g{static_cast<std::int64_t>(std::ceil(a / eta - 1e-9)),
                                            static_cast<std::int64_t>(std::floor(b / eta + 1e-9))};
    if (g.first > g.second) throw ValidationError("region contains no grid point");
    if (g.first < outer.first || g.second > outer.second || g == outer)
      throw ValidationError("regions must be strictly nested");
    grid_.push_back(g);
    outer = g;
  }
}

int NestedIntervalDecomposition::layer_of(const Point& x) const {
  space_->check_kind(x);
  const auto k = std::llround(std::get<double>(x) / space_->resolution());
  int layer = 0;
  for (std::size_t i = 0; i < grid_.size(); ++i)
    if (grid_[i].first <= k && k <= grid_[i].second) layer = static_cast<int>(i) + 1;
  return layer;
}

std::vector<std::pair<std::int64_t, std::int64_t>> NestedIntervalDecomposition::layer_ranges(
    int layer) const {
  const std::pair<std::int64_t, std::int64_t> outer =
      layer == 0 ? std::pair<std::int64_t, std::int64_t>{0, space_->grid_size()}
                 : grid_[static_cast<std::size_t>(layer - 1)];
  if (static_cast<std::size_t>(layer) == grid_.size()) return {outer};
  const auto& inner = grid_[static_cast<std::size_t>(layer)];
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  if (outer.first < inner.first) out.emplace_back(outer.first, inner.first - 1);
  if (inner.second < outer.second) out.emplace_back(inner.second + 1, outer.second);
  return out;
}

std::optional<Point> NestedIntervalDecomposition::find_uncovered_in_layers(
    std::span<const Ball> balls, const std::vector<bool>& layers, const Ball* hint) const {
  std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
  for (int i = 0; i <= length() && static_cast<std::size_t>(i) < layers.size(); ++i)
    if (layers[static_cast<std::size_t>(i)])
      for (const auto& r : layer_ranges(i)) ranges.push_back(r);
  if (hint) {
    const auto h = space_->grid_range(*hint);
    for (auto& r : ranges) r = {std::max(r.first, h.first), std::min(r.second, h.second)};
  }
  std::erase_if(ranges, [](const auto& r) { return r.first > r.second; });
  if (ranges.empty()) return std::nullopt;
  auto k = space_->uncovered_in_ranges(balls, ranges);
  if (!k) return std::nullopt;
  return Point{space_->grid_point(*k)};
}

bool NestedIntervalDecomposition::set_meets_balls(int lambda, std::span<const Ball> balls) const {
  if (lambda > length()) return false;
  const std::pair<std::int64_t, std::int64_t> region =
      lambda <= 0 ? std::pair<std::int64_t, std::int64_t>{0, space_->grid_size()}
                  : grid_[static_cast<std::size_t>(lambda - 1)];
  for (const auto& b : balls) {
    const auto r = space_->grid_range(b);
    if (std::max(r.first, region.first) <= std::min(r.second, region.second)) return true;
  }
  return false;
}

json NestedIntervalDecomposition::describe() const {
  json regions = json::array();
  for (const auto& [a, b] : regions_) regions.push_back({a, b});
  return {{"kind", "nested_interval"},
          {"length", length()},
          {"regions", regions},
          {"dimension", dimension_}};
}

// -------------------------------------------------------------- fat subtree

FatSubtreeDecomposition::FatSubtreeDecomposition(std::shared_ptr<const TreeSpace> space,
                                                 double dimension)
    : space_(std::move(space)), dimension_(dimension) {
  if (space_->family() != TreeSpace::Family::fat_subtree)
    throw ValidationError("fat-subtree decomposition needs the fat-subtree metric");
}

std::optional<Point> FatSubtreeDecomposition::find_uncovered_in_layers(
    std::span<const Ball> balls, const std::vector<bool>& layers, const Ball* hint) const {
  const bool thin = !layers.empty() && layers[0];
  const bool fat = layers.size() > 1 && layers[1];
  if (!thin && !fat) return std::nullopt;
  const auto region = thin && fat ? TreeSpace::Region::any
                      : thin      ? TreeSpace::Region::thin
                                  : TreeSpace::Region::fat;
  return space_->find_uncovered_in(balls, region, hint);
}

bool FatSubtreeDecomposition::set_meets_balls(int lambda, std::span<const Ball> balls) const {
  if (lambda <= 0) return !balls.empty();
  if (lambda > 1) return false;
  return std::any_of(balls.begin(), balls.end(), [&](const Ball& b) {
    return space_->region_meets_ball(TreeSpace::Region::fat, b);
  });
}

json FatSubtreeDecomposition::describe() const {
  return {{"kind", "fat_subtree"}, {"length", 1}, {"dimension", dimension_}};
}

}  // namespace lipzoom
